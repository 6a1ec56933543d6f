#include <doctest.h>

#include <cmath>

#include "core/error.hpp"
#include "core/optimize.hpp"

using namespace lsfbm;

TEST_SUITE("optimize") {

TEST_CASE("unconstrained Rosenbrock") {
    const Objective f = [](const Eigen::VectorXd& x) {
        return 100.0 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1.0 - x[0], 2);
    };
    Eigen::VectorXd lo = Eigen::VectorXd::Constant(2, -10.0), hi = Eigen::VectorXd::Constant(2, 10.0);
    Eigen::VectorXd x0(2);
    x0 << -1.2, 1.0;
    MinimizeOptions opt;
    opt.max_iter = 2000;
    const auto r = minimize_box(f, x0, lo, hi, opt);
    CHECK(r.converged);
    CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(r.x[1] == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("solution on a bound") {
    const Objective f = [](const Eigen::VectorXd& x) { return std::pow(x[0] + 1.0, 2) + std::pow(x[1] - 0.3, 2); };
    Eigen::VectorXd lo(2), hi(2), x0(2);
    lo << 0.0, 0.0;
    hi << 1.0, 1.0;
    x0 << 0.5, 0.9;
    const auto r = minimize_box(f, x0, lo, hi);
    CHECK(r.converged);
    CHECK(r.x[0] == 0.0);
    CHECK(r.x[1] == doctest::Approx(0.3).epsilon(1e-6));
    CHECK(r.f == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("start outside the box is projected") {
    const Objective f = [](const Eigen::VectorXd& x) { return (x.array() - 2.0).square().sum(); };
    Eigen::VectorXd lo = Eigen::VectorXd::Zero(3), hi = Eigen::VectorXd::Ones(3), x0 = Eigen::VectorXd::Constant(3, 5.0);
    const auto r = minimize_box(f, x0, lo, hi);
    CHECK((r.x.array() == 1.0).all());
}

TEST_CASE("numerical gradient agrees with a finer step and with the analytic one") {
    const Objective f = [](const Eigen::VectorXd& x) { return std::sin(x[0]) * std::exp(0.3 * x[1]) + x[0] * x[1] * x[1]; };
    Eigen::VectorXd x(2), lo = Eigen::VectorXd::Constant(2, -5.0), hi = Eigen::VectorXd::Constant(2, 5.0);
    x << 0.7, -1.3;
    MinimizeOptions coarse, fine;
    fine.rel_step = 1e-8;
    const auto g1 = numerical_gradient(f, x, lo, hi, coarse);
    const auto g2 = numerical_gradient(f, x, lo, hi, fine);
    const double ga = std::cos(0.7) * std::exp(-0.39) + 1.69;
    const double gb = 0.3 * std::sin(0.7) * std::exp(-0.39) + 2 * 0.7 * -1.3;
    CHECK((g1 - g2).norm() < 1e-6);
    CHECK(g1[0] == doctest::Approx(ga).epsilon(1e-8));
    CHECK(g1[1] == doctest::Approx(gb).epsilon(1e-8));
    // at a bound the difference is one-sided and stays inside the box
    x << 5.0, 0.0;
    const auto gb1 = numerical_gradient(f, x, lo, hi, coarse);
    CHECK(gb1[0] == doctest::Approx(std::cos(5.0)).epsilon(1e-4));
}

TEST_CASE("argument checks") {
    const Objective f = [](const Eigen::VectorXd& x) { return x.squaredNorm(); };
    Eigen::VectorXd lo = Eigen::VectorXd::Ones(2), hi = Eigen::VectorXd::Zero(2);
    CHECK_THROWS_AS(minimize_box(f, Eigen::VectorXd::Zero(2), lo, hi), Error);
    CHECK_THROWS_AS(minimize_box(f, Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(3), Eigen::VectorXd::Ones(3)), Error);
}

}
