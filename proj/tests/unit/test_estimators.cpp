#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "core/error.hpp"
#include "core/estimators.hpp"
#include "core/kernels.hpp"

using namespace lsfbm;

namespace {

VolSeries series(std::vector<double> v, double delta = 1.0) {
    VolSeries s;
    s.delta = delta;
    s.values = std::move(v);
    return s;
}

}  // namespace

TEST_SUITE("estimators") {

TEST_CASE("raw correlogram uses divisor N") {
    const auto c = correlogram_M(series({1.0, 2.0, 3.0}), 1);
    CHECK(c.kind == CorrelogramKind::RawM);
    CHECK(c.count == 3);
    CHECK(c.values[0] == doctest::Approx(14.0 / 3.0));
    CHECK(c.values[1] == doctest::Approx(8.0 / 3.0));
    const auto flat = correlogram_M(series(std::vector<double>(50, 2.5)), 10);
    for (long k = 0; k <= 10; ++k) CHECK(flat.values[k] == doctest::Approx(2.5 * 2.5 * (50.0 - k) / 50.0));
    CHECK(flat.lags.front() == 0);
}

TEST_CASE("raw correlogram rejects short series and bad lags") {
    CHECK_THROWS_AS(correlogram_M(series({1.0, 2.0, 3.0}), 2), Error);
    CHECK_THROWS_AS(correlogram_M(series({}), 0), Error);
    const std::vector<long> unordered{0, 3, 2};
    CHECK_THROWS_AS(correlogram_M(series({1, 2, 3, 4, 5, 6}), unordered), Error);
}

TEST_CASE("centered log correlogram") {
    const double e = std::exp(1.0);
    const auto c = correlogram_lnM(series({e, e * e, e * e * e}), 1);
    CHECK(c.kind == CorrelogramKind::CenteredLnM);
    CHECK(std::abs(c.values[1]) < 1e-15);
    CHECK(c.values[0] == doctest::Approx(2.0 / 3.0));
    const auto flat = correlogram_lnM(series(std::vector<double>(20, 3.0)), 5);
    for (double v : flat.values) CHECK(std::abs(v) < 1e-28);
    CHECK_THROWS_AS(correlogram_lnM(series({1.0, -1.0, 2.0}), 0), Error);
}

TEST_CASE("scale properties") {
    std::mt19937_64 eng(3);
    std::lognormal_distribution<double> ln(0.0, 0.7);
    std::vector<double> v(400);
    for (double& x : v) x = ln(eng);
    std::vector<double> w = v;
    for (double& x : w) x *= 7.25;
    const auto a = correlogram_lnM(series(v), 30), b = correlogram_lnM(series(w), 30);
    for (std::size_t k = 0; k < a.values.size(); ++k) CHECK(b.values[k] == doctest::Approx(a.values[k]).epsilon(1e-10));
    const auto ma = correlogram_M(series(v), 30), mb = correlogram_M(series(w), 30);
    for (std::size_t k = 0; k < ma.values.size(); ++k) {
        CHECK(mb.values[k] == doctest::Approx(7.25 * 7.25 * ma.values[k]).epsilon(1e-13));
        CHECK(mb.values[k] / mb.values[0] == doctest::Approx(ma.values[k] / ma.values[0]).epsilon(1e-13));
    }
}

TEST_CASE("log increment moments") {
    const std::vector<double> taus{1.0, 2.0, 5.0};
    for (double m : log_increment_moments(series(std::vector<double>(30, 4.0)), 2.0, taus)) CHECK(m == 0.0);
    const auto m = log_increment_moments(series({1.0, std::exp(1.0), 1.0, std::exp(1.0)}), 2.0, std::vector<double>{1.0, 2.0});
    CHECK(m[0] == doctest::Approx(1.0));
    CHECK(m[1] == doctest::Approx(0.0));

    // iid log-normal cells: E (ln M_t+tau - ln M_t)^2 = 2 v
    std::mt19937_64 eng(9);
    const double v = 0.3;
    std::normal_distribution<double> normal(0.0, std::sqrt(v));
    std::vector<double> x(200000);
    for (double& y : x) y = std::exp(normal(eng));
    const auto iid = log_increment_moments(series(x), 2.0, std::vector<double>{1.0, 10.0, 100.0});
    for (double mm : iid) CHECK(mm == doctest::Approx(2.0 * v).epsilon(0.02));

    CHECK_THROWS_AS(log_increment_moments(series({1, 2, 3}), 2.0, std::vector<double>{1.5}), Error);
    CHECK_THROWS_AS(log_increment_moments(series({1, 2, 3}, 0.5), 2.0, std::vector<double>{0.75}), Error);
    CHECK_NOTHROW(log_increment_moments(series({1, 2, 3}, 0.5), 2.0, std::vector<double>{1.0}));
}

TEST_CASE("scaling fit on exact kernel moments reproduces the bias") {
    const double H = 0.1;
    ModelParams p;
    p.H = H;
    p.lambda2 = 0.05;
    p.T = 1e6;
    const auto taus = integer_tau_grid(10.0, 500.0);
    std::vector<double> m;
    for (double tau : taus) m.push_back(kernels::m_q(p, 2.0, tau, 1.0));
    const auto fit = scaling_fit_from_moments(2.0, taus, m);
    const double B = kernels::scaling_bias(H, 1.0, taus).slope;
    CHECK(std::abs(fit.H_hat - (H + 0.5 * B)) < 1e-6);
    CHECK(fit.r2 > 0.99);
}

TEST_CASE("scaling estimator on increments without cell smoothing") {
    // ln M = fBm sampled on the grid: increments have variance tau^2H exactly
    const double H = 0.3;
    const long n = 1 << 14;
    std::mt19937_64 eng(5);
    std::normal_distribution<double> normal;
    // fractional Gaussian noise autocovariance
    std::vector<double> c(n);
    for (long k = 0; k < n; ++k) {
        const double a = std::pow(k + 1.0, 2 * H), b = std::pow(std::abs(k - 1.0), 2 * H), d = std::pow(double(k), 2 * H);
        c[k] = 0.5 * (a + b - 2 * d);
    }
    const GaussianSampler fgn(c);
    std::vector<double> est;
    for (int r = 0; r < 20; ++r) {
        const auto inc = fgn.sample(100 + r);
        std::vector<double> vals(n);
        double level = 0.0;
        for (long i = 0; i < n; ++i) {
            level += inc[i];
            vals[i] = std::exp(level);
        }
        est.push_back(scaling_estimate_H(series(vals), 2.0, integer_tau_grid(1.0, 64.0)).H_hat);
    }
    double mean = 0.0;
    for (double e : est) mean += e / est.size();
    CHECK(mean == doctest::Approx(H).epsilon(0.05));
}

TEST_CASE("scaling fit errors") {
    CHECK_THROWS_AS(scaling_fit_from_moments(2.0, std::vector<double>{3.0}, std::vector<double>{1.0}), Error);
    CHECK_THROWS_AS(scaling_fit_from_moments(2.0, std::vector<double>{3.0, 3.0}, std::vector<double>{1.0, 2.0}), Error);
    CHECK_THROWS_AS(scaling_fit_from_moments(2.0, std::vector<double>{1.0, 3.0}, std::vector<double>{0.0, 2.0}), Error);
    CHECK(integer_tau_grid(10.0, 13.0) == std::vector<double>{10.0, 11.0, 12.0, 13.0});
}

}
