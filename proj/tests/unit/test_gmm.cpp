#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "core/error.hpp"
#include "core/gmm.hpp"
#include "core/kernels.hpp"
#include "core/simulate.hpp"

using namespace lsfbm;

TEST_SUITE("gmm") {

TEST_CASE("default lag set") {
    const std::vector<long> want{0, 1, 2, 4, 5, 8, 11, 16, 22, 32, 45, 64, 90, 128, 181, 256, 362, 512};
    CHECK(default_gmm_lags() == want);
    CHECK(default_gmm_lags(GmmMethod::M) == std::vector<long>(want.begin() + 1, want.end()));
    GmmSpec s;
    CHECK(s.resolved_lags() == want);
    s.method = GmmMethod::M;
    CHECK(s.resolved_lags().front() == 1);
    CHECK_NOTHROW(s.validate());
    s.method = GmmMethod::LnM;
    CHECK_NOTHROW(s.validate());
    s.lags = {0, 1, 1, 2};
    CHECK_THROWS_AS(s.validate(), Error);
    s.lags = {0, 1, 2};
    CHECK_THROWS_AS(s.validate(), Error);
    s.lags = {1, 2, 3, 4, 5};
    CHECK_THROWS_AS(s.validate(), Error);
}

TEST_CASE("lnM model function") {
    const double H = 0.1, nu2 = 1.0, A = (2 * H + 1) * (2 * H + 2);
    CHECK(model_corr_lnM(H, nu2, 2.0, 0.0, 1) == doctest::Approx(2.0 + kernels::dtilde_lnM(H, nu2, 1)).epsilon(1e-15));
    CHECK(model_corr_lnM(H, nu2, 2.0, 0.1, 0) == doctest::Approx(2.0 - nu2 / A + 0.1).epsilon(1e-15));
    // hand evaluation at n = 4
    const double p = 2 * H + 2;
    const double d4 = -nu2 * (std::pow(5.0, p) + std::pow(3.0, p) - 2 * std::pow(4.0, p)) / (2 * A);
    CHECK(model_corr_lnM(H, nu2, 2.0, 0.1, 4) == doctest::Approx(2.0 + d4).epsilon(1e-12));
    // anchored and literal forms differ by a constant only
    const double l2 = lambda2_from_nu2(H, nu2);
    const double c = model_corr_lnM(H, nu2, 2.0, 0.1, 0) - model_corr_lnM_anchored(H, l2, 2.0, 0.1, 0);
    for (long n : {1L, 7L, 100L})
        CHECK(model_corr_lnM(H, nu2, 2.0, 0.1, n) - model_corr_lnM_anchored(H, l2, 2.0, 0.1, n) == doctest::Approx(c).epsilon(1e-10));
}

TEST_CASE("M model function") {
    CHECK(model_corr_M(0.1, 0.03, 1.0, 5) == doctest::Approx(kernels::rtilde_M(0.1, 0.03, 5)).epsilon(1e-15));
    CHECK(model_corr_M(0.1, 0.03, 3.0, 0) == doctest::Approx(3.0 * 2.0 * kernels::f_of_z(0.1, 0.03, 1.0)).epsilon(1e-15));
}

TEST_CASE("Newey-West weight") {
    std::mt19937_64 eng(1);
    std::normal_distribution<double> normal;
    Eigen::MatrixXd u(500, 3);
    for (Eigen::Index i = 0; i < u.rows(); ++i)
        for (Eigen::Index j = 0; j < 3; ++j) u(i, j) = normal(eng) * (j + 1);
    const Eigen::MatrixXd S0 = u.transpose() * u / 500.0;
    CHECK((newey_west_weight(u, 0) - S0.inverse()).norm() < 1e-10 * S0.inverse().norm());

    const Eigen::MatrixXd ones = Eigen::MatrixXd::Constant(40, 1, 2.5);
    CHECK(newey_west_weight(ones, 0)(0, 0) == doctest::Approx(1.0 / 6.25).epsilon(1e-14));

    // AR(1): long-run variance (1 + rho) / (1 - rho) Var(x)
    const double rho = 0.5;
    const long n = 200000;
    Eigen::MatrixXd ar(n, 1);
    double x = 0.0;
    for (long t = 0; t < n; ++t) ar(t, 0) = x = rho * x + normal(eng);
    const double var = ar.squaredNorm() / n;
    const double lrv = newey_west_covariance(ar, 20)(0, 0);
    CHECK(lrv == doctest::Approx((1 + rho) / (1 - rho) * var).epsilon(0.1));

    CHECK_THROWS_AS(newey_west_weight(Eigen::MatrixXd::Zero(10, 2), 1), Error);
    // rank-deficient contributions use the pseudo-inverse
    Eigen::MatrixXd dup(300, 2);
    for (Eigen::Index i = 0; i < 300; ++i) dup(i, 0) = dup(i, 1) = normal(eng);
    const Eigen::MatrixXd W = newey_west_weight(dup, 2);
    CHECK(W.allFinite());
}

TEST_CASE("noiseless inversion of the lnM moments") {
    GmmSpec spec;
    spec.method = GmmMethod::LnM;
    for (double H : {0.05, 0.1, 0.2}) {
        const double nu2 = 1.0, K1 = 2.0, V1 = 0.1;
        std::vector<double> target;
        for (long n : spec.resolved_lags()) target.push_back(model_corr_lnM(H, nu2, K1, V1, n));
        const GmmFit f = fit_moments(target, spec);
        CHECK(f.H == doctest::Approx(H).epsilon(1e-4));
        CHECK(f.nu2 == doctest::Approx(nu2).epsilon(1e-4));
        CHECK(f.K1 == doctest::Approx(K1).epsilon(1e-4));
        CHECK(f.V1 == doctest::Approx(V1).epsilon(1e-4));
        CHECK(f.lambda2 == doctest::Approx(H * (1 - 2 * H) * nu2).epsilon(1e-4));
        CHECK(f.objective >= 0.0);
    }
}

TEST_CASE("noiseless inversion at the H = 0 boundary") {
    GmmSpec spec;
    std::vector<double> target;
    for (long n : spec.resolved_lags()) target.push_back(model_corr_lnM_anchored(0.0, 0.03, 0.5, 0.02, n));
    const GmmFit f = fit_moments(target, spec);
    CHECK(f.H < 1e-6);
    CHECK(f.lambda2 == doctest::Approx(0.03).epsilon(1e-4));
    CHECK(f.V1 == doctest::Approx(0.02).epsilon(1e-3));
    CHECK(f.to_json()["nu2"].is_null());
}

TEST_CASE("noiseless inversion of the M moments") {
    GmmSpec spec;
    spec.method = GmmMethod::M;
    const double H = 0.1, l2 = 0.05, K2 = 3.0;
    std::vector<double> target;
    for (long n : spec.resolved_lags()) target.push_back(model_corr_M(H, l2, K2, n));
    const GmmFit f = fit_moments(target, spec);
    CHECK(f.K2 == doctest::Approx(K2).epsilon(1e-6));
    CHECK(f.H == doctest::Approx(H).epsilon(1e-3));
    CHECK(f.lambda2 == doctest::Approx(l2).epsilon(1e-3));
}

TEST_CASE("fit on a simulated series") {
    SimConfig cfg;
    cfg.params.H = 0.1;
    cfg.params.lambda2 = 0.05;
    cfg.params.T = 8192.0;
    cfg.L = 4096.0;
    cfg.subdivisions = 8;
    cfg.seed = 3;
    const auto sim = simulate(cfg);
    GmmSpec spec;
    spec.lags = {0, 1, 2, 4, 8, 16, 32, 64, 128, 256};
    const GmmFit f = fit(sim.measure, spec);
    CHECK(f.H > 0.0);
    CHECK(f.H < 0.3);
    CHECK(f.hac_lag == 16);
    CHECK(f.steps == 2);
    CHECK(f.weight == "newey_west");
    const auto j = f.to_json();
    for (const char* key : {"method", "H", "nu2", "lambda2", "nuisance", "objective", "converged", "iterations", "lags", "hac_lag", "provenance"})
        CHECK(j.contains(key));
    CHECK(j["method"] == "gmm_lnM");
    CHECK(j["provenance"]["config"]["seed"] == 3);

    // scale invariance of the lnM fit
    VolSeries scaled = sim.measure;
    for (double& v : scaled.values) v *= 123.0;
    const GmmFit g = fit(scaled, spec);
    CHECK(g.H == doctest::Approx(f.H).epsilon(1e-7));
    CHECK(g.lambda2 == doctest::Approx(f.lambda2).epsilon(1e-7));
    CHECK(g.V1 == doctest::Approx(f.V1).epsilon(1e-6));

    // the M method on the same data
    spec.method = GmmMethod::M;
    const GmmFit m = fit(sim.measure, spec);
    CHECK(m.K2 > 0.0);
    CHECK(m.to_json()["nuisance"].contains("K2"));
}

TEST_CASE("series too short") {
    VolSeries s;
    s.values.assign(600, 1.0);
    for (std::size_t i = 0; i < s.values.size(); ++i) s.values[i] += 0.01 * (i % 7);
    CHECK_THROWS_AS(fit(s, GmmSpec{}), Error);
    try {
        fit(s, GmmSpec{});
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Data);
    }
}

TEST_CASE("method names") {
    CHECK(parse_gmm_method("gmm-lnm") == GmmMethod::LnM);
    CHECK(parse_gmm_method("gmm-m") == GmmMethod::M);
    CHECK(to_string(GmmMethod::M) == "gmm_M");
    CHECK_THROWS_AS(parse_gmm_method("ols"), Error);
}

}
