#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "core/error.hpp"
#include "core/kernels.hpp"
#include "core/simulate.hpp"

using namespace lsfbm;

namespace {

SimConfig config(double H, double lambda2, double T, double L, int n, std::uint64_t seed = 1) {
    SimConfig c;
    c.params.H = H;
    c.params.lambda2 = lambda2;
    c.params.T = T;
    c.params.sigma2 = 1.0;
    c.L = L;
    c.delta = 1.0;
    c.subdivisions = n;
    c.seed = seed;
    return c;
}

struct MeanSe {
    double mean = 0.0;
    double se = 0.0;
};

MeanSe mean_se(const std::vector<double>& v) {
    const double n = static_cast<double>(v.size());
    const double m = std::accumulate(v.begin(), v.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return {m, std::sqrt(ss / (n - 1.0) / n)};
}

}  // namespace

TEST_SUITE("simulate") {

TEST_CASE("config validation") {
    auto c = config(0.1, 0.05, 100.0, 1.0, 4);
    CHECK_THROWS_AS(c.validate(), Error);  // L / delta < 2
    c.L = 10.5;
    CHECK_THROWS_AS(c.validate(), Error);
    c.L = 16.0;
    c.subdivisions = 0;
    CHECK_THROWS_AS(c.validate(), Error);
    c.subdivisions = 4;
    CHECK_NOTHROW(c.validate());
    c.max_fine_points = 32;
    CHECK_THROWS_AS(c.validate(), Error);
    try {
        c.validate();
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Resource);
    }
}

TEST_CASE("increment variances match nu2 tau^2H") {
    // Table-1 sized paths; tau measured in fine steps
    const auto cfg = config(0.1, 0.08, std::ldexp(1.0, 17), std::ldexp(1.0, 14), 32);
    const OmegaSampler sampler(cfg);
    const double dt = cfg.fine_dt();
    const int reps = 100;
    const long taus[3] = {1, 4, 16};
    std::vector<double> per_rep[3];
    for (int r = 0; r < reps; ++r) {
        const auto w = sampler.sample(1000 + r);
        for (int t = 0; t < 3; ++t) {
            double s = 0.0;
            const std::size_t count = w.size() - taus[t];
            for (std::size_t i = 0; i < count; ++i) s += (w[i + taus[t]] - w[i]) * (w[i + taus[t]] - w[i]);
            per_rep[t].push_back(s / count);
        }
    }
    for (int t = 0; t < 3; ++t) {
        const auto ms = mean_se(per_rep[t]);
        const double target = cfg.params.nu2() * std::pow(taus[t] * dt, 0.2);
        CHECK(std::abs(ms.mean - target) < 3.0 * ms.se);
    }
}

TEST_CASE("sample covariance over many short paths") {
    // N_fine = 2^10 here; the acceptance suite repeats this at 2^12
    const auto cfg = config(0.2, 0.05, 64.0, 64.0, 16);
    const GaussianSampler gauss([&] {
        std::vector<double> c(cfg.fine_points());
        for (std::size_t k = 0; k < c.size(); ++k) c[k] = kernels::cov_omega(cfg.params, k * cfg.fine_dt());
        return c;
    }());
    const int reps = 10000;
    for (long lag : {0L, 1L, 16L, 64L}) {
        std::vector<double> v;
        v.reserve(reps);
        for (int r = 0; r < reps; ++r) {
            std::vector<double> a, b;
            gauss.sample_pair(r, a, b);
            v.push_back(a[100] * a[100 + lag]);
        }
        const auto ms = mean_se(v);
        CHECK(std::abs(ms.mean - kernels::cov_omega(cfg.params, lag * cfg.fine_dt())) < 4.0 * ms.se);
    }
}

TEST_CASE("real and imaginary parts are uncorrelated") {
    std::vector<double> c(256);
    for (std::size_t k = 0; k < c.size(); ++k) c[k] = std::exp(-0.05 * k);
    const GaussianSampler gauss(c);
    std::vector<double> prod;
    for (int r = 0; r < 4000; ++r) {
        std::vector<double> a, b;
        gauss.sample_pair(r, a, b);
        prod.push_back(a[10] * b[10]);
    }
    const auto ms = mean_se(prod);
    CHECK(std::abs(ms.mean) < 4.0 * ms.se);
}

TEST_CASE("degenerate variance gives a constant path") {
    const auto cfg = config(0.1, 1e-16, 1024.0, 256.0, 8);
    const OmegaSampler sampler(cfg);
    const auto w = sampler.sample(5);
    double dev = 0.0;
    for (double x : w) dev = std::max(dev, std::abs(x - sampler.mean()));
    CHECK(dev < 1e-5);
    CHECK(sampler.mean() == doctest::Approx(cfg.params.log_mean()));
}

TEST_CASE("fixed seed is bit-identical, different seeds differ") {
    auto cfg = config(0.1, 0.08, 4096.0, 512.0, 8, 42);
    cfg.emit_price = true;
    const Simulation a = simulate(cfg), b = simulate(cfg);
    CHECK(a.measure.values == b.measure.values);
    CHECK(a.price->log_returns == b.price->log_returns);
    CHECK(a.rv->values == b.rv->values);
    cfg.seed = 43;
    CHECK(simulate(cfg).measure.values != a.measure.values);
    CHECK(sample_omega(config(0.1, 0.08, 4096.0, 64.0, 4, 9)) == sample_omega(config(0.1, 0.08, 4096.0, 64.0, 4, 9)));
    CHECK_THROWS_AS(sample_omega(config(0.0, 0.08, 4096.0, 64.0, 4)), Error);
}

TEST_CASE("multifractal sampler covariance at T / e") {
    const double T = 4096.0, l2 = 0.05, dt = 1.0;
    const long n = 4096;
    const long lag = std::lround(T / std::exp(1.0));
    const double var = kernels::cov_omega_mrm(l2, T, dt, 0.0);
    const double mean = -0.5 * var;
    std::vector<double> v;
    for (int r = 0; r < 200; ++r) {
        const auto w = sample_omega_mrm(l2, T, dt, dt, n, 77 + r);
        double s = 0.0;
        for (long i = 0; i + lag < n; ++i) s += (w[i] - mean) * (w[i + lag] - mean);
        v.push_back(s / (n - lag));
    }
    const auto ms = mean_se(v);
    CHECK(std::abs(ms.mean - l2 * std::log(T / lag)) < 3.0 * ms.se);
    CHECK(std::abs(ms.mean - l2) < 3.0 * ms.se + 1e-4);

    const auto flat = sample_omega_mrm(1e-14, T, dt, dt, 256, 3);
    for (double x : flat) CHECK(std::abs(x) < 1e-5);
    CHECK(sample_omega_mrm(l2, T, dt, dt, 512, 8) == sample_omega_mrm(l2, T, dt, dt, 512, 8));
}

TEST_CASE("H = 0 configurations use the multifractal kernel") {
    const auto cfg = config(0.0, 0.05, 1024.0, 256.0, 4);
    const OmegaSampler sampler(cfg);
    CHECK(sampler.mean() == doctest::Approx(-0.5 * kernels::cov_omega_mrm(0.05, 1024.0, 0.25, 0.0)));
    CHECK(sampler.sample(1).size() == 1024u);
}

TEST_CASE("build_measure") {
    auto cfg = config(0.1, 0.08, 1024.0, 16.0, 4);
    const double m = cfg.params.log_mean();
    const std::vector<double> flat(64, m);
    const auto s = build_measure(flat, cfg);
    REQUIRE(s.values.size() == 16u);
    for (double v : s.values) CHECK(v == doctest::Approx(std::exp(m)).epsilon(1e-14));

    cfg.subdivisions = 1;
    std::vector<double> w(16);
    for (int i = 0; i < 16; ++i) w[i] = 0.1 * i;
    const auto s1 = build_measure(w, cfg);
    for (int i = 0; i < 16; ++i) CHECK(s1.values[i] == std::exp(w[i]));
    CHECK_THROWS_AS(build_measure(std::vector<double>(10, 0.0), config(0.1, 0.08, 1024.0, 16.0, 4)), Error);
}

TEST_CASE("cell masses have mean sigma2 delta") {
    const auto cfg = config(0.1, 0.08, 1024.0, 1024.0, 8);
    const OmegaSampler sampler(cfg);
    std::vector<double> means;
    for (int r = 0; r < 200; ++r) {
        auto sim = build_measure(sampler.sample(r), cfg);
        means.push_back(std::accumulate(sim.values.begin(), sim.values.end(), 0.0) / sim.values.size());
    }
    const auto ms = mean_se(means);
    CHECK(std::abs(ms.mean - 1.0) < 3.0 * ms.se);
}

TEST_CASE("realized variance proxy converges to the measure") {
    auto mad_for = [](int n) {
        auto cfg = config(0.1, 0.02, 1024.0, 256.0, n);
        cfg.emit_price = true;
        const OmegaSampler sampler(cfg);
        double total = 0.0;
        long count = 0;
        for (int r = 0; r < 200; ++r) {
            cfg.seed = r;
            const auto w = sampler.sample(r);
            const auto m = build_measure(w, cfg);
            const auto pr = build_price_and_rv(w, cfg);
            for (std::size_t k = 0; k < m.values.size(); ++k) {
                total += std::abs(pr.rv.values[k] - m.values[k]) / m.values[k];
                ++count;
            }
        }
        return total / count;
    };
    const double m8 = mad_for(8), m16 = mad_for(16), m32 = mad_for(32), m64 = mad_for(64);
    MESSAGE("mean |RV - M| / M: n=8 " << m8 << ", n=16 " << m16 << ", n=32 " << m32 << ", n=64 " << m64);
    CHECK(m16 < m8);
    CHECK(m32 < m16);
    CHECK(m64 < m32);
    // chi-square floor E|chi2_32/32 - 1| = 0.1984 for constant volatility
    CHECK(m32 < 0.21);
}

TEST_CASE("constant volatility gives the chi-square law") {
    auto cfg = config(0.1, 0.08, 1024.0, 4096.0, 4);
    const double m = cfg.params.log_mean();
    const std::vector<double> flat(cfg.fine_points(), m);
    cfg.seed = 11;
    const auto pr = build_price_and_rv(flat, cfg);
    // RV / (e^m delta) ~ chi2_4 / 4: mean 1, variance 1/2
    std::vector<double> ratio;
    for (double v : pr.rv.values) ratio.push_back(v / std::exp(m));
    const auto ms = mean_se(ratio);
    CHECK(std::abs(ms.mean - 1.0) < 4.0 * ms.se);
    double var = 0.0;
    for (double r : ratio) var += (r - ms.mean) * (r - ms.mean);
    var /= ratio.size() - 1;
    CHECK(var == doctest::Approx(0.5).epsilon(0.1));
    // per-cell squared-return sums equal the proxy
    for (std::size_t k = 0; k < 8; ++k) {
        double s = 0.0;
        for (int i = 0; i < 4; ++i) s += pr.price.log_returns[k * 4 + i] * pr.price.log_returns[k * 4 + i];
        CHECK(s == doctest::Approx(pr.rv.values[k]).epsilon(1e-14));
    }
}

TEST_CASE("series validation") {
    VolSeries s;
    s.values = {1.0};
    CHECK_THROWS_AS(s.validate(), Error);
    s.values = {1.0, 0.0};
    CHECK_THROWS_AS(s.validate(), Error);
    s.values = {1.0, 2.0};
    CHECK_NOTHROW(s.validate());
}

}
