#include "core/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <random>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <fftw3.h>

#include "core/error.hpp"
#include "core/kernels.hpp"

namespace lsfbm {
namespace {

constexpr std::uint64_t kOmegaStream = 1;
constexpr std::uint64_t kPriceStream = 2;

std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

struct FftwBuffer {
    explicit FftwBuffer(long n) : data(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n))) {
        if (!data) throw Error(ErrorKind::Resource, "fftw_malloc failed");
    }
    ~FftwBuffer() { fftw_free(data); }
    FftwBuffer(const FftwBuffer&) = delete;
    FftwBuffer& operator=(const FftwBuffer&) = delete;
    fftw_complex* data;
};

std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t tag) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(tag), static_cast<std::uint32_t>(tag >> 32)};
    return std::mt19937_64(seq);
}

}  // namespace

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t tag) {
    std::mt19937_64 eng = make_engine(seed, tag);
    return eng();
}

void SimConfig::validate() const {
    params.validate();
    if (!(delta > 0.0) || !std::isfinite(delta)) throw_invalid("delta must be positive");
    if (!(L > 0.0) || !std::isfinite(L)) throw_invalid("L must be positive");
    const double ratio = L / delta;
    if (std::abs(ratio - std::round(ratio)) > 1e-9 * std::max(1.0, ratio))
        throw_invalid("L / delta must be an integer");
    if (std::llround(ratio) < 2) throw_invalid("L / delta must be at least 2");
    if (subdivisions < 1) throw_invalid("subdivisions must be >= 1");
    if (params.is_multifractal() && !(fine_dt() < params.T))
        throw_invalid("fine step must be smaller than T for H = 0");
    if (static_cast<double>(std::llround(ratio)) * subdivisions > static_cast<double>(max_fine_points)) {
        std::ostringstream os;
        os << "fine grid of " << std::llround(ratio) * static_cast<long long>(subdivisions)
           << " points exceeds the cap of " << max_fine_points;
        throw Error(ErrorKind::Resource, os.str());
    }
}

long SimConfig::cells() const { return static_cast<long>(std::llround(L / delta)); }

nlohmann::json SimConfig::to_json() const {
    return {{"H", params.H},         {"lambda2", params.lambda2}, {"T", params.T},
            {"sigma2", params.sigma2}, {"L", L},                  {"delta", delta},
            {"subdivisions", subdivisions}, {"seed", seed},       {"emit_price", emit_price}};
}

void VolSeries::validate() const {
    if (values.size() < 2) throw_data("series needs at least two observations");
    if (!(delta > 0.0)) throw_invalid("series delta must be positive");
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!(values[i] > 0.0) || !std::isfinite(values[i]))
            throw_data("series value at index " + std::to_string(i) + " is not strictly positive");
    }
}

GaussianSampler::GaussianSampler(const std::vector<double>& autocov, long max_cholesky) {
    n_ = static_cast<long>(autocov.size());
    if (n_ < 1) throw_invalid("GaussianSampler: empty covariance");
    m_ = std::max(2 * (n_ - 1), 1L);
    init([&](long k) { return autocov[k]; }, max_cholesky);
}

GaussianSampler::GaussianSampler(const std::function<double(long)>& cov_at_lag, long n, long max_cholesky) {
    n_ = n;
    if (n_ < 1) throw_invalid("GaussianSampler: empty covariance");
    m_ = 1;
    while (m_ < 2 * (n_ - 1)) m_ *= 2;
    init(cov_at_lag, max_cholesky);
}

void GaussianSampler::init(const std::function<double(long)>& cov_at_lag, long max_cholesky) {
    const double c0 = cov_at_lag(0);
    if (!(c0 >= 0.0)) throw_invalid("GaussianSampler: negative variance");

    FftwBuffer in(m_), out(m_);
    {
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        plan_ = fftw_plan_dft_1d(static_cast<int>(m_), in.data, out.data, FFTW_FORWARD, FFTW_ESTIMATE);
    }
    if (!plan_) throw Error(ErrorKind::Resource, "FFTW plan creation failed");
    for (long j = 0; j < m_; ++j) {
        in.data[j][0] = j == 0 ? c0 : cov_at_lag(std::min(j, m_ - j));
        in.data[j][1] = 0.0;
    }
    fftw_execute_dft(static_cast<fftw_plan>(plan_), in.data, out.data);

    double max_eig = 0.0, min_eig = 0.0;
    for (long k = 0; k < m_; ++k) {
        max_eig = std::max(max_eig, out.data[k][0]);
        min_eig = std::min(min_eig, out.data[k][0]);
    }
    if (min_eig >= -1e-8 * max_eig) {
        sqrt_eig_.resize(m_);
        for (long k = 0; k < m_; ++k)
            sqrt_eig_[k] = std::sqrt(std::max(out.data[k][0], 0.0) / static_cast<double>(m_));
        return;
    }
    if (n_ > max_cholesky) {
        std::ostringstream os;
        os << "circulant embedding is not nonnegative (most negative eigenvalue " << min_eig
           << ", largest " << max_eig << ") and N = " << n_ << " is too large for the Cholesky fallback";
        throw_numerical(os.str());
    }
    Eigen::MatrixXd cov(n_, n_);
    for (long i = 0; i < n_; ++i)
        for (long j = 0; j < n_; ++j) cov(i, j) = cov_at_lag(std::abs(i - j));
    cov.diagonal().array() += 1e-12 * std::max(c0, 1.0);
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) {
        std::ostringstream os;
        os << "covariance is not positive definite: circulant embedding gave eigenvalue " << min_eig
           << " and the Cholesky fallback failed";
        throw_numerical(os.str());
    }
    Eigen::MatrixXd lower = llt.matrixL();
    chol_.resize(static_cast<std::size_t>(n_ * n_));
    for (long i = 0; i < n_; ++i)
        for (long j = 0; j < n_; ++j) chol_[i * n_ + j] = lower(i, j);
}

GaussianSampler::~GaussianSampler() {
    if (plan_) {
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        fftw_destroy_plan(static_cast<fftw_plan>(plan_));
    }
}

void GaussianSampler::sample_pair(std::uint64_t seed, std::vector<double>& a, std::vector<double>& b) const {
    std::mt19937_64 eng = make_engine(seed, 0);
    std::normal_distribution<double> normal;
    a.assign(n_, 0.0);
    b.assign(n_, 0.0);
    if (!chol_.empty()) {
        std::vector<double> za(n_), zb(n_);
        for (long i = 0; i < n_; ++i) {
            za[i] = normal(eng);
            zb[i] = normal(eng);
        }
        for (long i = 0; i < n_; ++i) {
            const double* row = &chol_[i * n_];
            double sa = 0.0, sb = 0.0;
            for (long j = 0; j <= i; ++j) {
                sa += row[j] * za[j];
                sb += row[j] * zb[j];
            }
            a[i] = sa;
            b[i] = sb;
        }
        return;
    }
    FftwBuffer in(m_), out(m_);
    for (long k = 0; k < m_; ++k) {
        in.data[k][0] = sqrt_eig_[k] * normal(eng);
        in.data[k][1] = sqrt_eig_[k] * normal(eng);
    }
    fftw_execute_dft(static_cast<fftw_plan>(plan_), in.data, out.data);
    for (long j = 0; j < n_; ++j) {
        a[j] = out.data[j][0];
        b[j] = out.data[j][1];
    }
}

std::vector<double> GaussianSampler::sample(std::uint64_t seed) const {
    std::vector<double> a, b;
    sample_pair(seed, a, b);
    return a;
}

OmegaSampler::OmegaSampler(const SimConfig& cfg) : cfg_(cfg) {
    cfg_.validate();
    const ModelParams& p = cfg_.params;
    const long n = cfg_.fine_points();
    const double dt = cfg_.fine_dt();
    std::function<double(long)> cov;
    if (p.is_multifractal()) {
        cov = [&](long k) { return kernels::cov_omega_mrm(p.lambda2, p.T, dt, k * dt); };
        mean_ = std::log(p.sigma2) - 0.5 * cov(0);
    } else {
        cov = [&](long k) { return kernels::cov_omega(p, k * dt); };
        mean_ = p.log_mean();
    }
    gauss_ = std::make_unique<GaussianSampler>(cov, n);
}

std::vector<double> OmegaSampler::sample(std::uint64_t seed) const {
    std::vector<double> path = gauss_->sample(stream_seed(seed, kOmegaStream));
    for (double& x : path) x += mean_;
    return path;
}

std::vector<double> sample_omega(const SimConfig& cfg) {
    if (cfg.params.is_multifractal()) throw_invalid("sample_omega requires H > 0; use sample_omega_mrm");
    return OmegaSampler(cfg).sample(cfg.seed);
}

std::vector<double> sample_omega_mrm(double lambda2, double T, double ell, double dt, long n,
                                     std::uint64_t seed, double sigma2) {
    if (!(dt > 0.0)) throw_invalid("sample_omega_mrm: dt must be positive");
    if (n < 1) throw_invalid("sample_omega_mrm: need at least one point");
    if (!(sigma2 > 0.0)) throw_invalid("sample_omega_mrm: sigma2 must be positive");
    const auto cov = [&](long k) { return kernels::cov_omega_mrm(lambda2, T, ell, k * dt); };
    const double mean = std::log(sigma2) - 0.5 * cov(0);
    GaussianSampler gauss(cov, n);
    std::vector<double> path = gauss.sample(stream_seed(seed, kOmegaStream));
    for (double& x : path) x += mean;
    return path;
}

VolSeries build_measure(const std::vector<double>& omega, const SimConfig& cfg) {
    const long n = cfg.subdivisions;
    if (n < 1 || omega.size() % static_cast<std::size_t>(n) != 0)
        throw_invalid("build_measure: path length must be a multiple of subdivisions");
    const double dt = cfg.fine_dt();
    VolSeries out;
    out.delta = cfg.delta;
    out.values.resize(omega.size() / n);
    for (std::size_t k = 0; k < out.values.size(); ++k) {
        double s = 0.0;
        for (long i = 0; i < n; ++i) s += std::exp(omega[k * n + i]);
        out.values[k] = s * dt;
    }
    out.meta = {{"source", "simulation"}, {"kind", "measure"}, {"config", cfg.to_json()}};
    return out;
}

PriceAndRv build_price_and_rv(const std::vector<double>& omega, const SimConfig& cfg) {
    const long n = cfg.subdivisions;
    if (n < 1 || omega.size() % static_cast<std::size_t>(n) != 0)
        throw_invalid("build_price_and_rv: path length must be a multiple of subdivisions");
    const double dt = cfg.fine_dt();
    std::mt19937_64 eng = make_engine(stream_seed(cfg.seed, kPriceStream), 0);
    std::normal_distribution<double> normal;
    PriceAndRv out;
    out.price.fine_dt = dt;
    out.price.log_returns.resize(omega.size());
    out.rv.delta = cfg.delta;
    out.rv.values.assign(omega.size() / n, 0.0);
    for (std::size_t i = 0; i < omega.size(); ++i) {
        const double r = std::sqrt(std::exp(omega[i]) * dt) * normal(eng);
        out.price.log_returns[i] = r;
        out.rv.values[i / n] += r * r;
    }
    out.rv.meta = {{"source", "simulation"}, {"kind", "realized_variance"}, {"config", cfg.to_json()}};
    return out;
}

Simulation simulate(const OmegaSampler& sampler, std::uint64_t seed) {
    SimConfig cfg = sampler.config();
    cfg.seed = seed;
    const std::vector<double> omega = sampler.sample(seed);
    Simulation sim;
    sim.measure = build_measure(omega, cfg);
    if (cfg.emit_price) {
        PriceAndRv pr = build_price_and_rv(omega, cfg);
        sim.price = std::move(pr.price);
        sim.rv = std::move(pr.rv);
    }
    return sim;
}

Simulation simulate(const SimConfig& cfg) { return simulate(OmegaSampler(cfg), cfg.seed); }

}  // namespace lsfbm
