#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include <json.hpp>

#include "core/params.hpp"

namespace lsfbm {

/// Default cap on the fine grid size (number of samples of omega).
inline constexpr long kDefaultMaxFinePoints = 1L << 24;

struct SimConfig {
    ModelParams params;
    double L = 16384.0;      // observation length, in the time unit of params.T
    double delta = 1.0;      // coarse cell size
    int subdivisions = 32;   // fine steps per cell
    std::uint64_t seed = 0;
    bool emit_price = false;
    long max_fine_points = kDefaultMaxFinePoints;

    void validate() const;
    long cells() const;
    long fine_points() const { return cells() * subdivisions; }
    double fine_dt() const { return delta / subdivisions; }
    nlohmann::json to_json() const;
};

/// Equally spaced integrated-variance observations.
struct VolSeries {
    double delta = 1.0;
    std::vector<double> values;
    nlohmann::json meta = nlohmann::json::object();

    /// Throws Error(Data) unless there are >= 2 strictly positive finite values.
    void validate() const;
};

struct PricePath {
    double fine_dt = 0.0;
    std::vector<double> log_returns;
};

/// Exact sampler for a stationary Gaussian sequence with autocovariance c[0..N-1],
/// by circulant embedding. One instance can be shared across threads.
class GaussianSampler {
public:
    /// Embedding of size 2(N - 1) built from c[0..N-1] alone.
    explicit GaussianSampler(const std::vector<double>& autocov, long max_cholesky = 4096);
    /// Embedding of power-of-two size M >= 2(N - 1), using cov_at_lag(k) for k <= M / 2.
    GaussianSampler(const std::function<double(long)>& cov_at_lag, long n, long max_cholesky = 4096);
    ~GaussianSampler();
    GaussianSampler(const GaussianSampler&) = delete;
    GaussianSampler& operator=(const GaussianSampler&) = delete;

    long size() const { return n_; }
    bool uses_cholesky() const { return !chol_.empty(); }
    /// Two independent zero-mean paths from one draw.
    void sample_pair(std::uint64_t seed, std::vector<double>& a, std::vector<double>& b) const;
    std::vector<double> sample(std::uint64_t seed) const;

private:
    void init(const std::function<double(long)>& cov_at_lag, long max_cholesky);
    long n_ = 0;
    long m_ = 0;
    std::vector<double> sqrt_eig_;   // sqrt(lambda_k / m)
    std::vector<double> chol_;       // dense lower factor, row-major, when embedding fails
    void* plan_ = nullptr;
};

/// Mean of omega and the sampler for the fine grid of cfg (S-fBM kernel, or the
/// regularized multifractal kernel with ell = fine step when H = 0).
class OmegaSampler {
public:
    explicit OmegaSampler(const SimConfig& cfg);
    const SimConfig& config() const { return cfg_; }
    double mean() const { return mean_; }
    std::vector<double> sample(std::uint64_t seed) const;

private:
    SimConfig cfg_;
    double mean_ = 0.0;
    std::unique_ptr<GaussianSampler> gauss_;
};

/// Fine-grid omega for H > 0.
std::vector<double> sample_omega(const SimConfig& cfg);
/// Fine-grid omega for the multifractal kernel with cutoff ell on n points spaced dt.
std::vector<double> sample_omega_mrm(double lambda2, double T, double ell, double dt, long n,
                                     std::uint64_t seed, double sigma2 = 1.0);

/// Cell masses sum_i exp(omega_i) * fine_dt over each cell.
VolSeries build_measure(const std::vector<double>& omega, const SimConfig& cfg);

struct PriceAndRv {
    PricePath price;
    VolSeries rv;
};

/// Fine returns sqrt(exp(omega_i) dt) xi_i and their per-cell realized variance.
PriceAndRv build_price_and_rv(const std::vector<double>& omega, const SimConfig& cfg);

struct Simulation {
    VolSeries measure;
    std::optional<PricePath> price;
    std::optional<VolSeries> rv;
};

/// One replication with seed cfg.seed, using a prepared sampler.
Simulation simulate(const OmegaSampler& sampler, std::uint64_t seed);
Simulation simulate(const SimConfig& cfg);

/// Seed for stream `tag` of replication seed `seed`.
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t tag);

}  // namespace lsfbm
