#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "core/gmm.hpp"
#include "core/simulate.hpp"

namespace lsfbm {

enum class McEstimator { GmmLnM, GmmM, Scaling };
enum class McProxy { Measure, RealizedVariance };

McEstimator parse_mc_estimator(const std::string& s);
std::string to_string(McEstimator e);
McProxy parse_mc_proxy(const std::string& s);

struct McCell {
    double H = 0.1;
    double lambda2 = 0.05;
};

struct McConfig {
    std::vector<McCell> cells;
    int reps = 50;
    double L = 16384.0;
    double T = 131072.0;
    double delta = 1.0;
    int subdivisions = 32;
    double sigma2 = 1.0;
    McEstimator estimator = McEstimator::GmmLnM;
    McProxy proxy = McProxy::RealizedVariance;
    GmmSpec gmm;
    double tau_min = 10.0;      // scaling estimator grid
    double tau_max = 500.0;
    std::uint64_t seed = 1;
    int threads = 1;
    double memory_cap_bytes = 4.0 * (1L << 30);

    void validate() const;
    /// Peak bytes for one cell: the shared sampler plus one working set per thread.
    double projected_memory_bytes() const;
    nlohmann::json to_json() const;
};

struct McReplication {
    std::size_t cell = 0;
    int rep = 0;
    std::uint64_t seed = 0;
    double H_hat = 0.0;
    double lambda2_hat = 0.0;
    double nu2_hat = 0.0;
    bool converged = false;
    std::string error;          // non-empty when the fit failed
};

struct McSummary {
    McCell cell;
    int ok = 0;
    int failed = 0;
    double mean_H = 0.0, sd_H = 0.0, rms_H = 0.0;
    double mean_lambda2 = 0.0, sd_lambda2 = 0.0, rms_lambda2 = 0.0;
    double mean_nu2 = 0.0, sd_nu2 = 0.0;
    int finite_nu2 = 0;
    double seconds = 0.0;
};

struct McResult {
    std::vector<McReplication> replications;
    std::vector<McSummary> summaries;
};

using McProgress = std::function<void(std::size_t cell, std::size_t cells, const McSummary&)>;

/// Replication r of every cell uses seed cfg.seed + r; results do not depend on cfg.threads.
McResult run_montecarlo(const McConfig& cfg, const McProgress& progress = {});

/// Simulates one replication and fits it, as done inside run_montecarlo.
McReplication run_replication(const OmegaSampler& sampler, const McConfig& cfg, std::uint64_t seed);

McSummary summarize(const McCell& cell, const std::vector<McReplication>& reps);

/// Number of worker threads: `requested` if > 0, else LSFBM_THREADS, else 1.
int resolve_threads(int requested);

}  // namespace lsfbm
