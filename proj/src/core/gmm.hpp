#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "core/estimators.hpp"

namespace lsfbm {

enum class GmmMethod { M, LnM };

std::string to_string(GmmMethod m);
GmmMethod parse_gmm_method(const std::string& s);

/// floor(sqrt(2^k)), k = 0..18, deduplicated; the lnM set is preceded by lag 0.
std::vector<long> default_gmm_lags(GmmMethod m = GmmMethod::LnM);

struct GmmSpec {
    GmmMethod method = GmmMethod::LnM;
    std::vector<long> lags;     // empty: default_gmm_lags(method)
    long hac_lag = -1;          // < 0: floor(N^(1/3))
    double H_max = 0.499;
    double lambda2_max = 5.0;
    int restarts = 3;
    bool iterate = false;       // iterated instead of two-step GMM
    int max_iterations = 400;

    void validate() const;
    std::vector<long> resolved_lags() const { return lags.empty() ? default_gmm_lags(method) : lags; }
};

/// Parameter vector of the lnM model: (H, lambda2, K1', V1) where K1' = K1 + dtilde(0).
/// Of the M model: (H, lambda2, K2).
struct GmmFit {
    GmmMethod method = GmmMethod::LnM;
    double H = 0.0;
    double lambda2 = 0.0;
    double nu2 = 0.0;           // +inf at H = 0
    double K1 = 0.0;            // lnM: constant of the literal dtilde convention (NaN at H = 0)
    double K1_anchored = 0.0;   // lnM: model value at lag 0 minus V1
    double V1 = 0.0;
    double K2 = 0.0;            // M: scale of rtilde
    double objective = 0.0;
    bool converged = false;
    int iterations = 0;
    int steps = 0;
    std::vector<long> lags;
    long hac_lag = 0;
    std::string weight = "identity";
    Eigen::MatrixXd weight_matrix;
    nlohmann::json provenance = nlohmann::json::object();

    nlohmann::json to_json() const;
};

/// K1 + dtilde(n) + V1 [n = 0] in the literal convention; requires H > 0.
double model_corr_lnM(double H, double nu2, double K1, double V1, long n, double delta = 1.0);
/// Same model in the anchored form K1' + (dtilde(n) - dtilde(0)) + V1 [n = 0], valid down to H = 0.
double model_corr_lnM_anchored(double H, double lambda2, double K1a, double V1, long n, double delta = 1.0);
/// K2 rtilde(n) with lags in units of delta.
double model_corr_M(double H, double lambda2, double K2, long n, double delta = 1.0);

/// Inverse (pseudo-inverse, relative cutoff 1e-10) of the Bartlett long-run covariance of
/// the rows of `contributions` (rows are time, columns are moments).
Eigen::MatrixXd newey_west_weight(const Eigen::MatrixXd& contributions, long hac_lag);
/// The long-run covariance itself.
Eigen::MatrixXd newey_west_covariance(const Eigen::MatrixXd& contributions, long hac_lag);

GmmFit fit(const VolSeries& series, const GmmSpec& spec);

/// Fit against given correlogram values at spec.lags with a fixed weight (identity when empty).
GmmFit fit_moments(std::span<const double> values, const GmmSpec& spec, double delta = 1.0,
                   const Eigen::MatrixXd& weight = Eigen::MatrixXd(), double H0 = -1.0);

}  // namespace lsfbm
