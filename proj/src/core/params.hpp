#pragma once

#include <limits>
#include <vector>

namespace lsfbm {

/// Below this roughness the kernels use their H = 0 (multifractal) forms.
inline constexpr double kZeroHurst = 1e-10;

/// Parameters of the log S-fBM measure.
///
/// The intermittency coefficient lambda2 is the primary amplitude parameter;
/// the log-volatility variance nu2 = lambda2 / (H (1 - 2H)) diverges at H = 0.
struct ModelParams {
    double H = 0.1;
    double lambda2 = 0.05;
    double T = 1.0;
    double sigma2 = 1.0;

    /// Throws lsfbm::Error(InvalidArgument) if any invariant is violated.
    void validate() const;

    bool is_multifractal() const noexcept { return H < kZeroHurst; }

    /// nu^2; +infinity at H = 0.
    double nu2() const noexcept;

    /// Mean m of the log-volatility such that E[exp(omega)] = sigma2; -infinity at H = 0.
    double log_mean() const noexcept;

    /// The variance-exponent scale K2 = nu2 / 2.
    double k2() const noexcept { return 0.5 * nu2(); }
};

/// lambda2 = H (1 - 2H) nu2. Returns 0 when H = 0 since nu2 is then undefined.
double lambda2_from_nu2(double H, double nu2) noexcept;
/// nu2 = lambda2 / (H (1 - 2H)); +infinity at H = 0.
double nu2_from_lambda2(double H, double lambda2) noexcept;

/// Lags (in units of the cell size) at which second moments are evaluated.
struct LagGrid {
    std::vector<double> lags;
    double delta = 1.0;

    void validate() const;
};

}  // namespace lsfbm
