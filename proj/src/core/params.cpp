#include "core/params.hpp"

#include <cmath>
#include <string>

#include "core/error.hpp"

namespace lsfbm {

void ModelParams::validate() const {
    if (!(H >= 0.0 && H < 0.5)) throw_invalid("H must lie in [0, 0.5), got " + std::to_string(H));
    if (!(lambda2 > 0.0) || !std::isfinite(lambda2))
        throw_invalid("lambda2 must be positive, got " + std::to_string(lambda2));
    if (!(T > 0.0) || !std::isfinite(T)) throw_invalid("T must be positive, got " + std::to_string(T));
    if (!(sigma2 > 0.0) || !std::isfinite(sigma2))
        throw_invalid("sigma2 must be positive, got " + std::to_string(sigma2));
}

double ModelParams::nu2() const noexcept { return nu2_from_lambda2(H, lambda2); }

double ModelParams::log_mean() const noexcept {
    if (is_multifractal()) return -std::numeric_limits<double>::infinity();
    // E[exp(omega)] = sigma2 with Var(omega) = (nu2 / 2) T^(2H).
    return std::log(sigma2) - 0.25 * nu2() * std::pow(T, 2.0 * H);
}

double lambda2_from_nu2(double H, double nu2) noexcept {
    if (H < kZeroHurst) return 0.0;
    return H * (1.0 - 2.0 * H) * nu2;
}

double nu2_from_lambda2(double H, double lambda2) noexcept {
    if (H < kZeroHurst) return std::numeric_limits<double>::infinity();
    return lambda2 / (H * (1.0 - 2.0 * H));
}

void LagGrid::validate() const {
    if (!(delta > 0.0)) throw_invalid("LagGrid: delta must be positive");
    for (std::size_t i = 0; i < lags.size(); ++i) {
        if (lags[i] < 0.0) throw_invalid("LagGrid: lags must be nonnegative");
        if (i > 0 && !(lags[i] > lags[i - 1])) throw_invalid("LagGrid: lags must be strictly increasing");
    }
}

}  // namespace lsfbm
