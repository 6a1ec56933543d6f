#pragma once

#include <span>
#include <vector>

#include "core/simulate.hpp"

namespace lsfbm {

enum class CorrelogramKind { RawM, CenteredLnM };

/// Empirical second moments at integer lags, with divisor N at every lag.
struct Correlogram {
    CorrelogramKind kind = CorrelogramKind::RawM;
    double delta = 1.0;
    std::vector<long> lags;
    std::vector<double> values;
    long count = 0;
};

/// N^-1 sum_j M_j M_{j+k} at k = 0..max_lag.
Correlogram correlogram_M(const VolSeries& series, long max_lag);
/// Same at an explicit list of lags.
Correlogram correlogram_M(const VolSeries& series, std::span<const long> lags);

/// N^-1 sum_j (ln M_j - mu)(ln M_{j+k} - mu), mu the sample mean of ln M.
Correlogram correlogram_lnM(const VolSeries& series, long max_lag);
Correlogram correlogram_lnM(const VolSeries& series, std::span<const long> lags);

/// Mean of |ln M(t + tau) - ln M(t)|^q for each tau (integer multiples of delta).
std::vector<double> log_increment_moments(const VolSeries& series, double q, std::span<const double> taus);

struct ScalingFit {
    double q = 2.0;
    std::vector<double> taus;
    std::vector<double> m_hat;
    double H_hat = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

/// Slope of ln m_hat against ln tau, divided by q.
ScalingFit scaling_fit_from_moments(double q, std::span<const double> taus, std::span<const double> m_hat);
ScalingFit scaling_estimate_H(const VolSeries& series, double q, std::span<const double> taus);

/// Integer grid tau_min..tau_max in steps of delta.
std::vector<double> integer_tau_grid(double tau_min, double tau_max, double delta = 1.0);

}  // namespace lsfbm
