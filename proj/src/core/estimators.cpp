#include "core/estimators.hpp"

#include <cmath>
#include <string>

#include "core/error.hpp"

namespace lsfbm {
namespace {

void check_lags(std::span<const long> lags, std::size_t n) {
    if (lags.empty()) throw_invalid("correlogram: no lags requested");
    for (std::size_t i = 0; i < lags.size(); ++i) {
        if (lags[i] < 0) throw_invalid("correlogram: lags must be nonnegative");
        if (i > 0 && lags[i] <= lags[i - 1]) throw_invalid("correlogram: lags must be strictly increasing");
    }
    if (static_cast<std::size_t>(lags.back()) + 2 > n)
        throw_data("correlogram: series of length " + std::to_string(n) + " is too short for lag " +
                   std::to_string(lags.back()));
}

Correlogram lagged_products(const std::vector<double>& x, std::span<const long> lags, CorrelogramKind kind,
                            double delta) {
    check_lags(lags, x.size());
    const std::size_t n = x.size();
    Correlogram c;
    c.kind = kind;
    c.delta = delta;
    c.count = static_cast<long>(n);
    c.lags.assign(lags.begin(), lags.end());
    c.values.reserve(lags.size());
    for (long k : lags) {
        double s = 0.0;
        for (std::size_t j = 0; j + k < n; ++j) s += x[j] * x[j + k];
        c.values.push_back(s / static_cast<double>(n));
    }
    return c;
}

std::vector<long> range_lags(long max_lag) {
    if (max_lag < 0) throw_invalid("correlogram: max_lag must be nonnegative");
    std::vector<long> lags(max_lag + 1);
    for (long k = 0; k <= max_lag; ++k) lags[k] = k;
    return lags;
}

std::vector<double> centered_logs(const VolSeries& series) {
    series.validate();
    std::vector<double> logs(series.values.size());
    double mu = 0.0;
    for (std::size_t i = 0; i < logs.size(); ++i) {
        logs[i] = std::log(series.values[i]);
        mu += logs[i];
    }
    mu /= static_cast<double>(logs.size());
    for (double& v : logs) v -= mu;
    return logs;
}

}  // namespace

Correlogram correlogram_M(const VolSeries& series, std::span<const long> lags) {
    if (series.values.size() < 2) throw_data("correlogram_M: series needs at least two observations");
    return lagged_products(series.values, lags, CorrelogramKind::RawM, series.delta);
}

Correlogram correlogram_M(const VolSeries& series, long max_lag) {
    const auto lags = range_lags(max_lag);
    return correlogram_M(series, std::span<const long>(lags));
}

Correlogram correlogram_lnM(const VolSeries& series, std::span<const long> lags) {
    return lagged_products(centered_logs(series), lags, CorrelogramKind::CenteredLnM, series.delta);
}

Correlogram correlogram_lnM(const VolSeries& series, long max_lag) {
    const auto lags = range_lags(max_lag);
    return correlogram_lnM(series, std::span<const long>(lags));
}

std::vector<double> log_increment_moments(const VolSeries& series, double q, std::span<const double> taus) {
    series.validate();
    if (!(q > 0.0)) throw_invalid("log_increment_moments: q must be positive");
    const std::size_t n = series.values.size();
    std::vector<double> logs(n);
    for (std::size_t i = 0; i < n; ++i) logs[i] = std::log(series.values[i]);
    std::vector<double> out;
    out.reserve(taus.size());
    for (double tau : taus) {
        const double steps = tau / series.delta;
        const long k = std::lround(steps);
        if (k < 1 || std::abs(steps - static_cast<double>(k)) > 1e-9 * steps)
            throw_invalid("log_increment_moments: tau must be a positive integer multiple of delta");
        if (static_cast<std::size_t>(k) >= n)
            throw_data("log_increment_moments: tau exceeds the series length");
        double s = 0.0;
        for (std::size_t t = 0; t + k < n; ++t) s += std::pow(std::abs(logs[t + k] - logs[t]), q);
        out.push_back(s / static_cast<double>(n - k));
    }
    return out;
}

ScalingFit scaling_fit_from_moments(double q, std::span<const double> taus, std::span<const double> m_hat) {
    if (taus.size() != m_hat.size()) throw_invalid("scaling fit: taus and moments differ in length");
    if (taus.size() < 2) throw_invalid("scaling fit: need at least two lags");
    if (!(q > 0.0)) throw_invalid("scaling fit: q must be positive");
    const double n = static_cast<double>(taus.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < taus.size(); ++i) {
        if (!(m_hat[i] > 0.0) || !(taus[i] > 0.0))
            throw_numerical("scaling fit: moments must be positive for the log regression");
        mx += std::log(taus[i]);
        my += std::log(m_hat[i]);
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < taus.size(); ++i) {
        const double dx = std::log(taus[i]) - mx, dy = std::log(m_hat[i]) - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (!(sxx > 0.0)) throw_numerical("scaling fit: degenerate regression (all taus equal)");
    ScalingFit fit;
    fit.q = q;
    fit.taus.assign(taus.begin(), taus.end());
    fit.m_hat.assign(m_hat.begin(), m_hat.end());
    const double slope = sxy / sxx;
    fit.H_hat = slope / q;
    fit.intercept = my - slope * mx;
    fit.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    return fit;
}

ScalingFit scaling_estimate_H(const VolSeries& series, double q, std::span<const double> taus) {
    const auto m = log_increment_moments(series, q, taus);
    return scaling_fit_from_moments(q, taus, m);
}

std::vector<double> integer_tau_grid(double tau_min, double tau_max, double delta) {
    if (!(delta > 0.0) || !(tau_min > 0.0) || !(tau_max >= tau_min)) throw_invalid("tau grid: bad range");
    std::vector<double> taus;
    const long lo = std::lround(std::ceil(tau_min / delta - 1e-9));
    const long hi = std::lround(std::floor(tau_max / delta + 1e-9));
    for (long k = lo; k <= hi; ++k) taus.push_back(k * delta);
    return taus;
}

}  // namespace lsfbm
