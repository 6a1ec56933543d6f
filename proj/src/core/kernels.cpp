#include "core/kernels.hpp"

#include <cmath>
#include <string>

#include "core/error.hpp"
#include "core/specfun.hpp"

namespace lsfbm::kernels {
namespace {

// (x^2H - 1) / (2H), ln x at H = 0.
double phi(double H, double log_x) {
    if (H < kZeroHurst) return log_x;
    return std::expm1(2.0 * H * log_x) / (2.0 * H);
}

// x^2 (x^2H - 1) / (2H), with the x = 0 limit taken.
double weighted_phi(double H, double x, double log_x) {
    if (x == 0.0) return 0.0;
    return x * x * phi(H, log_x);
}

void check_hurst(double H, const char* who) {
    if (!(H >= 0.0 && H < 0.5)) throw_invalid(std::string(who) + ": H must lie in [0, 0.5)");
}

void check_lambda2(double lambda2, const char* who) {
    if (!(lambda2 > 0.0) || !std::isfinite(lambda2))
        throw_invalid(std::string(who) + ": lambda2 must be positive");
}

// K2 (x^2H - 1) = lambda2 phi(x) / (1 - 2H).
double shifted_exponent(double H, double lambda2, double x) {
    return lambda2 * phi(H, std::log(x)) / (1.0 - 2.0 * H);
}

// Sum over j >= 2 of c_j x^(2j) (small) or c_j x^(p - 2j) (large), where p = 2H + 2 and
// c_j = 2 binom(p, 2j) / (2H); the (p - 2) factor of the binomial cancels the 1/(2H).
double binomial_tail(double H, double x, bool small) {
    const double p = 2.0 * H + 2.0;
    const double x2 = x * x;
    double b = p * (p - 1.0) * (p - 3.0) / 24.0;
    double pw = small ? x2 * x2 : std::pow(x, p - 4.0);
    double sum = 0.0;
    for (int j = 2; j < 400; ++j) {
        const double term = 2.0 * b * pw;
        sum += term;
        if (std::abs(term) <= 1e-17 * std::abs(sum)) break;
        b *= (p - 2.0 * j) * (p - 2.0 * j - 1.0) / ((2.0 * j + 1.0) * (2.0 * j + 2.0));
        pw = small ? pw * x2 : pw / x2;
    }
    return sum;
}

}  // namespace

double lag_structure(double H, double s) {
    if (s < 0.0) s = -s;
    // Both tails lose precision to cancellation in the direct form.
    if (s < 0.1) {
        if (s == 0.0) return 0.0;
        return s * s * (2.0 * H + 3.0 - 2.0 * phi(H, std::log(s))) + binomial_tail(H, s, true);
    }
    if (s > 10.0) {
        const double a = (2.0 * H + 1.0) * (2.0 * H + 2.0);
        return a * phi(H, std::log(s)) + (2.0 * H + 3.0) + binomial_tail(H, s, false);
    }
    const double up = weighted_phi(H, s + 1.0, std::log1p(s));
    const double dn_abs = std::abs(s - 1.0);
    const double dn = weighted_phi(H, dn_abs, s < 1.0 ? std::log1p(-s) : std::log(dn_abs));
    const double mid = weighted_phi(H, s, std::log(s));
    return up + dn - 2.0 * mid;
}

double cov_omega(const ModelParams& p, double tau) {
    p.validate();
    if (p.is_multifractal()) throw_invalid("cov_omega: H = 0 has no finite S-fBM covariance; use cov_omega_mrm");
    tau = std::abs(tau);
    if (tau >= p.T) return 0.0;
    const double half_nu2 = 0.5 * p.nu2();
    const double t2h = std::pow(p.T, 2.0 * p.H);
    if (tau == 0.0) return half_nu2 * t2h;
    return -half_nu2 * t2h * std::expm1(2.0 * p.H * std::log(tau / p.T));
}

double cov_omega_mrm(double lambda2, double T, double ell, double tau) {
    check_lambda2(lambda2, "cov_omega_mrm");
    if (!(ell > 0.0)) throw_invalid("cov_omega_mrm: ell must be positive");
    if (!(ell < T)) throw_invalid("cov_omega_mrm: ell must be smaller than T");
    tau = std::abs(tau);
    if (tau > T) return 0.0;
    if (tau <= ell) return lambda2 * (std::log(T / ell) + 1.0 - tau / ell);
    return lambda2 * std::log(T / tau);
}

double g_h(double H, double z) {
    check_hurst(H, "g_h");
    if (!(z > 0.0) || !std::isfinite(z)) throw_invalid("g_h: z must be positive");
    const double denom = z * z * (1.0 - 2.0 * H) * (2.0 * H + 1.0) * (2.0 * H + 2.0);
    return 2.0 * lag_structure(H, z) / denom;
}

double cov_lnM(const ModelParams& p, double delta, double tau) {
    p.validate();
    if (!(delta > 0.0)) throw_invalid("cov_lnM: delta must be positive");
    if (tau < 0.0) throw_invalid("cov_lnM: tau must be nonnegative");
    if (tau + delta > p.T) throw_invalid("cov_lnM: requires tau + delta <= T");
    const double H = p.H;
    const double a = (2.0 * H + 1.0) * (2.0 * H + 2.0);
    const double scale = p.lambda2 * std::pow(delta, 2.0 * H) / (1.0 - 2.0 * H);
    return scale * (phi(H, std::log(p.T / delta)) + (2.0 * H + 3.0) / a - lag_structure(H, tau / delta) / a);
}

double m_q(const ModelParams& p, double q, double tau, double delta) {
    p.validate();
    if (!(q > 0.0)) throw_invalid("m_q: q must be positive");
    if (!(tau > 0.0)) throw_invalid("m_q: tau must be positive");
    if (!(delta > 0.0)) throw_invalid("m_q: delta must be positive");
    const double variance = p.lambda2 * std::pow(tau, 2.0 * p.H) * g_h(p.H, delta / tau);
    return specfun::gauss_abs_moment(q) * std::pow(variance, 0.5 * q);
}

double f_of_z(double H, double lambda2, double z) {
    check_hurst(H, "f_of_z");
    check_lambda2(lambda2, "f_of_z");
    const double x = std::abs(z);
    if (x == 0.0) return 0.0;
    if (H < kZeroHurst) {
        if (!(lambda2 < 1.0)) throw_invalid("f_of_z: the H = 0 form requires lambda2 < 1");
        return std::pow(x, 2.0 - lambda2) / ((2.0 - lambda2) * (1.0 - lambda2));
    }
    const double k2 = lambda2 / (2.0 * H * (1.0 - 2.0 * H));
    const double arg = k2 * std::pow(x, 2.0 * H);
    const double shift = shifted_exponent(H, lambda2, x);  // arg - k2
    const double b1 = 1.0 + 1.0 / (2.0 * H);
    const double b2 = 1.0 + 1.0 / H;
    // x^2 exp(k2 - arg) (M(1,b1,arg) - M(1,b2,arg) / 2)
    auto term = [&](double b) {
        if (arg < b) return std::exp(-shift) * specfun::kummer_m1(b, arg).value;
        // exp(k2) * [exp(-arg) M], assembled in logs since k2 can be large.
        const double scaled = specfun::kummer_m1_scaled(b, arg).value;
        return std::exp(k2 + std::log(scaled));
    };
    return x * x * (term(b1) - 0.5 * term(b2));
}

double f_of_z_incomplete_gamma(double H, double lambda2, double z) {
    check_hurst(H, "f_of_z_incomplete_gamma");
    check_lambda2(lambda2, "f_of_z_incomplete_gamma");
    if (H < kZeroHurst) return f_of_z(H, lambda2, z);
    const double x = std::abs(z);
    if (x == 0.0) return 0.0;
    const double k2 = lambda2 / (2.0 * H * (1.0 - 2.0 * H));
    const double arg = k2 * std::pow(x, 2.0 * H);
    const double a1 = 1.0 / (2.0 * H);
    const double a2 = 1.0 / H;
    const auto g1 = specfun::log_lower_incomplete_gamma(a1, arg);
    const auto g2 = specfun::log_lower_incomplete_gamma(a2, arg);
    if (g1.accuracy_loss || g2.accuracy_loss)
        throw_numerical("f_of_z_incomplete_gamma: incomplete gamma outside its accurate range (H = " +
                        std::to_string(H) + ")");
    // (1/2H) e^k2 [x k2^-a1 gamma(a1, arg) - k2^-a2 gamma(a2, arg)]
    const double log_pref = k2 - std::log(2.0 * H);
    const double t1 = std::exp(log_pref + std::log(x) - a1 * std::log(k2) + g1.value);
    const double t2 = std::exp(log_pref - a2 * std::log(k2) + g2.value);
    return t1 - t2;
}

double f_of_z_small_h(double H, double lambda2, double z) {
    check_hurst(H, "f_of_z_small_h");
    check_lambda2(lambda2, "f_of_z_small_h");
    const double x = std::abs(z);
    if (x == 0.0) return 0.0;
    if (H < kZeroHurst) return f_of_z(H, lambda2, z);
    const double k2 = lambda2 / (2.0 * H * (1.0 - 2.0 * H));
    const double arg = k2 * std::pow(x, 2.0 * H);
    return x * x * std::exp(-shifted_exponent(H, lambda2, x)) * (0.5 + 1.5 * H * arg);
}

double corr_M_prefactor(const ModelParams& p) {
    p.validate();
    return p.sigma2 * p.sigma2 * std::exp(shifted_exponent(p.H, p.lambda2, p.T));
}

double corr_M(const ModelParams& p, double delta, double tau) {
    p.validate();
    if (!(delta > 0.0)) throw_invalid("corr_M: delta must be positive");
    tau = std::abs(tau);
    if (tau > p.T) return p.sigma2 * p.sigma2 * delta * delta;
    const double combo = f_of_z(p.H, p.lambda2, tau + delta) + f_of_z(p.H, p.lambda2, tau - delta) -
                         2.0 * f_of_z(p.H, p.lambda2, tau);
    return corr_M_prefactor(p) * combo;
}

double dtilde_lnM(const ModelParams& p, long n) {
    p.validate();
    return dtilde_lnM(p.H, p.nu2(), n);
}

double dtilde_lnM(double H, double nu2, long n) {
    check_hurst(H, "dtilde_lnM");
    if (H < kZeroHurst) throw_invalid("dtilde_lnM: diverges at H = 0; use dtilde_lnM_anchored");
    if (n < 1) throw_invalid("dtilde_lnM: lag must be >= 1");
    // numerator = 2 + 2H lag_structure
    const double numer = 2.0 + 2.0 * H * lag_structure(H, static_cast<double>(n));
    return -nu2 * numer / (2.0 * (2.0 * H + 1.0) * (2.0 * H + 2.0));
}

double dtilde_lnM_anchored(double H, double lambda2, long n) {
    check_hurst(H, "dtilde_lnM_anchored");
    if (n < 0) throw_invalid("dtilde_lnM_anchored: lag must be >= 0");
    const double a = (1.0 - 2.0 * H) * (2.0 * H + 1.0) * (2.0 * H + 2.0);
    return -lambda2 * lag_structure(H, static_cast<double>(n)) / a;
}

double rtilde_M(double H, double lambda2, long n) {
    if (n < 0) throw_invalid("rtilde_M: lag must be >= 0");
    const double x = static_cast<double>(n);
    return f_of_z(H, lambda2, x + 1.0) + f_of_z(H, lambda2, x - 1.0) - 2.0 * f_of_z(H, lambda2, x);
}

BiasFit scaling_bias(double H, double delta, std::span<const double> taus) {
    check_hurst(H, "scaling_bias");
    if (!(delta > 0.0)) throw_invalid("scaling_bias: delta must be positive");
    if (taus.size() < 2) throw_invalid("scaling_bias: need at least two lags");
    double sx = 0.0, sy = 0.0;
    for (double tau : taus) {
        if (!(tau > 0.0)) throw_invalid("scaling_bias: lags must be positive");
        sx += std::log(tau / delta);
        sy += std::log(g_h(H, delta / tau));
    }
    const double n = static_cast<double>(taus.size());
    const double mx = sx / n, my = sy / n;
    double sxx = 0.0, sxy = 0.0;
    for (double tau : taus) {
        const double dx = std::log(tau / delta) - mx;
        sxx += dx * dx;
        sxy += dx * (std::log(g_h(H, delta / tau)) - my);
    }
    if (!(sxx > 0.0)) throw_invalid("scaling_bias: lags must not all coincide");
    BiasFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    return fit;
}

}  // namespace lsfbm::kernels
