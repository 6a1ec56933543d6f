#include "core/specfun.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "core/error.hpp"

namespace lsfbm::specfun {
namespace {

constexpr double kTermTol = 1e-14;
constexpr int kMaxIter = 1000000;
constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kAccuracyFlag = 1e-10;

struct Sum {
    double value;
    int terms;
    bool converged;
};

// sum_{n>=0} z^n / (a (a+1) ... (a+n)); gamma(a,z) = z^a e^-z * sum.
Sum gamma_series(double a, double z) {
    double term = 1.0 / a;
    double sum = term;
    for (int n = 1; n < kMaxIter; ++n) {
        term *= z / (a + n);
        sum += term;
        if (std::abs(term) < kTermTol * std::abs(sum)) return {sum, n + 1, true};
    }
    return {sum, kMaxIter, false};
}

// Modified Lentz evaluation of the continued fraction h with
// Gamma(a,z) = e^-z z^a h.
Sum upper_gamma_fraction(double a, double z) {
    constexpr double tiny = 1e-300;
    double b = z + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < kMaxIter; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < kTermTol) return {h, i, true};
    }
    return {h, kMaxIter, false};
}

void check_shape(double a, const char* who) {
    if (!(a > 0.0) || !std::isfinite(a)) throw_invalid(std::string(who) + ": shape parameter must be positive");
}

}  // namespace

SpecFunResult log_lower_incomplete_gamma(double a, double z) {
    check_shape(a, "log_lower_incomplete_gamma");
    if (!(z > 0.0)) throw_invalid("log_lower_incomplete_gamma: z must be positive");
    SpecFunResult r;
    if (std::isinf(z)) {
        r.value = std::lgamma(a);
        r.rel_error = kEps;
    } else if (z < a + 1.0) {
        const Sum s = gamma_series(a, z);
        r.value = a * std::log(z) - z + std::log(s.value);
        r.rel_error = (s.terms + 4) * kEps + (s.converged ? 0.0 : 1.0);
        // exp() amplifies the absolute error of the log by |log value|.
        r.rel_error += kEps * (std::abs(a * std::log(z)) + z);
    } else {
        const Sum cf = upper_gamma_fraction(a, z);
        const double lgam = std::lgamma(a);
        const double log_q = a * std::log(z) - z - lgam + std::log(cf.value);
        const double q = std::exp(log_q);
        r.value = lgam + std::log1p(-q);
        const double base = (cf.terms + 4) * kEps + (cf.converged ? 0.0 : 1.0) +
                            kEps * (std::abs(a * std::log(z)) + z + std::abs(lgam));
        r.rel_error = q < 1.0 ? base * (1.0 + q / (1.0 - q)) : 1.0;
    }
    r.accuracy_loss = a > kMaxShape || r.rel_error > kAccuracyFlag;
    return r;
}

SpecFunResult lower_incomplete_gamma(double a, double z) {
    check_shape(a, "lower_incomplete_gamma");
    if (z < 0.0 || std::isnan(z)) throw_invalid("lower_incomplete_gamma: z must be nonnegative");
    if (z == 0.0) return {0.0, 0.0, a > kMaxShape};
    SpecFunResult r = log_lower_incomplete_gamma(a, z);
    r.value = std::exp(r.value);
    if (!std::isfinite(r.value)) r.accuracy_loss = true;
    return r;
}

SpecFunResult kummer_m1(double b, double z) {
    if (!(b > 1.0)) throw_invalid("kummer_m1: b must exceed 1");
    if (!(z > 0.0)) throw_invalid("kummer_m1: z must be positive");
    const double a = b - 1.0;
    SpecFunResult r;
    if (z < b) {
        // 1F1(1; b; z) = sum_n z^n / (b)_n, terms decrease monotonically here.
        double term = 1.0;
        double sum = 1.0;
        int n = 0;
        for (; n < kMaxIter; ++n) {
            term *= z / (b + n);
            sum += term;
            if (term < kTermTol * sum) break;
        }
        r.value = sum;
        r.rel_error = (n + 4) * kEps + (n == kMaxIter ? 1.0 : 0.0);
    } else {
        const SpecFunResult lg = log_lower_incomplete_gamma(a, z);
        const double log_m = std::log(a) - a * std::log(z) + z + lg.value;
        r.value = std::exp(log_m);
        r.rel_error = lg.rel_error + kEps * std::abs(log_m);
    }
    r.accuracy_loss = a > kMaxShape || r.rel_error > kAccuracyFlag || !std::isfinite(r.value);
    return r;
}

SpecFunResult kummer_m1_scaled(double b, double z) {
    if (!(b > 1.0)) throw_invalid("kummer_m1_scaled: b must exceed 1");
    if (!(z > 0.0)) throw_invalid("kummer_m1_scaled: z must be positive");
    if (z < b) {
        SpecFunResult r = kummer_m1(b, z);
        r.value *= std::exp(-z);
        r.rel_error += kEps * z;
        return r;
    }
    const double a = b - 1.0;
    const SpecFunResult lg = log_lower_incomplete_gamma(a, z);
    const double log_m = std::log(a) - a * std::log(z) + lg.value;
    SpecFunResult r;
    r.value = std::exp(log_m);
    r.rel_error = lg.rel_error + kEps * std::abs(log_m);
    r.accuracy_loss = a > kMaxShape || r.rel_error > kAccuracyFlag;
    return r;
}

double gauss_abs_moment(double q) {
    if (!(q > 0.0)) throw_invalid("gauss_abs_moment: q must be positive");
    return std::exp(0.5 * q * std::numbers::ln2 + std::lgamma(0.5 * (q + 1.0)) -
                    0.5 * std::log(std::numbers::pi));
}

}  // namespace lsfbm::specfun
