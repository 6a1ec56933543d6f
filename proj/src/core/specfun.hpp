#pragma once

namespace lsfbm::specfun {

/// Largest shape parameter for which the incomplete gamma routines claim full accuracy.
inline constexpr double kMaxShape = 1e4;

/// A special-function value with an a-posteriori relative error estimate.
/// accuracy_loss is set when the estimate exceeds 1e-10 or the arguments
/// fall outside the supported range.
struct SpecFunResult {
    double value = 0.0;
    double rel_error = 0.0;
    bool accuracy_loss = false;
};

/// Lower incomplete gamma function gamma(a, z) = int_0^z t^(a-1) e^(-t) dt.
/// Power series for z < a + 1, continued fraction of the complement otherwise.
SpecFunResult lower_incomplete_gamma(double a, double z);

/// ln gamma(a, z) for z > 0. Stays finite where gamma(a, z) itself overflows.
SpecFunResult log_lower_incomplete_gamma(double a, double z);

/// Kummer's confluent hypergeometric function 1F1(1; b; z) for b > 1, z > 0.
/// Satisfies gamma(s, z) = s^-1 z^s e^-z 1F1(1; s + 1; z).
SpecFunResult kummer_m1(double b, double z);

/// exp(-z) 1F1(1; b; z), which lies in (0, 1] and never overflows.
SpecFunResult kummer_m1_scaled(double b, double z);

/// E|N(0,1)|^q = 2^(q/2) Gamma((q+1)/2) / sqrt(pi).
double gauss_abs_moment(double q);

}  // namespace lsfbm::specfun
