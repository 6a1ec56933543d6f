#pragma once

#include <span>

#include "core/params.hpp"

/// Closed-form second-order structure of the log S-fBM measure.
///
/// Every function is pure. Lags and cell sizes are in the same time unit as
/// ModelParams::T. Functions that only depend on the shape of the model take
/// (H, lambda2) directly so that estimators can call them without a full
/// parameter set; the H = 0 (multifractal) limit is handled continuously.
namespace lsfbm::kernels {

/// Covariance of the S-fBM log-volatility at lag tau:
/// (nu2 / 2)(T^2H - |tau|^2H) for |tau| < T, zero beyond. Requires H > 0.
double cov_omega(const ModelParams& p, double tau);

/// Covariance of the regularized multifractal log-volatility with cutoff ell.
double cov_omega_mrm(double lambda2, double T, double ell, double tau);

/// Smoothing factor g_H(z) of the log-increment variance, z = delta / tau.
/// For H = 0 this is z^-2 ((1+z)^2 ln(1+z) + (1-z)^2 ln|1-z| - 2 z^2 ln z).
double g_h(double H, double z);

/// First-order-in-lambda2 covariance of ln M over cells of size delta at lag tau.
/// Requires tau + delta <= T.
double cov_lnM(const ModelParams& p, double delta, double tau);

/// First-order moment E|ln M(t+tau) - ln M(t)|^q.
double m_q(const ModelParams& p, double q, double tau, double delta);

/// F(z) = int_0^|z| (|z| - u) exp(-K2 (u^2H - 1)) du, K2 = lambda2 / (2H(1-2H)).
/// Normalized so that it tends to z^(2-lambda2) / ((2-lambda2)(1-lambda2)) as H -> 0.
/// Evaluated through 1F1(1; b; x).
double f_of_z(double H, double lambda2, double z);

/// Same quantity via the lower incomplete gamma function; used as a cross-check.
/// Throws Error(Numerical) where the incomplete gamma loses accuracy (1/H > 1e4).
double f_of_z_incomplete_gamma(double H, double lambda2, double z);

/// Small-H approximation z^2 exp(-K2 (z^2H - 1)) (1/2 + (3H/2) K2 z^2H).
double f_of_z_small_h(double H, double lambda2, double z);

/// K1 = sigma2^2 exp(K2 (T^2H - 1)), the prefactor pairing with f_of_z in corr_M.
double corr_M_prefactor(const ModelParams& p);

/// E[M_delta(t) M_delta(t + tau)]; sigma2^2 delta^2 beyond the correlation length.
double corr_M(const ModelParams& p, double delta, double tau);

/// High-frequency limit of the centered ln M correlogram at integer lag n >= 1:
/// -nu2 ((n+1)^(2H+2) + (n-1)^(2H+2) - 2 n^(2H+2)) / (2 (2H+1)(2H+2)). Requires H > 0.
double dtilde_lnM(const ModelParams& p, long n);
double dtilde_lnM(double H, double nu2, long n);

/// dtilde at lag n minus its value at n = 0, i.e. the expected D(n) = C(n) - C(0).
/// Finite and continuous down to H = 0; valid for n >= 0.
double dtilde_lnM_anchored(double H, double lambda2, long n);

/// F(n+1) + F(n-1) - 2 F(n) with F even; the limit shape of C_M(1, n) up to scale.
double rtilde_M(double H, double lambda2, long n);

struct BiasFit {
    double slope = 0.0;
    double intercept = 0.0;
};

/// OLS of ln g_H(delta / tau) against ln(tau / delta) over the tau grid.
BiasFit scaling_bias(double H, double delta, std::span<const double> taus);

/// ((s+1)^(2H+2) + |s-1|^(2H+2) - 2 s^(2H+2) - 2) / (2H), stable for small H;
/// equals (s+1)^2 ln(s+1) + (s-1)^2 ln|s-1| - 2 s^2 ln s at H = 0.
double lag_structure(double H, double s);

}  // namespace lsfbm::kernels
