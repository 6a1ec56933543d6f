#include "unit/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

namespace oracle {
namespace bq = boost::math::quadrature;

namespace {

constexpr double kTol = 1e-13;

template <class F>
double ts(F f, double a, double b) {
    if (b <= a) return 0.0;
    static thread_local bq::tanh_sinh<double> integrator(12);
    return integrator.integrate(f, a, b, kTol);
}

template <class F>
double gk(F f, double a, double b) {
    if (b <= a) return 0.0;
    return bq::gauss_kronrod<double, 61>::integrate(f, a, b, 15, kTol);
}

// Inner integral over v in [lo, hi] of g(v - u), split where v - u changes sign.
template <class G>
double inner(G g, double u, double lo, double hi) {
    auto f = [&](double v) { return g(v - u); };
    if (u > lo && u < hi) return ts(f, lo, u) + ts(f, u, hi);
    return ts(f, lo, hi);
}

template <class G>
double cell_double_integral(G g, double delta, double tau) {
    auto outer = [&](double u) { return inner(g, u, tau, tau + delta); };
    // the outer integrand has kinks where the diagonal enters the inner range
    double pts[4] = {0.0, std::clamp(tau, 0.0, delta), std::clamp(tau + delta, 0.0, delta), delta};
    std::sort(pts, pts + 4);
    double s = 0.0;
    for (int i = 0; i < 3; ++i) s += ts(outer, pts[i], pts[i + 1]);
    return s;
}

}  // namespace

double cone_covariance(double H, double lambda2, double T, double tau) {
    tau = std::abs(tau);
    if (tau >= T) return 0.0;
    // cross-section of the overlap at scale h: t in (tau - w/2, w/2) with w = min(h, T)
    auto width = [&](double h) {
        const double w = std::min(h, T);
        return gk([&](double) { return 1.0; }, tau - 0.5 * w, 0.5 * w);
    };
    auto density = [&](double h) { return lambda2 * std::pow(h, 2.0 * H - 2.0) * width(h); };
    const double below = ts(density, tau, T);
    static thread_local bq::exp_sinh<double> tail_integrator;
    const double above = tail_integrator.integrate([&](double x) { return density(T + x); }, kTol);
    return below + above;
}

double sfbm_cov(double H, double lambda2, double T, double s) {
    s = std::abs(s);
    if (s >= T) return 0.0;
    const double nu2 = lambda2 / (H * (1.0 - 2.0 * H));
    return 0.5 * nu2 * (std::pow(T, 2.0 * H) - std::pow(s, 2.0 * H));
}

double cov_lnM(double H, double lambda2, double T, double delta, double tau) {
    auto g = [&](double s) { return sfbm_cov(H, lambda2, T, s); };
    return cell_double_integral(g, delta, tau) / (delta * delta);
}

double corr_M(double H, double lambda2, double T, double sigma2, double delta, double tau) {
    auto g = [&](double s) { return std::exp(sfbm_cov(H, lambda2, T, s)); };
    return sigma2 * sigma2 * cell_double_integral(g, delta, tau);
}

double f_of_z(double H, double lambda2, double z) {
    const double x = std::abs(z);
    const double k2 = lambda2 / (2.0 * H * (1.0 - 2.0 * H));
    auto f = [&](double u) { return (x - u) * std::exp(-k2 * std::expm1(2.0 * H * std::log(u))); };
    return ts(f, 0.0, x);
}

double lower_gamma(double a, double z) {
    if (a < 1.0) {
        // t = u^2 removes the endpoint singularity for a >= 1/2
        auto g = [&](double u) { return u == 0.0 ? (a == 0.5 ? 2.0 : 0.0) : 2.0 * std::exp((2.0 * a - 1.0) * std::log(u) - u * u); };
        return ts(g, 0.0, std::sqrt(z));
    }
    // split at the peak of the integrand
    auto f = [&](double t) { return t == 0.0 ? (a == 1.0 ? 1.0 : 0.0) : std::exp((a - 1.0) * std::log(t) - t); };
    const double peak = std::min(std::max(a - 1.0, 0.0), z);
    if (peak > 0.0 && peak < z) return gk(f, 0.0, peak) + gk(f, peak, z);
    return gk(f, 0.0, z);
}

}  // namespace oracle
