#include "core/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "core/error.hpp"
#include "core/kernels.hpp"
#include "core/optimize.hpp"

namespace lsfbm {
namespace {

constexpr double kLambda2Min = 1e-8;
constexpr double kConstBound = 1e4;

struct Problem {
    GmmMethod method;
    std::vector<long> lags;
    Eigen::VectorXd target;
    Eigen::MatrixXd weight;
    double delta;
    double H_max;
    double lambda2_max;
    int max_iterations;
};

Eigen::VectorXd model_vector(const Problem& pb, const Eigen::VectorXd& th) {
    Eigen::VectorXd out(pb.lags.size());
    for (std::size_t i = 0; i < pb.lags.size(); ++i) {
        out[i] = pb.method == GmmMethod::LnM
                     ? model_corr_lnM_anchored(th[0], th[1], th[2], th[3], pb.lags[i], pb.delta)
                     : model_corr_M(th[0], th[1], th[2], pb.lags[i], pb.delta);
    }
    return out;
}

// E[M^2] stays finite near H = 0 only for lambda2 < 1
double lambda2_cap(const GmmSpec& spec) {
    return spec.method == GmmMethod::M ? std::min(spec.lambda2_max, 0.95) : spec.lambda2_max;
}

double objective(const Problem& pb, const Eigen::VectorXd& th) {
    const Eigen::VectorXd r = pb.target - model_vector(pb, th);
    return r.dot(pb.weight * r);
}

void bounds(const Problem& pb, Eigen::VectorXd& lo, Eigen::VectorXd& hi) {
    if (pb.method == GmmMethod::LnM) {
        lo.resize(4);
        hi.resize(4);
        lo << 0.0, kLambda2Min, -kConstBound, 0.0;
        hi << pb.H_max, pb.lambda2_max, kConstBound, kConstBound;
    } else {
        lo.resize(3);
        hi.resize(3);
        lo << 0.0, kLambda2Min, 1e-12;
        hi << pb.H_max, pb.lambda2_max, 1e8;
    }
}

// Weighted least squares over the parameters that enter the model linearly, H (and for
// the M model lambda2) held fixed. Returns the full parameter vector.
Eigen::VectorXd profile_linear(const Problem& pb, double H, double lambda2_guess) {
    const Eigen::Index q = static_cast<Eigen::Index>(pb.lags.size());
    if (pb.method == GmmMethod::M) {
        Eigen::VectorXd r(q);
        for (Eigen::Index i = 0; i < q; ++i) r[i] = model_corr_M(H, lambda2_guess, 1.0, pb.lags[i], pb.delta);
        const double den = r.dot(pb.weight * r);
        double k2 = den > 0.0 ? r.dot(pb.weight * pb.target) / den : 1.0;
        k2 = std::clamp(k2, 1e-12, 1e8);
        Eigen::VectorXd th(3);
        th << H, lambda2_guess, k2;
        return th;
    }
    // columns: unit-lambda2 anchored dtilde, constant, lag-0 indicator
    Eigen::MatrixXd X(q, 3);
    for (Eigen::Index i = 0; i < q; ++i) {
        X(i, 0) = model_corr_lnM_anchored(H, 1.0, 0.0, 0.0, pb.lags[i], pb.delta);
        X(i, 1) = 1.0;
        X(i, 2) = pb.lags[i] == 0 ? 1.0 : 0.0;
    }
    auto solve = [&](const Eigen::MatrixXd& A) -> Eigen::VectorXd {
        const Eigen::MatrixXd N = A.transpose() * pb.weight * A;
        return N.completeOrthogonalDecomposition().solve(A.transpose() * pb.weight * pb.target);
    };
    Eigen::VectorXd b = solve(X);
    double lambda2 = b[0], k1 = b[1], v1 = b[2];
    if (!(lambda2 >= kLambda2Min) || !(v1 >= 0.0)) {
        // refit with the offending coefficient pinned at its bound
        lambda2 = std::clamp(lambda2, kLambda2Min, pb.lambda2_max);
        Eigen::VectorXd shifted = pb.target - lambda2 * X.col(0);
        Eigen::MatrixXd A = X.rightCols(2);
        const Eigen::MatrixXd N = A.transpose() * pb.weight * A;
        Eigen::VectorXd c = N.completeOrthogonalDecomposition().solve(A.transpose() * pb.weight * shifted);
        k1 = c[0];
        v1 = std::max(c[1], 0.0);
    }
    Eigen::VectorXd th(4);
    th << H, std::clamp(lambda2, kLambda2Min, pb.lambda2_max), std::clamp(k1, -kConstBound, kConstBound),
        std::clamp(v1, 0.0, kConstBound);
    return th;
}

Eigen::VectorXd initial_point(const Problem& pb, double H0) {
    std::vector<double> hs{0.0, 0.01, 0.02, 0.04, 0.06, 0.08, 0.1, 0.13, 0.16, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45};
    if (H0 >= 0.0) hs.push_back(std::min(H0, pb.H_max));
    std::vector<double> l2s{0.05};
    if (pb.method == GmmMethod::M) l2s = {0.005, 0.01, 0.02, 0.05, 0.1, 0.2, 0.4};
    Eigen::VectorXd best;
    double fbest = std::numeric_limits<double>::infinity();
    for (double h : hs) {
        if (h > pb.H_max) continue;
        for (double l2 : l2s) {
            Eigen::VectorXd th = profile_linear(pb, h, std::min(l2, pb.lambda2_max));
            const double f = objective(pb, th);
            if (f < fbest) {
                fbest = f;
                best = th;
            }
        }
    }
    return best;
}

struct StepResult {
    Eigen::VectorXd theta;
    double f = 0.0;
    bool converged = false;
    int iterations = 0;
};

StepResult minimize_step(const Problem& pb, const Eigen::VectorXd& start, int restarts) {
    Eigen::VectorXd lo, hi;
    bounds(pb, lo, hi);
    MinimizeOptions opt;
    opt.max_iter = pb.max_iterations;
    opt.scale = Eigen::VectorXd::Constant(start.size(), 1e-2);
    const Objective f = [&pb](const Eigen::VectorXd& th) { return objective(pb, th); };

    std::vector<Eigen::VectorXd> starts{start};
    const double h = start[0], l2 = start[1];
    const double dh[3] = {0.05, -0.05, 0.1};
    const double fl[3] = {0.7, 1.5, 1.0};
    for (int r = 0; r < restarts && r < 3; ++r) {
        const double hr = std::clamp(h + dh[r], 0.0, pb.H_max);
        starts.push_back(profile_linear(pb, hr, std::clamp(l2 * fl[r], kLambda2Min, pb.lambda2_max)));
        if (pb.method == GmmMethod::M) starts.back()[1] = std::clamp(l2 * fl[r], kLambda2Min, pb.lambda2_max);
    }
    StepResult best;
    best.f = std::numeric_limits<double>::infinity();
    int total_iter = 0;
    for (const auto& s : starts) {
        const MinimizeResult res = minimize_box(f, s, lo, hi, opt);
        total_iter += res.iterations;
        bool better = best.theta.size() == 0 || (std::isfinite(res.f) && !std::isfinite(best.f));
        if (!better && std::isfinite(res.f)) {
            const double tie = 1e-12 * std::max(1.0, std::abs(best.f));
            better = res.f < best.f - tie || (std::abs(res.f - best.f) <= tie && res.x[0] < best.theta[0]);
        }
        if (better) {
            best.theta = res.x;
            best.f = res.f;
            best.converged = res.converged;
        }
    }
    best.iterations = total_iter;
    return best;
}

void fill_fit(GmmFit& fit, const Problem& pb, const StepResult& st) {
    fit.method = pb.method;
    fit.H = st.theta[0];
    fit.lambda2 = st.theta[1];
    fit.nu2 = fit.H < kZeroHurst ? std::numeric_limits<double>::infinity() : nu2_from_lambda2(fit.H, fit.lambda2);
    if (pb.method == GmmMethod::LnM) {
        fit.K1_anchored = st.theta[2];
        fit.V1 = st.theta[3];
        fit.K1 = fit.H < kZeroHurst
                     ? std::numeric_limits<double>::quiet_NaN()
                     : fit.K1_anchored +
                           std::pow(pb.delta, 2.0 * fit.H) * fit.nu2 / ((2.0 * fit.H + 1.0) * (2.0 * fit.H + 2.0));
    } else {
        fit.K2 = st.theta[2];
    }
    fit.objective = st.f;
    fit.converged = st.converged;
    fit.iterations += st.iterations;
    fit.lags = pb.lags;
    fit.weight_matrix = pb.weight;
}

Eigen::VectorXd ones_based_target(const std::vector<double>& x, const std::vector<long>& lags) {
    const std::size_t n = x.size();
    Eigen::VectorXd c(lags.size());
    for (std::size_t i = 0; i < lags.size(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j + lags[i] < n; ++j) s += x[j] * x[j + lags[i]];
        c[i] = s / static_cast<double>(n);
    }
    return c;
}

Eigen::MatrixXd contributions(const std::vector<double>& x, const Problem& pb, const Eigen::VectorXd& theta) {
    const long maxlag = pb.lags.back();
    const long rows = static_cast<long>(x.size()) - maxlag;
    const Eigen::VectorXd model = model_vector(pb, theta);
    Eigen::MatrixXd u(rows, pb.lags.size());
    for (long t = 0; t < rows; ++t)
        for (std::size_t k = 0; k < pb.lags.size(); ++k) u(t, k) = x[t] * x[t + pb.lags[k]] - model[k];
    return u;
}

}  // namespace

std::string to_string(GmmMethod m) { return m == GmmMethod::LnM ? "gmm_lnM" : "gmm_M"; }

GmmMethod parse_gmm_method(const std::string& s) {
    if (s == "gmm_lnM" || s == "gmm-lnm" || s == "lnm" || s == "gmm_lnm") return GmmMethod::LnM;
    if (s == "gmm_M" || s == "gmm-m" || s == "m" || s == "gmm_m") return GmmMethod::M;
    throw_invalid("unknown GMM method '" + s + "'");
}

std::vector<long> default_gmm_lags(GmmMethod m) {
    std::vector<long> lags;
    if (m == GmmMethod::LnM) lags.push_back(0);
    for (int k = 0; k <= 18; ++k) {
        const long j = static_cast<long>(std::floor(std::sqrt(std::ldexp(1.0, k))));
        if (lags.empty() || j != lags.back()) lags.push_back(j);
    }
    return lags;
}

void GmmSpec::validate() const {
    const std::vector<long> lags = resolved_lags();
    for (std::size_t i = 0; i < lags.size(); ++i) {
        if (lags[i] < 0) throw_invalid("GMM: lags must be nonnegative");
        if (i > 0 && lags[i] <= lags[i - 1]) throw_invalid("GMM: lags must be strictly increasing");
    }
    const std::size_t free = method == GmmMethod::LnM ? 4 : 3;
    if (lags.size() < free) throw_invalid("GMM: need at least as many lags as free parameters");
    if (method == GmmMethod::LnM && lags.front() != 0)
        throw_invalid("GMM: the lnM moment set must include lag 0 to identify V1");
    if (!(H_max > 0.0 && H_max < 0.5)) throw_invalid("GMM: H upper bound must lie in (0, 0.5)");
    if (!(lambda2_max > kLambda2Min)) throw_invalid("GMM: lambda2 upper bound too small");
    if (restarts < 0) throw_invalid("GMM: restarts must be nonnegative");
}

double model_corr_lnM(double H, double nu2, double K1, double V1, long n, double delta) {
    if (!(H >= kZeroHurst && H < 0.5)) throw_invalid("model_corr_lnM: requires 0 < H < 0.5");
    if (n < 0) throw_invalid("model_corr_lnM: lag must be >= 0");
    const double d = n == 0 ? -nu2 / ((2.0 * H + 1.0) * (2.0 * H + 2.0)) : kernels::dtilde_lnM(H, nu2, n);
    return K1 + std::pow(delta, 2.0 * H) * d + (n == 0 ? V1 : 0.0);
}

double model_corr_lnM_anchored(double H, double lambda2, double K1a, double V1, long n, double delta) {
    return K1a + std::pow(delta, 2.0 * H) * kernels::dtilde_lnM_anchored(H, lambda2, n) + (n == 0 ? V1 : 0.0);
}

double model_corr_M(double H, double lambda2, double K2, long n, double delta) {
    if (n < 0) throw_invalid("model_corr_M: lag must be >= 0");
    const double x = static_cast<double>(n) * delta;
    const double r = kernels::f_of_z(H, lambda2, x + delta) + kernels::f_of_z(H, lambda2, x - delta) -
                     2.0 * kernels::f_of_z(H, lambda2, x);
    return K2 * r;
}

Eigen::MatrixXd newey_west_covariance(const Eigen::MatrixXd& u, long hac_lag) {
    if (u.rows() < 1 || u.cols() < 1) throw_invalid("newey_west: empty contributions");
    if (hac_lag < 0) throw_invalid("newey_west: hac_lag must be >= 0");
    if (u.cwiseAbs().maxCoeff() == 0.0) throw_numerical("newey_west: all contributions are zero");
    const double n = static_cast<double>(u.rows());
    Eigen::MatrixXd S = u.transpose() * u / n;
    for (long l = 1; l <= hac_lag && l < u.rows(); ++l) {
        const double w = 1.0 - static_cast<double>(l) / static_cast<double>(hac_lag + 1);
        const Eigen::MatrixXd G = u.bottomRows(u.rows() - l).transpose() * u.topRows(u.rows() - l) / n;
        S += w * (G + G.transpose());
    }
    return S;
}

Eigen::MatrixXd newey_west_weight(const Eigen::MatrixXd& u, long hac_lag) {
    const Eigen::MatrixXd S = newey_west_covariance(u, hac_lag);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
    if (es.info() != Eigen::Success) throw_numerical("newey_west: eigen-decomposition failed");
    const Eigen::VectorXd ev = es.eigenvalues();
    const double cutoff = 1e-10 * ev.cwiseAbs().maxCoeff();
    Eigen::VectorXd inv(ev.size());
    for (Eigen::Index i = 0; i < ev.size(); ++i) inv[i] = ev[i] > cutoff ? 1.0 / ev[i] : 0.0;
    return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
}

GmmFit fit_moments(std::span<const double> values, const GmmSpec& spec, double delta, const Eigen::MatrixXd& weight,
                   double H0) {
    spec.validate();
    const std::vector<long> lags = spec.resolved_lags();
    if (values.size() != lags.size()) throw_invalid("fit_moments: one value per lag expected");
    Problem pb{spec.method, lags, Eigen::Map<const Eigen::VectorXd>(values.data(), values.size()),
               weight.size() ? weight : Eigen::MatrixXd::Identity(values.size(), values.size()),
               delta, spec.H_max, lambda2_cap(spec), spec.max_iterations};
    if (pb.weight.rows() != pb.target.size() || pb.weight.cols() != pb.target.size())
        throw_invalid("fit_moments: weight matrix has the wrong shape");
    const StepResult st = minimize_step(pb, initial_point(pb, H0), spec.restarts);
    GmmFit out;
    fill_fit(out, pb, st);
    out.steps = 1;
    out.weight = weight.size() ? "given" : "identity";
    return out;
}

GmmFit fit(const VolSeries& series, const GmmSpec& spec) {
    spec.validate();
    series.validate();
    const std::vector<long> lags = spec.resolved_lags();
    const long n = static_cast<long>(series.values.size());
    if (n < 2 * std::max(lags.back(), 1L))
        throw_data("GMM: series of length " + std::to_string(n) + " is shorter than twice the largest lag");
    const long hac = spec.hac_lag >= 0 ? spec.hac_lag : static_cast<long>(std::floor(std::cbrt(static_cast<double>(n))));

    // Moment series: centered logs, or the series scaled to unit mean (K2 is rescaled back).
    std::vector<double> x(series.values.size());
    double scale = 1.0;
    if (spec.method == GmmMethod::LnM) {
        double mu = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) mu += (x[i] = std::log(series.values[i]));
        mu /= static_cast<double>(n);
        for (double& v : x) v -= mu;
    } else {
        double mu = 0.0;
        for (double v : series.values) mu += v;
        scale = mu / static_cast<double>(n);
        for (std::size_t i = 0; i < x.size(); ++i) x[i] = series.values[i] / scale;
    }

    double H0 = -1.0;
    {
        std::vector<double> taus;
        for (long l : lags)
            if (l >= 1) taus.push_back(static_cast<double>(l) * series.delta);
        if (taus.size() >= 2) {
            try {
                H0 = std::clamp(scaling_estimate_H(series, 2.0, taus).H_hat, 0.0, spec.H_max);
            } catch (const Error&) {
                H0 = -1.0;
            }
        }
    }

    const Eigen::VectorXd target = ones_based_target(x, lags);
    const Eigen::Index q = target.size();
    Problem pb{spec.method, lags, target, Eigen::MatrixXd::Identity(q, q),
               series.delta, spec.H_max, lambda2_cap(spec), spec.max_iterations};

    GmmFit out;
    StepResult st = minimize_step(pb, initial_point(pb, H0), spec.restarts);
    out.iterations += st.iterations;
    out.steps = 1;
    const int max_steps = spec.iterate ? 50 : 1;
    for (int s = 0; s < max_steps; ++s) {
        pb.weight = newey_west_weight(contributions(x, pb, st.theta), hac);
        Eigen::VectorXd start = st.theta;
        StepResult next = minimize_step(pb, start, spec.restarts);
        // also try the grid initialization under the new weight
        StepResult alt = minimize_step(pb, initial_point(pb, H0), 0);
        if (alt.f < next.f) next = alt;
        next.iterations += alt.iterations;
        out.iterations += next.iterations;
        ++out.steps;
        const double change = (next.theta - st.theta).cwiseAbs().maxCoeff();
        st = next;
        if (spec.iterate && change < 1e-7) break;
    }
    st.iterations = 0;
    fill_fit(out, pb, st);
    if (spec.method == GmmMethod::M) out.K2 *= scale * scale;
    out.hac_lag = hac;
    out.weight = "newey_west";
    out.provenance = series.meta;
    return out;
}

nlohmann::json GmmFit::to_json() const {
    using nlohmann::json;
    auto num = [](double v) -> json { return std::isfinite(v) ? json(v) : json(nullptr); };
    json j;
    j["method"] = to_string(method);
    j["H"] = H;
    j["nu2"] = num(nu2);
    j["lambda2"] = lambda2;
    if (method == GmmMethod::LnM)
        j["nuisance"] = {{"K1", num(K1)}, {"K1_anchored", K1_anchored}, {"V1", V1}};
    else
        j["nuisance"] = {{"K2", K2}};
    j["objective"] = objective;
    j["converged"] = converged;
    j["iterations"] = iterations;
    j["steps"] = steps;
    j["lags"] = lags;
    j["hac_lag"] = hac_lag;
    j["weight"] = weight;
    j["provenance"] = provenance;
    return j;
}

}  // namespace lsfbm
