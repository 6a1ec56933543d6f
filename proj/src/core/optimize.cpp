#include "core/optimize.hpp"

#include <cmath>

#include "core/error.hpp"

namespace lsfbm {
namespace {

Eigen::VectorXd project(Eigen::VectorXd x, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
    return x.cwiseMax(lo).cwiseMin(hi);
}

double projected_gradient_norm(const Eigen::VectorXd& x, const Eigen::VectorXd& g, const Eigen::VectorXd& lo,
                               const Eigen::VectorXd& hi) {
    Eigen::VectorXd step = project(x - g, lo, hi) - x;
    return step.lpNorm<Eigen::Infinity>();
}

}  // namespace

Eigen::VectorXd numerical_gradient(const Objective& f, const Eigen::VectorXd& x, const Eigen::VectorXd& lower,
                                   const Eigen::VectorXd& upper, const MinimizeOptions& opt) {
    const Eigen::Index n = x.size();
    Eigen::VectorXd g(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double s = opt.scale.size() == n ? opt.scale[i] : 1.0;
        const double h = opt.rel_step * std::max(std::abs(x[i]), s);
        Eigen::VectorXd xp = x, xm = x;
        double hp = h, hm = h;
        if (x[i] + h > upper[i]) hp = 0.0;
        if (x[i] - h < lower[i]) hm = 0.0;
        if (hp == 0.0 && hm == 0.0) {
            g[i] = 0.0;
            continue;
        }
        if (hp == 0.0 || hm == 0.0) {
            // one-sided, pointing into the box
            const double dir = hp > 0.0 ? 1.0 : -1.0;
            xp[i] = x[i] + dir * h;
            g[i] = dir * (f(xp) - f(x)) / h;
            continue;
        }
        xp[i] = x[i] + hp;
        xm[i] = x[i] - hm;
        g[i] = (f(xp) - f(xm)) / (hp + hm);
    }
    return g;
}

MinimizeResult minimize_box(const Objective& f, Eigen::VectorXd x0, const Eigen::VectorXd& lower,
                            const Eigen::VectorXd& upper, const MinimizeOptions& opt) {
    const Eigen::Index n = x0.size();
    if (lower.size() != n || upper.size() != n) throw_invalid("minimize_box: bound dimensions differ");
    if ((lower.array() > upper.array()).any()) throw_invalid("minimize_box: lower bound exceeds upper bound");

    MinimizeResult res;
    Eigen::VectorXd x = project(std::move(x0), lower, upper);
    double fx = f(x);
    if (!std::isfinite(fx)) throw_numerical("minimize_box: objective is not finite at the starting point");
    Eigen::VectorXd g = numerical_gradient(f, x, lower, upper, opt);
    Eigen::MatrixXd Hinv = Eigen::MatrixXd::Identity(n, n);

    int it = 0;
    for (; it < opt.max_iter; ++it) {
        const double pg = projected_gradient_norm(x, g, lower, upper);
        res.projected_gradient = pg;
        if (pg <= opt.gtol * (1.0 + std::abs(fx))) {
            res.converged = true;
            break;
        }
        // variables held at a bound by the gradient stay fixed this iteration
        std::vector<bool> active(n, false);
        for (Eigen::Index i = 0; i < n; ++i)
            active[i] = (x[i] <= lower[i] && g[i] > 0.0) || (x[i] >= upper[i] && g[i] < 0.0);
        Eigen::VectorXd gf = g;
        for (Eigen::Index i = 0; i < n; ++i)
            if (active[i]) gf[i] = 0.0;
        Eigen::MatrixXd Hf = Hinv;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (!active[i]) continue;
            Hf.row(i).setZero();
            Hf.col(i).setZero();
        }
        Eigen::VectorXd d = -Hf * gf;
        if (!(d.dot(gf) < 0.0)) {
            Hinv.setIdentity();
            d = -gf;
        }

        double alpha = 1.0;
        bool accepted = false;
        Eigen::VectorXd xn;
        double fn = fx;
        for (int ls = 0; ls < 60; ++ls) {
            xn = project(x + alpha * d, lower, upper);
            fn = f(xn);
            if (std::isfinite(fn) && fn <= fx + 1e-4 * g.dot(xn - x)) {
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted) {
            if (Hinv.isIdentity()) break;
            Hinv.setIdentity();
            continue;
        }
        Eigen::VectorXd gn = numerical_gradient(f, xn, lower, upper, opt);
        const Eigen::VectorXd s = xn - x;
        const Eigen::VectorXd y = gn - g;
        const double sy = s.dot(y);
        const double fprev = fx;
        x = xn;
        fx = fn;
        g = gn;
        if (sy > 1e-12 * s.norm() * y.norm()) {
            const double rho = 1.0 / sy;
            const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
            Hinv = (I - rho * s * y.transpose()) * Hinv * (I - rho * y * s.transpose()) + rho * s * s.transpose();
        }
        if (std::abs(fprev - fx) <= opt.ftol * std::max({std::abs(fprev), std::abs(fx), 1e-300})) {
            res.projected_gradient = projected_gradient_norm(x, g, lower, upper);
            res.converged = res.projected_gradient <= 1e3 * opt.gtol * (1.0 + std::abs(fx));
            ++it;
            break;
        }
    }
    if (it == opt.max_iter) res.projected_gradient = projected_gradient_norm(x, g, lower, upper);
    res.x = x;
    res.f = fx;
    res.iterations = it;
    if (!res.converged) res.converged = res.projected_gradient <= opt.gtol * (1.0 + std::abs(fx));
    return res;
}

}  // namespace lsfbm
