#pragma once

#include <functional>

#include <Eigen/Dense>

namespace lsfbm {

struct MinimizeOptions {
    int max_iter = 400;
    double gtol = 1e-7;        // on the projected gradient, scaled by 1 + |f|
    double ftol = 1e-15;       // relative decrease below which we stop
    double rel_step = 1e-6;    // central-difference step, relative to max(|x_i|, scale_i)
    Eigen::VectorXd scale;     // typical magnitudes; defaults to ones
};

struct MinimizeResult {
    Eigen::VectorXd x;
    double f = 0.0;
    int iterations = 0;
    bool converged = false;
    double projected_gradient = 0.0;
};

using Objective = std::function<double(const Eigen::VectorXd&)>;

/// Central-difference gradient that stays inside [lower, upper].
Eigen::VectorXd numerical_gradient(const Objective& f, const Eigen::VectorXd& x, const Eigen::VectorXd& lower,
                                   const Eigen::VectorXd& upper, const MinimizeOptions& opt);

/// Projected BFGS with Armijo backtracking on the box [lower, upper].
MinimizeResult minimize_box(const Objective& f, Eigen::VectorXd x0, const Eigen::VectorXd& lower,
                            const Eigen::VectorXd& upper, const MinimizeOptions& opt = {});

}  // namespace lsfbm
