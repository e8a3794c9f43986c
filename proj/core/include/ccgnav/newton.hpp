#pragma once

#include <functional>

#include "ccgnav/linalg.hpp"

namespace ccgnav {

struct NewtonOptions {
    double grad_tol = 1e-10;
    int max_iter = 100;
    double armijo = 1e-4;
    double shrink = 0.5;
    int max_backtracks = 60;
    /// Also stop once half the squared Newton decrement falls below this (0 disables).
    double decrement_tol = 0.0;
};

/// Value, gradient and Hessian of a smooth objective at one point.
struct Objective {
    double value = 0.0;
    Vector gradient;
    Matrix hessian;
};

struct NewtonResult {
    Vector x;
    Objective at;
    int iterations = 0;
    bool converged = false;
};

using ObjectiveFn = std::function<Objective(const Vector&)>;

/// Damped Newton method with Armijo backtracking for a convex objective.
///
/// Stops when the infinity norm of the gradient drops below grad_tol * max(1, |f|), when the Newton
/// decrement drops below decrement_tol, or when a full line search can no longer decrease the
/// value and the decrement has reached round-off level. `converged` is false when the
/// iteration budget runs out first. Trial points with a non-finite value are rejected, which
/// lets barrier objectives encode their domain by returning +inf.
NewtonResult newton_minimize(const ObjectiveFn& fn, Vector x0, const NewtonOptions& opts = {});

}  // namespace ccgnav
