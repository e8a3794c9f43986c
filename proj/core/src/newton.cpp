#include "ccgnav/newton.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ccgnav {

namespace {

Vector newton_direction(const Matrix& hess, const Vector& grad) {
    Eigen::LLT<Matrix> llt(hess);
    if (llt.info() == Eigen::Success) {
        return -llt.solve(grad);
    }
    // Not numerically PD: shift the spectrum until it is.
    const double scale = std::max(1.0, hess.diagonal().cwiseAbs().maxCoeff());
    double shift = 1e-10 * scale;
    const Eigen::Index n = hess.rows();
    for (int i = 0; i < 40; ++i, shift *= 10.0) {
        Eigen::LLT<Matrix> reg(hess + shift * Matrix::Identity(n, n));
        if (reg.info() == Eigen::Success) {
            return -reg.solve(grad);
        }
    }
    return -grad;
}

bool gradient_small(const Objective& at, double tol) {
    return at.gradient.lpNorm<Eigen::Infinity>() <= tol * std::max(1.0, std::abs(at.value));
}

}  // namespace

NewtonResult newton_minimize(const ObjectiveFn& fn, Vector x0, const NewtonOptions& opts) {
    NewtonResult res;
    res.x = std::move(x0);
    res.at = fn(res.x);
    if (res.x.size() == 0) {
        res.converged = true;
        return res;
    }
    for (int it = 0; it < opts.max_iter; ++it) {
        res.iterations = it;
        if (gradient_small(res.at, opts.grad_tol)) {
            res.converged = true;
            return res;
        }
        const Vector dir = newton_direction(res.at.hessian, res.at.gradient);
        const double slope = res.at.gradient.dot(dir);
        const double eps = std::numeric_limits<double>::epsilon();
        if (-0.5 * slope <= opts.decrement_tol) {
            res.converged = true;
            return res;
        }
        // Value noise allowance: near the minimizer the decrease falls below round-off.
        const double noise = 16.0 * eps * std::max(1.0, std::abs(res.at.value));
        double step = 1.0;
        bool accepted = false;
        for (int bt = 0; bt < opts.max_backtracks; ++bt) {
            Vector trial = res.x + step * dir;
            Objective cand = fn(trial);
            if (std::isfinite(cand.value) &&
                cand.value <= res.at.value + opts.armijo * step * slope + noise) {
                res.x = std::move(trial);
                res.at = std::move(cand);
                accepted = true;
                break;
            }
            step *= opts.shrink;
        }
        if (!accepted) {
            // Line search exhausted. Accept only if the decrement is at round-off level.
            const double decrement = -slope;
            res.converged = decrement <= 1e3 * eps * std::max(1.0, std::abs(res.at.value));
            res.iterations = it + 1;
            return res;
        }
    }
    res.iterations = opts.max_iter;
    res.converged = gradient_small(res.at, opts.grad_tol);
    return res;
}

}  // namespace ccgnav
