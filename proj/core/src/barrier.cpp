#include "ccgnav/barrier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ccgnav/errors.hpp"

namespace ccgnav {

SmoothedValue smoothed_f(const UnconstrainedForm& form, double gamma, const Vector& eta,
                         bool with_hessian) {
    const std::size_t nb = form.num_blocks();
    const Eigen::Index ne = form.eta_dim();
    SmoothedValue out;
    out.gradient = Vector::Zero(ne);
    if (with_hessian) {
        out.hessian = Matrix::Zero(ne, ne);
    }
    if (nb == 0) {
        out.value = -std::numeric_limits<double>::infinity();
        return out;
    }

    const Vector fj = form.block_values(eta);
    const double m = fj.maxCoeff();
    out.weights = (gamma * (fj.array() - m)).exp().matrix();
    const double total = out.weights.sum();
    out.weights /= total;
    out.value = m + std::log(total) / gamma - std::log(static_cast<double>(nb) + 1.0) / gamma;

    Matrix grads(ne, static_cast<Eigen::Index>(nb));
    for (std::size_t j = 0; j < nb; ++j) {
        grads.col(static_cast<Eigen::Index>(j)) = form.block_gradient(j, eta);
    }
    out.gradient = grads * out.weights;
    if (!with_hessian) {
        return out;
    }
    for (std::size_t j = 0; j < nb; ++j) {
        const double w = out.weights[static_cast<Eigen::Index>(j)];
        if (w == 0.0) {
            continue;
        }
        const auto M = form.block_map(j);
        out.hessian.noalias() += w * (M.transpose() * M);
        const Vector d = grads.col(static_cast<Eigen::Index>(j)) - out.gradient;
        out.hessian.noalias() += (gamma * w) * d * d.transpose();
    }
    return out;
}

KktSolution solve_kkt(const UnconstrainedForm& form, double gamma, const Vector& p,
                      const Vector* warm_eta, const NewtonOptions& opts) {
    if (p.size() != form.dim()) {
        throw DimensionError("solve_kkt: point dimension mismatch");
    }
    const SvdFactors gf = svd_factor(form.Gt);
    if (gf.rank < form.Gt.rows()) {
        throw ConfigError("solve_kkt: reduced generator matrix has rank " +
                          std::to_string(gf.rank) + " < " + std::to_string(form.Gt.rows()));
    }
    const Vector eta_p = gf.pinv * (p - form.ct);
    const Matrix& N = gf.nullspace;

    Vector alpha0 = Vector::Zero(N.cols());
    if (warm_eta != nullptr && warm_eta->size() == eta_p.size()) {
        alpha0 = N.transpose() * (*warm_eta - eta_p);
    }
    const ObjectiveFn fn = [&](const Vector& alpha) {
        const SmoothedValue sv = smoothed_f(form, gamma, eta_p + N * alpha);
        return Objective{sv.value, N.transpose() * sv.gradient, N.transpose() * sv.hessian * N};
    };
    const NewtonResult nr = newton_minimize(fn, alpha0, opts);
    if (!nr.converged) {
        throw SolverFailure("solve_kkt: Newton did not converge after " +
                            std::to_string(nr.iterations) + " iterations, |grad| = " +
                            std::to_string(nr.at.gradient.lpNorm<Eigen::Infinity>()));
    }

    KktSolution sol;
    sol.eta = eta_p + N * nr.x;
    const SmoothedValue sv = smoothed_f(form, gamma, sol.eta, false);
    sol.value = sv.value;
    sol.lambda = -gf.pinv.transpose() * sv.gradient;
    sol.iterations = nr.iterations;
    return sol;
}

double kkt_residual(const UnconstrainedForm& form, double gamma, const Vector& p,
                    const Vector& eta, const Vector& lambda) {
    const SmoothedValue sv = smoothed_f(form, gamma, eta, false);
    const Vector stat = sv.gradient + form.Gt.transpose() * lambda;
    const Vector feas = form.Gt * eta + form.ct - p;
    return std::max(stat.lpNorm<Eigen::Infinity>(), feas.lpNorm<Eigen::Infinity>());
}

BarrierModel barrier_linear_model(const UnconstrainedForm& form, const Matrix& Gt_dot,
                                  const Vector& ct_dot, const Vector& p0, double t0,
                                  double gamma, const Vector* warm_eta) {
    const KktSolution sol = solve_kkt(form, gamma, p0, warm_eta);
    const SmoothedValue sv = smoothed_f(form, gamma, sol.eta);
    const Eigen::Index ne = form.eta_dim();
    const Eigen::Index np = form.dim();

    Matrix J = Matrix::Zero(ne + np, ne + np);
    J.topLeftCorner(ne, ne) = sv.hessian;
    J.topRightCorner(ne, np) = form.Gt.transpose();
    J.bottomLeftCorner(np, ne) = form.Gt;

    Matrix dpsi = Matrix::Zero(ne + np, np + 1);
    dpsi.bottomLeftCorner(np, np) = -Matrix::Identity(np, np);
    dpsi.topRightCorner(ne, 1) = Gt_dot.transpose() * sol.lambda;
    dpsi.bottomRightCorner(np, 1) = Gt_dot * sol.eta + ct_dot;

    // Blocks with vanishing weight give tiny but exact pivots, so the solve is judged by its
    // residual rather than by a rank threshold.
    Eigen::FullPivLU<Matrix> lu(J);
    lu.setThreshold(std::numeric_limits<double>::min());
    const Matrix dl = -lu.solve(dpsi);
    if (!dl.allFinite() || (J * dl + dpsi).norm() > 1e-8 * std::max(1.0, dpsi.norm())) {
        throw SolverFailure("barrier_linear_model: KKT Jacobian is singular");
    }
    const Vector dh = dl.topRows(ne).transpose() * sv.gradient;

    BarrierModel m;
    m.p0 = p0;
    m.t0 = t0;
    m.h0 = sol.value;
    m.g_p = dh.head(np);
    m.g_t = dh[np];
    m.eta0 = sol.eta;
    m.lambda0 = sol.lambda;
    m.gamma = gamma;
    return m;
}

BarrierModel barrier_linear_model(const ObstacleFlow& flow, const Vector& p0, double t0,
                                  double gamma, const Vector* warm_eta) {
    const ReducedFlowSample r = flow.reduced(t0);
    return barrier_linear_model(r.form, r.Gt_dot, r.ct_dot, p0, t0, gamma, warm_eta);
}

void envelope_gradient(const KktSolution& sol, const Matrix& Gt_dot, const Vector& ct_dot,
                       Vector& g_p, double& g_t) {
    g_p = -sol.lambda;
    g_t = sol.lambda.dot(Gt_dot * sol.eta + ct_dot);
}

double soft_min(const std::vector<double>& values, double beta, double b) {
    if (values.empty()) {
        throw DimensionError("soft_min: empty value list");
    }
    const double m = *std::min_element(values.begin(), values.end());
    double total = 0.0;
    for (double v : values) {
        total += std::exp(-beta * (v - m));
    }
    return m - std::log(total) / beta - b / beta;
}

CompositeValue combine(const std::vector<BarrierModel>& models, double beta, double b,
                       const Vector& p, double t) {
    if (models.empty()) {
        throw DimensionError("combine: empty model list");
    }
    if (!(beta > 0.0) || b < 0.0) {
        throw DimensionError("combine: beta must be positive and b nonnegative");
    }
    std::vector<double> vals;
    vals.reserve(models.size());
    for (const auto& m : models) {
        vals.push_back(m.evaluate(p, t));
    }
    CompositeValue out;
    out.h = soft_min(vals, beta, b);
    out.weights.resize(static_cast<Eigen::Index>(models.size()));
    out.g_p = Vector::Zero(p.size());
    for (std::size_t i = 0; i < models.size(); ++i) {
        const double w = std::exp(-beta * (vals[i] - out.h) + b);
        out.weights[static_cast<Eigen::Index>(i)] = w;
        out.g_p += w * models[i].g_p;
        out.g_t += w * models[i].g_t;
    }
    return out;
}

double beta_min(const std::vector<double>& values, double b, double beta_hi) {
    if (values.empty()) {
        throw DimensionError("beta_min: empty value list");
    }
    const double hmin = *std::min_element(values.begin(), values.end());
    if (!(hmin > 0.0)) {
        throw SafetyViolation("agent not strictly safe at sample time (min h = " +
                              std::to_string(hmin) + ")");
    }
    // beta * soft_min = -ln sum exp(-beta h_i) - b, decreasing in beta; its root is the
    // root of soft_min in beta > 0.
    const auto g = [&](double beta) {
        double total = 0.0;
        for (double v : values) {
            total += std::exp(-beta * (v - hmin));
        }
        return std::log(total) - beta * hmin + b;
    };
    constexpr double kCap = 1e6;
    double lo = 1e-3;
    double hi = std::max(beta_hi, 2e-3);
    if (g(lo) <= 0.0) {
        hi = lo;
        lo = 0.0;
    } else {
        while (g(hi) > 0.0) {
            if (hi >= kCap) {
                throw SafetyViolation("beta_min: no root below cap 1e6");
            }
            lo = hi;
            hi = std::min(2.0 * hi, kCap);
        }
    }
    for (int it = 0; it < 200 && hi - lo > 1e-10 * std::max(1.0, hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        (g(mid) > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

double select_beta(const std::vector<double>& values, double beta_bar, double eps, double b) {
    return std::max(beta_bar, beta_min(values, b, beta_bar) + eps);
}

}  // namespace ccgnav
