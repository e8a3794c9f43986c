#pragma once

#include <optional>
#include <vector>

#include "ccgnav/flow.hpp"
#include "ccgnav/newton.hpp"
#include "ccgnav/unconstrained.hpp"

namespace ccgnav {

/// Smoothed maximum of the block functions,
/// f = (1/gamma) ln sum_j exp(gamma f_j) - ln(G + 1) / gamma,
/// with softmax weights pi_j and the weighted Hessian decomposition.
struct SmoothedValue {
    double value = 0.0;
    Vector gradient;
    Matrix hessian;
    Vector weights;
};

SmoothedValue smoothed_f(const UnconstrainedForm& form, double gamma, const Vector& eta,
                         bool with_hessian = true);

/// Minimizer of f over { eta : Gt eta + ct = p } and its multiplier.
struct KktSolution {
    Vector eta;
    Vector lambda;
    double value = 0.0;
    int iterations = 0;
};

/// Newton solve of the reduced problem over the null space of Gt. `warm_eta`, when its size
/// matches, is projected onto the affine solution set and used as the initial iterate.
/// Throws ConfigError if Gt is not of full row rank and SolverFailure if Newton stalls.
KktSolution solve_kkt(const UnconstrainedForm& form, double gamma, const Vector& p,
                      const Vector* warm_eta = nullptr, const NewtonOptions& opts = {});

/// Infinity norm of [grad f + Gt^T lambda; Gt eta + ct - p].
double kkt_residual(const UnconstrainedForm& form, double gamma, const Vector& p,
                    const Vector& eta, const Vector& lambda);

/// First-order Taylor model h0 + g_p (p - p0) + g_t (t - t0) of the obstacle barrier.
struct BarrierModel {
    Vector p0;
    double t0 = 0.0;
    double h0 = 0.0;
    Vector g_p;
    double g_t = 0.0;
    Vector eta0;
    Vector lambda0;
    double gamma = 0.0;
    int obstacle_id = -1;

    double evaluate(const Vector& p, double t) const { return h0 + g_p.dot(p - p0) + g_t * (t - t0); }
};

/// Barrier model from an equality-free form and its time derivatives. Gradients come from
/// the implicit-function derivative of the KKT system.
BarrierModel barrier_linear_model(const UnconstrainedForm& form, const Matrix& Gt_dot,
                                  const Vector& ct_dot, const Vector& p0, double t0,
                                  double gamma, const Vector* warm_eta = nullptr);

BarrierModel barrier_linear_model(const ObstacleFlow& flow, const Vector& p0, double t0,
                                  double gamma, const Vector* warm_eta = nullptr);

/// Gradient by the envelope identity (g_p = -lambda, g_t = lambda^T (Gt_dot eta + ct_dot)).
/// Independent of the implicit-function route; kept for cross-checks.
void envelope_gradient(const KktSolution& sol, const Matrix& Gt_dot, const Vector& ct_dot,
                       Vector& g_p, double& g_t);

/// LogSumExp soft minimum of the obstacle models.
struct CompositeValue {
    double h = 0.0;
    Vector g_p;
    double g_t = 0.0;
    Vector weights;
};

/// h = -(1/beta) ln sum_i exp(-beta h_i(p, t)) - b / beta.
CompositeValue combine(const std::vector<BarrierModel>& models, double beta, double b,
                       const Vector& p, double t);

/// Soft minimum of plain values, same formula as combine.
double soft_min(const std::vector<double>& values, double beta, double b);

/// Root in beta of soft_min(values, beta, b) = 0, bracketed from [1e-3, beta_hi] by doubling
/// and refined by bisection. Throws SafetyViolation if min value <= 0 or if no root exists
/// below 1e6.
double beta_min(const std::vector<double>& values, double b, double beta_hi = 1.0);

/// max(beta_bar, beta_min + eps).
double select_beta(const std::vector<double>& values, double beta_bar, double eps, double b);

}  // namespace ccgnav
