#include "ccgnav/flow.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ccgnav/errors.hpp"

namespace ccgnav {

CCG enlarge_body(const CCG& obstacle_body, const CCG& agent_body) {
    if (obstacle_body.dim() != agent_body.dim()) {
        throw DimensionError("enlarge_body: obstacle and agent live in different dimensions");
    }
    const Eigen::Index p = agent_body.dim();
    return minkowski_sum(obstacle_body, linear_map(agent_body, -Matrix::Identity(p, p)));
}

ObstacleFlow::ObstacleFlow(ObstacleSystem sys, CCG estimate, CCG enlarged_body, double t_k)
    : sys_(std::move(sys)), estimate_(std::move(estimate)), body_(std::move(enlarged_body)),
      t_k_(t_k) {
    sys_.validate();
    if (estimate_.dim() != sys_.n()) {
        throw DimensionError("ObstacleFlow: estimate dimension differs from the state dimension");
    }
    if (body_.dim() != sys_.p()) {
        throw DimensionError("ObstacleFlow: body dimension differs from the position dimension");
    }
    Eigen::Index n_in = 0;
    BlockList in_blocks;
    if (sys_.mode == InputMode::Exact) {
        n_in = sys_.W.num_generators();
        in_blocks = sys_.W.blocks();
    } else {
        wmax_ = max_norm_bound(sys_.W);
        const Eigen::SelfAdjointEigenSolver<Matrix> eig(sys_.E * sys_.E.transpose());
        input_shape_ = eig.operatorSqrt();
        n_in = sys_.p();
        in_blocks = {GeneratorBlock::ball2(sys_.p())};
    }
    A_ = block_diag(hstack(estimate_.A(), Matrix::Zero(estimate_.num_constraints(), n_in)),
                    body_.A());
    b_ = vstack(estimate_.b(), body_.b());
    blocks_ = concat(concat(estimate_.blocks(), in_blocks), body_.blocks());

    const FlowSample s0 = eval(t_k_);
    base_ = eliminate_constraints(CCG(s0.G, s0.c, A_, b_, blocks_));
}

FlowSample ObstacleFlow::eval(double t) const {
    const double s = t - t_k_;
    const double slack = 1e-9 * std::max(1.0, std::abs(t_k_));
    if (s < -slack || s > sys_.Ts + slack) {
        throw DimensionError("flow_eval: t = " + std::to_string(t) + " outside [" +
                             std::to_string(t_k_) + ", " + std::to_string(t_end()) + "]");
    }
    const double sc = std::clamp(s, 0.0, sys_.Ts);
    const Matrix phi = transition_matrix(sys_.F, sc);
    const Matrix Ephi = sys_.E * phi;
    const Matrix EFphi = sys_.E * sys_.F * phi;
    const Eigen::Index p = sys_.p();

    Matrix G_in;
    Matrix G_in_dot;
    Vector c_in = Vector::Zero(p);
    Vector c_in_dot = Vector::Zero(p);
    if (sys_.mode == InputMode::Exact) {
        const Matrix Egamma = sys_.E * gamma_exact(sys_.F, sc);
        G_in = Egamma * sys_.W.G();
        G_in_dot = Ephi * sys_.W.G();
        c_in = Egamma * sys_.W.c();
        c_in_dot = Ephi * sys_.W.c();
    } else {
        const OverapproxRadius r = overapprox_radius(sys_.F, sc, wmax_);
        G_in = r.radius * input_shape_;
        G_in_dot = r.rate * input_shape_;
    }

    FlowSample out;
    out.G = hstack(hstack(Matrix(Ephi * estimate_.G()), G_in), body_.G());
    out.c = Ephi * estimate_.c() + c_in + body_.c();
    out.G_dot = hstack(hstack(Matrix(EFphi * estimate_.G()), G_in_dot),
                       Matrix::Zero(p, body_.num_generators()));
    out.c_dot = EFphi * estimate_.c() + c_in_dot;
    out.A = A_;
    out.b = b_;
    out.blocks = blocks_;
    return out;
}

ReducedFlowSample ObstacleFlow::reduced(double t) const {
    const FlowSample s = eval(t);
    ReducedFlowSample out;
    out.form = reparametrize(base_, s.G, s.c);
    out.Gt_dot = s.G_dot * base_.N_A;
    out.ct_dot = s.c_dot + s.G_dot * base_.offset;
    return out;
}

bool ObstacleFlow::full_row_rank(double t) const {
    const ReducedFlowSample r = reduced(t);
    return numerical_rank(r.form.Gt) == r.form.Gt.rows();
}

FlowSample flow_eval(const ObstacleFlow& flow, double t) {
    return flow.eval(t);
}

}  // namespace ccgnav
