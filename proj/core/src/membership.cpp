#include "ccgnav/membership.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "ccgnav/barrier.hpp"
#include "ccgnav/errors.hpp"
#include "ccgnav/newton.hpp"

namespace ccgnav {

namespace {

constexpr double kGammaCap = 1e9;

// Lower bound of min over the fiber of max_j f_j from a (near-)minimizer of f_gamma.
double smoothing_lower_bound(const NewtonResult& nr, double gamma, std::size_t nb) {
    double val = nr.at.value;
    if (!nr.converged && nr.at.gradient.size() > 0) {
        Eigen::LDLT<Matrix> ldlt(nr.at.hessian);
        val -= 0.5 * nr.at.gradient.dot(ldlt.solve(nr.at.gradient));
    }
    const double g = static_cast<double>(nb);
    return val + std::log((g + 1.0) / g) / gamma;
}

ObjectiveFn fiber_objective(const UnconstrainedForm& form, double gamma, const Vector& eta_p,
                            const Matrix& N) {
    return [&form, gamma, &eta_p, &N](const Vector& alpha) {
        const SmoothedValue sv = smoothed_f(form, gamma, eta_p + N * alpha);
        return Objective{sv.value, N.transpose() * sv.gradient, N.transpose() * sv.hessian * N};
    };
}

NewtonOptions continuation_options(double gamma) {
    NewtonOptions opts;
    opts.grad_tol = 1e-10 * std::max(1.0, gamma / kMembershipGamma);
    opts.max_iter = 200;
    return opts;
}

// Exit distance along v from x inside the unit ball: largest s with |x + s v| <= 1.
double ball_exit(const Vector& x, const Vector& v) {
    const double a = v.squaredNorm();
    if (a <= 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    const double bb = x.dot(v);
    const double c0 = x.squaredNorm() - 1.0;
    const double disc = std::sqrt(std::max(0.0, bb * bb - a * c0));
    if (bb >= 0.0) {
        return -c0 / (bb + disc);
    }
    return (-bb + disc) / a;
}

bool is_constant_block(const UnconstrainedForm& form, std::size_t j) {
    return form.block_map(j).cwiseAbs().maxCoeff() <= 1e-14;
}

}  // namespace

MembershipResult membership(const UnconstrainedForm& form, const Vector& p, double gamma_test,
                            double tol) {
    if (p.size() != form.dim()) {
        throw DimensionError("contains: point has dimension " + std::to_string(p.size()) +
                             ", set has " + std::to_string(form.dim()));
    }
    MembershipResult res;
    const SvdFactors gf = svd_factor(form.Gt);
    const Vector eta_p = gf.pinv * (p - form.ct);
    const double range_resid = (form.Gt * eta_p + form.ct - p).norm();
    res.eta = eta_p;
    if (range_resid > tol) {
        res.margin = std::numeric_limits<double>::infinity();
        return res;
    }
    if (form.num_blocks() == 0) {
        res.margin = -std::numeric_limits<double>::infinity();
        res.inside = true;
        return res;
    }
    const Matrix& N = gf.nullspace;
    if (N.cols() == 0) {
        res.margin = form.max_value(eta_p);
        res.inside = res.margin <= tol;
        return res;
    }

    Vector alpha = Vector::Zero(N.cols());
    for (double gamma = gamma_test;; gamma *= 10.0) {
        const NewtonOptions opts = continuation_options(gamma);
        const NewtonResult nr = newton_minimize(fiber_objective(form, gamma, eta_p, N), alpha, opts);
        if (!nr.converged && nr.iterations >= opts.max_iter) {
            throw SolverFailure("contains: Newton did not converge at gamma = " +
                                std::to_string(gamma));
        }
        alpha = nr.x;
        res.eta = eta_p + N * alpha;
        res.margin = form.max_value(res.eta);
        if (res.margin <= tol) {
            res.inside = true;
            return res;
        }
        if (smoothing_lower_bound(nr, gamma, form.num_blocks()) > tol || gamma >= kGammaCap) {
            return res;
        }
    }
}

bool contains(const UnconstrainedForm& form, const Vector& p, double gamma_test, double tol) {
    return membership(form, p, gamma_test, tol).inside;
}

bool contains(const CCG& z, const Vector& p, double gamma_test, double tol) {
    return contains(eliminate_constraints(z), p, gamma_test, tol);
}

Vector interior_eta(const UnconstrainedForm& form) {
    const Eigen::Index ne = form.eta_dim();
    Vector eta = Vector::Zero(ne);
    if (form.num_blocks() == 0 || form.max_value(eta) < 0.0) {
        return eta;
    }
    if (ne == 0) {
        throw EmptySetError("CCG is empty or has no relative interior (all generators fixed)");
    }
    const Matrix I = Matrix::Identity(ne, ne);
    const Vector zero = Vector::Zero(ne);
    for (double gamma = kMembershipGamma; gamma <= kGammaCap; gamma *= 10.0) {
        const NewtonOptions opts = continuation_options(gamma);
        const NewtonResult nr = newton_minimize(fiber_objective(form, gamma, zero, I), eta, opts);
        eta = nr.x;
        if (form.max_value(eta) < 0.0) {
            return eta;
        }
        if (smoothing_lower_bound(nr, gamma, form.num_blocks()) > 0.0) {
            break;
        }
    }
    throw EmptySetError("CCG is empty or has empty interior");
}

Vector sample_point(const UnconstrainedForm& form, std::mt19937_64& rng) {
    const Vector eta0 = interior_eta(form);
    const Eigen::Index ne = form.eta_dim();
    if (ne == 0) {
        return form.ct;
    }
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Vector d(ne);
    for (Eigen::Index i = 0; i < ne; ++i) {
        d[i] = normal(rng);
    }
    double s_max = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < form.num_blocks(); ++j) {
        s_max = std::min(s_max, ball_exit(form.block_point(j, eta0), form.block_map(j) * d));
    }
    const double u = std::pow(unif(rng), 1.0 / static_cast<double>(ne));
    if (!std::isfinite(s_max)) {
        return form.point(eta0);
    }
    return form.point(eta0 + (u * s_max) * d);
}

Vector sample_point(const CCG& z, std::mt19937_64& rng) {
    return sample_point(eliminate_constraints(z), rng);
}

SupportResult support(const UnconstrainedForm& form, const Vector& d, const Vector* warm) {
    if (d.size() != form.dim()) {
        throw DimensionError("support: direction dimension mismatch");
    }
    const Vector cvec = form.Gt.transpose() * d;
    std::vector<std::size_t> active;
    for (std::size_t j = 0; j < form.num_blocks(); ++j) {
        if (!is_constant_block(form, j)) {
            active.push_back(j);
        }
    }

    SupportResult res;
    Vector eta;
    bool warm_ok = false;
    if (warm != nullptr && warm->size() == form.eta_dim()) {
        warm_ok = form.num_blocks() == 0 || form.max_value(*warm) < 0.0;
    }
    eta = warm_ok ? *warm : interior_eta(form);

    if (cvec.norm() > 0.0 && !active.empty()) {
        const double m = static_cast<double>(active.size());
        const double t_final = m / 1e-9;
        std::vector<Matrix> gram;
        for (std::size_t j : active) {
            const auto M = form.block_map(j);
            gram.emplace_back(M.transpose() * M);
        }
        const auto centering = [&](double t) {
            return [&, t](const Vector& x) {
                Objective obj;
                obj.value = -t * cvec.dot(x);
                obj.gradient = -t * cvec;
                obj.hessian = Matrix::Zero(x.size(), x.size());
                const Vector xi = form.offset + form.N_A * x;
                for (std::size_t a = 0; a < active.size(); ++a) {
                    const std::size_t j = active[a];
                    const auto seg = xi.segment(form.block_start[j], form.blocks[j].dim);
                    const double slack = 0.5 - 0.5 * seg.squaredNorm();
                    if (!(slack > 0.0)) {
                        obj.value = std::numeric_limits<double>::infinity();
                        return obj;
                    }
                    const Vector gj = form.block_map(j).transpose() * seg;
                    obj.value -= std::log(slack);
                    obj.gradient += gj / slack;
                    obj.hessian.noalias() += gram[a] / slack;
                    obj.hessian.noalias() += (gj * gj.transpose()) / (slack * slack);
                }
                return obj;
            };
        };
        NewtonOptions opts;
        opts.grad_tol = 0.0;
        opts.decrement_tol = 1e-9;
        opts.max_iter = 200;
        double t = warm_ok ? m / 1e-3 : 1.0 / std::max(1.0, cvec.norm());
        for (;;) {
            const NewtonResult nr = newton_minimize(centering(t), eta, opts);
            eta = nr.x;
            if (t >= t_final) {
                break;
            }
            t = std::min(t * 50.0, t_final);
        }
    }
    res.eta = eta;
    res.point = form.point(eta);
    res.value = d.dot(res.point);
    return res;
}

SupportResult support(const CCG& z, const Vector& d) {
    return support(eliminate_constraints(z), d);
}

std::vector<Eigen::Vector2d> contour(const CCG& z, int directions) {
    if (z.dim() != 2) {
        throw DimensionError("contour: only 2D sets are supported");
    }
    const UnconstrainedForm form = eliminate_constraints(z);
    std::vector<Eigen::Vector2d> poly;
    poly.reserve(static_cast<std::size_t>(directions));
    Vector warm;
    const Vector center = interior_eta(form);
    for (int i = 0; i < directions; ++i) {
        const double th = 2.0 * M_PI * static_cast<double>(i) / static_cast<double>(directions);
        Vector d(2);
        d << std::cos(th), std::sin(th);
        const SupportResult s = support(form, d, i == 0 ? nullptr : &warm);
        warm = center + 0.9 * (s.eta - center);
        poly.emplace_back(s.point[0], s.point[1]);
    }
    return poly;
}

double polygon_area(const std::vector<Eigen::Vector2d>& poly) {
    double twice = 0.0;
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        const auto& a = poly[i];
        const auto& b = poly[(i + 1) % n];
        twice += a.x() * b.y() - b.x() * a.y();
    }
    return 0.5 * std::abs(twice);
}

}  // namespace ccgnav
