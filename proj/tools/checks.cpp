#include <cmath>
#include <random>
#include <sstream>

#include <ccgnav/barrier.hpp>
#include <ccgnav/ccg.hpp>
#include <ccgnav/estimation.hpp>
#include <ccgnav/membership.hpp>
#include <ccgnav/unconstrained.hpp>

#include "commands.hpp"

namespace ccgnav::cli {

namespace {

Matrix gaussian(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    Matrix m(r, c);
    for (Eigen::Index j = 0; j < c; ++j) {
        for (Eigen::Index i = 0; i < r; ++i) {
            m(i, j) = n(rng);
        }
    }
    return m;
}

// Random CCG with nonempty interior: constraints are built through a point strictly inside
// the generator set.
CCG random_ccg(Eigen::Index p, std::mt19937_64& rng, bool constrained) {
    std::uniform_int_distribution<int> nblocks(1, 3);
    std::uniform_int_distribution<int> bdim(1, 3);
    BlockList blocks;
    const int nb = nblocks(rng);
    for (int j = 0; j < nb; ++j) {
        blocks.push_back(GeneratorBlock::ball2(bdim(rng)));
    }
    const Eigen::Index xi = total_dim(blocks);
    const Matrix G = gaussian(p, xi, rng);
    const Vector c = gaussian(p, 1, rng).col(0);
    if (!constrained || xi < 2) {
        return CCG(G, c, blocks);
    }
    Vector xi0(xi);
    Eigen::Index row = 0;
    std::uniform_real_distribution<double> u(0.0, 0.5);
    for (const auto& b : blocks) {
        Vector d = gaussian(b.dim, 1, rng).col(0);
        xi0.segment(row, b.dim) = d.normalized() * u(rng);
        row += b.dim;
    }
    const Matrix A = gaussian(1, xi, rng);
    return CCG(G, c, A, A * xi0, blocks);
}

CheckItem set_op_check(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    int checks = 0;
    int failures = 0;
    for (int trial = 0; trial < 6; ++trial) {
        const CCG z = random_ccg(2, rng, trial % 2 == 1);
        const CCG w = random_ccg(2, rng, false);
        const Matrix R = gaussian(2, 2, rng);
        const Vector t = gaussian(2, 1, rng).col(0);
        const CCG mapped = affine_map(z, R, t);
        const CCG sum = minkowski_sum(z, w);
        for (int s = 0; s < 5; ++s) {
            const Vector x = sample_point(z, rng);
            const Vector y = sample_point(w, rng);
            failures += !contains(mapped, R * x + t);
            failures += !contains(sum, x + y);
            checks += 2;
        }
        const CCG v = minkowski_sum(affine_map(z, R, Vector::Zero(2)), w);
        const CCG inter = generalized_intersection(z, R, v);
        for (int s = 0; s < 5; ++s) {
            const Vector x = sample_point(inter, rng);
            failures += !contains(z, x);
            failures += !contains(v, R * x);
            checks += 2;
        }
    }
    std::ostringstream d;
    d << checks << " memberships, " << failures << " violations";
    return {"set_ops.membership", failures == 0, d.str()};
}

CheckItem elimination_check(std::uint64_t seed) {
    std::mt19937_64 rng(seed + 1);
    int failures = 0;
    for (int trial = 0; trial < 6; ++trial) {
        const CCG z = random_ccg(3, rng, true);
        const UnconstrainedForm f = eliminate_constraints(z);
        failures += (z.A() * f.N_A).cwiseAbs().maxCoeff() > 1e-10 && f.N_A.cols() > 0;
        for (int s = 0; s < 10; ++s) {
            const Vector x = sample_point(f, rng);
            // Recover one generator vector and verify the original definition directly.
            const SvdFactors gf = svd_factor(f.Gt);
            const Vector eta = gf.pinv * (x - f.ct);
            const Vector xi = f.offset + f.N_A * eta;
            failures += (z.A() * xi - z.b()).norm() > 1e-8;
            failures += (z.G() * xi + z.c() - x).norm() > 1e-8;
        }
    }
    return {"set_ops.elimination", failures == 0, std::to_string(failures) + " violations"};
}

CheckItem gradient_check(std::uint64_t seed) {
    std::mt19937_64 rng(seed + 2);
    double worst = 0.0;
    for (int trial = 0; trial < 4; ++trial) {
        const UnconstrainedForm f = eliminate_constraints(random_ccg(2, rng, true));
        const Vector eta = gaussian(f.eta_dim(), 1, rng).col(0) * 0.3;
        const SmoothedValue sv = smoothed_f(f, 10.0, eta);
        for (Eigen::Index i = 0; i < eta.size(); ++i) {
            const double h = 1e-6;
            Vector e = eta;
            e[i] += h;
            const double fp = smoothed_f(f, 10.0, e, false).value;
            e[i] -= 2 * h;
            const double fm = smoothed_f(f, 10.0, e, false).value;
            const double fd = (fp - fm) / (2 * h);
            worst = std::max(worst, std::abs(fd - sv.gradient[i]) / std::max(1.0, std::abs(fd)));
        }
    }
    std::ostringstream d;
    d << "max rel err " << worst;
    return {"barrier.smoothed_gradient", worst < 1e-5, d.str()};
}

CheckItem barrier_check(std::uint64_t) {
    const CCG body = intersection(CCG::ellipsoid(Matrix::Identity(2, 2), Vector::Zero(2)),
                                  CCG::ellipsoid(Matrix::Identity(2, 2), Vector::Unit(2, 0)));
    const UnconstrainedForm f = eliminate_constraints(body);
    const Matrix Gd = Matrix::Zero(f.Gt.rows(), f.Gt.cols());
    const Vector cd = Vector::Zero(2);
    Vector p(2);
    p << 2.0, 1.5;
    const BarrierModel m = barrier_linear_model(f, Gd, cd, p, 0.0, 10.0);
    double worst = 0.0;
    for (Eigen::Index i = 0; i < 2; ++i) {
        const double h = 1e-5;
        Vector q = p;
        q[i] += h;
        const double hp = solve_kkt(f, 10.0, q).value;
        q[i] -= 2 * h;
        const double hm = solve_kkt(f, 10.0, q).value;
        const double fd = (hp - hm) / (2 * h);
        worst = std::max(worst, std::abs(fd - m.g_p[i]) / std::max(1e-8, std::abs(fd)));
    }
    std::ostringstream d;
    d << "max rel err " << worst;
    return {"barrier.implicit_gradient", worst < 1e-4, d.str()};
}

ObstacleSystem random_system(std::mt19937_64& rng) {
    ObstacleSystem sys;
    sys.F = 0.3 * gaussian(2, 2, rng);
    sys.E = Matrix::Identity(2, 2);
    sys.C = Matrix::Identity(2, 2);
    sys.W = CCG::ellipsoid(0.5 * Matrix::Identity(2, 2), Vector::Zero(2));
    sys.V = CCG::ellipsoid(0.2 * Matrix::Identity(2, 2), Vector::Zero(2));
    sys.Ts = 0.1;
    return sys;
}

}  // namespace

CheckItem check_params_equivalence(const ObstacleSystem& sys, const EstimatorParams& params,
                                   std::uint64_t seed) {
    std::mt19937_64 rng(seed + 3);
    const Eigen::Index n = sys.n();
    const Eigen::Index ny = sys.y();
    const CCG xbar = CCG::ellipsoid(Matrix::Identity(n, n) + 0.1 * gaussian(n, n, rng),
                                    gaussian(n, 1, rng).col(0));
    const Vector window = gaussian(ny * (params.N + 1), 1, rng).col(0);
    if (params.t2.size() != window.size() || params.R1.rows() != n) {
        return {"params", false, "dimensions do not match the obstacle system"};
    }
    CCG chain = measurement_update(xbar, window.head(ny), sys);
    for (int l = 1; l <= params.N; ++l) {
        chain = recursive_update(chain, window.segment(l * ny, ny), sys);
    }
    const CCG expl = explicit_estimate(params, xbar, window);
    if (expl.blocks() != chain.blocks() || expl.A().rows() != chain.A().rows()) {
        return {"params", false, "block structure differs from the recursion"};
    }
    const auto scale = [](const auto& m) { return 1e-10 * std::max(1.0, m.cwiseAbs().maxCoeff()); };
    for (Eigen::Index r = 0; r < chain.A().rows(); ++r) {
        const bool bad_a = (expl.A().row(r) - chain.A().row(r)).cwiseAbs().maxCoeff() > scale(chain.A());
        const bool bad_b = std::abs(expl.b()[r] - chain.b()[r]) > scale(chain.b());
        if (bad_a || bad_b) {
            return {"params", false,
                    "constraint row " + std::to_string(r) + " differs: recursion step l = " +
                        std::to_string(r / ny)};
        }
    }
    if ((expl.G() - chain.G()).cwiseAbs().maxCoeff() > scale(chain.G()) ||
        (expl.c() - chain.c()).cwiseAbs().maxCoeff() > scale(chain.c())) {
        return {"params", false,
                "generator map differs: recursion step l = " + std::to_string(params.N)};
    }
    return {"params", true, "N = " + std::to_string(params.N)};
}

std::vector<CheckItem> run_invariant_suite(std::uint64_t seed) {
    std::vector<CheckItem> items;
    items.push_back(set_op_check(seed));
    items.push_back(elimination_check(seed));
    items.push_back(gradient_check(seed));
    items.push_back(barrier_check(seed));
    std::mt19937_64 rng(seed + 4);
    for (int N = 1; N <= 3; ++N) {
        const ObstacleSystem sys = random_system(rng);
        CheckItem item = check_params_equivalence(sys, precompute_params(sys, N), seed + N);
        item.name = "estimator.equivalence_N" + std::to_string(N);
        items.push_back(std::move(item));
    }
    return items;
}

}  // namespace ccgnav::cli
