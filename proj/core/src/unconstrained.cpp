#include "ccgnav/unconstrained.hpp"

#include <algorithm>
#include <limits>

#include "ccgnav/errors.hpp"

namespace ccgnav {

Vector UnconstrainedForm::block_point(std::size_t j, const Vector& eta) const {
    return offset.segment(block_start[j], blocks[j].dim) + block_map(j) * eta;
}

Vector UnconstrainedForm::block_values(const Vector& eta) const {
    Vector out(static_cast<Eigen::Index>(blocks.size()));
    for (std::size_t j = 0; j < blocks.size(); ++j) {
        out[static_cast<Eigen::Index>(j)] = blocks[j].value(block_point(j, eta));
    }
    return out;
}

Vector UnconstrainedForm::block_gradient(std::size_t j, const Vector& eta) const {
    return block_map(j).transpose() * blocks[j].gradient(block_point(j, eta));
}

double UnconstrainedForm::max_value(const Vector& eta) const {
    if (blocks.empty()) {
        return -std::numeric_limits<double>::infinity();
    }
    return block_values(eta).maxCoeff();
}

UnconstrainedForm eliminate_constraints(const CCG& z) {
    UnconstrainedForm form;
    const SvdFactors f = svd_factor(z.A());
    form.pinv_A = f.pinv;
    form.N_A = f.nullspace;
    form.offset = f.pinv * z.b();
    if (z.num_constraints() > 0) {
        const double resid = (z.A() * form.offset - z.b()).norm();
        if (resid > 1e-8 * std::max(1.0, z.b().norm())) {
            throw EmptySetError("eliminate_constraints: inconsistent equality constraints");
        }
    }
    form.blocks = z.blocks();
    form.block_start.reserve(form.blocks.size());
    Eigen::Index start = 0;
    for (const auto& blk : form.blocks) {
        form.block_start.push_back(start);
        start += blk.dim;
    }
    form.Gt = z.G() * form.N_A;
    form.ct = z.c() + z.G() * form.offset;
    return form;
}

UnconstrainedForm reparametrize(const UnconstrainedForm& base, const Matrix& G, const Vector& c) {
    if (G.cols() != base.N_A.rows() || G.rows() != c.size()) {
        throw DimensionError("reparametrize: generator data does not match the factorization");
    }
    UnconstrainedForm form = base;
    form.Gt = G * base.N_A;
    form.ct = c + G * base.offset;
    return form;
}

}  // namespace ccgnav
