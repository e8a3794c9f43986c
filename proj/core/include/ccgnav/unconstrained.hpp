#pragma once

#include <vector>

#include "ccgnav/ccg.hpp"

namespace ccgnav {

/// Equality-free reparametrization of a CCG. Generators are written as xi = A^+ b + N_A eta,
/// so that the set becomes { Gt eta + ct : f_j(eta) <= 0 for every block j } with
/// f_j(eta) = g_j(o_j + M_j eta), M_j = S_j N_A and o_j = S_j A^+ b.
struct UnconstrainedForm {
    Matrix Gt;          // p x eta
    Vector ct;          // p
    Matrix pinv_A;      // xi x nc
    Matrix N_A;         // xi x eta, orthonormal columns
    Vector offset;      // A^+ b, length xi
    BlockList blocks;
    std::vector<Eigen::Index> block_start;  // first generator row of each block

    Eigen::Index dim() const { return ct.size(); }
    Eigen::Index eta_dim() const { return N_A.cols(); }
    std::size_t num_blocks() const { return blocks.size(); }

    /// xi_j(eta) = o_j + M_j eta for block j.
    Vector block_point(std::size_t j, const Vector& eta) const;

    /// M_j = S_j N_A.
    auto block_map(std::size_t j) const {
        return N_A.middleRows(block_start[j], blocks[j].dim);
    }

    /// f_j(eta) for all blocks.
    Vector block_values(const Vector& eta) const;

    /// Gradient of f_j in eta (length eta_dim).
    Vector block_gradient(std::size_t j, const Vector& eta) const;

    /// max_j f_j(eta); -infinity when there are no blocks.
    double max_value(const Vector& eta) const;

    /// The represented point Gt eta + ct.
    Vector point(const Vector& eta) const { return Gt * eta + ct; }
};

/// Eliminates A xi = b. Throws EmptySetError when the constraints are inconsistent
/// (|A A^+ b - b| above 1e-8 relative to max(1, |b|)).
UnconstrainedForm eliminate_constraints(const CCG& z);

/// Same constraint factorization applied to new generator data (G, c) sharing z's A, b and
/// blocks. Used when only G and c vary, e.g. along an obstacle flow.
UnconstrainedForm reparametrize(const UnconstrainedForm& base, const Matrix& G, const Vector& c);

}  // namespace ccgnav
