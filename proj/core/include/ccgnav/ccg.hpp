#pragma once

#include <cstddef>
#include <vector>

#include "ccgnav/linalg.hpp"

namespace ccgnav {

/// One factor of the generator set: the zero-sublevel set of g(xi) = 0.5 |xi|^2 - 0.5,
/// i.e. the unit Euclidean ball of dimension `dim`. Dimension-1 blocks are intervals, so a
/// product of them is the unit infinity-norm ball used by zonotopes.
struct GeneratorBlock {
    enum class Kind { Ball2 };

    Kind kind = Kind::Ball2;
    Eigen::Index dim = 1;

    static GeneratorBlock ball2(Eigen::Index d) { return GeneratorBlock{Kind::Ball2, d}; }

    double value(const Eigen::Ref<const Vector>& xi) const { return 0.5 * xi.squaredNorm() - 0.5; }
    Vector gradient(const Eigen::Ref<const Vector>& xi) const { return xi; }
    Matrix hessian() const { return Matrix::Identity(dim, dim); }

    friend bool operator==(const GeneratorBlock&, const GeneratorBlock&) = default;
};

using BlockList = std::vector<GeneratorBlock>;

/// Total generator count of a block list.
Eigen::Index total_dim(const BlockList& blocks);

/// Concatenation of two block lists, `a` first.
BlockList concat(const BlockList& a, const BlockList& b);

/// Constrained Convex Generator: { G xi + c : A xi = b, xi in blocks[0] x ... x blocks[G-1] }.
///
/// Immutable value type. The constructor checks the structural invariants (column counts of
/// G and A equal the total block dimension, rows of A equal the length of b, rows of G equal
/// the length of c) and throws DimensionError otherwise.
class CCG {
public:
    /// Zero-dimensional singleton.
    CCG();

    CCG(Matrix G, Vector c, Matrix A, Vector b, BlockList blocks);

    /// Unconstrained CCG (no equality rows).
    CCG(Matrix G, Vector c, BlockList blocks);

    /// Singleton {c}: zero generators.
    static CCG point(const Vector& c);

    /// Ellipsoid {shape * xi + center : |xi| <= 1} with a single ball block.
    static CCG ellipsoid(const Matrix& shape, const Vector& center);

    /// Zonotope {G xi + c : |xi|_inf <= 1}, one scalar block per column.
    static CCG zonotope(const Matrix& G, const Vector& c);

    /// Constrained zonotope, one scalar block per column of G.
    static CCG constrained_zonotope(const Matrix& G, const Vector& c, const Matrix& A,
                                    const Vector& b);

    const Matrix& G() const { return G_; }
    const Vector& c() const { return c_; }
    const Matrix& A() const { return A_; }
    const Vector& b() const { return b_; }
    const BlockList& blocks() const { return blocks_; }

    Eigen::Index dim() const { return c_.size(); }
    Eigen::Index num_generators() const { return G_.cols(); }
    Eigen::Index num_constraints() const { return A_.rows(); }
    std::size_t num_blocks() const { return blocks_.size(); }
    bool is_unconstrained() const { return A_.rows() == 0; }

private:
    Matrix G_;
    Vector c_;
    Matrix A_;
    Vector b_;
    BlockList blocks_;
};

/// R Z + t. Shares Z's constraints and blocks.
CCG affine_map(const CCG& z, const Matrix& r, const Vector& t);

/// R Z (t = 0).
CCG linear_map(const CCG& z, const Matrix& r);

/// Z (+) W. Block list is Z's followed by W's; A is block-diagonal.
CCG minkowski_sum(const CCG& z, const CCG& w);

/// Z cap_R V = { x in Z : R x in V }.
CCG generalized_intersection(const CCG& z, const Matrix& r, const CCG& v);

/// Z cap V (R = identity).
CCG intersection(const CCG& z, const CCG& v);

}  // namespace ccgnav
