#include "ccgnav/ccg.hpp"

#include <numeric>
#include <string>
#include <utility>

#include "ccgnav/errors.hpp"

namespace ccgnav {

Eigen::Index total_dim(const BlockList& blocks) {
    return std::accumulate(blocks.begin(), blocks.end(), Eigen::Index{0},
                           [](Eigen::Index acc, const GeneratorBlock& blk) { return acc + blk.dim; });
}

BlockList concat(const BlockList& a, const BlockList& b) {
    BlockList out = a;
    out.insert(out.end(), b.begin(), b.end());
    return out;
}

CCG::CCG(Matrix G, Vector c, Matrix A, Vector b, BlockList blocks)
    : G_(std::move(G)), c_(std::move(c)), A_(std::move(A)), b_(std::move(b)),
      blocks_(std::move(blocks)) {
    const Eigen::Index xi = total_dim(blocks_);
    for (const auto& blk : blocks_) {
        if (blk.dim < 1) {
            throw DimensionError("CCG: generator block dimension must be >= 1");
        }
    }
    if (G_.rows() != c_.size()) {
        throw DimensionError("CCG: G has " + std::to_string(G_.rows()) + " rows but c has " +
                             std::to_string(c_.size()) + " entries");
    }
    if (G_.cols() != xi) {
        throw DimensionError("CCG: G has " + std::to_string(G_.cols()) +
                             " columns but blocks sum to " + std::to_string(xi));
    }
    // A 0x0 constraint matrix is accepted as "no constraints" regardless of xi.
    if (A_.rows() == 0) {
        A_.resize(0, xi);
    }
    if (A_.cols() != xi) {
        throw DimensionError("CCG: A has " + std::to_string(A_.cols()) +
                             " columns but blocks sum to " + std::to_string(xi));
    }
    if (A_.rows() != b_.size()) {
        throw DimensionError("CCG: A has " + std::to_string(A_.rows()) + " rows but b has " +
                             std::to_string(b_.size()) + " entries");
    }
}

CCG::CCG() : CCG(Matrix(0, 0), Vector(0), BlockList{}) {}

CCG::CCG(Matrix G, Vector c, BlockList blocks)
    : CCG(std::move(G), std::move(c), Matrix(0, 0), Vector(0), std::move(blocks)) {}

CCG CCG::point(const Vector& c) {
    return CCG(Matrix(c.size(), 0), c, BlockList{});
}

CCG CCG::ellipsoid(const Matrix& shape, const Vector& center) {
    return CCG(shape, center, BlockList{GeneratorBlock::ball2(shape.cols())});
}

CCG CCG::zonotope(const Matrix& G, const Vector& c) {
    return CCG(G, c, BlockList(static_cast<std::size_t>(G.cols()), GeneratorBlock::ball2(1)));
}

CCG CCG::constrained_zonotope(const Matrix& G, const Vector& c, const Matrix& A,
                              const Vector& b) {
    return CCG(G, c, A, b, BlockList(static_cast<std::size_t>(G.cols()), GeneratorBlock::ball2(1)));
}

CCG affine_map(const CCG& z, const Matrix& r, const Vector& t) {
    if (r.cols() != z.dim()) {
        throw DimensionError("affine_map: R has " + std::to_string(r.cols()) +
                             " columns, set dimension is " + std::to_string(z.dim()));
    }
    if (r.rows() != t.size()) {
        throw DimensionError("affine_map: R rows and t length differ");
    }
    return CCG(r * z.G(), r * z.c() + t, z.A(), z.b(), z.blocks());
}

CCG linear_map(const CCG& z, const Matrix& r) {
    return affine_map(z, r, Vector::Zero(r.rows()));
}

CCG minkowski_sum(const CCG& z, const CCG& w) {
    if (z.dim() != w.dim()) {
        throw DimensionError("minkowski_sum: ambient dimensions " + std::to_string(z.dim()) +
                             " and " + std::to_string(w.dim()) + " differ");
    }
    return CCG(hstack(z.G(), w.G()), z.c() + w.c(), block_diag(z.A(), w.A()),
               vstack(z.b(), w.b()), concat(z.blocks(), w.blocks()));
}

CCG generalized_intersection(const CCG& z, const Matrix& r, const CCG& v) {
    if (r.cols() != z.dim() || r.rows() != v.dim()) {
        throw DimensionError("generalized_intersection: R must be " + std::to_string(v.dim()) +
                             "x" + std::to_string(z.dim()));
    }
    const Eigen::Index nv = v.num_generators();

    Matrix G = hstack(z.G(), Matrix::Zero(z.dim(), nv));
    Matrix coupling = hstack(r * z.G(), -v.G());
    Matrix A = vstack(block_diag(z.A(), v.A()), coupling);
    Vector b = vstack(vstack(z.b(), v.b()), Vector(v.c() - r * z.c()));
    return CCG(std::move(G), z.c(), std::move(A), std::move(b), concat(z.blocks(), v.blocks()));
}

CCG intersection(const CCG& z, const CCG& v) {
    return generalized_intersection(z, Matrix::Identity(z.dim(), z.dim()), v);
}

}  // namespace ccgnav
