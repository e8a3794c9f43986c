#include "ccgnav/io.hpp"

#include <string>

#include "ccgnav/errors.hpp"

namespace ccgnav {

Json matrix_to_json(const Matrix& m) {
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            row.push_back(m(i, j));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const Json& j, Eigen::Index cols_if_empty) {
    if (!j.is_array()) {
        throw ConfigError("matrix document must be an array of rows");
    }
    if (j.empty()) {
        return Matrix(0, cols_if_empty);
    }
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = static_cast<Eigen::Index>(j.at(0).size());
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const Json& row = j.at(static_cast<std::size_t>(i));
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
            throw ConfigError("matrix document has ragged rows");
        }
        for (Eigen::Index k = 0; k < cols; ++k) {
            m(i, k) = row.at(static_cast<std::size_t>(k)).get<double>();
        }
    }
    return m;
}

Json vector_to_json(const Vector& v) {
    Json out = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        out.push_back(v[i]);
    }
    return out;
}

Vector vector_from_json(const Json& j) {
    if (!j.is_array()) {
        throw ConfigError("vector document must be an array");
    }
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
    }
    return v;
}

Json blocks_to_json(const BlockList& blocks) {
    Json out = Json::array();
    for (const auto& b : blocks) {
        out.push_back({{"kind", "ball2"}, {"dim", b.dim}});
    }
    return out;
}

BlockList blocks_from_json(const Json& j) {
    BlockList out;
    for (const auto& b : j) {
        const std::string kind = b.at("kind").get<std::string>();
        if (kind != "ball2") {
            throw ConfigError("unsupported generator block kind '" + kind + "'");
        }
        out.push_back(GeneratorBlock::ball2(b.at("dim").get<Eigen::Index>()));
    }
    return out;
}

Json ccg_to_json(const CCG& z) {
    return {{"G", matrix_to_json(z.G())},
            {"c", vector_to_json(z.c())},
            {"A", matrix_to_json(z.A())},
            {"b", vector_to_json(z.b())},
            {"blocks", blocks_to_json(z.blocks())}};
}

CCG ccg_from_json(const Json& j) {
    try {
        const BlockList blocks = blocks_from_json(j.at("blocks"));
        const Eigen::Index xi = total_dim(blocks);
        Vector c = vector_from_json(j.at("c"));
        Matrix G = matrix_from_json(j.at("G"), xi);
        if (G.rows() == 0 && c.size() > 0) {
            G.resize(c.size(), 0);
        }
        Matrix A = j.contains("A") ? matrix_from_json(j.at("A"), xi) : Matrix(0, xi);
        Vector b = j.contains("b") ? vector_from_json(j.at("b")) : Vector(0);
        return CCG(std::move(G), std::move(c), std::move(A), std::move(b), blocks);
    } catch (const Json::exception& e) {
        throw ConfigError(std::string("malformed CCG document: ") + e.what());
    }
}

Json params_to_json(const EstimatorParams& p) {
    return {{"R1", matrix_to_json(p.R1)}, {"R2", matrix_to_json(p.R2)},
            {"R3", matrix_to_json(p.R3)}, {"R4", matrix_to_json(p.R4)},
            {"R5", matrix_to_json(p.R5)}, {"t1", vector_to_json(p.t1)},
            {"t2", vector_to_json(p.t2)}, {"blocks", blocks_to_json(p.blocks)},
            {"N", p.N}};
}

EstimatorParams params_from_json(const Json& j) {
    try {
        EstimatorParams p;
        p.blocks = blocks_from_json(j.at("blocks"));
        p.N = j.at("N").get<int>();
        p.R1 = matrix_from_json(j.at("R1"));
        p.R2 = matrix_from_json(j.at("R2"), total_dim(p.blocks));
        p.R3 = matrix_from_json(j.at("R3"), p.R1.cols());
        p.R4 = matrix_from_json(j.at("R4"), total_dim(p.blocks));
        p.R5 = matrix_from_json(j.at("R5"), p.R1.cols());
        p.t1 = vector_from_json(j.at("t1"));
        p.t2 = vector_from_json(j.at("t2"));
        if (p.R2.cols() != total_dim(p.blocks) || p.R4.cols() != total_dim(p.blocks) ||
            p.R3.rows() != p.t2.size() || p.R4.rows() != p.t2.size() ||
            p.R5.rows() != p.t2.size() || p.R1.rows() != p.t1.size()) {
            throw ConfigError("estimator params document has inconsistent dimensions");
        }
        return p;
    } catch (const Json::exception& e) {
        throw ConfigError(std::string("malformed estimator params document: ") + e.what());
    }
}

}  // namespace ccgnav
