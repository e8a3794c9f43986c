#pragma once

#include <nlohmann/json.hpp>

#include "ccgnav/ccg.hpp"
#include "ccgnav/estimation.hpp"

namespace ccgnav {

using Json = nlohmann::json;

/// Row-major nested arrays. A matrix with zero rows serializes as [].
Json matrix_to_json(const Matrix& m);

/// Inverse of matrix_to_json; `cols_if_empty` fixes the column count of an empty document.
Matrix matrix_from_json(const Json& j, Eigen::Index cols_if_empty = 0);

Json vector_to_json(const Vector& v);
Vector vector_from_json(const Json& j);

Json blocks_to_json(const BlockList& blocks);
BlockList blocks_from_json(const Json& j);

/// {"G", "c", "A", "b", "blocks"}.
Json ccg_to_json(const CCG& z);
CCG ccg_from_json(const Json& j);

/// {"R1".."R5", "t1", "t2", "blocks", "N"}.
Json params_to_json(const EstimatorParams& p);
EstimatorParams params_from_json(const Json& j);

}  // namespace ccgnav
