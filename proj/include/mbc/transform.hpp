#pragma once

#include <optional>
#include <string>

#include "mbc/data.hpp"

namespace mbc {

enum class TransformKind { RAW, STD, SPH, PCS, PCR, SVD };

const char* to_string(TransformKind kind);
std::optional<TransformKind> parse_transform_kind(const std::string& name);

// Data as fed to the hierarchical clustering stage. q <= p columns: scaling
// transforms keep all p, projection transforms keep the numerical rank.
struct TransformedData {
    MatrixXd z;
    TransformKind kind;
};

// RAW identity; STD columns scaled to unit variance; SPH whitened (unit
// covariance); PCS principal component scores of the covariance matrix;
// PCR scores of the correlation matrix; SVD correlation scores scaled by
// the inverse square root of the singular values.
TransformedData apply_transform(const DataMatrix& x, TransformKind kind);

} // namespace mbc
