#include "mbc/transform.hpp"

#include <stdexcept>

namespace mbc {

const char* to_string(TransformKind kind) {
    switch (kind) {
        case TransformKind::RAW: return "raw";
        case TransformKind::STD: return "std";
        case TransformKind::SPH: return "sph";
        case TransformKind::PCS: return "pcs";
        case TransformKind::PCR: return "pcr";
        case TransformKind::SVD: return "svd";
    }
    return "?";
}

std::optional<TransformKind> parse_transform_kind(const std::string& name) {
    std::string s;
    for (char c : name) s += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (s == "raw") return TransformKind::RAW;
    if (s == "std") return TransformKind::STD;
    if (s == "sph") return TransformKind::SPH;
    if (s == "pcs") return TransformKind::PCS;
    if (s == "pcr") return TransformKind::PCR;
    if (s == "svd") return TransformKind::SVD;
    return std::nullopt;
}

TransformedData apply_transform(const DataMatrix& x, TransformKind kind) {
    TransformedData out;
    out.kind = kind;
    const double n = static_cast<double>(x.n());

    switch (kind) {
        case TransformKind::RAW:
            out.z = x.values;
            break;
        case TransformKind::STD: {
            VectorXd sds = column_sds(x.values);
            for (Eigen::Index j = 0; j < sds.size(); ++j) {
                if (!(sds(j) > 0.0))
                    throw std::runtime_error("zero-variance column '" +
                                             x.column_names[static_cast<size_t>(j)] +
                                             "' cannot be standardized");
            }
            MatrixXd c = x.values.rowwise() - x.values.colwise().mean();
            out.z = c.array().rowwise() / sds.transpose().array();
            break;
        }
        case TransformKind::SPH: {
            auto d = center_decompose(x);
            out.z = d.left_vectors * std::sqrt(n);
            break;
        }
        case TransformKind::PCS: {
            auto d = center_decompose(x);
            out.z = d.left_vectors * d.singular_values.asDiagonal();
            break;
        }
        case TransformKind::PCR: {
            auto d = scale_decompose(x);
            out.z = d.left_vectors * d.singular_values.asDiagonal();
            break;
        }
        case TransformKind::SVD: {
            auto d = scale_decompose(x);
            out.z = d.left_vectors *
                    d.singular_values.array().sqrt().matrix().asDiagonal();
            break;
        }
    }
    return out;
}

} // namespace mbc
