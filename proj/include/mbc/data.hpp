#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace mbc {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using Eigen::VectorXi;

// n x p numeric data with named columns.
struct DataMatrix {
    MatrixXd values;
    std::vector<std::string> column_names;

    Eigen::Index n() const { return values.rows(); }
    Eigen::Index p() const { return values.cols(); }
};

// Thin SVD of the centered (and possibly scaled) data, truncated to the
// numerical rank. Columns of right_vectors are sign-fixed so that the
// largest-magnitude entry of each is positive.
struct CenteredDecomposition {
    MatrixXd centered;        // n x p
    VectorXd mean;            // p
    VectorXd singular_values; // r, descending, all > 0
    MatrixXd left_vectors;    // n x r
    MatrixXd right_vectors;   // p x r
    int rank = 0;
};

struct ScaledDecomposition : CenteredDecomposition {
    VectorXd scale; // p sample standard deviations (divisor n)
};

DataMatrix load_csv(const std::string& path, bool has_header);
std::vector<std::string> load_labels(const std::string& path);

// Column means and standard deviations with divisor n.
VectorXd column_means(const MatrixXd& x);
VectorXd column_sds(const MatrixXd& x);

// Sample covariance X'X/n of the centered data (divisor n, not n-1).
MatrixXd sample_covariance(const MatrixXd& x);

CenteredDecomposition center_decompose(const DataMatrix& x);
ScaledDecomposition scale_decompose(const DataMatrix& x);

// (x - mean) / sd with divisor n-1, the usual preprocessing convention.
MatrixXd standardized(const MatrixXd& x);

} // namespace mbc
