#pragma once

#include <vector>

#include "mbc/transform.hpp"

namespace mbc {

// Hard assignment of n observations to k non-empty groups, labels in 1..k.
struct Partition {
    VectorXi labels;
    int k = 0;

    Eigen::Index n() const { return labels.size(); }
};

// One agglomeration step: clusters a and b (a < b) merged into new_id.
struct Merge {
    int a = 0;
    int b = 0;
    int new_id = 0;
    double cost = 0.0;
};

// Full dendrogram: leaves are 0..n-1, merge t creates id n+t.
struct MergeTree {
    std::vector<Merge> merges;
    int leaf_count = 0;
};

// Running statistics of one cluster; merging is exact via the rank-one
// mean-difference update, no pass over member rows.
struct ClusterSuffStats {
    double count = 0.0;
    VectorXd sum;
    MatrixXd scatter;

    static ClusterSuffStats of_point(const VectorXd& x);
    static ClusterSuffStats merged(const ClusterSuffStats& a,
                                   const ClusterSuffStats& b);
};

// Greedy merging minimizing the gaussian classification-likelihood stage
// criterion n_k log(|W_k/n_k| + (tr(W_k) + alpha)/n_k) summed over merged
// groups, alpha = tr(W_total)/(n*p); the additive smoothing keeps the
// criterion defined for singular scatter matrices. The agglomeration is an
// exact port of the reference implementation the published results come
// from, including its tie handling (last minimal candidate in storage order
// wins) and its update of stored triangular factors, which makes RAW/STD
// trees depend on the order of the input columns on coarse data.
MergeTree mbhac_tree(const TransformedData& z);

// Partition from undoing the last k-1 merges; parts numbered 1..k by first
// occurrence in row order.
Partition cut_tree(const MergeTree& tree, int k);

} // namespace mbc
