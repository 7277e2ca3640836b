#pragma once

#include <cstdint>

#include "mbc/gmm.hpp"

namespace mbc {

// Transform, build the merge tree, cut at k. EM itself always runs on the
// original-scale data; only the tree sees the transformed values.
Partition init_mbhac(const DataMatrix& x, TransformKind kind, int k);

struct KmeansResult {
    Partition partition;
    double wcss = 0.0;
};

// Best of n_starts Lloyd runs by within-cluster sum of squares. A cluster
// emptied during an iteration is re-seeded at the point farthest from its
// assigned centroid. Deterministic given seed.
KmeansResult init_kmeans(const MatrixXd& x, int k, int n_starts,
                         std::uint64_t seed);

// Uniform weights, means drawn as k distinct data rows, all covariances the
// diagonal of the sample variances.
GaussianMixture random_start(const MatrixXd& x, int k, ModelName model,
                             std::uint64_t seed);

// n_short random starts each advanced short_iters EM iterations; the
// parameters with the best short-run log-likelihood seed the long run.
// Short runs that collapse are discarded; throws if every one fails.
GaussianMixture init_emem(const MatrixXd& x, int k, ModelName model,
                          int n_short, int short_iters, std::uint64_t seed);

} // namespace mbc
