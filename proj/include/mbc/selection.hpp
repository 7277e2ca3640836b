#pragma once

#include <vector>

#include "mbc/init.hpp"

namespace mbc {

// Number of independent parameters: (k-1) weights + k*p means + covariance
// parameters as constrained by the model.
int count_params(ModelName model, int k, int p);

// 2*loglik - nu*log(n); larger is better.
double bic(double loglik, int nu, int n);

// Adjusted Rand index between two partitions of the same rows, via the
// Hubert-Arabie contingency-table formula. Relabeling-invariant; 1 iff the
// partitions are identical.
double ari(const Partition& a, const Partition& b);
double ari(const std::vector<int>& a, const std::vector<int>& b);

struct InitStrategy {
    enum class Type { mbhac, kmeans, emem };
    Type type = Type::mbhac;
    TransformKind kind = TransformKind::SVD; // mbhac only
    int n_starts = 50;                       // kmeans
    int n_short = 50;                        // emem
    int short_iters = 5;                     // emem

    static InitStrategy mbhac(TransformKind kind);
    static InitStrategy kmeans();
    static InitStrategy emem();
};

std::string describe(const InitStrategy& strategy);

struct SweepRow {
    ModelName model;
    int k = 0;
    FitResult fit;
    double bic = 0.0; // valid only when fit.ok()
    double millis = 0.0;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    int best_index = -1; // argmax BIC over successful fits, -1 if none

    const SweepRow& best() const { return rows.at(best_index); }
};

// One EM fit per (model, k), initialized per strategy. MBHAC strategies
// build a single tree and cut it at every k; stochastic strategies derive a
// child seed per k. Failed fits are recorded and skipped by the argmax.
SweepResult sweep(const DataMatrix& x, const std::vector<ModelName>& models,
                  const std::vector<int>& k_range,
                  const InitStrategy& strategy, const EmOptions& opts = {},
                  std::uint64_t seed = 1);

} // namespace mbc
