#include "mbc/init.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "mbc/rng.hpp"

namespace mbc {

Partition init_mbhac(const DataMatrix& x, TransformKind kind, int k) {
    TransformedData td = apply_transform(x, kind);
    MergeTree tree = mbhac_tree(td);
    return cut_tree(tree, k);
}

namespace {

double lloyd(const MatrixXd& x, int k, Rng& rng, VectorXi& labels) {
    const int n = static_cast<int>(x.rows());
    MatrixXd cen(k, x.cols());
    const auto seed_rows = rng.sample_without_replacement(n, k);
    for (int c = 0; c < k; ++c) cen.row(c) = x.row(seed_rows[c]);

    labels = VectorXi::Constant(n, -1);
    VectorXd dist(n);
    std::vector<int> counts(k);
    for (int it = 0; it < 100; ++it) {
        bool changed = false;
        std::fill(counts.begin(), counts.end(), 0);
        for (int i = 0; i < n; ++i) {
            int best = 0;
            double bd = std::numeric_limits<double>::infinity();
            for (int c = 0; c < k; ++c) {
                const double d = (x.row(i) - cen.row(c)).squaredNorm();
                if (d < bd) {
                    bd = d;
                    best = c;
                }
            }
            if (labels(i) != best) {
                labels(i) = best;
                changed = true;
            }
            dist(i) = bd;
            ++counts[best];
        }
        for (int c = 0; c < k; ++c) {
            if (counts[c] > 0) continue;
            // re-seed an emptied cluster at the point farthest from its
            // current centroid; donor cluster must keep at least one point
            int far = -1;
            double fd = -1.0;
            for (int i = 0; i < n; ++i) {
                if (counts[labels(i)] > 1 && dist(i) > fd) {
                    fd = dist(i);
                    far = i;
                }
            }
            --counts[labels(far)];
            labels(far) = c;
            counts[c] = 1;
            dist(far) = 0.0;
            changed = true;
        }
        cen.setZero();
        for (int i = 0; i < n; ++i) cen.row(labels(i)) += x.row(i);
        for (int c = 0; c < k; ++c) cen.row(c) /= counts[c];
        if (!changed) break;
    }

    double wcss = 0.0;
    for (int i = 0; i < n; ++i)
        wcss += (x.row(i) - cen.row(labels(i))).squaredNorm();
    return wcss;
}

} // namespace

KmeansResult init_kmeans(const MatrixXd& x, int k, int n_starts,
                         std::uint64_t seed) {
    if (k < 1 || k > x.rows())
        throw std::invalid_argument("init_kmeans: k must be in [1, n]");
    KmeansResult best;
    best.wcss = std::numeric_limits<double>::infinity();
    VectorXi labels;
    for (int s = 0; s < n_starts; ++s) {
        Rng rng(child_seed(seed, static_cast<std::uint64_t>(s)));
        const double wcss = lloyd(x, k, rng, labels);
        if (wcss < best.wcss) {
            best.wcss = wcss;
            best.partition.labels = labels.array() + 1;
            best.partition.k = k;
        }
    }
    return best;
}

GaussianMixture random_start(const MatrixXd& x, int k, ModelName model,
                             std::uint64_t seed) {
    if (k < 1 || k > x.rows())
        throw std::invalid_argument("random_start: k must be in [1, n]");
    const int p = static_cast<int>(x.cols());
    Rng rng(seed);

    GaussianMixture g;
    g.model = model;
    g.weights = VectorXd::Constant(k, 1.0 / k);
    g.means.resize(k, p);
    const auto rows = rng.sample_without_replacement(static_cast<int>(x.rows()), k);
    for (int c = 0; c < k; ++c) g.means.row(c) = x.row(rows[c]);

    const auto n = static_cast<double>(x.rows());
    MatrixXd centered = x.rowwise() - x.colwise().mean();
    VectorXd var = centered.array().square().colwise().sum() / n;
    MatrixXd cov = var.asDiagonal();
    g.covariances.assign(k, cov);
    return g;
}

GaussianMixture init_emem(const MatrixXd& x, int k, ModelName model,
                          int n_short, int short_iters, std::uint64_t seed) {
    EmOptions short_opts;
    short_opts.max_iter = short_iters;

    bool any = false;
    double best_ll = -std::numeric_limits<double>::infinity();
    GaussianMixture best;
    for (int s = 0; s < n_short; ++s) {
        GaussianMixture g0 =
            random_start(x, k, model, child_seed(seed, static_cast<std::uint64_t>(s)));
        FitResult r = em(x, g0, model, short_opts);
        if (!r.ok()) continue;
        if (!any || r.loglik > best_ll) {
            best_ll = r.loglik;
            best = r.mixture;
            any = true;
        }
    }
    if (!any) throw ComponentCollapse("emem: every short run failed");
    return best;
}

} // namespace mbc
