#include "mbc/selection.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_map>

#include "mbc/rng.hpp"

namespace mbc {

int count_params(ModelName model, int k, int p) {
    if (k < 1 || p < 1) throw std::invalid_argument("count_params: k, p >= 1");
    const int full = p * (p + 1) / 2;
    const int orient = p * (p - 1) / 2; // free parameters of one orthogonal O
    const int shape = p - 1;            // diagonal A with fixed determinant
    int cov = 0;
    switch (model) {
        case ModelName::EII: cov = 1; break;
        case ModelName::VII: cov = k; break;
        case ModelName::EEI: cov = p; break;
        case ModelName::VVI: cov = k * p; break;
        case ModelName::EEE: cov = full; break;
        case ModelName::EEV: cov = 1 + shape + k * orient; break;
        case ModelName::VEV: cov = k + shape + k * orient; break;
        case ModelName::VVV: cov = k * full; break;
    }
    return (k - 1) + k * p + cov;
}

double bic(double loglik, int nu, int n) {
    return 2.0 * loglik - static_cast<double>(nu) * std::log(static_cast<double>(n));
}

double ari(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() != b.size())
        throw std::invalid_argument("ari: partitions have different lengths");
    const size_t n = a.size();

    std::unordered_map<int, int> amap, bmap;
    std::vector<int> ai(n), bi(n);
    for (size_t i = 0; i < n; ++i) {
        ai[i] = amap.emplace(a[i], static_cast<int>(amap.size())).first->second;
        bi[i] = bmap.emplace(b[i], static_cast<int>(bmap.size())).first->second;
    }
    const int ka = static_cast<int>(amap.size());
    const int kb = static_cast<int>(bmap.size());

    std::vector<long long> table(static_cast<size_t>(ka) * kb, 0);
    std::vector<long long> arow(ka, 0), bcol(kb, 0);
    for (size_t i = 0; i < n; ++i) {
        ++table[static_cast<size_t>(ai[i]) * kb + bi[i]];
        ++arow[ai[i]];
        ++bcol[bi[i]];
    }

    auto comb2 = [](long long m) { return 0.5 * static_cast<double>(m) * (m - 1); };
    double index = 0.0;
    for (const long long v : table) index += comb2(v);
    double sum_a = 0.0, sum_b = 0.0;
    for (const long long v : arow) sum_a += comb2(v);
    for (const long long v : bcol) sum_b += comb2(v);
    const double total = comb2(static_cast<long long>(n));
    if (total == 0.0) return 1.0;

    const double expected = sum_a * sum_b / total;
    const double max_index = 0.5 * (sum_a + sum_b);
    if (max_index == expected) return 1.0; // both trivial partitions, identical
    return (index - expected) / (max_index - expected);
}

double ari(const Partition& a, const Partition& b) {
    std::vector<int> va(a.labels.data(), a.labels.data() + a.labels.size());
    std::vector<int> vb(b.labels.data(), b.labels.data() + b.labels.size());
    return ari(va, vb);
}

InitStrategy InitStrategy::mbhac(TransformKind kind) {
    InitStrategy s;
    s.type = Type::mbhac;
    s.kind = kind;
    return s;
}

InitStrategy InitStrategy::kmeans() {
    InitStrategy s;
    s.type = Type::kmeans;
    return s;
}

InitStrategy InitStrategy::emem() {
    InitStrategy s;
    s.type = Type::emem;
    return s;
}

std::string describe(const InitStrategy& strategy) {
    switch (strategy.type) {
        case InitStrategy::Type::mbhac:
            return std::string("mbhac:") + to_string(strategy.kind);
        case InitStrategy::Type::kmeans: return "kmeans";
        case InitStrategy::Type::emem: return "emem";
    }
    return "?";
}

namespace {

int model_index(ModelName m) {
    for (int i = 0; i < 8; ++i)
        if (all_models[i] == m) return i;
    return 0;
}

} // namespace

SweepResult sweep(const DataMatrix& x, const std::vector<ModelName>& models,
                  const std::vector<int>& k_range,
                  const InitStrategy& strategy, const EmOptions& opts,
                  std::uint64_t seed) {
    if (models.empty() || k_range.empty())
        throw std::invalid_argument("sweep: empty model set or k range");

    SweepResult out;
    MergeTree tree;
    if (strategy.type == InitStrategy::Type::mbhac)
        tree = mbhac_tree(apply_transform(x, strategy.kind));

    const int n = static_cast<int>(x.n());
    const int p = static_cast<int>(x.p());
    double best_bic = -std::numeric_limits<double>::infinity();

    for (const int k : k_range) {
        if (k < 1 || k > n)
            throw std::invalid_argument("sweep: k out of [1, n]");
        Partition part;
        if (strategy.type == InitStrategy::Type::mbhac) {
            part = cut_tree(tree, k);
        } else if (strategy.type == InitStrategy::Type::kmeans) {
            part = init_kmeans(x.values, k, strategy.n_starts,
                               child_seed(seed, static_cast<std::uint64_t>(k)))
                       .partition;
        }

        for (const ModelName model : models) {
            const auto t0 = std::chrono::steady_clock::now();
            FitResult fit;
            if (strategy.type == InitStrategy::Type::emem) {
                const std::uint64_t s =
                    child_seed(seed, (static_cast<std::uint64_t>(k) << 8) +
                                         static_cast<std::uint64_t>(model_index(model)));
                try {
                    GaussianMixture g0 = init_emem(x.values, k, model,
                                                   strategy.n_short,
                                                   strategy.short_iters, s);
                    fit = em(x.values, g0, model, opts);
                } catch (const ComponentCollapse&) {
                    fit.status = FitStatus::component_collapse;
                } catch (const Singularity&) {
                    fit.status = FitStatus::singularity;
                }
            } else {
                fit = em(x.values, part, model, opts);
            }
            const auto t1 = std::chrono::steady_clock::now();

            fit.init.strategy = describe(strategy);
            fit.init.seed = seed;

            SweepRow row;
            row.model = model;
            row.k = k;
            row.fit = std::move(fit);
            row.millis =
                std::chrono::duration<double, std::milli>(t1 - t0).count();
            if (row.fit.ok()) {
                row.bic = bic(row.fit.loglik, count_params(model, k, p), n);
                if (row.bic > best_bic) {
                    best_bic = row.bic;
                    out.best_index = static_cast<int>(out.rows.size());
                }
            }
            out.rows.push_back(std::move(row));
        }
    }
    return out;
}

} // namespace mbc
