// End-to-end checks against the reference results and the library's
// documented contracts. Each numbered block prints one [PASS]/[FAIL] line;
// the exit status is the number of failed blocks.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numeric>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "mbc/data.hpp"
#include "mbc/init.hpp"
#include "mbc/rng.hpp"
#include "mbc/selection.hpp"

using namespace mbc;

namespace {

struct Timer {
    std::chrono::steady_clock::time_point start =
        std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(
                   std::chrono::steady_clock::now() - start)
            .count();
    }
};

struct Dataset {
    DataMatrix data;
    std::vector<int> truth;
};

std::vector<int> int_labels(const std::vector<std::string>& raw) {
    std::unordered_map<std::string, int> seen;
    std::vector<int> out;
    out.reserve(raw.size());
    for (const std::string& s : raw)
        out.push_back(seen.emplace(s, static_cast<int>(seen.size()) + 1)
                          .first->second);
    return out;
}

Dataset load_dataset(const std::string& dir, const std::string& csv,
                     const std::string& truth, bool standardize) {
    Dataset d;
    d.data = load_csv(dir + "/" + csv, true);
    if (standardize) d.data.values = standardized(d.data.values);
    d.truth = int_labels(load_labels(dir + "/" + truth));
    if (static_cast<Eigen::Index>(d.truth.size()) != d.data.n())
        throw std::runtime_error(csv + ": truth length mismatch");
    return d;
}

std::vector<int> labels_of(const Partition& part) {
    return {part.labels.data(), part.labels.data() + part.labels.size()};
}

std::vector<int> k_range_to(int hi) {
    std::vector<int> ks(hi);
    std::iota(ks.begin(), ks.end(), 1);
    return ks;
}

const std::vector<ModelName> kAllModels(all_models, all_models + 8);

// best row of a full sweep plus the ARI of its classified partition
struct BestFit {
    ModelName model;
    int k = 0;
    double bic = 0.0;
    double ari_truth = 0.0;
    double seconds = 0.0;
};

BestFit best_fit(const Dataset& d, const InitStrategy& strategy,
                 const std::vector<ModelName>& models, int k_max,
                 std::uint64_t seed = 1) {
    Timer t;
    SweepResult res = sweep(d.data, models, k_range_to(k_max), strategy, {},
                            seed);
    if (res.best_index < 0) throw std::runtime_error("every fit failed");
    const SweepRow& row = res.best();
    BestFit out;
    out.model = row.model;
    out.k = row.k;
    out.bic = row.bic;
    out.ari_truth = ari(labels_of(classify(row.fit.resp)), d.truth);
    out.seconds = t.seconds();
    return out;
}

bool in_band(double value, double center, double half_width) {
    return std::abs(value - center) <= half_width;
}

MatrixXd random_values(int n, int p, std::uint64_t seed) {
    Rng rng(seed);
    MatrixXd x(n, p);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < p; ++j) x(i, j) = (rng.uniform() - 0.5) * 4.0;
    return x;
}

DataMatrix wrap(MatrixXd values) {
    DataMatrix d;
    d.values = std::move(values);
    for (Eigen::Index j = 0; j < d.values.cols(); ++j)
        d.column_names.push_back("v" + std::to_string(j + 1));
    return d;
}

DataMatrix permute_columns(const DataMatrix& d, const std::vector<int>& perm) {
    DataMatrix out;
    out.values.resize(d.n(), d.p());
    out.column_names.resize(perm.size());
    for (size_t j = 0; j < perm.size(); ++j) {
        out.values.col(static_cast<Eigen::Index>(j)) = d.values.col(perm[j]);
        out.column_names[j] = d.column_names[perm[j]];
    }
    return out;
}

// distinct (model, k) winners across every column ordering
std::set<std::pair<std::string, int>> ordering_outcomes(const Dataset& d,
                                                        TransformKind kind,
                                                        int k_max) {
    std::vector<int> perm(d.data.p());
    std::iota(perm.begin(), perm.end(), 0);
    std::set<std::pair<std::string, int>> outcomes;
    do {
        SweepResult res = sweep(permute_columns(d.data, perm), kAllModels,
                                k_range_to(k_max), InitStrategy::mbhac(kind));
        if (res.best_index < 0)
            throw std::runtime_error("ordering sweep had no successful fit");
        outcomes.emplace(to_string(res.best().model), res.best().k);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return outcomes;
}

// ---- independent re-derivations used by the property blocks ----

double oracle_term(const MatrixXd& z, const std::vector<int>& members,
                   double alpha) {
    const int l = static_cast<int>(members.size());
    const double dl = static_cast<double>(l);
    const int p = static_cast<int>(z.cols());
    if (l == 1) return std::log(alpha);
    MatrixXd pts(l, p);
    for (int i = 0; i < l; ++i) pts.row(i) = z.row(members[i]);
    MatrixXd c = pts.rowwise() - pts.colwise().mean();
    MatrixXd w = c.transpose() * c;
    const double tr = w.trace();
    if (l <= p || l == 2) return dl * std::log((tr + alpha) / dl);
    if (tr == 0.0) return dl * std::log(alpha / dl);
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(w);
    double detlog = 0.0;
    for (int i = 0; i < p; ++i) {
        if (!(es.eigenvalues()(i) > 0.0)) {
            detlog = -std::numeric_limits<double>::infinity();
            break;
        }
        detlog += std::log(es.eigenvalues()(i) / dl);
    }
    if (std::isinf(detlog)) return dl * std::log((tr + alpha) / dl);
    if (detlog <= 0.0)
        return dl * std::log(std::exp(detlog) + (tr + alpha) / dl);
    return dl *
           (std::log(1.0 + std::exp(-detlog) * ((tr + alpha) / dl)) + detlog);
}

double oracle_alpha(const MatrixXd& z) {
    MatrixXd s = z / std::sqrt(static_cast<double>(z.rows()) *
                               static_cast<double>(z.cols()));
    MatrixXd c = s.rowwise() - s.colwise().mean();
    return std::max(c.squaredNorm(), std::numeric_limits<double>::epsilon());
}

double pairwise_ari(const std::vector<int>& u, const std::vector<int>& v) {
    const int n = static_cast<int>(u.size());
    double a = 0, b = 0, c = 0, d = 0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const bool su = u[i] == u[j];
            const bool sv = v[i] == v[j];
            if (su && sv) a += 1;
            else if (su) b += 1;
            else if (sv) c += 1;
            else d += 1;
        }
    const double denom = (a + b) * (b + d) + (a + c) * (c + d);
    if (denom == 0.0) return 1.0;
    return 2.0 * (a * d - b * c) / denom;
}

int symbolic_params(ModelName model, int k, int p) {
    const bool varying_volume = model == ModelName::VII ||
                                model == ModelName::VVI ||
                                model == ModelName::VEV ||
                                model == ModelName::VVV;
    const int volumes = varying_volume ? k : 1;
    int shapes = 0;
    switch (model) {
        case ModelName::EII:
        case ModelName::VII: shapes = 0; break;
        case ModelName::EEI:
        case ModelName::EEE:
        case ModelName::EEV:
        case ModelName::VEV: shapes = p - 1; break;
        case ModelName::VVI:
        case ModelName::VVV: shapes = k * (p - 1); break;
    }
    int orients = 0;
    switch (model) {
        case ModelName::EEE: orients = p * (p - 1) / 2; break;
        case ModelName::EEV:
        case ModelName::VEV:
        case ModelName::VVV: orients = k * p * (p - 1) / 2; break;
        default: orients = 0; break;
    }
    return (k - 1) + k * p + volumes + shapes + orients;
}

double median10(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return (v[4] + v[5]) / 2.0;
}

} // namespace

int main(int argc, char** argv) {
    const std::string dir = argc > 1 ? argv[1] : "data";
    int failures = 0;

    auto run = [&](const char* id, const char* label,
                   const std::function<bool(char*, size_t)>& fn) {
        char detail[1024];
        detail[0] = '\0';
        bool ok = false;
        Timer t;
        try {
            ok = fn(detail, sizeof(detail));
        } catch (const std::exception& e) {
            std::snprintf(detail, sizeof(detail), "exception: %s", e.what());
            ok = false;
        }
        std::printf("[%s] %s %s%s%s (%.1f s)\n", ok ? "PASS" : "FAIL", id,
                    label, detail[0] ? ": " : "", detail, t.seconds());
        std::fflush(stdout);
        if (!ok) ++failures;
    };

    Dataset flea, crabs, crabs4, voles, wine;
    try {
        flea = load_dataset(dir, "flea.csv", "flea_truth.txt", false);
        crabs = load_dataset(dir, "crabs.csv", "crabs_truth.txt", false);
        crabs4 = load_dataset(dir, "crabs4.csv", "crabs_truth.txt", false);
        voles = load_dataset(dir, "fvoles.csv", "fvoles_truth.txt", false);
        wine = load_dataset(dir, "wine.csv", "wine_truth.txt", true);
    } catch (const std::exception& e) {
        std::printf("[FAIL] 0 load datasets: %s\n", e.what());
        return 1;
    }

    run("1", "flea: STD/SPH/PCR/SVD all pick (EEE, 3), ARI 1",
        [&](char* detail, size_t cap) {
            bool ok = true;
            double worst_dev = -1.0, worst_bic = 0.0, max_time = 0.0;
            for (TransformKind kind :
                 {TransformKind::STD, TransformKind::SPH, TransformKind::PCR,
                  TransformKind::SVD}) {
                BestFit b = best_fit(flea, InitStrategy::mbhac(kind),
                                     kAllModels, 12);
                ok = ok && b.model == ModelName::EEE && b.k == 3 &&
                     in_band(b.bic, -2785.57, 1.0) && b.ari_truth == 1.0 &&
                     b.seconds < 5.0;
                if (std::abs(b.bic + 2785.57) > worst_dev) {
                    worst_dev = std::abs(b.bic + 2785.57);
                    worst_bic = b.bic;
                }
                max_time = std::max(max_time, b.seconds);
            }
            std::snprintf(detail, cap, "BIC %.2f, slowest %.1f s", worst_bic,
                          max_time);
            return ok;
        });

    run("2", "crabs: SVD fit and the column-ordering study",
        [&](char* detail, size_t cap) {
            BestFit svd = best_fit(crabs,
                                   InitStrategy::mbhac(TransformKind::SVD),
                                   kAllModels, 12);
            const bool fit_ok = svd.model == ModelName::EEV && svd.k == 4 &&
                                in_band(svd.bic, -2842.30, 3.0) &&
                                in_band(svd.ari_truth, 0.7938, 0.02);

            Timer study;
            auto raw_out = ordering_outcomes(crabs, TransformKind::RAW, 12);
            auto svd_out = ordering_outcomes(crabs, TransformKind::SVD, 12);
            const double study_s = study.seconds();

            const std::set<std::pair<std::string, int>> expected = {
                {"EEE", 9}, {"EEV", 3}};
            const bool study_ok =
                raw_out == expected && svd_out.size() == 1 && study_s < 600.0;

            std::string classes;
            for (const auto& [m, k] : raw_out)
                classes += " (" + m + "," + std::to_string(k) + ")";
            std::snprintf(detail, cap,
                          "SVD (%s, %d) BIC %.2f ARI %.4f; raw orderings ->%s, "
                          "svd orderings -> %zu class(es), study %.0f s",
                          to_string(svd.model), svd.k, svd.bic, svd.ari_truth,
                          classes.c_str(), svd_out.size(), study_s);
            return fit_ok && study_ok;
        });

    run("3", "crabs FL/RW/CW/BD subset: SVD picks (EEV, 4)",
        [&](char* detail, size_t cap) {
            BestFit b = best_fit(crabs4,
                                 InitStrategy::mbhac(TransformKind::SVD),
                                 kAllModels, 12);
            std::snprintf(detail, cap, "(%s, %d) BIC %.2f ARI %.4f",
                          to_string(b.model), b.k, b.bic, b.ari_truth);
            return b.model == ModelName::EEV && b.k == 4 &&
                   in_band(b.bic, -2609.78, 2.0) &&
                   in_band(b.ari_truth, 0.8400, 0.02);
        });

    run("4", "voles: PCR and SVD pick (EEE, 2)",
        [&](char* detail, size_t cap) {
            BestFit pcr = best_fit(voles,
                                   InitStrategy::mbhac(TransformKind::PCR),
                                   kAllModels, 12);
            BestFit svd = best_fit(voles,
                                   InitStrategy::mbhac(TransformKind::SVD),
                                   kAllModels, 12);
            std::snprintf(detail, cap,
                          "PCR (%s, %d) BIC %.2f ARI %.4f; SVD (%s, %d) BIC "
                          "%.2f ARI %.4f",
                          to_string(pcr.model), pcr.k, pcr.bic, pcr.ari_truth,
                          to_string(svd.model), svd.k, svd.bic, svd.ari_truth);
            auto good = [](const BestFit& b) {
                return b.model == ModelName::EEE && b.k == 2 &&
                       in_band(b.bic, -3844.2, 2.0) &&
                       in_band(b.ari_truth, 0.9081, 0.02);
            };
            return good(pcr) && good(svd);
        });

    run("5", "wine (standardized, EEE only): SVD picks (EEE, 3), ARI 1",
        [&](char* detail, size_t cap) {
            BestFit b = best_fit(wine, InitStrategy::mbhac(TransformKind::SVD),
                                 {ModelName::EEE}, 12);
            std::snprintf(detail, cap, "(%s, %d) BIC %.2f ARI %.4f",
                          to_string(b.model), b.k, b.bic, b.ari_truth);
            return b.model == ModelName::EEE && b.k == 3 &&
                   b.ari_truth == 1.0 && in_band(b.bic, -12306.75, 5.0);
        });

    run("6", "em log-likelihood never decreases across 1000 randomized fits",
        [&](char* detail, size_t cap) {
            Rng shapes(2024);
            int violations = 0, completed = 0;
            for (int rep = 0; rep < 1000; ++rep) {
                const int p = 1 + static_cast<int>(shapes.uniform_int(4));
                const int n = 20 + static_cast<int>(shapes.uniform_int(41));
                const int k = 1 + static_cast<int>(shapes.uniform_int(4));
                const ModelName model = all_models[rep % 8];
                MatrixXd x = random_values(n, p, 50000 + rep);

                FitResult fit;
                if (rep % 3 == 2) {
                    GaussianMixture g0 =
                        random_start(x, k, model, 60000 + rep);
                    fit = em(x, g0, model);
                } else {
                    Rng rng(70000 + rep);
                    Partition part;
                    part.k = k;
                    part.labels.resize(n);
                    for (int i = 0; i < n; ++i)
                        part.labels(i) =
                            (i < k) ? i + 1
                                    : 1 + static_cast<int>(rng.uniform_int(k));
                    fit = em(x, part, model);
                }
                if (fit.max_loglik_decrease > 1e-8) ++violations;
                if (fit.ok()) ++completed;
            }
            std::snprintf(detail, cap, "%d violations, %d/1000 fits succeeded",
                          violations, completed);
            return violations == 0 && completed > 800;
        });

    run("7", "transform moment contracts hold on 100 random matrices per kind",
        [&](char* detail, size_t cap) {
            auto descending_eigs = [](const MatrixXd& s) {
                Eigen::SelfAdjointEigenSolver<MatrixXd> es(s);
                return VectorXd(es.eigenvalues().reverse());
            };
            double worst = 0.0;
            auto note = [&worst](double dev) { worst = std::max(worst, dev); };

            for (int rep = 0; rep < 100; ++rep) {
                Rng rng(3000 + rep);
                const int p = 1 + static_cast<int>(rng.uniform_int(8));
                const int n = std::max(
                    p + 3, 10 + static_cast<int>(rng.uniform_int(60)));
                DataMatrix d = wrap(random_values(n, p, 4000 + rep));

                const MatrixXd cov = sample_covariance(d.values);
                VectorXd inv_sd = cov.diagonal().cwiseSqrt().cwiseInverse();
                const MatrixXd corr =
                    inv_sd.asDiagonal() * cov * inv_sd.asDiagonal();

                for (TransformKind kind :
                     {TransformKind::RAW, TransformKind::STD,
                      TransformKind::SPH, TransformKind::PCS,
                      TransformKind::PCR, TransformKind::SVD}) {
                    const MatrixXd z = apply_transform(d, kind).z;
                    if (kind == TransformKind::RAW) {
                        note((z - d.values).cwiseAbs().maxCoeff());
                        continue;
                    }
                    note(z.colwise().mean().cwiseAbs().maxCoeff());
                    const MatrixXd zcov = sample_covariance(z);
                    switch (kind) {
                        case TransformKind::STD:
                            note((zcov - corr).cwiseAbs().maxCoeff());
                            break;
                        case TransformKind::SPH:
                            note((zcov - MatrixXd::Identity(p, p))
                                     .cwiseAbs()
                                     .maxCoeff());
                            break;
                        case TransformKind::PCS:
                            note((zcov - MatrixXd(descending_eigs(cov)
                                                      .asDiagonal()))
                                     .cwiseAbs()
                                     .maxCoeff());
                            break;
                        case TransformKind::PCR:
                            note((zcov - MatrixXd(descending_eigs(corr)
                                                      .asDiagonal()))
                                     .cwiseAbs()
                                     .maxCoeff());
                            break;
                        case TransformKind::SVD: {
                            // variances decay as the square roots of the
                            // correlation spectrum, scaled by 1/sqrt(n)
                            VectorXd ev = descending_eigs(corr);
                            VectorXd want =
                                (ev.array() * static_cast<double>(n))
                                    .sqrt() /
                                static_cast<double>(n);
                            note((zcov - MatrixXd(want.asDiagonal()))
                                     .cwiseAbs()
                                     .maxCoeff());
                            for (int j = 1; j < p; ++j)
                                if (zcov(j, j) > zcov(j - 1, j - 1) + 1e-12)
                                    note(1.0);
                            break;
                        }
                        default: break;
                    }
                }
            }
            std::snprintf(detail, cap, "max contract deviation %.2e", worst);
            return worst < 1e-8;
        });

    run("8", "projection partitions are column-permutation invariant",
        [&](char* detail, size_t cap) {
            Rng rng(73);
            int checked = 0;
            bool ok = true;
            for (int rep = 0; rep < 10 && ok; ++rep) {
                const int p = 2 + static_cast<int>(rng.uniform_int(4));
                const int n = 16 + static_cast<int>(rng.uniform_int(20));
                DataMatrix d = wrap(random_values(n, p, 9000 + rep));

                std::vector<MergeTree> base;
                for (auto kind : {TransformKind::SPH, TransformKind::PCS,
                                  TransformKind::PCR, TransformKind::SVD})
                    base.push_back(mbhac_tree(apply_transform(d, kind)));

                for (int t = 0; t < 20 && ok; ++t) {
                    std::vector<int> perm(p);
                    std::iota(perm.begin(), perm.end(), 0);
                    for (int i = p - 1; i > 0; --i)
                        std::swap(perm[i],
                                  perm[rng.uniform_int(
                                      static_cast<std::uint64_t>(i) + 1)]);
                    DataMatrix dp = permute_columns(d, perm);
                    int which = 0;
                    for (auto kind : {TransformKind::SPH, TransformKind::PCS,
                                      TransformKind::PCR, TransformKind::SVD}) {
                        MergeTree permuted =
                            mbhac_tree(apply_transform(dp, kind));
                        for (int k : {2, 3, 5}) {
                            if (ari(cut_tree(base[which], k),
                                    cut_tree(permuted, k)) != 1.0)
                                ok = false;
                            ++checked;
                        }
                        ++which;
                    }
                }
            }
            std::snprintf(detail, cap, "%d cut comparisons", checked);
            return ok;
        });

    run("9",
        "greedy merge cost equals the exhaustive minimum at every "
        "independently checkable stage",
        [&](char* detail, size_t cap) {
            Rng shapes(41);
            int compared = 0, mismatches = 0;
            for (int rep = 0; rep < 50; ++rep) {
                const int p = 1 + static_cast<int>(shapes.uniform_int(3));
                const int n = std::max(
                    p + 2, 4 + static_cast<int>(shapes.uniform_int(9)));
                MatrixXd x = random_values(n, p, 7000 + rep);
                TransformedData td;
                td.z = x;
                td.kind = TransformKind::RAW;
                MergeTree tree = mbhac_tree(td);
                const double alpha = oracle_alpha(x);

                std::vector<std::vector<int>> clusters;
                std::vector<int> ids;
                for (int i = 0; i < n; ++i) {
                    clusters.push_back({i});
                    ids.push_back(i);
                }
                for (const Merge& m : tree.merges) {
                    size_t largest = 0;
                    for (const auto& c : clusters)
                        largest = std::max(largest, c.size());
                    // stages whose stored state an independent oracle can
                    // reproduce; later stages are covered by the dataset
                    // blocks above
                    if (p == 1 || largest <= 2) {
                        double best = std::numeric_limits<double>::infinity();
                        for (size_t a = 0; a < clusters.size(); ++a)
                            for (size_t b = a + 1; b < clusters.size(); ++b) {
                                std::vector<int> joined = clusters[a];
                                joined.insert(joined.end(),
                                              clusters[b].begin(),
                                              clusters[b].end());
                                best = std::min(
                                    best,
                                    oracle_term(x, joined, alpha) -
                                        oracle_term(x, clusters[a], alpha) -
                                        oracle_term(x, clusters[b], alpha));
                            }
                        if (std::abs(m.cost - best) >
                            1e-6 * std::max(1.0, std::abs(best)))
                            ++mismatches;
                        ++compared;
                    }
                    const auto ia =
                        std::find(ids.begin(), ids.end(), m.a) - ids.begin();
                    const auto ib =
                        std::find(ids.begin(), ids.end(), m.b) - ids.begin();
                    clusters[ia].insert(clusters[ia].end(),
                                        clusters[ib].begin(),
                                        clusters[ib].end());
                    ids[ia] = m.new_id;
                    clusters.erase(clusters.begin() + ib);
                    ids.erase(ids.begin() + ib);
                }
            }
            std::snprintf(detail, cap, "%d stages compared, %d mismatches",
                          compared, mismatches);
            return mismatches == 0 && compared >= 150;
        });

    run("10", "ari matches an independent pair-counting evaluation",
        [&](char* detail, size_t cap) {
            bool ok = ari({1, 1, 2, 2}, {2, 2, 1, 1}) == 1.0 &&
                      std::abs(ari({1, 1, 2, 2}, {1, 2, 1, 2}) + 0.5) <
                          1e-12 &&
                      std::abs(ari({1, 2, 3, 4}, {1, 1, 1, 1})) < 1e-12;
            double worst = 0.0;
            for (int rep = 0; rep < 200; ++rep) {
                Rng rng(8000 + rep);
                const int n = 5 + static_cast<int>(rng.uniform_int(26));
                std::vector<int> u(n), v(n);
                const int ku = 2 + static_cast<int>(rng.uniform_int(4));
                const int kv = 2 + static_cast<int>(rng.uniform_int(4));
                for (int i = 0; i < n; ++i) {
                    u[i] = 1 + static_cast<int>(rng.uniform_int(ku));
                    v[i] = 1 + static_cast<int>(rng.uniform_int(kv));
                }
                worst = std::max(worst,
                                 std::abs(ari(u, v) - pairwise_ari(u, v)));
            }
            std::snprintf(detail, cap, "max |difference| %.2e", worst);
            return ok && worst < 1e-10;
        });

    run("11", "parameter counts match the symbolic constraint counts",
        [&](char* detail, size_t cap) {
            int mismatches = 0;
            for (ModelName model : all_models)
                for (int k = 1; k <= 4; ++k)
                    for (int p = 1; p <= 4; ++p)
                        if (count_params(model, k, p) !=
                            symbolic_params(model, k, p))
                            ++mismatches;
            std::snprintf(detail, cap, "%d mismatches over 128 cells",
                          mismatches);
            return mismatches == 0;
        });

    run("stochastic", "seeded baselines reproduce and land in the bands",
        [&](char* detail, size_t cap) {
            // same seed, same output
            KmeansResult ka = init_kmeans(crabs.data.values, 4, 50, 7);
            KmeansResult kb = init_kmeans(crabs.data.values, 4, 50, 7);
            bool repro = ka.wcss == kb.wcss &&
                         (ka.partition.labels.array() ==
                          kb.partition.labels.array())
                             .all();
            GaussianMixture ea =
                init_emem(crabs.data.values, 4, ModelName::EEE, 50, 5, 7);
            GaussianMixture eb =
                init_emem(crabs.data.values, 4, ModelName::EEE, 50, 5, 7);
            repro = repro &&
                    (ea.means - eb.means).cwiseAbs().maxCoeff() == 0.0 &&
                    (ea.weights - eb.weights).cwiseAbs().maxCoeff() == 0.0;

            struct Cell {
                const Dataset* data;
                InitStrategy strategy;
                ModelName model;
                int k;
                double target_ari;
            };
            const std::vector<Cell> cells = {
                {&crabs, InitStrategy::kmeans(), ModelName::EEV, 4, 0.5926},
                {&crabs, InitStrategy::emem(), ModelName::EEE, 6, 0.6305},
                {&crabs4, InitStrategy::kmeans(), ModelName::EEE, 5, 0.5608},
                {&crabs4, InitStrategy::emem(), ModelName::EEV, 4, 0.8154},
                {&flea, InitStrategy::kmeans(), ModelName::EEE, 3, 1.0},
                {&flea, InitStrategy::emem(), ModelName::EEE, 3, 1.0},
                {&voles, InitStrategy::kmeans(), ModelName::EEE, 4, 0.6015},
                {&voles, InitStrategy::emem(), ModelName::EEE, 2, 0.9081},
                {&wine, InitStrategy::kmeans(), ModelName::EEE, 3, 0.9637},
                {&wine, InitStrategy::emem(), ModelName::EEE, 4, 0.8355},
            };

            bool bands = true;
            double worst_margin = 0.0;
            double crabs_emem_bic = 0.0;
            for (const Cell& cell : cells) {
                std::vector<double> aris, bics;
                for (std::uint64_t seed = 1; seed <= 10; ++seed) {
                    SweepResult res =
                        sweep(cell.data->data, {cell.model}, {cell.k},
                              cell.strategy, {}, seed);
                    if (res.best_index < 0) {
                        bands = false;
                        break;
                    }
                    aris.push_back(ari(
                        labels_of(classify(res.best().fit.resp)),
                        cell.data->truth));
                    bics.push_back(res.best().bic);
                }
                if (aris.size() != 10) break;
                const double med = median10(aris);
                const double margin = std::abs(med - cell.target_ari);
                worst_margin = std::max(worst_margin, margin);
                if (margin > 0.05) bands = false;
                if (cell.data == &crabs &&
                    cell.strategy.type == InitStrategy::Type::emem)
                    crabs_emem_bic = median10(bics);
            }
            // the one published stochastic BIC reference point
            const bool bic_ok = in_band(crabs_emem_bic, -2866.61, 3.0);

            std::snprintf(detail, cap,
                          "reproducible %s, worst median-ARI margin %.4f, "
                          "crabs emem median BIC %.2f",
                          repro ? "yes" : "no", worst_margin, crabs_emem_bic);
            return repro && bands && bic_ok;
        });

    std::printf("%d of 12 blocks failed\n", failures);
    return failures;
}
