#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <iostream>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "mbc/rng.hpp"
#include "mbc/selection.hpp"

using nlohmann::json;

namespace {

struct CommonOpts {
    std::string input;
    std::string truth;
    std::string init = "mbhac:svd";
    std::string models = "all";
    std::string k = "1..12";
    double tol = 1e-5;
    std::uint64_t seed = 1;
    bool standardize = false;
    bool no_header = false;
    std::string format = "table";
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--input", o.input, "input CSV file")->required();
    cmd->add_option("--truth", o.truth, "true class labels, one line per row");
    cmd->add_option("--init", o.init,
                    "initialization: mbhac:{raw|std|sph|pcs|pcr|svd}, kmeans, emem");
    cmd->add_option("--models", o.models,
                    "comma-separated covariance models, or 'all'");
    cmd->add_option("--k", o.k, "number of components, single K or range A..B");
    cmd->add_option("--tol", o.tol, "EM relative log-likelihood tolerance");
    cmd->add_option("--seed", o.seed, "seed for stochastic strategies");
    cmd->add_flag("--standardize", o.standardize,
                  "standardize columns before fitting");
    cmd->add_flag("--no-header", o.no_header, "input CSV has no header row");
    cmd->add_option("--format", o.format, "output format")
        ->check(CLI::IsMember({"table", "jsonl"}));
}

mbc::InitStrategy parse_init(const std::string& s) {
    if (s == "kmeans") return mbc::InitStrategy::kmeans();
    if (s == "emem") return mbc::InitStrategy::emem();
    const std::string prefix = "mbhac:";
    if (s.rfind(prefix, 0) == 0) {
        const auto kind = mbc::parse_transform_kind(s.substr(prefix.size()));
        if (kind) return mbc::InitStrategy::mbhac(*kind);
    }
    throw std::runtime_error("unknown --init '" + s + "'");
}

std::vector<mbc::ModelName> parse_models(const std::string& s) {
    if (s == "all")
        return {std::begin(mbc::all_models), std::end(mbc::all_models)};
    std::vector<mbc::ModelName> out;
    size_t pos = 0;
    while (pos <= s.size()) {
        const size_t c = s.find(',', pos);
        const std::string name =
            s.substr(pos, c == std::string::npos ? std::string::npos : c - pos);
        const auto m = mbc::parse_model_name(name);
        if (!m) throw std::runtime_error("unknown model '" + name + "'");
        out.push_back(*m);
        if (c == std::string::npos) break;
        pos = c + 1;
    }
    if (out.empty()) throw std::runtime_error("empty --models");
    return out;
}

std::vector<int> parse_k_range(const std::string& s, int n) {
    int a = 0, b = 0;
    const size_t dots = s.find("..");
    try {
        if (dots == std::string::npos) {
            a = b = std::stoi(s);
        } else {
            a = std::stoi(s.substr(0, dots));
            b = std::stoi(s.substr(dots + 2));
        }
    } catch (const std::exception&) {
        throw std::runtime_error("cannot parse --k '" + s + "'");
    }
    if (a < 1 || b < a) throw std::runtime_error("invalid --k '" + s + "'");
    if (b > n)
        throw std::runtime_error("--k upper bound " + std::to_string(b) +
                                 " exceeds n = " + std::to_string(n));
    std::vector<int> out(b - a + 1);
    std::iota(out.begin(), out.end(), a);
    return out;
}

std::vector<int> labels_to_ints(const std::vector<std::string>& labels) {
    std::map<std::string, int> seen;
    std::vector<int> out;
    out.reserve(labels.size());
    for (const auto& s : labels)
        out.push_back(seen.emplace(s, static_cast<int>(seen.size()) + 1).first->second);
    return out;
}

const char* status_string(mbc::FitStatus s) {
    switch (s) {
        case mbc::FitStatus::ok: return "ok";
        case mbc::FitStatus::component_collapse: return "collapse";
        case mbc::FitStatus::singularity: return "singularity";
    }
    return "?";
}

struct LoadedData {
    mbc::DataMatrix x;
    std::vector<int> truth; // empty when not given
};

LoadedData load(const CommonOpts& o) {
    LoadedData d;
    d.x = mbc::load_csv(o.input, !o.no_header);
    if (o.standardize) d.x.values = mbc::standardized(d.x.values);
    if (!o.truth.empty()) {
        d.truth = labels_to_ints(mbc::load_labels(o.truth));
        if (static_cast<Eigen::Index>(d.truth.size()) != d.x.n())
            throw std::runtime_error("--truth has " +
                                     std::to_string(d.truth.size()) +
                                     " labels for " + std::to_string(d.x.n()) +
                                     " rows");
    }
    return d;
}

std::vector<int> row_labels(const mbc::SweepRow& row) {
    const mbc::Partition part = mbc::classify(row.fit.resp);
    return {part.labels.data(), part.labels.data() + part.labels.size()};
}

int run_fit(const CommonOpts& o) {
    const LoadedData d = load(o);
    const auto strategy = parse_init(o.init);
    const auto models = parse_models(o.models);
    const auto ks = parse_k_range(o.k, static_cast<int>(d.x.n()));

    mbc::EmOptions opts;
    opts.tol = o.tol;

    const auto t0 = std::chrono::steady_clock::now();
    const mbc::SweepResult res =
        mbc::sweep(d.x, models, ks, strategy, opts, o.seed);
    const double total_s = std::chrono::duration<double>(
                               std::chrono::steady_clock::now() - t0)
                               .count();

    if (res.best_index < 0) {
        std::cerr << "no successful fit in the sweep\n";
        return 1;
    }

    auto row_ari = [&](const mbc::SweepRow& row) -> double {
        return mbc::ari(row_labels(row), d.truth);
    };

    const mbc::SweepRow& best = res.best();
    if (o.format == "jsonl") {
        for (const auto& row : res.rows) {
            json j;
            j["type"] = "fit";
            j["init"] = mbc::describe(strategy);
            j["model"] = mbc::to_string(row.model);
            j["k"] = row.k;
            j["status"] = status_string(row.fit.status);
            j["millis"] = row.millis;
            if (row.fit.ok()) {
                j["converged"] = row.fit.converged;
                j["n_iter"] = row.fit.n_iter;
                j["loglik"] = row.fit.loglik;
                j["nu"] = mbc::count_params(row.model, row.k,
                                            static_cast<int>(d.x.p()));
                j["bic"] = row.bic;
                if (!d.truth.empty()) j["ari"] = row_ari(row);
            }
            std::cout << j.dump() << "\n";
        }
        json j;
        j["type"] = "best";
        j["init"] = mbc::describe(strategy);
        j["seed"] = o.seed;
        j["model"] = mbc::to_string(best.model);
        j["k"] = best.k;
        j["loglik"] = best.fit.loglik;
        j["bic"] = best.bic;
        if (!d.truth.empty()) j["ari"] = row_ari(best);
        const auto& g = best.fit.mixture;
        j["weights"] = std::vector<double>(g.weights.data(),
                                           g.weights.data() + g.weights.size());
        json means = json::array();
        for (int c = 0; c < g.components(); ++c) {
            std::vector<double> row(g.means.cols());
            for (Eigen::Index c2 = 0; c2 < g.means.cols(); ++c2)
                row[c2] = g.means(c, c2);
            means.push_back(row);
        }
        j["means"] = means;
        json covs = json::array();
        for (const auto& cov : g.covariances) {
            json m = json::array();
            for (Eigen::Index r = 0; r < cov.rows(); ++r) {
                std::vector<double> vals(cov.cols());
                for (Eigen::Index c2 = 0; c2 < cov.cols(); ++c2)
                    vals[c2] = cov(r, c2);
                m.push_back(vals);
            }
            covs.push_back(m);
        }
        j["covariances"] = covs;
        std::cout << j.dump() << "\n";
    } else {
        std::printf("%-16s %-6s %3s %12s %8s %10s\n", "Initialisation",
                    "Model", "k", "BIC", "ARI", "Time");
        char ari_buf[32];
        if (d.truth.empty())
            std::snprintf(ari_buf, sizeof ari_buf, "NA");
        else
            std::snprintf(ari_buf, sizeof ari_buf, "%.4f", row_ari(best));
        std::printf("%-16s %-6s %3d %12.2f %8s %8.2f s\n",
                    mbc::describe(strategy).c_str(),
                    mbc::to_string(best.model), best.k, best.bic, ari_buf,
                    total_s);
    }
    return 0;
}

int run_ordering_study(const CommonOpts& o, int max_orderings) {
    const LoadedData d = load(o);
    const auto strategy = parse_init(o.init);
    if (strategy.type != mbc::InitStrategy::Type::mbhac)
        throw std::runtime_error("ordering-study requires an mbhac init");
    const auto models = parse_models(o.models);
    const auto ks = parse_k_range(o.k, static_cast<int>(d.x.n()));
    const int p = static_cast<int>(d.x.p());

    mbc::EmOptions opts;
    opts.tol = o.tol;

    // all column permutations when feasible, otherwise a seeded sample
    unsigned long long total = 1;
    bool overflow = p > 20;
    for (int i = 2; i <= p && !overflow; ++i) total *= static_cast<unsigned>(i);
    std::vector<std::vector<int>> perms;
    std::vector<int> perm(p);
    std::iota(perm.begin(), perm.end(), 0);
    if (!overflow && total <= static_cast<unsigned long long>(max_orderings)) {
        do {
            perms.push_back(perm);
        } while (std::next_permutation(perm.begin(), perm.end()));
    } else {
        mbc::Rng rng(o.seed);
        std::set<std::vector<int>> seen;
        long long attempts = 0;
        const long long cap = 100LL * max_orderings;
        while (static_cast<int>(perms.size()) < max_orderings &&
               attempts++ < cap) {
            std::vector<int> q(p);
            std::iota(q.begin(), q.end(), 0);
            for (int i = p - 1; i > 0; --i)
                std::swap(q[i], q[rng.uniform_int(static_cast<std::uint64_t>(i) + 1)]);
            if (seen.insert(q).second) perms.push_back(q);
        }
    }

    struct Outcome {
        int count = 0;
        double bic_min = 0.0, bic_max = 0.0;
        double ari = 0.0;
    };
    std::map<std::pair<std::string, int>, Outcome> outcomes;
    std::set<long long> unique_bic;

    const bool jsonl = o.format == "jsonl";
    for (const auto& q : perms) {
        mbc::DataMatrix xp;
        xp.values.resize(d.x.n(), p);
        xp.column_names.resize(p);
        for (int j = 0; j < p; ++j) {
            xp.values.col(j) = d.x.values.col(q[j]);
            xp.column_names[j] = d.x.column_names[q[j]];
        }
        const mbc::SweepResult res =
            mbc::sweep(xp, models, ks, strategy, opts, o.seed);
        if (res.best_index < 0)
            throw std::runtime_error("ordering study: sweep with no successful fit");
        const mbc::SweepRow& best = res.best();
        const double a =
            d.truth.empty() ? 0.0 : mbc::ari(row_labels(best), d.truth);

        const std::pair<std::string, int> key{mbc::to_string(best.model),
                                              best.k};
        auto [it, fresh] = outcomes.try_emplace(key);
        Outcome& oc = it->second;
        if (fresh) {
            oc.bic_min = oc.bic_max = best.bic;
            oc.ari = a;
        } else {
            oc.bic_min = std::min(oc.bic_min, best.bic);
            oc.bic_max = std::max(oc.bic_max, best.bic);
        }
        ++oc.count;
        unique_bic.insert(std::llround(best.bic * 100.0));

        if (jsonl) {
            json j;
            j["type"] = "ordering";
            j["columns"] = xp.column_names;
            j["model"] = key.first;
            j["k"] = best.k;
            j["bic"] = best.bic;
            if (!d.truth.empty()) j["ari"] = a;
            std::cout << j.dump() << "\n";
        }
    }

    if (jsonl) {
        json j;
        j["type"] = "ordering-summary";
        j["init"] = mbc::describe(strategy);
        j["orderings"] = perms.size();
        json outs = json::array();
        for (const auto& [key, oc] : outcomes) {
            json e;
            e["model"] = key.first;
            e["k"] = key.second;
            e["count"] = oc.count;
            e["bic_min"] = oc.bic_min;
            e["bic_max"] = oc.bic_max;
            if (!d.truth.empty()) e["ari"] = oc.ari;
            outs.push_back(e);
        }
        j["outcomes"] = outs;
        j["unique_bic_2dp"] = unique_bic.size();
        std::cout << j.dump() << "\n";
    } else {
        std::printf("orderings: %zu (p = %d), init %s\n", perms.size(), p,
                    mbc::describe(strategy).c_str());
        std::printf("%-6s %3s %7s %12s %12s %8s\n", "Model", "k", "count",
                    "BIC(min)", "BIC(max)", "ARI");
        for (const auto& [key, oc] : outcomes) {
            char ari_buf[32];
            if (d.truth.empty())
                std::snprintf(ari_buf, sizeof ari_buf, "NA");
            else
                std::snprintf(ari_buf, sizeof ari_buf, "%.4f", oc.ari);
            std::printf("%-6s %3d %7d %12.2f %12.2f %8s\n", key.first.c_str(),
                        key.second, oc.count, oc.bic_min, oc.bic_max, ari_buf);
        }
        std::printf("unique BIC values (2dp): %zu\n", unique_bic.size());
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Gaussian model-based clustering with hierarchical and "
                 "stochastic EM initialization"};
    app.require_subcommand(1);

    CommonOpts fit_opts;
    CLI::App* fit = app.add_subcommand(
        "fit", "sweep models x components, report the BIC-best fit");
    add_common(fit, fit_opts);

    CommonOpts ord_opts;
    int max_orderings = 720;
    CLI::App* ord = app.add_subcommand(
        "ordering-study",
        "rerun the sweep under column permutations of the input");
    ord_opts.init = "mbhac:raw";
    add_common(ord, ord_opts);
    ord->add_option("--max-orderings", max_orderings,
                    "enumerate all p! orderings when p! <= this, else sample");

    try {
        app.parse(argc, argv);
        if (fit->parsed()) return run_fit(fit_opts);
        return run_ordering_study(ord_opts, max_orderings);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
