#include "mbc/gmm.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cctype>
#include <cmath>
#include <limits>

namespace mbc {

const char* to_string(ModelName model) {
    switch (model) {
        case ModelName::EII: return "EII";
        case ModelName::VII: return "VII";
        case ModelName::EEI: return "EEI";
        case ModelName::VVI: return "VVI";
        case ModelName::EEE: return "EEE";
        case ModelName::EEV: return "EEV";
        case ModelName::VEV: return "VEV";
        case ModelName::VVV: return "VVV";
    }
    return "?";
}

std::optional<ModelName> parse_model_name(const std::string& name) {
    std::string s;
    for (char c : name) s += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    for (ModelName m : all_models)
        if (s == to_string(m)) return m;
    return std::nullopt;
}

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

// Per-component log weights + log normal densities; n x G.
MatrixXd component_log_densities(const MatrixXd& x, const GaussianMixture& g) {
    const auto n = x.rows();
    const auto p = x.cols();
    const int G = g.components();

    // singularity floor over the pooled eigenvalue range
    double ev_min = std::numeric_limits<double>::infinity();
    double ev_max = 0.0;
    Eigen::SelfAdjointEigenSolver<MatrixXd> es;
    for (const MatrixXd& s : g.covariances) {
        es.compute(s, Eigen::EigenvaluesOnly);
        ev_min = std::min(ev_min, es.eigenvalues().minCoeff());
        ev_max = std::max(ev_max, es.eigenvalues().maxCoeff());
    }
    if (ev_min < 1e-10 * ev_max)
        throw Singularity("covariance eigenvalue below floor");

    MatrixXd logp(n, G);
    for (int k = 0; k < G; ++k) {
        Eigen::LLT<MatrixXd> llt(g.covariances[k]);
        if (llt.info() != Eigen::Success)
            throw Singularity("covariance not positive definite");
        double logdet = 0.0;
        for (Eigen::Index d = 0; d < p; ++d)
            logdet += std::log(llt.matrixLLT()(d, d));
        logdet *= 2.0;

        MatrixXd centered = x.rowwise() - g.means.row(k);
        MatrixXd solved = llt.matrixL().solve(centered.transpose());
        VectorXd maha = solved.colwise().squaredNorm();
        const double shift = static_cast<double>(p) * kLog2Pi + logdet;
        logp.col(k) =
            std::log(g.weights(k)) - 0.5 * (maha.array() + shift);
    }
    return logp;
}

VectorXd row_log_sum_exp(const MatrixXd& logp) {
    VectorXd m = logp.rowwise().maxCoeff();
    VectorXd out(logp.rows());
    for (Eigen::Index i = 0; i < logp.rows(); ++i)
        out(i) = m(i) + std::log((logp.row(i).array() - m(i)).exp().sum());
    return out;
}

} // namespace

VectorXd log_density(const MatrixXd& x, const GaussianMixture& g) {
    return row_log_sum_exp(component_log_densities(x, g));
}

std::pair<Responsibilities, double> e_step(const MatrixXd& x,
                                           const GaussianMixture& g) {
    MatrixXd logp = component_log_densities(x, g);
    VectorXd lse = row_log_sum_exp(logp);
    Responsibilities r = (logp.colwise() - lse).array().exp();
    return {std::move(r), lse.sum()};
}

VevInner vev_inner(const MatrixXd& omega, const VectorXd& counts,
                   int max_iter, double tol) {
    const auto p = omega.rows();
    const int G = static_cast<int>(counts.size());

    auto det_normalized = [&](VectorXd a) {
        double mean_log = 0.0;
        for (Eigen::Index d = 0; d < p; ++d)
            mean_log += std::log(std::max(a(d), 1e-300));
        a /= std::exp(mean_log / static_cast<double>(p));
        return a;
    };
    auto volumes_for = [&](const VectorXd& shape) {
        VectorXd lam(G);
        for (int k = 0; k < G; ++k)
            lam(k) = (omega.col(k).array() / shape.array()).sum() /
                     (static_cast<double>(p) * counts(k));
        return lam;
    };
    auto objective = [&](const VectorXd& shape, const VectorXd& lam) {
        double f = 0.0;
        for (int k = 0; k < G; ++k)
            f += counts(k) * static_cast<double>(p) * std::log(lam(k)) +
                 (omega.col(k).array() / shape.array()).sum() / lam(k);
        return f;
    };

    VevInner out;
    out.shape = det_normalized(omega.rowwise().sum());
    VectorXd lam = volumes_for(out.shape);
    out.objective.push_back(objective(out.shape, lam));
    for (int it = 0; it < max_iter; ++it) {
        VectorXd shape_new(p);
        for (Eigen::Index d = 0; d < p; ++d)
            shape_new(d) = (omega.row(d).transpose().array() / lam.array()).sum();
        shape_new = det_normalized(shape_new);
        const double rel =
            ((shape_new - out.shape).cwiseAbs().array() /
             out.shape.cwiseAbs().array().max(1e-12)).maxCoeff();
        out.shape = shape_new;
        lam = volumes_for(out.shape);
        out.objective.push_back(objective(out.shape, lam));
        if (rel < tol) break;
    }
    out.volumes = lam;
    return out;
}

GaussianMixture m_step(const MatrixXd& x, const Responsibilities& r,
                       ModelName model) {
    const auto n = x.rows();
    const auto p = x.cols();
    const int G = static_cast<int>(r.cols());

    VectorXd nk = r.colwise().sum();
    if (!(nk.minCoeff() >= 1e-10))
        throw ComponentCollapse("component weight vanished");

    GaussianMixture g;
    g.model = model;
    g.weights = nk / static_cast<double>(n);
    g.means = (r.transpose() * x).array().colwise() / nk.array();

    std::vector<MatrixXd> wk(G);
    for (int k = 0; k < G; ++k) {
        MatrixXd centered = x.rowwise() - g.means.row(k);
        wk[k] = centered.transpose() *
                (centered.array().colwise() * r.col(k).array()).matrix();
        wk[k] = (wk[k] + wk[k].transpose()) / 2.0;
    }

    g.covariances.assign(G, MatrixXd());
    switch (model) {
        case ModelName::EII: {
            double tr = 0.0;
            for (const auto& w : wk) tr += w.trace();
            const double lam = tr / (static_cast<double>(n) * p);
            for (int k = 0; k < G; ++k)
                g.covariances[k] = lam * MatrixXd::Identity(p, p);
            break;
        }
        case ModelName::VII: {
            for (int k = 0; k < G; ++k)
                g.covariances[k] = (wk[k].trace() / (nk(k) * p)) *
                                   MatrixXd::Identity(p, p);
            break;
        }
        case ModelName::EEI: {
            VectorXd diag = VectorXd::Zero(p);
            for (const auto& w : wk) diag += w.diagonal();
            diag /= static_cast<double>(n);
            for (int k = 0; k < G; ++k)
                g.covariances[k] = diag.asDiagonal();
            break;
        }
        case ModelName::VVI: {
            for (int k = 0; k < G; ++k)
                g.covariances[k] =
                    (wk[k].diagonal() / nk(k)).asDiagonal();
            break;
        }
        case ModelName::EEE: {
            MatrixXd w = MatrixXd::Zero(p, p);
            for (const auto& m : wk) w += m;
            w /= static_cast<double>(n);
            for (int k = 0; k < G; ++k) g.covariances[k] = w;
            break;
        }
        case ModelName::VVV: {
            for (int k = 0; k < G; ++k) g.covariances[k] = wk[k] / nk(k);
            break;
        }
        case ModelName::EEV:
        case ModelName::VEV: {
            // per-component scatter spectra, eigenvalues descending
            MatrixXd omega(p, G);
            std::vector<MatrixXd> vecs(G);
            Eigen::SelfAdjointEigenSolver<MatrixXd> es;
            for (int k = 0; k < G; ++k) {
                es.compute(wk[k]);
                omega.col(k) = es.eigenvalues().reverse();
                vecs[k] = es.eigenvectors().rowwise().reverse();
            }
            if (model == ModelName::EEV) {
                VectorXd a = omega.rowwise().sum() / static_cast<double>(n);
                for (int k = 0; k < G; ++k)
                    g.covariances[k] =
                        vecs[k] * a.asDiagonal() * vecs[k].transpose();
            } else {
                VevInner inner = vev_inner(omega, nk);
                for (int k = 0; k < G; ++k)
                    g.covariances[k] = inner.volumes(k) *
                                       (vecs[k] * inner.shape.asDiagonal() *
                                        vecs[k].transpose());
            }
            for (int k = 0; k < G; ++k)
                g.covariances[k] =
                    (g.covariances[k] + g.covariances[k].transpose()) / 2.0;
            break;
        }
    }
    return g;
}

Responsibilities hard_responsibilities(const Partition& partition) {
    Responsibilities r = MatrixXd::Zero(partition.n(), partition.k);
    for (Eigen::Index i = 0; i < partition.n(); ++i)
        r(i, partition.labels(i) - 1) = 1.0;
    return r;
}

namespace {

// Checked M/E rounds after a baseline round already stored in `out`.
FitResult em_loop(const MatrixXd& x, FitResult out, const EmOptions& opts) {
    try {
        for (int it = 1; it <= opts.max_iter; ++it) {
            GaussianMixture g = m_step(x, out.resp, out.mixture.model);
            auto [r_new, ll] = e_step(x, g);
            const double prev = out.loglik;
            out.mixture = std::move(g);
            out.resp = std::move(r_new);
            out.loglik = ll;
            out.n_iter = it;
            if (ll < prev)
                out.max_loglik_decrease =
                    std::max(out.max_loglik_decrease, prev - ll);
            const double denom = std::abs(ll) >= 1.0 ? std::abs(ll) : 1.0;
            if ((ll - prev) / denom < opts.tol) {
                out.converged = true;
                break;
            }
        }
    } catch (const ComponentCollapse&) {
        out.status = FitStatus::component_collapse;
    } catch (const Singularity&) {
        out.status = FitStatus::singularity;
    }
    return out;
}

} // namespace

FitResult em(const MatrixXd& x, const Partition& init, ModelName model,
             const EmOptions& opts) {
    FitResult out;
    out.mixture.model = model;
    try {
        GaussianMixture g = m_step(x, hard_responsibilities(init), model);
        auto [r, ll] = e_step(x, g);
        out.mixture = std::move(g);
        out.resp = std::move(r);
        out.loglik = ll;
    } catch (const ComponentCollapse&) {
        out.status = FitStatus::component_collapse;
        return out;
    } catch (const Singularity&) {
        out.status = FitStatus::singularity;
        return out;
    }
    return em_loop(x, std::move(out), opts);
}

FitResult em(const MatrixXd& x, const GaussianMixture& init, ModelName model,
             const EmOptions& opts) {
    FitResult out;
    out.mixture = init;
    out.mixture.model = model;
    try {
        auto [r, ll] = e_step(x, init);
        out.resp = std::move(r);
        out.loglik = ll;
    } catch (const ComponentCollapse&) {
        out.status = FitStatus::component_collapse;
        return out;
    } catch (const Singularity&) {
        out.status = FitStatus::singularity;
        return out;
    }
    return em_loop(x, std::move(out), opts);
}

Partition classify(const Responsibilities& r) {
    Partition out;
    out.labels.resize(r.rows());
    out.k = static_cast<int>(r.cols());
    for (Eigen::Index i = 0; i < r.rows(); ++i) {
        Eigen::Index arg = 0;
        r.row(i).maxCoeff(&arg);
        out.labels(i) = static_cast<int>(arg) + 1;
    }
    return out;
}

} // namespace mbc
