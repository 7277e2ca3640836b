#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mbc/mbhac.hpp"

namespace mbc {

// Covariance parameterizations Sigma_k = gamma_k O_k A_k O_k'. The three
// letters fix volume, shape and orientation as equal across components (E),
// varying (V), or axis-aligned/spherical (I).
enum class ModelName { EII, VII, EEI, VVI, EEE, EEV, VEV, VVV };

inline constexpr ModelName all_models[] = {
    ModelName::EII, ModelName::VII, ModelName::EEI, ModelName::VVI,
    ModelName::EEE, ModelName::EEV, ModelName::VEV, ModelName::VVV};

const char* to_string(ModelName model);
std::optional<ModelName> parse_model_name(const std::string& name);

struct GaussianMixture {
    ModelName model = ModelName::VVV;
    VectorXd weights;                  // G, positive, sums to 1
    MatrixXd means;                    // G x p, row k = mu_k
    std::vector<MatrixXd> covariances; // G SPD p x p matrices

    int components() const { return static_cast<int>(weights.size()); }
};

// n x G row-stochastic posterior membership probabilities.
using Responsibilities = MatrixXd;

struct ComponentCollapse : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct Singularity : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class FitStatus { ok, component_collapse, singularity };

struct InitProvenance {
    std::string strategy;
    std::uint64_t seed = 0;
};

struct FitResult {
    GaussianMixture mixture;
    Responsibilities resp;
    double loglik = 0.0;
    int n_iter = 0;
    bool converged = false;
    FitStatus status = FitStatus::ok;
    double max_loglik_decrease = 0.0;
    InitProvenance init;

    bool ok() const { return status == FitStatus::ok; }
};

struct EmOptions {
    double tol = 1e-5;
    int max_iter = 1000;
};

// log of the mixture density at every row, evaluated via log-sum-exp.
VectorXd log_density(const MatrixXd& x, const GaussianMixture& g);

// Responsibilities and total log-likelihood under g.
std::pair<Responsibilities, double> e_step(const MatrixXd& x,
                                           const GaussianMixture& g);

// Constrained ML parameter update. Throws ComponentCollapse when a column
// sum of r vanishes, Singularity when a fitted covariance eigenvalue falls
// below 1e-10 of the largest across components.
GaussianMixture m_step(const MatrixXd& x, const Responsibilities& r,
                       ModelName model);

Responsibilities hard_responsibilities(const Partition& partition);

// EM from a hard partition (M-step first) or from explicit parameters
// (E-step first). Stops when the relative log-likelihood change drops below
// tol (absolute change when |loglik| < 1). Collapse and singularity are
// reported in the status, not thrown.
FitResult em(const MatrixXd& x, const Partition& init, ModelName model,
             const EmOptions& opts = {});
FitResult em(const MatrixXd& x, const GaussianMixture& init, ModelName model,
             const EmOptions& opts = {});

// MAP labels; ties go to the lowest component index.
Partition classify(const Responsibilities& r);

// Shape/volume fixed point used by the VEV M-step, exposed for testing.
// omega: p x G matrix of per-component scatter eigenvalues (descending),
// counts: per-component soft counts. objective tracks the profiled
// -2 complete-data log-likelihood term across inner iterations.
struct VevInner {
    VectorXd shape;   // p, det = 1
    VectorXd volumes; // G
    std::vector<double> objective;
};
VevInner vev_inner(const MatrixXd& omega, const VectorXd& counts,
                   int max_iter = 20, double tol = 1e-8);

} // namespace mbc
