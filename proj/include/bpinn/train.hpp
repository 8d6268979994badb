#pragma once

// Loss assembly and optimization for the five variants: ELBO-trained
// B-PINNs (heteroscedastic / homoscedastic), dropout PINNs, and the vanilla
// deterministic PINN with its Adam-then-L-BFGS schedule.

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "bpinn/bayes.hpp"
#include "bpinn/checkpoint.hpp"
#include "bpinn/diffcore.hpp"
#include "bpinn/net.hpp"
#include "bpinn/physics.hpp"
#include "bpinn/variant.hpp"

namespace bpinn {

struct LossWeights {
    double lambda_ic = 1.0;
    double lambda_bc = 1.0;
    double lambda_res = 1e-4;

    void validate() const
    {
        if (lambda_ic < 0.0 || lambda_bc < 0.0 || lambda_res < 0.0)
            throw ValidationError("LossWeights: weights must be non-negative");
    }
};

/// B-PINN variants use (1, 1, 1e-4); vanilla and dropout PINNs (1, 1, 1e-6).
LossWeights default_weights(Variant v);

/// Fixed noise scales for the homoscedastic likelihoods (normalized units).
struct HomoSigmas {
    double ic = 0.01;
    double bc = 0.01;
    double res = 0.01;

    void validate() const
    {
        if (ic <= 0.0 || bc <= 0.0 || res <= 0.0) throw ValidationError("HomoSigmas: sigmas must be positive");
    }
};

struct TrainPlan {
    Variant variant = Variant::bpinn_hetero;
    std::vector<int> hidden { 50, 50 };
    double lr = 0.01;
    int batch = 16;
    int max_epochs = 15000;
    int patience = 200;
    LossWeights weights = {};
    HomoSigmas sigma_homo = {};
    double dropout_rate = 0.1;
    PriorSpec prior = {};
    double posterior_sigma0 = 0.05;
    int k_samples = 1;      // posterior draws averaged per step
    int adam_iters = 20000; // vanilla schedule
    int lbfgs_iters = 10000;
    std::uint64_t seed = 0;
    bool log_walltime = false; // keep the ms column zero for replayable logs

    void validate() const;
};

/// A plan with the variant's default weights and head configuration filled in.
TrainPlan make_plan(Variant v);

enum class StopReason { max_epochs, early_stop, divergence };

inline const char* to_string(StopReason r)
{
    switch (r) {
        case StopReason::max_epochs: return "max_epochs";
        case StopReason::early_stop: return "early_stop";
        case StopReason::divergence: return "divergence";
    }
    return "unknown";
}

struct TrainLogRow {
    int epoch = 0;
    double kl = 0.0;      // complexity cost (0 for deterministic variants)
    double nll_ic = 0.0;  // lambda-weighted component values
    double nll_bc = 0.0;
    double nll_res = 0.0;
    double total = 0.0;   // kl + nll_ic + nll_bc + nll_res, summed in this order
    double val = 0.0;     // early-stopping monitor on the held-out split
    double ms = 0.0;
};

struct TrainLog {
    std::vector<TrainLogRow> rows;
    StopReason stop_reason = StopReason::max_epochs;
    int best_epoch = -1;
    double best_val = 0.0;
};

/// CSV columns: epoch,kl,nll_0,nll_bc,nll_r,total,val,ms.
void write_train_log_csv(const std::string& path, const TrainLog& log);

// ---------------------------------------------------------------------------
// Loss primitives
// ---------------------------------------------------------------------------

/// Heteroscedastic Gaussian negative log-likelihood of one observation:
/// 0.5 log(2 pi var) + (u - mu)^2 / (2 var).
template <typename S>
S nll_hetero(double u_true, const S& mu, const S& var)
{
    using std::log;
    if (value(var) <= 0.0) throw ValidationError("nll_hetero: variance must be positive");
    const S e = S(u_true) - mu;
    return S(0.5) * log(S(2.0 * M_PI) * var) + e * e / (S(2.0) * var);
}

/// Fixed-sigma Gaussian negative log-likelihood summed over residuals.
double nll_homo(const Eigen::VectorXd& residuals, double sigma);

// ---------------------------------------------------------------------------
// Training problem: normalized data plus the PDE context
// ---------------------------------------------------------------------------

struct TrainProblem {
    const ThermalPdeSpec* pde = nullptr;
    Normalization norm;
    MlpConfig config;
    HomoSigmas sigmas;

    struct DataPoint {
        double xn = 0.0, tn = 0.0; // normalized coordinates
        double un = 0.0;           // normalized target
        bool initial = false;      // IC vs BC
    };
    struct ResPoint {
        double xn = 0.0, tn = 0.0;
        double t_phys = 0.0;
    };

    std::vector<DataPoint> data;    // training IC/BC points
    std::vector<DataPoint> holdout; // fixed 10% split used as the monitor
    std::vector<ResPoint> residual;
};

/// Normalizes the training sets and splits off `holdout_fraction` of the
/// IC/BC points (seeded, fixed for the whole run).
TrainProblem make_train_problem(const ThermalPdeSpec& spec, const Normalization& norm, const TrainingSets& sets,
                                const MlpConfig& config, const HomoSigmas& sigmas, double holdout_fraction,
                                std::uint64_t seed);

/// Index batches into TrainProblem::data / TrainProblem::residual.
struct StepBatches {
    std::span<const int> data_idx;
    std::span<const int> res_idx;
};

struct LossBreakdown {
    double kl = 0.0;
    double ic = 0.0;  // lambda-weighted
    double bc = 0.0;
    double res = 0.0;
    double total = 0.0;
};

struct StepResult {
    LossBreakdown parts;
    Eigen::VectorXd gradient;
};

/// One-sample negative-ELBO step: log q - log prior plus the lambda-weighted
/// likelihood terms over the given batches. Heteroscedastic variants use the
/// learned per-point variance for the data terms; the residual likelihood
/// keeps the fixed sigma_res in both cases, with target r = 0. The gradient
/// is over [mu; rho] and flows through the reparameterization.
StepResult elbo_step(const VariationalPosterior& post, const PriorSpec& prior, const LossWeights& weights,
                     const TrainProblem& problem, const StepBatches& batches, const Eigen::VectorXd& noise,
                     Variant variant, Tape& tape);

/// Vanilla PINN loss: lambda-weighted mean squared errors for IC, BC, and
/// the dimensionless residual.
StepResult pinn_loss(const NetworkParams& params, const LossWeights& weights, const TrainProblem& problem,
                     const StepBatches& batches, Tape& tape);

/// Dropout PINN loss: mean heteroscedastic NLL (or fixed-sigma NLL for the
/// homoscedastic variant) on IC/BC plus lambda_res-weighted residual MSE on
/// the mean head, all under the given mask.
StepResult dpinn_loss(const NetworkParams& params, const DropoutMask& mask, const LossWeights& weights,
                      const TrainProblem& problem, const StepBatches& batches, Variant variant, Tape& tape);

// ---------------------------------------------------------------------------
// Optimizers
// ---------------------------------------------------------------------------

struct AdamState {
    Eigen::VectorXd m, v;
    long step = 0;

    explicit AdamState(Eigen::Index n) : m(Eigen::VectorXd::Zero(n)), v(Eigen::VectorXd::Zero(n)) {}
};

/// Standard Adam with beta1 = 0.9, beta2 = 0.999, eps = 1e-8 and bias
/// correction.
void adam_update(AdamState& state, Eigen::VectorXd& params, const Eigen::VectorXd& gradient, double lr);

struct LbfgsOptions {
    int max_iters = 100;
    int memory = 10;
    double grad_tol = 1e-8;
    std::function<void(int iter, const Eigen::VectorXd& x, double f)> on_iterate;
};

struct LbfgsResult {
    Eigen::VectorXd params;
    double loss = 0.0;
    int iterations = 0;
    bool line_search_failed = false;
};

/// Two-loop-recursion L-BFGS with an Armijo line search refined by quadratic
/// interpolation; monotone non-increasing, stops on gradient norm below
/// grad_tol or max_iters. A failed line search returns the best point so far
/// with the warning flag set.
LbfgsResult lbfgs_refine(Eigen::VectorXd params,
                         const std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>& value_and_grad,
                         const LbfgsOptions& options);

// ---------------------------------------------------------------------------
// Full training loop
// ---------------------------------------------------------------------------

struct FitResult {
    Checkpoint checkpoint;
    TrainLog log;
};

/// Samples the training sets from the spec and trains the plan's variant:
/// mini-batches of plan.batch IC/BC points with 16 collocation points
/// sub-sampled per step, early stopping on a fixed held-out 10% split, best
/// checkpoint returned. Fully reproducible per seed. B-PINN batch terms are
/// rescaled by set-size over batch-size so each step estimates the full-data
/// likelihood sums.
FitResult fit(const TrainPlan& plan, const ThermalPdeSpec& spec, const SampleCounts& counts, std::uint64_t seed);

/// Same loop on caller-supplied training sets and normalization.
FitResult fit_problem(const TrainPlan& plan, const ThermalPdeSpec& spec, const Normalization& norm,
                      const TrainingSets& sets, std::uint64_t seed);

} // namespace bpinn
