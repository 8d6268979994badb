#pragma once

// Posterior predictive inference and uncertainty decomposition: Monte Carlo
// over posterior samples (B-PINN), dropout masks (d-PINN) or the single
// deterministic forward (vanilla), with the law-of-total-variance split into
// epistemic and aleatoric parts.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "bpinn/checkpoint.hpp"
#include "bpinn/types.hpp"

namespace bpinn {

/// Predictive moments at one point, in physical units.
struct PredictiveDistribution {
    double mean = 0.0;          // [deg C]
    double epistemic_var = 0.0; // [K^2]
    double aleatoric_var = 0.0; // [K^2]
    double total_var = 0.0;     // epistemic + aleatoric, exact
    int n_samples = 0;
};

/// Default Monte Carlo sample counts per variant.
int default_prediction_samples(Variant v);

/// Runs K stochastic forwards at each point. B-PINN draws K posterior
/// samples, d-PINN K dropout masks (both shared across points); the vanilla
/// network is deterministic with zero variances and K is ignored.
/// Deterministic per seed.
std::vector<PredictiveDistribution> predict(const Checkpoint& ckpt, std::span<const SpaceTimePoint> points,
                                            int k_samples, std::uint64_t seed);

/// Population-variance split (divide by K) of per-sample means and variances.
struct VarianceSplit {
    double epistemic = 0.0;
    double aleatoric = 0.0;
    double total = 0.0;
};

VarianceSplit decompose(std::span<const double> sample_means, std::span<const double> sample_vars);

/// Predictions arranged on a rectangular grid; rows follow t, columns x.
struct PredictiveGrid {
    Eigen::VectorXd x; // [m]
    Eigen::VectorXd t; // [s]
    Eigen::MatrixXd mean, epistemic, aleatoric, total;
    int n_samples = 0;
};

PredictiveGrid predict_grid(const Checkpoint& ckpt, const Eigen::VectorXd& x, const Eigen::VectorXd& t, int k_samples,
                            std::uint64_t seed);

/// CSV export: one row per point, columns x,t,mean,eu,au,tu.
void write_prediction_csv(const std::string& path, const PredictiveGrid& grid);

} // namespace bpinn
