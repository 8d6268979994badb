#pragma once

// Probabilistic evaluation: RMSE, predictive Gaussian NLL, closed-form
// Gaussian CRPS, reliability-curve calibration (miscalibration area) and
// sharpness.

#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "bpinn/error.hpp"
#include "bpinn/uq.hpp"

namespace bpinn {

double rmse(const Eigen::VectorXd& pred_means, const Eigen::VectorXd& truth);

/// Mean Gaussian negative log-likelihood using (mean, total_var) per point.
/// Zero-variance predictions (vanilla networks) are a defined error directing
/// callers to RMSE.
double nll_metric(std::span<const PredictiveDistribution> preds, const Eigen::VectorXd& truth);

/// Closed form sigma [z (2 Phi(z) - 1) + 2 phi(z) - 1/sqrt(pi)] with
/// z = (y - mu) / sigma; the sigma = 0 point mass degenerates to |y - mu|.
double crps_gaussian(double mu, double sigma, double y);

/// Mean per-point CRPS with sigma = sqrt(total_var).
double crps_avg(std::span<const PredictiveDistribution> preds, const Eigen::VectorXd& truth);

/// Standard-normal quantile (Acklam's rational approximation plus one Newton
/// polish step).
double normal_quantile(double p);

std::vector<double> default_confidence_levels(); // 0.01 .. 0.99 step 0.01

struct ReliabilityPoint {
    double level = 0.0;    // nominal central-interval probability
    double coverage = 0.0; // empirical fraction of truths inside
};

struct CalibrationResult {
    std::vector<ReliabilityPoint> curve;
    double miscalibration_area = 0.0; // mean |coverage - level|
    double sharpness = 0.0;           // mean predictive standard deviation
};

/// Requires at least 10 points for meaningful coverage estimates.
CalibrationResult calibration(std::span<const PredictiveDistribution> preds, const Eigen::VectorXd& truth,
                              const std::vector<double>& levels = default_confidence_levels());

struct InstantRow {
    double hours = 0.0;
    int n_points = 0;
    double rmse = 0.0;
    double crps = 0.0; // NaN when unavailable
    double nll = 0.0;  // NaN when unavailable
};

struct EvalReport {
    bool probabilistic = true; // false for zero-variance checkpoints
    double rmse = 0.0;
    double crps_mean = 0.0;
    double nll_mean = 0.0;
    double miscalibration_area = 0.0;
    double sharpness = 0.0;
    std::vector<InstantRow> instants;
};

void write_eval_report_json(const std::string& path, const EvalReport& report);
void write_instant_rows_csv(const std::string& path, const EvalReport& report);

} // namespace bpinn
