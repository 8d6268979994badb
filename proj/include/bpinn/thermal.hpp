#pragma once

// Hot-spot temperature dynamics and insulation ageing: the two-branch
// exponential rise recursion over the load series, the winding field as oil
// temperature plus rise, the doubling-law ageing factor, cumulative
// loss-of-life, and Monte Carlo propagation of temperature posteriors to
// ageing distributions.

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "bpinn/error.hpp"
#include "bpinn/refsolver.hpp"
#include "bpinn/uq.hpp"

namespace bpinn {

struct HstParams {
    double rated_rise = 15.1;     // hot-spot rise over top-oil at rated load [K]
    double k21 = 2.32;            // thermal constants [-]
    double k22 = 2.05;
    double tau_winding = 9.75;    // winding time constant [min]
    double tau_oil = 266.8;       // oil time constant [min]
    double winding_exponent = 1.3;
    double dt = 1.0;              // integration step [min]

    void validate() const
    {
        if (rated_rise <= 0.0 || k21 <= 0.0 || k22 <= 0.0 || tau_winding <= 0.0 || tau_oil <= 0.0 ||
            winding_exponent <= 0.0 || dt <= 0.0)
            throw ValidationError("HstParams: all constants must be positive");
        const double limit = 0.5 * std::min(tau_winding, tau_oil);
        if (dt > limit)
            throw ValidationError(detail::msg("HstParams: dt = ", dt, " min exceeds half the smaller time constant (",
                                              limit, " min)"));
    }
};

/// Hot-spot rise over top-oil on a uniform params.dt grid covering the load
/// series span, initialized at the steady state for K(0). Times in seconds.
struct RiseSeries {
    std::vector<double> t_seconds;
    Eigen::VectorXd rise; // [K]
};

RiseSeries hst_rise(const HstParams& params, const std::vector<double>& t_seconds, const Eigen::VectorXd& load_pu);

double rise_at(const RiseSeries& series, double t_seconds);

/// Steady-state hot-spot temperature at t = 0; the k21 contributions cancel,
/// leaving topoil + rated_rise * K^y.
double hst_initial(const HstParams& params, double topoil0, double load0);

/// Winding field: oil temperature plus the x-independent rise, interpolated
/// onto the oil grid's time axis.
FieldGrid winding_field(const FieldGrid& oil, const RiseSeries& rise);

/// Ageing acceleration factor, 2^((theta - 98) / 6): 1 at 98 degC, doubling
/// every +6 K.
inline double ageing_factor(double theta_w) { return std::exp2((theta_w - 98.0) / 6.0); }

/// Cumulative loss of life in equivalent minutes: right-endpoint sum of
/// V dt along each column; row 0 is zero. Rows follow time, columns x.
Eigen::MatrixXd loss_of_life(const Eigen::MatrixXd& ageing, double dt_minutes);

/// Per-point mean/std fields of the ageing factor and of cumulative loss of
/// life, from Gaussian temperature samples with the predictive total
/// variance. Deterministic per seed.
struct AgeingField {
    FieldGrid v_mean, v_std, lol_mean, lol_std;
};

AgeingField propagate_ageing(const PredictiveGrid& predictive, const RiseSeries& rise, int n_samples,
                             std::uint64_t seed);

} // namespace bpinn
