#pragma once

#include "bpinn/error.hpp"

namespace bpinn {

struct SpaceTimePoint {
    double x = 0.0; // position [m]
    double t = 0.0; // time [s]
};

/// Network solution value and its input derivatives at one point. The scalar
/// type is double for plain evaluation or a tape variable when the bundle
/// feeds a differentiable loss.
template <typename S = double>
struct NetDerivs {
    S u {};
    S u_x {};
    S u_xx {};
    S u_t {};
};

/// Affine maps between physical coordinates and the unit-scaled coordinates
/// the networks are trained on: xn = x / x_scale, tn = t / t_scale,
/// un = (u - temp_shift) / temp_scale. Round trips are exact to 1e-12.
struct Normalization {
    double x_scale = 1.0;
    double t_scale = 1.0;
    double temp_shift = 0.0;
    double temp_scale = 1.0;

    void validate() const
    {
        if (x_scale == 0.0 || t_scale == 0.0 || temp_scale == 0.0)
            throw ValidationError("Normalization: zero scale");
    }

    double to_norm_x(double x) const { return x / x_scale; }
    double to_norm_t(double t) const { return t / t_scale; }
    double to_norm_temp(double u) const { return (u - temp_shift) / temp_scale; }
    double to_phys_x(double xn) const { return xn * x_scale; }
    double to_phys_t(double tn) const { return tn * t_scale; }
    double to_phys_temp(double un) const { return temp_shift + temp_scale * un; }
};

} // namespace bpinn
