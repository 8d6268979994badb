#pragma once

// Finite-difference ground truth for the heat-diffusion problem: a
// Crank-Nicolson theta-scheme with the linear reaction term folded into the
// tridiagonal system and Dirichlet rows pinned to the boundary series.

#include <functional>
#include <string>

#include <Eigen/Core>

#include "bpinn/physics.hpp"

namespace bpinn {

struct GridSpec {
    int nx = 201;     // interior node count; total nodes = nx + 2
    double dt = 60.0; // time step [s]; the final step shortens to land on T

    void validate() const
    {
        if (nx < 3) throw ValidationError("GridSpec: nx must be >= 3");
        if (dt <= 0.0) throw ValidationError("GridSpec: dt must be positive");
    }
};

/// Rectangular solution field: one row per time, one column per x node.
struct FieldGrid {
    Eigen::VectorXd x;      // [m], includes both boundaries
    Eigen::VectorXd t;      // [s]
    Eigen::MatrixXd values; // [deg C], t.size() rows, x.size() cols
};

/// Solves the spec over the series span. `initial` overrides the default
/// linear initial profile (used by manufactured-solution oracles); boundary
/// columns are always pinned to the interpolated series.
FieldGrid solve(const ThermalPdeSpec& spec, const GridSpec& grid,
                const std::function<double(double)>& initial = {});

/// Bilinear interpolation; throws outside the grid hull.
double interpolate(const FieldGrid& field, double x, double t);

void write_field_csv(const std::string& path, const FieldGrid& field);
FieldGrid read_field_csv(const std::string& path);

} // namespace bpinn
