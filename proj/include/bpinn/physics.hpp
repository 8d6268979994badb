#pragma once

// The transformer heat-diffusion problem: coefficients, heat source,
// Dirichlet boundary data, domain normalization, and the PDE residual
// evaluated through network derivatives.

#include <cmath>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "bpinn/data.hpp"
#include "bpinn/error.hpp"
#include "bpinn/types.hpp"

namespace bpinn {

/// Coefficients and operating data of the 1D vertical oil column.
///
/// Units: the loss terms p0 and mu_rated and the convective coefficient h are
/// treated as volumetric densities (W/m^3 and W/(m^3 K)); nameplate losses in
/// W divide by an effective volume of 1 m^3. Defaults give mineral-oil-like
/// diffusivity and are configurable.
struct ThermalPdeSpec {
    double k = 0.11;          // thermal conductivity [W/(m K)]
    double rho_cp = 1.53e6;   // volumetric heat capacity [J/(m^3 K)]
    double alpha = 0.11 / 1.53e6; // diffusivity [m^2/s], k / rho_cp
    double h = 50.0;          // convective coefficient [W/(m^3 K)]
    double p0 = 842.0;        // no-load losses [W/m^3]
    double mu_rated = 9800.0; // rated load losses [W/m^3]
    double height = 1.0;      // column height H [m]
    OperatingSeries series;   // shared time axis: load K(t), ambient, top-oil

    void validate() const;
    double t_end() const { return series.t_seconds.empty() ? 0.0 : series.t_seconds.back(); }

    double ambient_at(double t) const { return series_interp(series.t_seconds, series.ambient_c, t); }
    double topoil_at(double t) const { return series_interp(series.t_seconds, series.topoil_c, t); }
    double load_at(double t) const { return series_interp(series.t_seconds, series.load_pu, t); }
};

/// Builds a spec with alpha derived from k / rho_cp and validates it.
ThermalPdeSpec make_pde_spec(double k, double rho_cp, double h, double p0, double mu_rated, double height,
                             OperatingSeries series);

/// Unit-box normalization: x over the column height, t over the series span,
/// temperature affinely mapped so the combined boundary-series range is [0, 1].
Normalization make_normalization(const ThermalPdeSpec& spec);

/// Heat source q(x, t) = p0 + K(t)^2 mu - h (theta_o - theta_ambient(t)),
/// affine in the oil temperature with slope -h. [W/m^3]
template <typename S>
S heat_source(const ThermalPdeSpec& spec, double x, double t, const S& theta_o)
{
    (void)x; // position enters only through theta_o
    const double load = spec.load_at(t);
    const double drive = spec.p0 + load * load * spec.mu_rated + spec.h * spec.ambient_at(t);
    return S(drive) - S(spec.h) * theta_o;
}

/// PDE residual in physical units [K/m^2] from derivatives taken in
/// normalized coordinates; zero for exact solutions. The chain-rule factors
/// of `norm` are applied internally and t is the physical time.
template <typename S>
S residual(const ThermalPdeSpec& spec, const Normalization& norm, const NetDerivs<S>& nd, double t)
{
    const double cx = norm.temp_scale / (norm.x_scale * norm.x_scale);
    const double ct = norm.temp_scale / norm.t_scale;
    const S theta_o = S(norm.temp_shift) + S(norm.temp_scale) * nd.u;
    const S q = heat_source(spec, 0.0, t, theta_o);
    return S(cx) * nd.u_xx + q / S(spec.k) - S(ct / spec.alpha) * nd.u_t;
}

/// Residual from physical-coordinate derivatives; the alternative route for
/// the normalization-invariance check.
template <typename S>
S residual_from_physical(const ThermalPdeSpec& spec, const S& u, const S& u_xx, const S& u_t, double t)
{
    const S q = heat_source(spec, 0.0, t, u);
    return u_xx + q / S(spec.k) - u_t / S(spec.alpha);
}

/// Residual of the fully nondimensionalized equation,
/// (alpha T / scale) * residual(). Training losses consume this form so that
/// residual magnitudes are commensurate with normalized data errors.
template <typename S>
S residual_dimensionless(const ThermalPdeSpec& spec, const Normalization& norm, const NetDerivs<S>& nd, double t)
{
    const double cx = spec.alpha * norm.t_scale / (norm.x_scale * norm.x_scale);
    const double cq = spec.alpha * norm.t_scale / (spec.k * norm.temp_scale);
    const S theta_o = S(norm.temp_shift) + S(norm.temp_scale) * nd.u;
    const S q = heat_source(spec, 0.0, t, theta_o);
    return S(cx) * nd.u_xx + S(cq) * q - nd.u_t;
}

/// One supervised point in physical units.
struct TrainingPoint {
    double x = 0.0;
    double t = 0.0;
    double target = 0.0; // temperature [deg C]
};

struct TrainingSets {
    std::vector<TrainingPoint> initial;    // t = 0, interpolated initial profile
    std::vector<TrainingPoint> boundary;   // x in {0, H}, series targets
    std::vector<SpaceTimePoint> collocation; // interior residual points
};

struct SampleCounts {
    int n_initial = 100;
    int n_boundary = 11520;
    int n_collocation = 10000;
};

/// Initial profile u(x, 0): linear between ambient(0) at x = 0 and topoil(0)
/// at x = H.
double initial_profile(const ThermalPdeSpec& spec, double x);

/// Draws the three training sets, deterministically per seed. Boundary points
/// use series timestamps without replacement, split evenly between the two
/// boundaries; asking for more than 2x the available timestamps is an error.
/// Collocation points are uniform over (0, H) x (0, T].
TrainingSets sample_training_sets(const ThermalPdeSpec& spec, const SampleCounts& counts, std::uint64_t seed);

} // namespace bpinn
