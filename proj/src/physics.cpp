#include "bpinn/physics.hpp"

#include <algorithm>
#include <numeric>

#include "bpinn/rng.hpp"

namespace bpinn {

void ThermalPdeSpec::validate() const
{
    if (k <= 0.0 || rho_cp <= 0.0) throw ValidationError("ThermalPdeSpec: k and rho_cp must be positive");
    if (height <= 0.0) throw ValidationError("ThermalPdeSpec: height must be positive");
    if (h < 0.0) throw ValidationError("ThermalPdeSpec: h must be non-negative");
    const double expected = k / rho_cp;
    if (std::fabs(alpha - expected) > 1e-12 * expected)
        throw ValidationError(detail::msg("ThermalPdeSpec: alpha = ", alpha, " inconsistent with k/rho_cp = ", expected));
    series.validate();
}

ThermalPdeSpec make_pde_spec(double k, double rho_cp, double h, double p0, double mu_rated, double height,
                             OperatingSeries series)
{
    ThermalPdeSpec spec;
    spec.k = k;
    spec.rho_cp = rho_cp;
    spec.alpha = k / rho_cp;
    spec.h = h;
    spec.p0 = p0;
    spec.mu_rated = mu_rated;
    spec.height = height;
    spec.series = std::move(series);
    spec.validate();
    return spec;
}

Normalization make_normalization(const ThermalPdeSpec& spec)
{
    Normalization norm;
    norm.x_scale = spec.height;
    norm.t_scale = spec.t_end() > 0.0 ? spec.t_end() : 1.0;

    double lo = spec.series.ambient_c.minCoeff();
    double hi = spec.series.ambient_c.maxCoeff();
    lo = std::min(lo, spec.series.topoil_c.minCoeff());
    hi = std::max(hi, spec.series.topoil_c.maxCoeff());
    norm.temp_shift = lo;
    norm.temp_scale = hi > lo ? hi - lo : 1.0;
    norm.validate();
    return norm;
}

double initial_profile(const ThermalPdeSpec& spec, double x)
{
    const double a = spec.series.ambient_c[0];
    const double b = spec.series.topoil_c[0];
    return a + (b - a) * (x / spec.height);
}

TrainingSets sample_training_sets(const ThermalPdeSpec& spec, const SampleCounts& counts, std::uint64_t seed)
{
    spec.validate();
    if (counts.n_initial < 1 || counts.n_boundary < 1 || counts.n_collocation < 1)
        throw ValidationError("sample_training_sets: all counts must be >= 1");

    const auto n_stamps = spec.series.size();
    if (static_cast<std::size_t>(counts.n_boundary) > 2 * n_stamps)
        throw ValidationError(detail::msg("sample_training_sets: n_boundary = ", counts.n_boundary,
                                          " exceeds capacity ", 2 * n_stamps, " (2 boundaries x ", n_stamps,
                                          " timestamps)"));

    TrainingSets sets;

    Rng rng_init(seed, 1);
    sets.initial.reserve(static_cast<std::size_t>(counts.n_initial));
    for (int i = 0; i < counts.n_initial; ++i) {
        const double x = rng_init.u01() * spec.height;
        sets.initial.push_back({ x, 0.0, initial_profile(spec, x) });
    }

    // Boundary timestamps are drawn without replacement per boundary; a full
    // request uses every timestamp exactly once on each side.
    Rng rng_bc(seed, 2);
    const int n_bottom = counts.n_boundary / 2 + counts.n_boundary % 2;
    const int n_top = counts.n_boundary / 2;
    std::vector<std::size_t> order(n_stamps);
    std::iota(order.begin(), order.end(), std::size_t { 0 });
    rng_bc.shuffle(order);
    sets.boundary.reserve(static_cast<std::size_t>(counts.n_boundary));
    for (int i = 0; i < n_bottom; ++i) {
        const std::size_t j = order[static_cast<std::size_t>(i)];
        sets.boundary.push_back({ 0.0, spec.series.t_seconds[j], spec.series.ambient_c[static_cast<Eigen::Index>(j)] });
    }
    rng_bc.shuffle(order);
    for (int i = 0; i < n_top; ++i) {
        const std::size_t j = order[static_cast<std::size_t>(i)];
        sets.boundary.push_back(
            { spec.height, spec.series.t_seconds[j], spec.series.topoil_c[static_cast<Eigen::Index>(j)] });
    }

    Rng rng_cp(seed, 3);
    const double t_span = spec.t_end();
    sets.collocation.reserve(static_cast<std::size_t>(counts.n_collocation));
    for (int i = 0; i < counts.n_collocation; ++i) {
        double x = rng_cp.u01() * spec.height;
        while (x == 0.0) x = rng_cp.u01() * spec.height; // open interval (0, H)
        const double t = (1.0 - rng_cp.u01()) * t_span;  // (0, T]
        sets.collocation.push_back({ x, t });
    }
    return sets;
}

} // namespace bpinn
