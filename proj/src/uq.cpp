#include "bpinn/uq.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "bpinn/bayes.hpp"
#include "bpinn/rng.hpp"

namespace bpinn {

namespace {

/// Two-pass population variance and mean; numerically equivalent to the
/// one-pass 1/K sum-of-squares form but stable for means far from zero.
void population_moments(std::span<const double> v, double& mean, double& var)
{
    const auto n = static_cast<double>(v.size());
    double m = 0.0;
    for (double x : v) m += x;
    m /= n;
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    mean = m;
    var = s / n;
}

struct SampleContext {
    std::vector<Eigen::VectorXd> thetas; // B-PINN posterior draws
    std::vector<DropoutMask> masks;      // d-PINN mask draws
    const Eigen::VectorXd* theta_fixed = nullptr;
};

SampleContext draw_samples(const Checkpoint& ckpt, int k, std::uint64_t seed)
{
    SampleContext ctx;
    if (is_bayesian(ckpt.variant)) {
        VariationalPosterior post { ckpt.mu, ckpt.rho };
        Rng rng(seed, 11);
        Eigen::VectorXd noise(ckpt.mu.size());
        ctx.thetas.reserve(static_cast<std::size_t>(k));
        for (int i = 0; i < k; ++i) {
            rng.fill_normal(std::span<double>(noise.data(), static_cast<std::size_t>(noise.size())));
            ctx.thetas.push_back(sample_params(post, noise));
        }
    } else if (is_dropout(ckpt.variant)) {
        Rng rng(seed, 12);
        ctx.masks.reserve(static_cast<std::size_t>(k));
        for (int i = 0; i < k; ++i) ctx.masks.push_back(sample_mask(ckpt.config, rng));
        ctx.theta_fixed = &ckpt.theta;
    }
    return ctx;
}

PredictiveDistribution summarize(const Checkpoint& ckpt, std::span<const double> mu_n, std::span<const double> var_n)
{
    const double s2 = ckpt.norm.temp_scale * ckpt.norm.temp_scale;
    PredictiveDistribution p;
    p.n_samples = static_cast<int>(mu_n.size());

    double mean_n = 0.0, epi_n = 0.0;
    population_moments(mu_n, mean_n, epi_n);
    p.mean = ckpt.norm.to_phys_temp(mean_n);
    p.epistemic_var = s2 * epi_n;

    double ale_n = 0.0;
    if (is_heteroscedastic(ckpt.variant)) {
        for (double v : var_n) ale_n += v;
        ale_n /= static_cast<double>(var_n.size());
    } else if (is_stochastic(ckpt.variant)) {
        ale_n = ckpt.sigma_data * ckpt.sigma_data;
    }
    p.aleatoric_var = s2 * ale_n;
    p.total_var = p.epistemic_var + p.aleatoric_var;
    return p;
}

} // namespace

int default_prediction_samples(Variant v)
{
    if (is_bayesian(v)) return 500;
    if (is_dropout(v)) return 200;
    return 1;
}

std::vector<PredictiveDistribution> predict(const Checkpoint& ckpt, std::span<const SpaceTimePoint> points,
                                            int k_samples, std::uint64_t seed)
{
    ckpt.validate();
    if (k_samples <= 0) k_samples = default_prediction_samples(ckpt.variant);
    if (is_stochastic(ckpt.variant) && k_samples < 2)
        throw ValidationError(detail::msg("predict: need K >= 2 samples for variant ", to_string(ckpt.variant)));

    std::vector<PredictiveDistribution> out;
    out.reserve(points.size());

    if (ckpt.variant == Variant::pinn) {
        NetworkParams params { ckpt.config, ckpt.theta };
        for (const auto& pt : points) {
            const NetOutput o = forward(params, { ckpt.norm.to_norm_x(pt.x), ckpt.norm.to_norm_t(pt.t) });
            PredictiveDistribution p;
            p.mean = ckpt.norm.to_phys_temp(o.mu);
            p.n_samples = 1;
            out.push_back(p);
        }
        return out;
    }

    const SampleContext ctx = draw_samples(ckpt, k_samples, seed);
    const auto uk = static_cast<std::size_t>(k_samples);
    std::vector<double> mu_n(uk), var_n(uk);
    for (const auto& pt : points) {
        const SpaceTimePoint pn { ckpt.norm.to_norm_x(pt.x), ckpt.norm.to_norm_t(pt.t) };
        for (std::size_t s = 0; s < uk; ++s) {
            NetOutput o;
            if (is_bayesian(ckpt.variant)) {
                NetworkParams params { ckpt.config, ctx.thetas[s] };
                o = forward(params, pn);
            } else {
                NetworkParams params { ckpt.config, *ctx.theta_fixed };
                o = forward(params, pn, &ctx.masks[s]);
            }
            mu_n[s] = o.mu;
            var_n[s] = is_heteroscedastic(ckpt.variant) ? variance_of(o.pre_var) : 0.0;
        }
        out.push_back(summarize(ckpt, mu_n, var_n));
    }
    return out;
}

VarianceSplit decompose(std::span<const double> sample_means, std::span<const double> sample_vars)
{
    if (sample_means.size() != sample_vars.size())
        throw ValidationError(detail::msg("decompose: length mismatch (", sample_means.size(), " vs ",
                                          sample_vars.size(), ")"));
    if (sample_means.size() < 2) throw ValidationError("decompose: need at least 2 samples");

    VarianceSplit split;
    double mean = 0.0;
    population_moments(sample_means, mean, split.epistemic);
    double acc = 0.0;
    for (double v : sample_vars) acc += v;
    split.aleatoric = acc / static_cast<double>(sample_vars.size());
    split.total = split.epistemic + split.aleatoric;
    return split;
}

PredictiveGrid predict_grid(const Checkpoint& ckpt, const Eigen::VectorXd& x, const Eigen::VectorXd& t, int k_samples,
                            std::uint64_t seed)
{
    std::vector<SpaceTimePoint> points;
    points.reserve(static_cast<std::size_t>(x.size() * t.size()));
    for (Eigen::Index r = 0; r < t.size(); ++r)
        for (Eigen::Index c = 0; c < x.size(); ++c) points.push_back({ x[c], t[r] });

    const auto preds = predict(ckpt, points, k_samples, seed);

    PredictiveGrid grid;
    grid.x = x;
    grid.t = t;
    grid.mean.resize(t.size(), x.size());
    grid.epistemic.resize(t.size(), x.size());
    grid.aleatoric.resize(t.size(), x.size());
    grid.total.resize(t.size(), x.size());
    grid.n_samples = preds.empty() ? 0 : preds.front().n_samples;
    std::size_t i = 0;
    for (Eigen::Index r = 0; r < t.size(); ++r) {
        for (Eigen::Index c = 0; c < x.size(); ++c, ++i) {
            grid.mean(r, c) = preds[i].mean;
            grid.epistemic(r, c) = preds[i].epistemic_var;
            grid.aleatoric(r, c) = preds[i].aleatoric_var;
            grid.total(r, c) = preds[i].total_var;
        }
    }
    return grid;
}

void write_prediction_csv(const std::string& path, const PredictiveGrid& grid)
{
    std::ofstream out(path);
    if (!out) throw IoError(detail::msg("cannot write prediction file: ", path));
    out << "x,t,mean,eu,au,tu\n";
    char buf[192];
    for (Eigen::Index r = 0; r < grid.t.size(); ++r) {
        for (Eigen::Index c = 0; c < grid.x.size(); ++c) {
            std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", grid.x[c], grid.t[r],
                          grid.mean(r, c), grid.epistemic(r, c), grid.aleatoric(r, c), grid.total(r, c));
            out << buf;
        }
    }
    if (!out) throw IoError(detail::msg("write failed: ", path));
}

} // namespace bpinn
