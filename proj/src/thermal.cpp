#include "bpinn/thermal.hpp"

#include <cmath>

#include "bpinn/data.hpp"
#include "bpinn/rng.hpp"

namespace bpinn {

RiseSeries hst_rise(const HstParams& params, const std::vector<double>& t_seconds, const Eigen::VectorXd& load_pu)
{
    params.validate();
    if (t_seconds.empty() || static_cast<Eigen::Index>(t_seconds.size()) != load_pu.size())
        throw ValidationError("hst_rise: empty or mismatched load series");

    const double dt_s = params.dt * 60.0;
    const double span = t_seconds.back() - t_seconds.front();
    const auto n_steps = static_cast<std::size_t>(std::floor(span / dt_s + 1e-9));

    // Explicit difference recursion for the two branches, IEC style:
    // delta_i <- delta_i + v_i (beta_i K^y - delta_i), K at the interval start.
    const double v1 = params.dt / (params.k22 * params.tau_winding);
    const double b1 = params.k21 * params.rated_rise;
    const double v2 = params.k22 * params.dt / params.tau_oil;
    const double b2 = (params.k21 - 1.0) * params.rated_rise;

    RiseSeries out;
    out.t_seconds.resize(n_steps + 1);
    out.rise.resize(static_cast<Eigen::Index>(n_steps + 1));

    const double k0 = std::pow(series_interp(t_seconds, load_pu, t_seconds.front()), params.winding_exponent);
    double d1 = b1 * k0; // steady state for K(0)
    double d2 = b2 * k0;
    out.t_seconds[0] = t_seconds.front();
    out.rise[0] = d1 - d2;

    for (std::size_t i = 0; i < n_steps; ++i) {
        const double t0 = t_seconds.front() + static_cast<double>(i) * dt_s;
        const double ky = std::pow(series_interp(t_seconds, load_pu, t0), params.winding_exponent);
        d1 += v1 * (b1 * ky - d1);
        d2 += v2 * (b2 * ky - d2);
        out.t_seconds[i + 1] = t0 + dt_s;
        out.rise[static_cast<Eigen::Index>(i + 1)] = d1 - d2;
    }
    return out;
}

double rise_at(const RiseSeries& series, double t_seconds)
{
    return series_interp(series.t_seconds, series.rise, t_seconds);
}

double hst_initial(const HstParams& params, double topoil0, double load0)
{
    const double ky = std::pow(load0, params.winding_exponent);
    return topoil0 + params.k21 * params.rated_rise * ky - (params.k21 - 1.0) * params.rated_rise * ky;
}

FieldGrid winding_field(const FieldGrid& oil, const RiseSeries& rise)
{
    FieldGrid out = oil;
    for (Eigen::Index r = 0; r < oil.t.size(); ++r) {
        const double dr = rise_at(rise, oil.t[r]);
        for (Eigen::Index c = 0; c < oil.x.size(); ++c) out.values(r, c) += dr;
    }
    return out;
}

Eigen::MatrixXd loss_of_life(const Eigen::MatrixXd& ageing, double dt_minutes)
{
    if (dt_minutes <= 0.0) throw ValidationError("loss_of_life: dt must be positive");
    Eigen::MatrixXd lol(ageing.rows(), ageing.cols());
    if (ageing.rows() == 0) return lol;
    lol.row(0).setZero();
    for (Eigen::Index r = 1; r < ageing.rows(); ++r)
        lol.row(r) = lol.row(r - 1) + dt_minutes * ageing.row(r);
    return lol;
}

AgeingField propagate_ageing(const PredictiveGrid& predictive, const RiseSeries& rise, int n_samples,
                             std::uint64_t seed)
{
    if (n_samples < 2) throw ValidationError("propagate_ageing: n_samples must be >= 2");
    const Eigen::Index nt = predictive.t.size();
    const Eigen::Index nx = predictive.x.size();
    if (nt < 2 || nx < 1) throw ValidationError("propagate_ageing: predictive grid too small");

    const double dt_minutes = (predictive.t[1] - predictive.t[0]) / 60.0;
    for (Eigen::Index r = 1; r < nt; ++r)
        if (std::fabs((predictive.t[r] - predictive.t[r - 1]) / 60.0 - dt_minutes) > 1e-9 * dt_minutes)
            throw ValidationError("propagate_ageing: time axis must be uniform");

    Eigen::MatrixXd v_sum = Eigen::MatrixXd::Zero(nt, nx);
    Eigen::MatrixXd v_sq = Eigen::MatrixXd::Zero(nt, nx);
    Eigen::MatrixXd lol_sum = Eigen::MatrixXd::Zero(nt, nx);
    Eigen::MatrixXd lol_sq = Eigen::MatrixXd::Zero(nt, nx);

    Eigen::VectorXd rise_row(nt);
    for (Eigen::Index r = 0; r < nt; ++r) rise_row[r] = rise_at(rise, predictive.t[r]);

    Rng rng(seed, 21);
    Eigen::VectorXd lol_run(nx);
    for (int s = 0; s < n_samples; ++s) {
        lol_run.setZero();
        for (Eigen::Index r = 0; r < nt; ++r) {
            for (Eigen::Index c = 0; c < nx; ++c) {
                const double sd = std::sqrt(std::max(0.0, predictive.total(r, c)));
                const double temp = predictive.mean(r, c) + sd * rng.normal();
                const double v = ageing_factor(temp + rise_row[r]);
                if (r > 0) lol_run[c] += dt_minutes * v;
                v_sum(r, c) += v;
                v_sq(r, c) += v * v;
                lol_sum(r, c) += lol_run[c];
                lol_sq(r, c) += lol_run[c] * lol_run[c];
            }
        }
    }

    const double inv_n = 1.0 / static_cast<double>(n_samples);
    auto finalize = [&](const Eigen::MatrixXd& sum, const Eigen::MatrixXd& sq, Eigen::MatrixXd& mean,
                        Eigen::MatrixXd& sd) {
        mean = sum * inv_n;
        sd.resize(sum.rows(), sum.cols());
        for (Eigen::Index r = 0; r < sum.rows(); ++r)
            for (Eigen::Index c = 0; c < sum.cols(); ++c)
                sd(r, c) = std::sqrt(std::max(0.0, sq(r, c) * inv_n - mean(r, c) * mean(r, c)));
    };

    AgeingField out;
    out.v_mean.x = out.v_std.x = out.lol_mean.x = out.lol_std.x = predictive.x;
    out.v_mean.t = out.v_std.t = out.lol_mean.t = out.lol_std.t = predictive.t;
    finalize(v_sum, v_sq, out.v_mean.values, out.v_std.values);
    finalize(lol_sum, lol_sq, out.lol_mean.values, out.lol_std.values);
    return out;
}

} // namespace bpinn
