#include "bpinn/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <deque>
#include <fstream>
#include <limits>
#include <numeric>

#include "bpinn/rng.hpp"

namespace bpinn {

namespace {

constexpr double kDivergenceLimit = 1e6;

struct TermAccum {
    Var ic { 0.0 };
    Var bc { 0.0 };
    Var res { 0.0 };
    int n_ic = 0;
    int n_bc = 0;
    int n_res = 0;
};

/// Unweighted per-term sums over the given batches. Mean-based variants
/// divide afterwards.
TermAccum accumulate_terms(std::span<const Var> theta, const TrainProblem& problem, const StepBatches& batches,
                           Variant variant, const DropoutMask* mask)
{
    TermAccum acc;
    const bool hetero = is_heteroscedastic(variant);
    for (int idx : batches.data_idx) {
        const auto& p = problem.data[static_cast<std::size_t>(idx)];
        const auto out = eval_mlp<Var, Var>(problem.config, theta, Var(p.xn), Var(p.tn), mask);
        Var contrib(0.0);
        if (variant == Variant::pinn) {
            const Var e = Var(p.un) - out[0];
            contrib = e * e;
        } else if (hetero) {
            contrib = nll_hetero(p.un, out[0], variance_of(out[1]));
        } else {
            const double sigma = p.initial ? problem.sigmas.ic : problem.sigmas.bc;
            const Var e = Var(p.un) - out[0];
            contrib = Var(0.5 * std::log(2.0 * M_PI * sigma * sigma)) + e * e * Var(0.5 / (sigma * sigma));
        }
        if (p.initial) {
            acc.ic += contrib;
            ++acc.n_ic;
        } else {
            acc.bc += contrib;
            ++acc.n_bc;
        }
    }

    const double sf = problem.sigmas.res;
    const double res_const = 0.5 * std::log(2.0 * M_PI * sf * sf);
    const double res_quad = 0.5 / (sf * sf);
    for (int idx : batches.res_idx) {
        const auto& p = problem.residual[static_cast<std::size_t>(idx)];
        const auto out = eval_mlp<Jet2<Var>, Var>(problem.config, theta, Jet2<Var>::input_x(Var(p.xn)),
                                                  Jet2<Var>::input_t(Var(p.tn)), mask);
        const NetDerivs<Var> nd { out[0].v, out[0].dx, out[0].dxx, out[0].dt };
        const Var r = residual_dimensionless(*problem.pde, problem.norm, nd, p.t_phys);
        if (is_bayesian(variant))
            acc.res += Var(res_const) + r * r * Var(res_quad);
        else
            acc.res += r * r;
        ++acc.n_res;
    }
    return acc;
}

Var weighted_total(const Var& kl, const Var& ic, const Var& bc, const Var& res)
{
    Var total = kl + ic;
    total = total + bc;
    total = total + res;
    return total;
}

StepResult finish_step(Tape& tape, const std::vector<Var>& leaves, const Var& kl, const Var& ic, const Var& bc,
                       const Var& res)
{
    const Var total = weighted_total(kl, ic, bc, res);
    if (!std::isfinite(total.v))
        throw DivergenceError(detail::msg("non-finite loss (kl=", kl.v, ", ic=", ic.v, ", bc=", bc.v, ", res=", res.v,
                                          ")"));
    StepResult result;
    result.parts = { kl.v, ic.v, bc.v, res.v, total.v };
    result.gradient.resize(static_cast<Eigen::Index>(leaves.size()));
    if (total.is_const()) {
        result.gradient.setZero();
        return result;
    }
    std::vector<double> adjoint;
    tape.backward(total.idx, adjoint);
    for (std::size_t i = 0; i < leaves.size(); ++i)
        result.gradient[static_cast<Eigen::Index>(i)] = adjoint[static_cast<std::size_t>(leaves[i].idx)];
    return result;
}

Var term_mean(const Var& sum, int n) { return n > 0 ? sum / Var(static_cast<double>(n)) : Var(0.0); }

} // namespace

LossWeights default_weights(Variant v)
{
    if (is_bayesian(v)) return { 1.0, 1.0, 1e-4 };
    return { 1.0, 1.0, 1e-6 };
}

void TrainPlan::validate() const
{
    if (hidden.empty()) throw ValidationError("TrainPlan: need at least one hidden layer");
    if (lr <= 0.0) throw ValidationError("TrainPlan: lr must be positive");
    if (batch < 1) throw ValidationError("TrainPlan: batch must be >= 1");
    if (max_epochs < 1) throw ValidationError("TrainPlan: max_epochs must be >= 1");
    if (patience < 1 || patience >= max_epochs)
        throw ValidationError(detail::msg("TrainPlan: patience must be in [1, max_epochs); got ", patience, " vs ",
                                          max_epochs));
    if (k_samples < 1) throw ValidationError("TrainPlan: k_samples must be >= 1");
    if (dropout_rate < 0.0 || dropout_rate >= 1.0) throw ValidationError("TrainPlan: dropout_rate must be in [0, 1)");
    if (adam_iters < 0 || lbfgs_iters < 0) throw ValidationError("TrainPlan: schedule counts must be non-negative");
    weights.validate();
    sigma_homo.validate();
    prior.validate();
    if (posterior_sigma0 <= 0.0) throw ValidationError("TrainPlan: posterior_sigma0 must be positive");
}

TrainPlan make_plan(Variant v)
{
    TrainPlan plan;
    plan.variant = v;
    plan.weights = default_weights(v);
    return plan;
}

void write_train_log_csv(const std::string& path, const TrainLog& log)
{
    std::ofstream out(path);
    if (!out) throw IoError(detail::msg("cannot write train log: ", path));
    out << "epoch,kl,nll_0,nll_bc,nll_r,total,val,ms\n";
    char buf[256];
    for (const auto& r : log.rows) {
        std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.epoch, r.kl, r.nll_ic,
                      r.nll_bc, r.nll_res, r.total, r.val, r.ms);
        out << buf;
    }
    if (!out) throw IoError(detail::msg("write failed: ", path));
}

double nll_homo(const Eigen::VectorXd& residuals, double sigma)
{
    if (sigma <= 0.0) throw ValidationError("nll_homo: sigma must be positive");
    const double c = 0.5 * std::log(2.0 * M_PI * sigma * sigma);
    double acc = 0.0;
    for (Eigen::Index i = 0; i < residuals.size(); ++i) acc += c + residuals[i] * residuals[i] / (2.0 * sigma * sigma);
    return acc;
}

TrainProblem make_train_problem(const ThermalPdeSpec& spec, const Normalization& norm, const TrainingSets& sets,
                                const MlpConfig& config, const HomoSigmas& sigmas, double holdout_fraction,
                                std::uint64_t seed)
{
    TrainProblem prob;
    prob.pde = &spec;
    prob.norm = norm;
    prob.config = config;
    prob.sigmas = sigmas;

    std::vector<TrainProblem::DataPoint> all;
    all.reserve(sets.initial.size() + sets.boundary.size());
    for (const auto& p : sets.initial)
        all.push_back({ norm.to_norm_x(p.x), norm.to_norm_t(p.t), norm.to_norm_temp(p.target), true });
    for (const auto& p : sets.boundary)
        all.push_back({ norm.to_norm_x(p.x), norm.to_norm_t(p.t), norm.to_norm_temp(p.target), false });

    std::vector<std::size_t> order(all.size());
    std::iota(order.begin(), order.end(), std::size_t { 0 });
    Rng rng(seed, 105);
    rng.shuffle(order);
    std::size_t n_hold = all.size() >= 10 ? static_cast<std::size_t>(holdout_fraction * static_cast<double>(all.size()))
                                          : 0;
    for (std::size_t i = 0; i < order.size(); ++i) {
        if (i < n_hold)
            prob.holdout.push_back(all[order[i]]);
        else
            prob.data.push_back(all[order[i]]);
    }

    prob.residual.reserve(sets.collocation.size());
    for (const auto& p : sets.collocation)
        prob.residual.push_back({ norm.to_norm_x(p.x), norm.to_norm_t(p.t), p.t });
    return prob;
}

StepResult elbo_step(const VariationalPosterior& post, const PriorSpec& prior, const LossWeights& weights,
                     const TrainProblem& problem, const StepBatches& batches, const Eigen::VectorXd& noise,
                     Variant variant, Tape& tape)
{
    post.validate();
    prior.validate();
    weights.validate();
    if (!is_bayesian(variant)) throw ValidationError("elbo_step: variant must be a B-PINN kind");

    tape.clear();
    const auto n = static_cast<std::size_t>(post.mu.size());
    std::vector<Var> leaves;
    leaves.reserve(2 * n);
    for (std::size_t i = 0; i < n; ++i) leaves.push_back(make_leaf(tape, post.mu[static_cast<Eigen::Index>(i)]));
    for (std::size_t i = 0; i < n; ++i) leaves.push_back(make_leaf(tape, post.rho[static_cast<Eigen::Index>(i)]));
    const std::span<const Var> mu_v(leaves.data(), n);
    const std::span<const Var> rho_v(leaves.data() + n, n);

    const std::vector<Var> theta = sample_params(mu_v, rho_v, noise);
    const std::span<const Var> theta_v(theta);
    const Var kl = log_q(theta_v, mu_v, rho_v) - log_prior(theta_v, prior);

    const TermAccum terms = accumulate_terms(theta_v, problem, batches, variant, nullptr);
    const Var ic = Var(weights.lambda_ic) * terms.ic;
    const Var bc = Var(weights.lambda_bc) * terms.bc;
    const Var res = Var(weights.lambda_res) * terms.res;
    return finish_step(tape, leaves, kl, ic, bc, res);
}

StepResult pinn_loss(const NetworkParams& params, const LossWeights& weights, const TrainProblem& problem,
                     const StepBatches& batches, Tape& tape)
{
    weights.validate();
    tape.clear();
    std::vector<Var> leaves;
    leaves.reserve(static_cast<std::size_t>(params.theta.size()));
    for (Eigen::Index i = 0; i < params.theta.size(); ++i) leaves.push_back(make_leaf(tape, params.theta[i]));

    const TermAccum terms = accumulate_terms(std::span<const Var>(leaves), problem, batches, Variant::pinn, nullptr);
    const Var ic = Var(weights.lambda_ic) * term_mean(terms.ic, terms.n_ic);
    const Var bc = Var(weights.lambda_bc) * term_mean(terms.bc, terms.n_bc);
    const Var res = Var(weights.lambda_res) * term_mean(terms.res, terms.n_res);
    return finish_step(tape, leaves, Var(0.0), ic, bc, res);
}

StepResult dpinn_loss(const NetworkParams& params, const DropoutMask& mask, const LossWeights& weights,
                      const TrainProblem& problem, const StepBatches& batches, Variant variant, Tape& tape)
{
    weights.validate();
    if (!is_dropout(variant)) throw ValidationError("dpinn_loss: variant must be a d-PINN kind");
    tape.clear();
    std::vector<Var> leaves;
    leaves.reserve(static_cast<std::size_t>(params.theta.size()));
    for (Eigen::Index i = 0; i < params.theta.size(); ++i) leaves.push_back(make_leaf(tape, params.theta[i]));

    const TermAccum terms = accumulate_terms(std::span<const Var>(leaves), problem, batches, variant, &mask);
    const Var ic = Var(weights.lambda_ic) * term_mean(terms.ic, terms.n_ic);
    const Var bc = Var(weights.lambda_bc) * term_mean(terms.bc, terms.n_bc);
    const Var res = Var(weights.lambda_res) * term_mean(terms.res, terms.n_res);
    return finish_step(tape, leaves, Var(0.0), ic, bc, res);
}

void adam_update(AdamState& state, Eigen::VectorXd& params, const Eigen::VectorXd& gradient, double lr)
{
    if (state.m.size() != params.size() || gradient.size() != params.size())
        throw ValidationError(detail::msg("adam_update: size mismatch (state ", state.m.size(), ", params ",
                                          params.size(), ", gradient ", gradient.size(), ")"));
    constexpr double beta1 = 0.9;
    constexpr double beta2 = 0.999;
    constexpr double eps = 1e-8;
    state.step += 1;
    const double c1 = 1.0 - std::pow(beta1, static_cast<double>(state.step));
    const double c2 = 1.0 - std::pow(beta2, static_cast<double>(state.step));
    for (Eigen::Index i = 0; i < params.size(); ++i) {
        const double g = gradient[i];
        state.m[i] = beta1 * state.m[i] + (1.0 - beta1) * g;
        state.v[i] = beta2 * state.v[i] + (1.0 - beta2) * g * g;
        params[i] -= lr * (state.m[i] / c1) / (std::sqrt(state.v[i] / c2) + eps);
    }
}

LbfgsResult lbfgsRefineImpl(Eigen::VectorXd x,
                            const std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>& value_and_grad,
                            const LbfgsOptions& options)
{
    constexpr double c1 = 1e-4;
    const auto n = x.size();
    Eigen::VectorXd g(n);
    double f = value_and_grad(x, g);

    LbfgsResult result;
    result.params = x;
    result.loss = f;

    std::deque<Eigen::VectorXd> s_hist, y_hist;
    std::deque<double> rho_hist;

    Eigen::VectorXd q(n), p(n), x_trial(n), g_trial(n);
    for (int iter = 1; iter <= options.max_iters; ++iter) {
        if (g.norm() < options.grad_tol) break;

        // Two-loop recursion.
        q = g;
        std::vector<double> alpha(s_hist.size());
        for (std::size_t i = s_hist.size(); i-- > 0;) {
            alpha[i] = rho_hist[i] * s_hist[i].dot(q);
            q -= alpha[i] * y_hist[i];
        }
        if (!s_hist.empty()) {
            const double gamma = s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
            q *= gamma;
        }
        for (std::size_t i = 0; i < s_hist.size(); ++i) {
            const double beta = rho_hist[i] * y_hist[i].dot(q);
            q += (alpha[i] - beta) * s_hist[i];
        }
        p = -q;
        double d0 = g.dot(p);
        if (d0 >= 0.0) { // fall back to steepest descent
            p = -g;
            d0 = -g.squaredNorm();
        }

        // Armijo backtracking with quadratic interpolation, plus one
        // interpolation refinement of an accepted step (exact on quadratics).
        double step = 1.0;
        bool accepted = false;
        double f_acc = 0.0;
        for (int ls = 0; ls < 40; ++ls) {
            x_trial = x + step * p;
            const double f_trial = value_and_grad(x_trial, g_trial);
            if (std::isfinite(f_trial) && f_trial <= f + c1 * step * d0) {
                accepted = true;
                f_acc = f_trial;
                break;
            }
            const double denom = 2.0 * (f_trial - f - d0 * step);
            double next = denom > 0.0 ? -d0 * step * step / denom : 0.5 * step;
            if (!std::isfinite(next)) next = 0.5 * step;
            step = std::clamp(next, 0.1 * step, 0.5 * step);
            if (step < 1e-16) break;
        }
        if (!accepted) {
            result.line_search_failed = true;
            break;
        }

        const double denom = 2.0 * (f_acc - f - d0 * step);
        if (denom > 0.0) {
            const double refined = -d0 * step * step / denom;
            if (refined > 0.0 && refined <= 10.0 * step && std::fabs(refined - step) > 1e-12 * step) {
                Eigen::VectorXd x_ref = x + refined * p;
                Eigen::VectorXd g_ref(n);
                const double f_ref = value_and_grad(x_ref, g_ref);
                if (std::isfinite(f_ref) && f_ref <= f_acc && f_ref <= f + c1 * refined * d0) {
                    x_trial = std::move(x_ref);
                    g_trial = std::move(g_ref);
                    f_acc = f_ref;
                    step = refined;
                }
            }
        }
        Eigen::VectorXd s = x_trial - x;
        Eigen::VectorXd y = g_trial - g;
        const double sy = s.dot(y);
        if (sy > 1e-12 * s.norm() * y.norm()) {
            s_hist.push_back(std::move(s));
            y_hist.push_back(std::move(y));
            rho_hist.push_back(1.0 / sy);
            if (static_cast<int>(s_hist.size()) > options.memory) {
                s_hist.pop_front();
                y_hist.pop_front();
                rho_hist.pop_front();
            }
        }

        x = x_trial;
        g = g_trial;
        f = f_acc;
        result.iterations = iter;
        if (f <= result.loss) {
            result.loss = f;
            result.params = x;
        }
        if (options.on_iterate) options.on_iterate(iter, x, f);
    }
    return result;
}

LbfgsResult lbfgs_refine(Eigen::VectorXd params,
                         const std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>& value_and_grad,
                         const LbfgsOptions& options)
{
    if (options.memory < 1) throw ValidationError("lbfgs_refine: memory must be >= 1");
    if (options.max_iters < 0) throw ValidationError("lbfgs_refine: max_iters must be non-negative");
    return lbfgsRefineImpl(std::move(params), value_and_grad, options);
}

namespace {

double monitor_loss(const TrainProblem& problem, Variant variant, const MlpConfig& config,
                    const Eigen::VectorXd& theta)
{
    const auto& points = problem.holdout.empty() ? problem.data : problem.holdout;
    if (points.empty()) return 0.0;
    const std::span<const double> th(theta.data(), static_cast<std::size_t>(theta.size()));
    double acc = 0.0;
    for (const auto& p : points) {
        const auto out = eval_mlp<double, double>(config, th, p.xn, p.tn);
        const double e = p.un - out[0];
        if (variant == Variant::pinn) {
            acc += e * e;
        } else if (is_heteroscedastic(variant)) {
            const double var = variance_of(out[1]);
            acc += 0.5 * std::log(2.0 * M_PI * var) + e * e / (2.0 * var);
        } else {
            const double sigma = p.initial ? problem.sigmas.ic : problem.sigmas.bc;
            acc += 0.5 * std::log(2.0 * M_PI * sigma * sigma) + e * e / (2.0 * sigma * sigma);
        }
    }
    return acc / static_cast<double>(points.size());
}

} // namespace

FitResult fit_problem(const TrainPlan& plan, const ThermalPdeSpec& spec, const Normalization& norm,
                      const TrainingSets& sets, std::uint64_t seed)
{
    plan.validate();
    spec.validate();
    norm.validate();

    const bool bayes = is_bayesian(plan.variant);
    const bool dropout = is_dropout(plan.variant);
    const MlpConfig config = make_mlp_config(plan.hidden, is_heteroscedastic(plan.variant),
                                             dropout ? plan.dropout_rate : 0.0);
    const TrainProblem problem = make_train_problem(spec, norm, sets, config, plan.sigma_homo, 0.10, seed);
    if (problem.data.empty()) throw ValidationError("fit: no training data points");
    if (problem.residual.empty()) throw ValidationError("fit: no collocation points");

    Rng rng_init(seed, 101);
    Rng rng_noise(seed, 102);
    Rng rng_shuffle(seed, 103);
    Rng rng_mask(seed, 104);

    const auto n_params = static_cast<Eigen::Index>(config.param_count());
    Eigen::VectorXd packed;
    if (bayes) {
        const VariationalPosterior post = init_posterior(config, rng_init, plan.posterior_sigma0);
        packed.resize(2 * n_params);
        packed << post.mu, post.rho;
    } else {
        packed = glorot_init(config, rng_init);
    }

    AdamState adam(packed.size());
    Tape tape;
    Eigen::VectorXd noise(n_params);

    std::vector<int> data_order(problem.data.size());
    std::iota(data_order.begin(), data_order.end(), 0);
    std::vector<int> res_order(problem.residual.size());
    std::iota(res_order.begin(), res_order.end(), 0);
    rng_shuffle.shuffle(res_order);
    std::size_t res_cursor = 0;

    const int batch = plan.batch;
    const auto n_data = static_cast<int>(problem.data.size());
    const int steps_per_epoch = (n_data + batch - 1) / batch;
    const double data_scale = static_cast<double>(n_data); // over batch size, per step

    auto next_res_batch = [&](std::vector<int>& out) {
        const std::size_t want = std::min<std::size_t>(static_cast<std::size_t>(batch), res_order.size());
        out.clear();
        for (std::size_t i = 0; i < want; ++i) {
            if (res_cursor == res_order.size()) {
                rng_shuffle.shuffle(res_order);
                res_cursor = 0;
            }
            out.push_back(res_order[res_cursor++]);
        }
    };

    auto current_theta = [&]() -> Eigen::VectorXd {
        return bayes ? packed.head(n_params).eval() : packed;
    };

    TrainLog log;
    Eigen::VectorXd best = packed;
    double best_val = std::numeric_limits<double>::infinity();
    int best_epoch = -1;
    int since_best = 0;
    StopReason reason = StopReason::max_epochs;
    bool stopped = false;

    const int adam_epochs = plan.variant == Variant::pinn
                                ? std::max(1, (plan.adam_iters + steps_per_epoch - 1) / steps_per_epoch)
                                : plan.max_epochs;

    std::vector<int> data_batch, res_batch;
    for (int epoch = 1; epoch <= adam_epochs && !stopped; ++epoch) {
        const auto epoch_start = std::chrono::steady_clock::now();
        rng_shuffle.shuffle(data_order);
        double sum_kl = 0.0, sum_ic = 0.0, sum_bc = 0.0, sum_res = 0.0;
        int steps = 0;

        for (int s = 0; s < steps_per_epoch && !stopped; ++s) {
            const int lo = s * batch;
            const int hi = std::min(lo + batch, n_data);
            data_batch.assign(data_order.begin() + lo, data_order.begin() + hi);
            next_res_batch(res_batch);
            const StepBatches batches { std::span<const int>(data_batch), std::span<const int>(res_batch) };

            StepResult step;
            try {
                if (bayes) {
                    // Rescale the batch sums into unbiased estimates of the
                    // full-data likelihood sums.
                    LossWeights w = plan.weights;
                    const double ds = data_scale / static_cast<double>(data_batch.size());
                    const double rs = static_cast<double>(problem.residual.size()) /
                                      static_cast<double>(res_batch.size());
                    w.lambda_ic *= ds;
                    w.lambda_bc *= ds;
                    w.lambda_res *= rs;
                    VariationalPosterior post { packed.head(n_params), packed.tail(n_params) };
                    StepResult accum;
                    for (int k = 0; k < plan.k_samples; ++k) {
                        rng_noise.fill_normal(std::span<double>(noise.data(), static_cast<std::size_t>(noise.size())));
                        StepResult one = elbo_step(post, plan.prior, w, problem, batches, noise, plan.variant, tape);
                        if (k == 0) {
                            accum = std::move(one);
                        } else {
                            accum.gradient += one.gradient;
                            accum.parts.kl += one.parts.kl;
                            accum.parts.ic += one.parts.ic;
                            accum.parts.bc += one.parts.bc;
                            accum.parts.res += one.parts.res;
                            accum.parts.total += one.parts.total;
                        }
                    }
                    if (plan.k_samples > 1) {
                        const double inv = 1.0 / static_cast<double>(plan.k_samples);
                        accum.gradient *= inv;
                        accum.parts.kl *= inv;
                        accum.parts.ic *= inv;
                        accum.parts.bc *= inv;
                        accum.parts.res *= inv;
                        accum.parts.total *= inv;
                    }
                    step = std::move(accum);
                } else if (dropout) {
                    const DropoutMask mask = sample_mask(config, rng_mask);
                    const NetworkParams params { config, packed };
                    step = dpinn_loss(params, mask, plan.weights, problem, batches, plan.variant, tape);
                } else {
                    const NetworkParams params { config, packed };
                    step = pinn_loss(params, plan.weights, problem, batches, tape);
                }
            } catch (const DivergenceError&) {
                reason = StopReason::divergence;
                stopped = true;
                break;
            }
            if (step.parts.total > kDivergenceLimit) {
                reason = StopReason::divergence;
                stopped = true;
                break;
            }

            adam_update(adam, packed, step.gradient, plan.lr);
            sum_kl += step.parts.kl;
            sum_ic += step.parts.ic;
            sum_bc += step.parts.bc;
            sum_res += step.parts.res;
            ++steps;
        }
        if (steps == 0) break;

        TrainLogRow row;
        row.epoch = epoch;
        const double inv = 1.0 / static_cast<double>(steps);
        row.kl = sum_kl * inv;
        row.nll_ic = sum_ic * inv;
        row.nll_bc = sum_bc * inv;
        row.nll_res = sum_res * inv;
        row.total = row.kl + row.nll_ic + row.nll_bc + row.nll_res;
        row.val = monitor_loss(problem, plan.variant, config, current_theta());
        if (plan.log_walltime) {
            const auto dt = std::chrono::steady_clock::now() - epoch_start;
            row.ms = std::chrono::duration<double, std::milli>(dt).count();
        }
        log.rows.push_back(row);

        if (row.val < best_val) {
            best_val = row.val;
            best = packed;
            best_epoch = epoch;
            since_best = 0;
        } else {
            ++since_best;
        }
        if (plan.variant != Variant::pinn && since_best >= plan.patience && !stopped) {
            reason = StopReason::early_stop;
            stopped = true;
        }
    }

    // Vanilla schedule: full-batch L-BFGS refinement after the Adam phase.
    if (plan.variant == Variant::pinn && plan.lbfgs_iters > 0 && reason != StopReason::divergence) {
        std::vector<int> all_data(problem.data.size());
        std::iota(all_data.begin(), all_data.end(), 0);
        std::vector<int> all_res(problem.residual.size());
        std::iota(all_res.begin(), all_res.end(), 0);
        const StepBatches full { std::span<const int>(all_data), std::span<const int>(all_res) };

        LossBreakdown last_parts;
        auto value_and_grad = [&](const Eigen::VectorXd& x, Eigen::VectorXd& gout) -> double {
            const NetworkParams params { config, x };
            const StepResult r = pinn_loss(params, plan.weights, problem, full, tape);
            gout = r.gradient;
            last_parts = r.parts;
            return r.parts.total;
        };

        int epoch_base = log.rows.empty() ? 0 : log.rows.back().epoch;
        LbfgsOptions options;
        options.max_iters = plan.lbfgs_iters;
        options.memory = 10;
        options.on_iterate = [&](int iter, const Eigen::VectorXd& x, double f) {
            (void)f;
            TrainLogRow row;
            row.epoch = epoch_base + iter;
            row.kl = last_parts.kl;
            row.nll_ic = last_parts.ic;
            row.nll_bc = last_parts.bc;
            row.nll_res = last_parts.res;
            row.total = row.kl + row.nll_ic + row.nll_bc + row.nll_res;
            row.val = monitor_loss(problem, plan.variant, config, x);
            log.rows.push_back(row);
            if (row.val < best_val) {
                best_val = row.val;
                best = x;
                best_epoch = row.epoch;
            }
        };
        try {
            lbfgs_refine(packed, value_and_grad, options);
        } catch (const DivergenceError&) {
            reason = StopReason::divergence;
        }
    }

    if (best_epoch < 0) best = packed;

    FitResult result;
    result.checkpoint.variant = plan.variant;
    result.checkpoint.config = config;
    result.checkpoint.norm = norm;
    result.checkpoint.sigma_data = plan.sigma_homo.bc;
    if (bayes) {
        result.checkpoint.mu = best.head(n_params);
        result.checkpoint.rho = best.tail(n_params);
    } else {
        result.checkpoint.theta = best;
    }
    result.log = std::move(log);
    result.log.stop_reason = reason;
    result.log.best_epoch = best_epoch;
    result.log.best_val = best_val;
    return result;
}

FitResult fit(const TrainPlan& plan, const ThermalPdeSpec& spec, const SampleCounts& counts, std::uint64_t seed)
{
    const TrainingSets sets = sample_training_sets(spec, counts, seed);
    const Normalization norm = make_normalization(spec);
    return fit_problem(plan, spec, norm, sets, seed);
}

} // namespace bpinn
