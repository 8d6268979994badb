#include "bpinn/bayes.hpp"

namespace bpinn {

VariationalPosterior init_posterior(const MlpConfig& config, Rng& rng, double sigma0)
{
    VariationalPosterior post;
    post.mu = glorot_init(config, rng);
    post.rho = Eigen::VectorXd::Constant(post.mu.size(), rho_for_sigma(sigma0));
    return post;
}

Eigen::VectorXd sample_params(const VariationalPosterior& post, const Eigen::VectorXd& noise)
{
    post.validate();
    if (noise.size() != post.mu.size())
        throw ValidationError(detail::msg("sample_params: noise length ", noise.size(), " != parameter count ",
                                          post.mu.size()));
    Eigen::VectorXd theta(post.mu.size());
    for (Eigen::Index i = 0; i < theta.size(); ++i) theta[i] = post.mu[i] + softplus(post.rho[i]) * noise[i];
    return theta;
}

double log_q(const Eigen::VectorXd& theta, const VariationalPosterior& post)
{
    post.validate();
    if (theta.size() != post.mu.size()) throw ValidationError("log_q: theta length mismatch");
    double acc = 0.0;
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
        const double sigma = softplus(post.rho[i]);
        const double z = (theta[i] - post.mu[i]) / sigma;
        acc += -0.5 * kLogTwoPi - std::log(sigma) - 0.5 * z * z;
    }
    return acc;
}

double log_prior(const Eigen::VectorXd& theta, const PriorSpec& prior)
{
    prior.validate();
    double acc = 0.0;
    if (prior.kind == PriorKind::gaussian_isotropic) {
        for (Eigen::Index i = 0; i < theta.size(); ++i) acc += -0.5 * kLogTwoPi - 0.5 * theta[i] * theta[i];
    } else {
        const double log_half_lambda = std::log(0.5 * prior.scale);
        for (Eigen::Index i = 0; i < theta.size(); ++i) acc += log_half_lambda - prior.scale * std::fabs(theta[i]);
    }
    return acc;
}

KlSample mc_kl_terms(const VariationalPosterior& post, const PriorSpec& prior, const Eigen::VectorXd& noise)
{
    KlSample s;
    s.theta = sample_params(post, noise);
    s.log_q_val = log_q(s.theta, post);
    s.log_prior_val = log_prior(s.theta, prior);
    return s;
}

} // namespace bpinn
