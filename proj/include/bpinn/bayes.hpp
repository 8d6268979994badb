#pragma once

// Mean-field Gaussian posterior over the flat parameter vector, prior
// densities, reparameterized sampling, and the per-sample log-density terms
// the ELBO is assembled from. The scalar-templated versions run on the tape
// so gradients flow through the reparameterization.

#include <cmath>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "bpinn/diffcore.hpp"
#include "bpinn/error.hpp"
#include "bpinn/net.hpp"

namespace bpinn {

inline constexpr double kLogTwoPi = 1.8378770664093454835606594728112; // log(2 pi)

/// Per-parameter Gaussian posterior; the standard deviation is
/// softplus(rho), strictly positive for any finite rho.
struct VariationalPosterior {
    Eigen::VectorXd mu;
    Eigen::VectorXd rho;

    void validate() const
    {
        if (mu.size() != rho.size()) throw ValidationError("VariationalPosterior: mu/rho length mismatch");
        if (mu.size() == 0) throw ValidationError("VariationalPosterior: empty");
    }

    Eigen::VectorXd sigma() const
    {
        Eigen::VectorXd s(rho.size());
        for (Eigen::Index i = 0; i < rho.size(); ++i) s[i] = softplus(rho[i]);
        return s;
    }
};

enum class PriorKind { gaussian_isotropic, laplace };

struct PriorSpec {
    PriorKind kind = PriorKind::laplace;
    double scale = 1.0; // unit variance for Gaussian; lambda for Laplace

    void validate() const
    {
        if (scale <= 0.0) throw ValidationError("PriorSpec: scale must be positive");
    }
};

/// rho such that softplus(rho) = sigma.
inline double rho_for_sigma(double sigma)
{
    if (sigma <= 0.0) throw ValidationError("rho_for_sigma: sigma must be positive");
    return std::log(std::expm1(sigma));
}

/// Glorot means, constant rho giving sigma0.
VariationalPosterior init_posterior(const MlpConfig& config, Rng& rng, double sigma0 = 0.05);

/// theta = mu + softplus(rho) .* noise, differentiable in (mu, rho) when S is
/// a tape variable.
template <typename S>
std::vector<S> sample_params(std::span<const S> mu, std::span<const S> rho, const Eigen::VectorXd& noise)
{
    if (mu.size() != rho.size() || mu.size() != static_cast<std::size_t>(noise.size()))
        throw ValidationError(detail::msg("sample_params: length mismatch (mu ", mu.size(), ", rho ", rho.size(),
                                          ", noise ", noise.size(), ")"));
    std::vector<S> theta;
    theta.reserve(mu.size());
    for (std::size_t i = 0; i < mu.size(); ++i)
        theta.push_back(mu[i] + softplus(rho[i]) * S(noise[static_cast<Eigen::Index>(i)]));
    return theta;
}

Eigen::VectorXd sample_params(const VariationalPosterior& post, const Eigen::VectorXd& noise);

/// Sum of log N(theta_i; mu_i, sigma_i^2).
template <typename S>
S log_q(std::span<const S> theta, std::span<const S> mu, std::span<const S> rho)
{
    using std::log;
    if (theta.size() != mu.size() || theta.size() != rho.size())
        throw ValidationError("log_q: length mismatch");
    S acc(0.0);
    for (std::size_t i = 0; i < theta.size(); ++i) {
        const S sigma = softplus(rho[i]);
        const S z = (theta[i] - mu[i]) / sigma;
        acc = acc + S(-0.5 * kLogTwoPi) - log(sigma) - S(0.5) * z * z;
    }
    return acc;
}

double log_q(const Eigen::VectorXd& theta, const VariationalPosterior& post);

/// Gaussian: sum of log N(theta_i; 0, 1). Laplace: sum of
/// log(lambda/2) - lambda |theta_i|.
template <typename S>
S log_prior(std::span<const S> theta, const PriorSpec& prior)
{
    using std::abs;
    prior.validate();
    S acc(0.0);
    if (prior.kind == PriorKind::gaussian_isotropic) {
        for (std::size_t i = 0; i < theta.size(); ++i)
            acc = acc + S(-0.5 * kLogTwoPi) - S(0.5) * theta[i] * theta[i];
    } else {
        const double log_half_lambda = std::log(0.5 * prior.scale);
        for (std::size_t i = 0; i < theta.size(); ++i)
            acc = acc + S(log_half_lambda) - S(prior.scale) * abs(theta[i]);
    }
    return acc;
}

double log_prior(const Eigen::VectorXd& theta, const PriorSpec& prior);

/// One reparameterized sample with both log densities, for ELBO assembly and
/// KL diagnostics.
struct KlSample {
    double log_q_val = 0.0;
    double log_prior_val = 0.0;
    Eigen::VectorXd theta;
};

KlSample mc_kl_terms(const VariationalPosterior& post, const PriorSpec& prior, const Eigen::VectorXd& noise);

} // namespace bpinn
