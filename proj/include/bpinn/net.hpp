#pragma once

// Feed-forward MLP with a two-output head (solution mean and pre-variance),
// tanh hidden layers, optional dropout masking, and evaluation templated on
// the scalar type so the same code serves plain forwards, input-derivative
// jets, and tape-recorded losses.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "bpinn/diffcore.hpp"
#include "bpinn/error.hpp"
#include "bpinn/rng.hpp"
#include "bpinn/types.hpp"

namespace bpinn {

struct MlpConfig {
    std::vector<int> layer_sizes { 2, 50, 50, 2 }; // tanh on hidden layers
    bool variance_head = true;                     // last size 2 if set, else 1
    double dropout_rate = 0.0;                     // [0, 1)

    void validate() const;

    int n_layers() const { return static_cast<int>(layer_sizes.size()) - 1; }
    int n_hidden_units() const
    {
        int n = 0;
        for (std::size_t l = 1; l + 1 < layer_sizes.size(); ++l) n += layer_sizes[l];
        return n;
    }

    /// Flat vector length: sum of fan_in*fan_out + fan_out over layers.
    std::size_t param_count() const
    {
        std::size_t n = 0;
        for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l)
            n += static_cast<std::size_t>(layer_sizes[l]) * static_cast<std::size_t>(layer_sizes[l + 1]) +
                 static_cast<std::size_t>(layer_sizes[l + 1]);
        return n;
    }
};

/// Builds a config for the given hidden sizes and head.
MlpConfig make_mlp_config(const std::vector<int>& hidden, bool variance_head, double dropout_rate = 0.0);

/// Flat parameter vector plus its layout (the config). Per-layer storage is
/// row-major weights [fan_out x fan_in] followed by the bias.
struct NetworkParams {
    MlpConfig config;
    Eigen::VectorXd theta;
};

/// Per-hidden-unit Bernoulli keep indicators with inverted scaling, so the
/// expected masked activation equals the unmasked one.
struct DropoutMask {
    std::vector<std::uint8_t> keep; // one per hidden unit, layers concatenated
    double keep_prob = 1.0;

    double scale() const { return 1.0 / keep_prob; }
};

DropoutMask sample_mask(const MlpConfig& config, Rng& rng);

/// Glorot-uniform weights, zero biases.
Eigen::VectorXd glorot_init(const MlpConfig& config, Rng& rng);

/// Core evaluation: V is the activation value type (S itself, or Jet2<S> for
/// input derivatives), S the parameter scalar (double or Var). Returns
/// {mean, pre_variance}; pre_variance is default-initialized when the config
/// has no variance head. Dropout applies to hidden activations
/// post-activation.
template <typename V, typename S>
std::array<V, 2> eval_mlp(const MlpConfig& config, std::span<const S> theta, const V& x, const V& t,
                          const DropoutMask* mask = nullptr)
{
    using std::tanh;
    if (theta.size() != config.param_count())
        throw ValidationError(detail::msg("eval_mlp: parameter vector length ", theta.size(),
                                          " does not match layout (", config.param_count(), ")"));
    if (mask != nullptr && mask->keep.size() != static_cast<std::size_t>(config.n_hidden_units()))
        throw ValidationError("eval_mlp: dropout mask size does not match hidden unit count");

    std::vector<V> cur { x, t };
    std::vector<V> next;
    std::size_t off = 0;
    std::size_t unit = 0;
    const int n_layers = config.n_layers();
    for (int l = 0; l < n_layers; ++l) {
        const auto fan_in = static_cast<std::size_t>(config.layer_sizes[static_cast<std::size_t>(l)]);
        const auto fan_out = static_cast<std::size_t>(config.layer_sizes[static_cast<std::size_t>(l) + 1]);
        const std::size_t w_off = off;
        const std::size_t b_off = off + fan_in * fan_out;
        off = b_off + fan_out;

        next.assign(fan_out, V {});
        const bool hidden = l + 1 < n_layers;
        for (std::size_t j = 0; j < fan_out; ++j) {
            V acc = V(theta[b_off + j]);
            for (std::size_t i = 0; i < fan_in; ++i) acc = acc + cur[i] * theta[w_off + j * fan_in + i];
            if (hidden) {
                acc = tanh(acc);
                if (mask != nullptr) {
                    const double factor = mask->keep[unit + j] != 0 ? mask->scale() : 0.0;
                    acc = acc * S(factor);
                }
            }
            next[j] = acc;
        }
        if (hidden) unit += fan_out;
        cur.swap(next);
    }
    std::array<V, 2> out { cur[0], V {} };
    if (config.variance_head) out[1] = cur[1];
    return out;
}

struct NetOutput {
    double mu = 0.0;
    double pre_var = 0.0;
};

/// Plain forward pass at one point (normalized coordinates).
NetOutput forward(const NetworkParams& params, const SpaceTimePoint& point, const DropoutMask* mask = nullptr);

/// Positive variance from the unconstrained head output:
/// softplus(pre_var) + 1e-6, strictly positive and monotone.
template <typename S>
S variance_of(const S& pre_var)
{
    return softplus(pre_var) + S(1e-6);
}

inline constexpr double kVarianceFloor = 1e-6;

/// Value and input derivatives of the mean head; the value channel matches
/// forward().mu bit for bit.
NetDerivs<double> forward_with_derivatives(const NetworkParams& params, const SpaceTimePoint& point);

} // namespace bpinn
