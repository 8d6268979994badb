#include "bpinn/net.hpp"

#include <cmath>

namespace bpinn {

void MlpConfig::validate() const
{
    if (layer_sizes.size() < 2) throw ValidationError("MlpConfig: need at least input and output layers");
    if (layer_sizes.front() != 2) throw ValidationError("MlpConfig: first layer size must be 2 (inputs x, t)");
    const int expected_out = variance_head ? 2 : 1;
    if (layer_sizes.back() != expected_out)
        throw ValidationError(detail::msg("MlpConfig: last layer size must be ", expected_out,
                                          variance_head ? " with" : " without", " variance head, got ",
                                          layer_sizes.back()));
    for (int s : layer_sizes)
        if (s < 1) throw ValidationError("MlpConfig: layer sizes must be positive");
    if (dropout_rate < 0.0 || dropout_rate >= 1.0) throw ValidationError("MlpConfig: dropout_rate must be in [0, 1)");
}

MlpConfig make_mlp_config(const std::vector<int>& hidden, bool variance_head, double dropout_rate)
{
    MlpConfig cfg;
    cfg.layer_sizes.clear();
    cfg.layer_sizes.push_back(2);
    for (int h : hidden) cfg.layer_sizes.push_back(h);
    cfg.layer_sizes.push_back(variance_head ? 2 : 1);
    cfg.variance_head = variance_head;
    cfg.dropout_rate = dropout_rate;
    cfg.validate();
    return cfg;
}

DropoutMask sample_mask(const MlpConfig& config, Rng& rng)
{
    config.validate();
    DropoutMask mask;
    mask.keep_prob = 1.0 - config.dropout_rate;
    mask.keep.resize(static_cast<std::size_t>(config.n_hidden_units()));
    for (auto& k : mask.keep) k = rng.u01() >= config.dropout_rate ? 1 : 0;
    return mask;
}

Eigen::VectorXd glorot_init(const MlpConfig& config, Rng& rng)
{
    config.validate();
    Eigen::VectorXd theta(static_cast<Eigen::Index>(config.param_count()));
    std::size_t off = 0;
    for (std::size_t l = 0; l + 1 < config.layer_sizes.size(); ++l) {
        const auto fan_in = static_cast<std::size_t>(config.layer_sizes[l]);
        const auto fan_out = static_cast<std::size_t>(config.layer_sizes[l + 1]);
        const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        for (std::size_t i = 0; i < fan_in * fan_out; ++i)
            theta[static_cast<Eigen::Index>(off + i)] = rng.uniform(-limit, limit);
        off += fan_in * fan_out;
        for (std::size_t i = 0; i < fan_out; ++i) theta[static_cast<Eigen::Index>(off + i)] = 0.0;
        off += fan_out;
    }
    return theta;
}

NetOutput forward(const NetworkParams& params, const SpaceTimePoint& point, const DropoutMask* mask)
{
    const auto out = eval_mlp<double, double>(params.config,
                                              std::span<const double>(params.theta.data(),
                                                                      static_cast<std::size_t>(params.theta.size())),
                                              point.x, point.t, mask);
    return { out[0], out[1] };
}

NetDerivs<double> forward_with_derivatives(const NetworkParams& params, const SpaceTimePoint& point)
{
    const auto out = eval_mlp<Jet2d, double>(params.config,
                                             std::span<const double>(params.theta.data(),
                                                                     static_cast<std::size_t>(params.theta.size())),
                                             Jet2d::input_x(point.x), Jet2d::input_t(point.t));
    return { out[0].v, out[0].dx, out[0].dxx, out[0].dt };
}

} // namespace bpinn
