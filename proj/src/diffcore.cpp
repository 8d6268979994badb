#include "bpinn/diffcore.hpp"

namespace bpinn {

std::vector<Jet2d> propagate_jet(const Eigen::MatrixXd& weights, const Eigen::VectorXd& bias,
                                 std::span<const Jet2d> input, Activation activation, int layer_index)
{
    if (weights.cols() != static_cast<Eigen::Index>(input.size()) || weights.rows() != bias.size())
        throw ValidationError(detail::msg("propagate_jet: dimension mismatch at layer ", layer_index, ": weights ",
                                          weights.rows(), "x", weights.cols(), ", bias ", bias.size(), ", input ",
                                          input.size()));

    std::vector<Jet2d> out(static_cast<std::size_t>(weights.rows()));
    for (Eigen::Index j = 0; j < weights.rows(); ++j) {
        Jet2d acc(bias[j]);
        for (Eigen::Index i = 0; i < weights.cols(); ++i)
            acc = acc + input[static_cast<std::size_t>(i)] * weights(j, i);
        out[static_cast<std::size_t>(j)] = activation == Activation::tanh ? tanh(acc) : acc;
    }
    return out;
}

} // namespace bpinn
