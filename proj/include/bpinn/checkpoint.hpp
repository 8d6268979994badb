#pragma once

// Self-contained model snapshot: everything predict() needs to reproduce the
// predictive distribution in physical units. Versioned plain-text container
// (one value per line, %.17g, so round trips are exact and byte order is a
// non-issue); variational snapshots store mu then rho.

#include <string>

#include <Eigen/Core>

#include "bpinn/net.hpp"
#include "bpinn/types.hpp"
#include "bpinn/variant.hpp"

namespace bpinn {

struct Checkpoint {
    Variant variant = Variant::pinn;
    MlpConfig config;
    Normalization norm;
    double sigma_data = 0.01; // homoscedastic data noise (normalized units)

    Eigen::VectorXd theta;   // deterministic kinds
    Eigen::VectorXd mu, rho; // variational kind

    bool is_variational() const { return is_bayesian(variant); }
    void validate() const;
};

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

} // namespace bpinn
