#pragma once

#include <string>

#include "bpinn/error.hpp"

namespace bpinn {

/// The five model configurations under study.
enum class Variant {
    bpinn_hetero,
    bpinn_homo,
    dpinn_hetero,
    dpinn_homo,
    pinn,
};

inline bool is_bayesian(Variant v) { return v == Variant::bpinn_hetero || v == Variant::bpinn_homo; }
inline bool is_dropout(Variant v) { return v == Variant::dpinn_hetero || v == Variant::dpinn_homo; }
inline bool is_heteroscedastic(Variant v) { return v == Variant::bpinn_hetero || v == Variant::dpinn_hetero; }
inline bool is_stochastic(Variant v) { return v != Variant::pinn; }

inline std::string to_string(Variant v)
{
    switch (v) {
        case Variant::bpinn_hetero: return "bpinn_hetero";
        case Variant::bpinn_homo: return "bpinn_homo";
        case Variant::dpinn_hetero: return "dpinn_hetero";
        case Variant::dpinn_homo: return "dpinn_homo";
        case Variant::pinn: return "pinn";
    }
    return "unknown";
}

inline Variant variant_from_string(const std::string& s)
{
    // Accept both underscore and hyphen spellings.
    std::string k = s;
    for (auto& c : k)
        if (c == '-') c = '_';
    if (k == "bpinn_hetero") return Variant::bpinn_hetero;
    if (k == "bpinn_homo") return Variant::bpinn_homo;
    if (k == "dpinn_hetero") return Variant::dpinn_hetero;
    if (k == "dpinn_homo") return Variant::dpinn_homo;
    if (k == "pinn") return Variant::pinn;
    throw ValidationError(detail::msg("unknown variant '", s,
                                      "' (expected bpinn-hetero, bpinn-homo, dpinn-hetero, dpinn-homo or pinn)"));
}

} // namespace bpinn
