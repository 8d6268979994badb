#pragma once

#include <string>

#include "bpinn/refsolver.hpp"

namespace bpinn {

/// Minimal SVG heat map of a FieldGrid: viridis-like palette, axis ticks,
/// and a colorbar. Large grids are average-pooled down to at most 288x192
/// cells. Output is deterministic for identical inputs; the CSV exports stay
/// the authoritative artifacts.
void write_heatmap_svg(const std::string& path, const FieldGrid& field, const std::string& title,
                       const std::string& unit_label);

} // namespace bpinn
