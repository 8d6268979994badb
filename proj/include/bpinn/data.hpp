#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "bpinn/error.hpp"
#include "bpinn/types.hpp"

namespace bpinn {

/// Operating measurements of one transformer: load factor, ambient
/// temperature and top-oil temperature on a shared minute-resolution time
/// axis. Times are kept as seconds from the first sample; the absolute start
/// instant is retained only for CSV round trips.
struct OperatingSeries {
    std::int64_t epoch_start = 0;   // unix seconds of the first sample
    std::vector<double> t_seconds;  // offsets from epoch_start, strictly increasing
    Eigen::VectorXd load_pu;
    Eigen::VectorXd ambient_c;
    Eigen::VectorXd topoil_c;

    std::size_t size() const { return t_seconds.size(); }
    double span_seconds() const { return t_seconds.empty() ? 0.0 : t_seconds.back() - t_seconds.front(); }

    /// Structural checks: equal channel lengths, strictly increasing times.
    void validate() const;

    /// Schema checks applied to ingested/emitted files on top of validate():
    /// fixed 60 s spacing and finite values everywhere.
    void validate_schema() const;
};

/// Linear interpolation on a shared time axis; throws outside the span.
double series_interp(const std::vector<double>& t, const Eigen::VectorXd& values, double tq);

/// Reads `timestamp,load_pu,ambient_c,topoil_c` CSV. Duplicate timestamps are
/// dropped keeping the first occurrence (logged to stderr); empty or
/// non-finite fields are kept as NaN for impute() to fill. Malformed rows and
/// non-monotone timestamps are errors naming the line.
OperatingSeries load_series(const std::string& path);

/// Replaces missing (NaN) entries with the per-channel mean of the present
/// values.
OperatingSeries impute(const OperatingSeries& series);

void write_series_csv(const std::string& path, const OperatingSeries& series);

enum class SyntheticProfile { sinusoidal_default };

/// Synthetic stand-in for the field data: diurnal half-sine load peaking at
/// midday, sinusoidal ambient, and a top-oil channel produced by a
/// first-order lag of ambient plus load losses so the three channels are
/// physically coherent. One row per minute, days*1440 rows, deterministic per
/// seed. The seed only drives the noise, so noise_amplitude = 0 gives
/// seed-independent output.
OperatingSeries synthesize(int days, std::uint64_t seed,
                           SyntheticProfile profile = SyntheticProfile::sinusoidal_default,
                           double noise_amplitude = 0.02);

/// Affine temperature normalization of ambient/topoil channels; load and
/// times are untouched. Exact round trip with denormalize_series.
OperatingSeries normalize_series(const OperatingSeries& series, const Normalization& norm);
OperatingSeries denormalize_series(const OperatingSeries& series, const Normalization& norm);

// ISO-8601 helpers (UTC, second resolution).
std::int64_t parse_iso8601(const std::string& s);
std::string format_iso8601(std::int64_t epoch_seconds);

} // namespace bpinn
