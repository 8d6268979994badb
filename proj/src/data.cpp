#include "bpinn/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "bpinn/rng.hpp"

namespace bpinn {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Howard Hinnant's civil-date algorithms.
std::int64_t days_from_civil(int y, int m, int d)
{
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2u) / 5u + static_cast<unsigned>(d) - 1u;
    const unsigned doe = yoe * 365u + yoe / 4u - yoe / 100u + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& y, int& m, int& d)
{
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t yy = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
    y = static_cast<int>(yy + (m <= 2));
}

bool parse_double_field(const std::string& field, double& out)
{
    if (field.empty() || field == "nan" || field == "NaN") {
        out = std::numeric_limits<double>::quiet_NaN();
        return true;
    }
    char* end = nullptr;
    out = std::strtod(field.c_str(), &end);
    return end == field.c_str() + field.size();
}

double channel_mean_present(const Eigen::VectorXd& v)
{
    double sum = 0.0;
    Eigen::Index n = 0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (std::isfinite(v[i])) {
            sum += v[i];
            ++n;
        }
    }
    if (n == 0) throw ValidationError("impute: channel has no present values");
    return sum / static_cast<double>(n);
}

} // namespace

std::int64_t parse_iso8601(const std::string& s)
{
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, se = 0;
    char tz = '\0';
    const int n = std::sscanf(s.c_str(), "%d-%d-%dT%d:%d:%d%c", &y, &mo, &d, &h, &mi, &se, &tz);
    if (n < 6 || mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23 || mi > 59 || se > 60)
        throw ValidationError(detail::msg("invalid ISO-8601 timestamp: '", s, "'"));
    return days_from_civil(y, mo, d) * 86400 + h * 3600 + mi * 60 + se;
}

std::string format_iso8601(std::int64_t epoch_seconds)
{
    std::int64_t days = epoch_seconds / 86400;
    std::int64_t rem = epoch_seconds % 86400;
    if (rem < 0) {
        rem += 86400;
        --days;
    }
    int y, m, d;
    civil_from_days(days, y, m, d);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ", y, m, d, static_cast<int>(rem / 3600),
                  static_cast<int>((rem % 3600) / 60), static_cast<int>(rem % 60));
    return buf;
}

void OperatingSeries::validate() const
{
    const auto n = static_cast<Eigen::Index>(t_seconds.size());
    if (n == 0) throw ValidationError("OperatingSeries: empty series");
    if (load_pu.size() != n || ambient_c.size() != n || topoil_c.size() != n)
        throw ValidationError("OperatingSeries: channel lengths differ");
    for (std::size_t i = 1; i < t_seconds.size(); ++i)
        if (!(t_seconds[i] > t_seconds[i - 1]))
            throw ValidationError(detail::msg("OperatingSeries: non-increasing timestamps at row ", i));
}

void OperatingSeries::validate_schema() const
{
    validate();
    for (std::size_t i = 1; i < t_seconds.size(); ++i)
        if (t_seconds[i] - t_seconds[i - 1] != 60.0)
            throw ValidationError(detail::msg("OperatingSeries: expected 60 s spacing, got ",
                                              t_seconds[i] - t_seconds[i - 1], " s at row ", i));
    for (std::size_t i = 0; i < t_seconds.size(); ++i) {
        const auto j = static_cast<Eigen::Index>(i);
        if (!std::isfinite(load_pu[j]) || !std::isfinite(ambient_c[j]) || !std::isfinite(topoil_c[j]))
            throw ValidationError(detail::msg("OperatingSeries: non-finite value at row ", i));
    }
}

double series_interp(const std::vector<double>& t, const Eigen::VectorXd& values, double tq)
{
    if (t.empty()) throw ValidationError("series_interp: empty series");
    if (tq < t.front() || tq > t.back())
        throw ValidationError(detail::msg("series_interp: t = ", tq, " outside span [", t.front(), ", ", t.back(),
                                          "]; no extrapolation"));
    const auto it = std::upper_bound(t.begin(), t.end(), tq);
    if (it == t.begin()) return values[0];
    if (it == t.end()) return values[values.size() - 1];
    const auto hi = static_cast<Eigen::Index>(it - t.begin());
    const auto lo = hi - 1;
    const double w = (tq - t[static_cast<std::size_t>(lo)]) /
                     (t[static_cast<std::size_t>(hi)] - t[static_cast<std::size_t>(lo)]);
    return values[lo] + w * (values[hi] - values[lo]);
}

OperatingSeries load_series(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw IoError(detail::msg("cannot open series file: ", path));

    std::string line;
    if (!std::getline(in, line)) throw IoError(detail::msg("empty series file: ", path));
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "timestamp,load_pu,ambient_c,topoil_c")
        throw ValidationError(detail::msg("series header mismatch in ", path, ": got '", line,
                                          "', expected 'timestamp,load_pu,ambient_c,topoil_c'"));

    std::vector<std::int64_t> stamps;
    std::vector<double> load, ambient, topoil;
    std::size_t line_no = 1;
    std::size_t dropped = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string f0, f1, f2, f3, extra;
        if (!std::getline(ss, f0, ',') || !std::getline(ss, f1, ',') || !std::getline(ss, f2, ',') ||
            !std::getline(ss, f3, ','))
            throw ValidationError(detail::msg("malformed row at line ", line_no, " in ", path));
        if (std::getline(ss, extra, ','))
            throw ValidationError(detail::msg("malformed row (extra fields) at line ", line_no, " in ", path));

        std::int64_t stamp;
        try {
            stamp = parse_iso8601(f0);
        } catch (const ValidationError&) {
            throw ValidationError(detail::msg("malformed timestamp at line ", line_no, " in ", path));
        }
        double v1, v2, v3;
        if (!parse_double_field(f1, v1) || !parse_double_field(f2, v2) || !parse_double_field(f3, v3))
            throw ValidationError(detail::msg("malformed numeric field at line ", line_no, " in ", path));

        if (!stamps.empty() && stamp == stamps.back()) {
            ++dropped; // duplicate timestamp: keep first
            continue;
        }
        if (!stamps.empty() && stamp < stamps.back())
            throw ValidationError(detail::msg("non-monotone timestamp at line ", line_no, " in ", path));
        stamps.push_back(stamp);
        load.push_back(v1);
        ambient.push_back(v2);
        topoil.push_back(v3);
    }
    if (stamps.empty()) throw ValidationError(detail::msg("series file has no data rows: ", path));
    if (dropped > 0) std::cerr << "warning: dropped " << dropped << " duplicate timestamp(s) in " << path << "\n";

    OperatingSeries s;
    s.epoch_start = stamps.front();
    const auto n = static_cast<Eigen::Index>(stamps.size());
    s.t_seconds.resize(stamps.size());
    s.load_pu.resize(n);
    s.ambient_c.resize(n);
    s.topoil_c.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        s.t_seconds[static_cast<std::size_t>(i)] = static_cast<double>(stamps[static_cast<std::size_t>(i)] - s.epoch_start);
        s.load_pu[i] = load[static_cast<std::size_t>(i)];
        s.ambient_c[i] = ambient[static_cast<std::size_t>(i)];
        s.topoil_c[i] = topoil[static_cast<std::size_t>(i)];
    }
    s.validate();
    return s;
}

OperatingSeries impute(const OperatingSeries& series)
{
    series.validate();
    OperatingSeries out = series;
    for (Eigen::VectorXd* ch : { &out.load_pu, &out.ambient_c, &out.topoil_c }) {
        const double mean = channel_mean_present(*ch);
        for (Eigen::Index i = 0; i < ch->size(); ++i)
            if (!std::isfinite((*ch)[i])) (*ch)[i] = mean;
    }
    return out;
}

void write_series_csv(const std::string& path, const OperatingSeries& series)
{
    std::ofstream out(path);
    if (!out) throw IoError(detail::msg("cannot write series file: ", path));
    out << "timestamp,load_pu,ambient_c,topoil_c\n";
    char buf[128];
    for (std::size_t i = 0; i < series.size(); ++i) {
        const auto j = static_cast<Eigen::Index>(i);
        const std::int64_t stamp = series.epoch_start + static_cast<std::int64_t>(series.t_seconds[i]);
        std::snprintf(buf, sizeof(buf), "%s,%.17g,%.17g,%.17g\n", format_iso8601(stamp).c_str(), series.load_pu[j],
                      series.ambient_c[j], series.topoil_c[j]);
        out << buf;
    }
    if (!out) throw IoError(detail::msg("write failed: ", path));
}

OperatingSeries synthesize(int days, std::uint64_t seed, SyntheticProfile profile, double noise_amplitude)
{
    if (days < 1) throw ValidationError("synthesize: days must be >= 1");
    (void)profile; // a single profile is defined

    const int n = days * 1440;
    OperatingSeries s;
    s.epoch_start = parse_iso8601("2024-06-01T00:00:00Z");
    s.t_seconds.resize(static_cast<std::size_t>(n));
    s.load_pu.resize(n);
    s.ambient_c.resize(n);
    s.topoil_c.resize(n);

    Rng rng(seed, 5);

    // First-order lag constants for the top-oil channel. The no-load rise
    // dominates the fastest ambient slope, which keeps topoil above ambient.
    const double tau_min = 180.0;
    const double rise_noload = 8.0;
    const double rise_rated = 30.0;

    double topoil = 0.0;
    for (int i = 0; i < n; ++i) {
        const double minute = static_cast<double>(i);
        const double min_of_day = std::fmod(minute, 1440.0);
        s.t_seconds[static_cast<std::size_t>(i)] = minute * 60.0;

        // Solar-style load: half sine between 06:00 and 18:00, clipped at 0.
        double load = 0.0;
        if (min_of_day >= 360.0 && min_of_day <= 1080.0)
            load = 0.85 * std::sin(kPi * (min_of_day - 360.0) / 720.0);
        load += noise_amplitude * rng.normal();
        load = std::max(0.0, load);

        // Diurnal ambient: coolest ~04:30, warmest ~16:30.
        double ambient = 15.0 + 8.0 * std::sin(2.0 * kPi * (min_of_day - 630.0) / 1440.0);
        ambient += 0.5 * noise_amplitude * rng.normal();

        const double target = ambient + rise_noload + rise_rated * load * load;
        if (i == 0)
            topoil = target;
        else
            topoil += (target - topoil) / tau_min;

        s.load_pu[i] = load;
        s.ambient_c[i] = ambient;
        s.topoil_c[i] = topoil;
    }
    return s;
}

OperatingSeries normalize_series(const OperatingSeries& series, const Normalization& norm)
{
    norm.validate();
    OperatingSeries out = series;
    for (Eigen::Index i = 0; i < out.ambient_c.size(); ++i) {
        out.ambient_c[i] = norm.to_norm_temp(out.ambient_c[i]);
        out.topoil_c[i] = norm.to_norm_temp(out.topoil_c[i]);
    }
    return out;
}

OperatingSeries denormalize_series(const OperatingSeries& series, const Normalization& norm)
{
    norm.validate();
    OperatingSeries out = series;
    for (Eigen::Index i = 0; i < out.ambient_c.size(); ++i) {
        out.ambient_c[i] = norm.to_phys_temp(out.ambient_c[i]);
        out.topoil_c[i] = norm.to_phys_temp(out.topoil_c[i]);
    }
    return out;
}

} // namespace bpinn
