#include "bpinn/refsolver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace bpinn {

namespace {

/// Thomas algorithm for a tridiagonal system; diagonals are consumed.
void solve_tridiagonal(std::vector<double>& lower, std::vector<double>& diag, std::vector<double>& upper,
                       std::vector<double>& rhs)
{
    const std::size_t n = diag.size();
    for (std::size_t i = 1; i < n; ++i) {
        if (diag[i - 1] == 0.0) throw ValidationError("refsolver: singular tridiagonal system");
        const double w = lower[i] / diag[i - 1];
        diag[i] -= w * upper[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    if (diag[n - 1] == 0.0) throw ValidationError("refsolver: singular tridiagonal system");
    rhs[n - 1] /= diag[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) rhs[i] = (rhs[i] - upper[i] * rhs[i + 1]) / diag[i];
}

} // namespace

FieldGrid solve(const ThermalPdeSpec& spec, const GridSpec& grid, const std::function<double(double)>& initial)
{
    spec.validate();
    grid.validate();

    const int n = grid.nx + 2; // total nodes including boundaries
    const double dx = spec.height / static_cast<double>(grid.nx + 1);
    const double t_end = spec.t_end();
    if (t_end <= 0.0) throw ValidationError("refsolver: series span is empty");

    // Time nodes: multiples of dt, with a short final step landing on t_end.
    std::vector<double> tn { 0.0 };
    while (tn.back() < t_end) {
        const double next = std::min(tn.back() + grid.dt, t_end);
        if (next - tn.back() < 1e-9 * grid.dt) break;
        tn.push_back(next);
    }
    tn.back() = t_end;

    FieldGrid field;
    field.x.resize(n);
    for (int i = 0; i < n; ++i) field.x[i] = dx * static_cast<double>(i);
    field.t = Eigen::Map<const Eigen::VectorXd>(tn.data(), static_cast<Eigen::Index>(tn.size()));
    field.values.resize(static_cast<Eigen::Index>(tn.size()), n);

    // Initial row, with the boundary columns pinned to the series.
    for (int i = 0; i < n; ++i)
        field.values(0, i) = initial ? initial(field.x[i]) : initial_profile(spec, field.x[i]);
    field.values(0, 0) = spec.ambient_at(0.0);
    field.values(0, n - 1) = spec.topoil_at(0.0);

    // u_t = alpha u_xx - c u + s(t),  c = alpha h / k,
    // s(t) = (alpha / k) (p0 + K(t)^2 mu + h thetaA(t)), frozen at t + dt/2.
    const double c = spec.alpha * spec.h / spec.k;
    auto source = [&](double t) {
        const double load = spec.load_at(t);
        return spec.alpha / spec.k * (spec.p0 + load * load * spec.mu_rated + spec.h * spec.ambient_at(t));
    };

    std::vector<double> lower(static_cast<std::size_t>(n)), diag(static_cast<std::size_t>(n)),
        upper(static_cast<std::size_t>(n)), rhs(static_cast<std::size_t>(n));

    for (std::size_t step = 1; step < tn.size(); ++step) {
        const double t0 = tn[step - 1];
        const double t1 = tn[step];
        const double dt = t1 - t0;
        const double r = spec.alpha * dt / (dx * dx);
        const double m = 0.5 * c * dt;
        const double s = dt * source(0.5 * (t0 + t1));

        // Dirichlet rows.
        lower[0] = 0.0;
        diag[0] = 1.0;
        upper[0] = 0.0;
        rhs[0] = spec.ambient_at(t1);
        lower[static_cast<std::size_t>(n - 1)] = 0.0;
        diag[static_cast<std::size_t>(n - 1)] = 1.0;
        upper[static_cast<std::size_t>(n - 1)] = 0.0;
        rhs[static_cast<std::size_t>(n - 1)] = spec.topoil_at(t1);

        for (int i = 1; i < n - 1; ++i) {
            const auto ui = static_cast<std::size_t>(i);
            lower[ui] = -0.5 * r;
            diag[ui] = 1.0 + r + m;
            upper[ui] = -0.5 * r;
            const double u_im = field.values(static_cast<Eigen::Index>(step - 1), i - 1);
            const double u_i = field.values(static_cast<Eigen::Index>(step - 1), i);
            const double u_ip = field.values(static_cast<Eigen::Index>(step - 1), i + 1);
            rhs[ui] = (1.0 - r - m) * u_i + 0.5 * r * (u_im + u_ip) + s;
        }

        solve_tridiagonal(lower, diag, upper, rhs);
        for (int i = 0; i < n; ++i) field.values(static_cast<Eigen::Index>(step), i) = rhs[static_cast<std::size_t>(i)];
        // Pin exactly to the interpolated series, independent of solve roundoff.
        field.values(static_cast<Eigen::Index>(step), 0) = spec.ambient_at(t1);
        field.values(static_cast<Eigen::Index>(step), n - 1) = spec.topoil_at(t1);
    }
    return field;
}

double interpolate(const FieldGrid& field, double x, double t)
{
    if (field.x.size() < 2 || field.t.size() < 2) throw ValidationError("interpolate: degenerate grid");
    if (x < field.x[0] || x > field.x[field.x.size() - 1] || t < field.t[0] || t > field.t[field.t.size() - 1])
        throw ValidationError(detail::msg("interpolate: point (", x, ", ", t, ") outside grid hull"));

    auto bracket = [](const Eigen::VectorXd& v, double q) {
        const double* begin = v.data();
        const double* end = v.data() + v.size();
        const double* it = std::upper_bound(begin, end, q);
        Eigen::Index hi = static_cast<Eigen::Index>(it - begin);
        return std::clamp<Eigen::Index>(hi, 1, v.size() - 1);
    };
    const Eigen::Index ix = bracket(field.x, x);
    const Eigen::Index it = bracket(field.t, t);
    const double wx = (x - field.x[ix - 1]) / (field.x[ix] - field.x[ix - 1]);
    const double wt = (t - field.t[it - 1]) / (field.t[it] - field.t[it - 1]);
    const double v00 = field.values(it - 1, ix - 1);
    const double v01 = field.values(it - 1, ix);
    const double v10 = field.values(it, ix - 1);
    const double v11 = field.values(it, ix);
    return (1.0 - wt) * ((1.0 - wx) * v00 + wx * v01) + wt * ((1.0 - wx) * v10 + wx * v11);
}

void write_field_csv(const std::string& path, const FieldGrid& field)
{
    std::ofstream out(path);
    if (!out) throw IoError(detail::msg("cannot write field file: ", path));
    char buf[64];
    for (Eigen::Index i = 0; i < field.x.size(); ++i) {
        std::snprintf(buf, sizeof(buf), ",%.17g", field.x[i]);
        out << buf;
    }
    out << "\n";
    for (Eigen::Index r = 0; r < field.t.size(); ++r) {
        std::snprintf(buf, sizeof(buf), "%.17g", field.t[r]);
        out << buf;
        for (Eigen::Index i = 0; i < field.x.size(); ++i) {
            std::snprintf(buf, sizeof(buf), ",%.17g", field.values(r, i));
            out << buf;
        }
        out << "\n";
    }
    if (!out) throw IoError(detail::msg("write failed: ", path));
}

FieldGrid read_field_csv(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw IoError(detail::msg("cannot open field file: ", path));
    std::string line;
    if (!std::getline(in, line)) throw IoError(detail::msg("empty field file: ", path));

    auto split = [](const std::string& s) {
        std::vector<std::string> fields;
        std::stringstream ss(s);
        std::string f;
        while (std::getline(ss, f, ',')) fields.push_back(f);
        return fields;
    };

    const auto header = split(line);
    if (header.size() < 3) throw ValidationError(detail::msg("field header too short in ", path));
    FieldGrid field;
    field.x.resize(static_cast<Eigen::Index>(header.size() - 1));
    for (std::size_t i = 1; i < header.size(); ++i)
        field.x[static_cast<Eigen::Index>(i - 1)] = std::stod(header[i]);

    std::vector<double> times;
    std::vector<std::vector<double>> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto fields = split(line);
        if (fields.size() != header.size())
            throw ValidationError(detail::msg("field row width mismatch at line ", line_no, " in ", path));
        times.push_back(std::stod(fields[0]));
        std::vector<double> row(fields.size() - 1);
        for (std::size_t i = 1; i < fields.size(); ++i) row[i - 1] = std::stod(fields[i]);
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ValidationError(detail::msg("field file has no rows: ", path));

    field.t = Eigen::Map<const Eigen::VectorXd>(times.data(), static_cast<Eigen::Index>(times.size()));
    field.values.resize(static_cast<Eigen::Index>(rows.size()), field.x.size());
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (Eigen::Index i = 0; i < field.x.size(); ++i)
            field.values(static_cast<Eigen::Index>(r), i) = rows[r][static_cast<std::size_t>(i)];
    return field;
}

} // namespace bpinn
