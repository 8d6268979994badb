#include "bpinn/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace bpinn {

namespace {

struct Color {
    double r, g, b;
};

// Sampled viridis control points.
constexpr Color kPalette[] = {
    { 0.267, 0.005, 0.329 }, { 0.283, 0.131, 0.449 }, { 0.262, 0.242, 0.521 }, { 0.220, 0.343, 0.549 },
    { 0.177, 0.438, 0.558 }, { 0.143, 0.523, 0.556 }, { 0.120, 0.607, 0.540 }, { 0.166, 0.691, 0.497 },
    { 0.320, 0.771, 0.411 }, { 0.526, 0.833, 0.288 }, { 0.762, 0.876, 0.137 }, { 0.993, 0.906, 0.144 },
};

std::string color_hex(double v)
{
    v = std::clamp(v, 0.0, 1.0);
    const int n = static_cast<int>(std::size(kPalette)) - 1;
    const double pos = v * n;
    const int i = std::min(static_cast<int>(pos), n - 1);
    const double w = pos - i;
    const Color c { kPalette[i].r + w * (kPalette[i + 1].r - kPalette[i].r),
                    kPalette[i].g + w * (kPalette[i + 1].g - kPalette[i].g),
                    kPalette[i].b + w * (kPalette[i + 1].b - kPalette[i].b) };
    char buf[8];
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", static_cast<int>(std::lround(c.r * 255.0)),
                  static_cast<int>(std::lround(c.g * 255.0)), static_cast<int>(std::lround(c.b * 255.0)));
    return buf;
}

std::string fmt(double v)
{
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

/// Average-pools the grid down to at most (max_rows, max_cols) bins.
Eigen::MatrixXd pool(const Eigen::MatrixXd& values, Eigen::Index max_rows, Eigen::Index max_cols)
{
    const Eigen::Index rows = std::min(values.rows(), max_rows);
    const Eigen::Index cols = std::min(values.cols(), max_cols);
    Eigen::MatrixXd out(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const Eigen::Index r0 = r * values.rows() / rows;
        const Eigen::Index r1 = std::max(r0 + 1, (r + 1) * values.rows() / rows);
        for (Eigen::Index c = 0; c < cols; ++c) {
            const Eigen::Index c0 = c * values.cols() / cols;
            const Eigen::Index c1 = std::max(c0 + 1, (c + 1) * values.cols() / cols);
            out(r, c) = values.block(r0, c0, r1 - r0, c1 - c0).mean();
        }
    }
    return out;
}

} // namespace

void write_heatmap_svg(const std::string& path, const FieldGrid& field, const std::string& title,
                       const std::string& unit_label)
{
    if (field.values.rows() == 0 || field.values.cols() == 0) throw ValidationError("write_heatmap_svg: empty field");

    const Eigen::MatrixXd cells = pool(field.values, 192, 288);
    const double lo = cells.minCoeff();
    const double hi = cells.maxCoeff();
    const double range = hi > lo ? hi - lo : 1.0;

    const int plot_w = 640, plot_h = 400;
    const int ml = 70, mt = 40, mb = 50, mr = 90;
    const int width = ml + plot_w + mr;
    const int height = mt + plot_h + mb;

    std::ofstream out(path);
    if (!out) throw IoError(detail::msg("cannot write SVG: ", path));
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n";
    out << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
    out << "<text x=\"" << ml + plot_w / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"15\">"
        << title << "</text>\n";

    const double cw = static_cast<double>(plot_w) / static_cast<double>(cells.cols());
    const double ch = static_cast<double>(plot_h) / static_cast<double>(cells.rows());
    char buf[256];
    for (Eigen::Index r = 0; r < cells.rows(); ++r) {
        for (Eigen::Index c = 0; c < cells.cols(); ++c) {
            // time increases upward
            const double x = ml + static_cast<double>(c) * cw;
            const double y = mt + plot_h - static_cast<double>(r + 1) * ch;
            std::snprintf(buf, sizeof(buf),
                          "<rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\" fill=\"%s\"/>\n", x, y,
                          cw + 0.5, ch + 0.5, color_hex((cells(r, c) - lo) / range).c_str());
            out << buf;
        }
    }

    // Axes: x position [m] along the bottom, time [h] up the left side.
    out << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << plot_w << "\" height=\"" << plot_h
        << "\" fill=\"none\" stroke=\"black\"/>\n";
    const double x0 = field.x[0], x1 = field.x[field.x.size() - 1];
    const double t0 = field.t[0] / 3600.0, t1 = field.t[field.t.size() - 1] / 3600.0;
    for (int i = 0; i <= 4; ++i) {
        const double fx = static_cast<double>(i) / 4.0;
        const int px = ml + static_cast<int>(fx * plot_w);
        out << "<line x1=\"" << px << "\" y1=\"" << mt + plot_h << "\" x2=\"" << px << "\" y2=\"" << mt + plot_h + 5
            << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << px << "\" y=\"" << mt + plot_h + 20
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << fmt(x0 + fx * (x1 - x0))
            << "</text>\n";
        const int py = mt + plot_h - static_cast<int>(fx * plot_h);
        out << "<line x1=\"" << ml - 5 << "\" y1=\"" << py << "\" x2=\"" << ml << "\" y2=\"" << py
            << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << ml - 8 << "\" y=\"" << py + 4
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << fmt(t0 + fx * (t1 - t0))
            << "</text>\n";
    }
    out << "<text x=\"" << ml + plot_w / 2 << "\" y=\"" << height - 12
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">x [m]</text>\n";
    out << "<text x=\"16\" y=\"" << mt + plot_h / 2
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 16 "
        << mt + plot_h / 2 << ")\">t [h]</text>\n";

    // Colorbar.
    const int cb_x = ml + plot_w + 20, cb_w = 18;
    for (int i = 0; i < plot_h; ++i) {
        const double v = 1.0 - static_cast<double>(i) / static_cast<double>(plot_h - 1);
        std::snprintf(buf, sizeof(buf), "<rect x=\"%d\" y=\"%d\" width=\"%d\" height=\"2\" fill=\"%s\"/>\n", cb_x,
                      mt + i, cb_w, color_hex(v).c_str());
        out << buf;
    }
    out << "<text x=\"" << cb_x + cb_w + 6 << "\" y=\"" << mt + 10
        << "\" font-family=\"sans-serif\" font-size=\"11\">" << fmt(hi) << "</text>\n";
    out << "<text x=\"" << cb_x + cb_w + 6 << "\" y=\"" << mt + plot_h
        << "\" font-family=\"sans-serif\" font-size=\"11\">" << fmt(lo) << "</text>\n";
    out << "<text x=\"" << cb_x + cb_w + 6 << "\" y=\"" << mt + plot_h / 2 + 4
        << "\" font-family=\"sans-serif\" font-size=\"11\">" << unit_label << "</text>\n";
    out << "</svg>\n";
    if (!out) throw IoError(detail::msg("write failed: ", path));
}

} // namespace bpinn
