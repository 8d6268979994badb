#include "bpinn/metrics.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

namespace bpinn {

namespace {

constexpr double kSqrt2 = 1.4142135623730950488016887242097;
constexpr double kInvSqrtPi = 0.56418958354775628694807945156077;
constexpr double kInvSqrt2Pi = 0.39894228040143267793994605993438;

double normal_cdf(double z) { return 0.5 * std::erfc(-z / kSqrt2); }
double normal_pdf(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }

void require_same_length(std::size_t a, Eigen::Index b, const char* what)
{
    if (a != static_cast<std::size_t>(b))
        throw ValidationError(detail::msg(what, ": length mismatch (", a, " vs ", b, ")"));
}

} // namespace

double rmse(const Eigen::VectorXd& pred_means, const Eigen::VectorXd& truth)
{
    if (pred_means.size() != truth.size() || pred_means.size() == 0)
        throw ValidationError(detail::msg("rmse: length mismatch or empty (", pred_means.size(), " vs ", truth.size(),
                                          ")"));
    return std::sqrt((pred_means - truth).squaredNorm() / static_cast<double>(truth.size()));
}

double nll_metric(std::span<const PredictiveDistribution> preds, const Eigen::VectorXd& truth)
{
    require_same_length(preds.size(), truth.size(), "nll_metric");
    if (preds.empty()) throw ValidationError("nll_metric: empty input");
    double acc = 0.0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        const double var = preds[i].total_var;
        if (var <= 0.0)
            throw ValidationError("nll_metric: zero predictive variance (deterministic checkpoint); use RMSE instead");
        const double e = truth[static_cast<Eigen::Index>(i)] - preds[i].mean;
        acc += 0.5 * std::log(2.0 * M_PI * var) + e * e / (2.0 * var);
    }
    return acc / static_cast<double>(preds.size());
}

double crps_gaussian(double mu, double sigma, double y)
{
    if (sigma < 0.0) throw ValidationError("crps_gaussian: sigma must be non-negative");
    if (sigma == 0.0) return std::fabs(y - mu);
    const double z = (y - mu) / sigma;
    return sigma * (z * (2.0 * normal_cdf(z) - 1.0) + 2.0 * normal_pdf(z) - kInvSqrtPi);
}

double crps_avg(std::span<const PredictiveDistribution> preds, const Eigen::VectorXd& truth)
{
    require_same_length(preds.size(), truth.size(), "crps_avg");
    if (preds.empty()) throw ValidationError("crps_avg: empty input");
    double acc = 0.0;
    for (std::size_t i = 0; i < preds.size(); ++i)
        acc += crps_gaussian(preds[i].mean, std::sqrt(std::max(0.0, preds[i].total_var)),
                             truth[static_cast<Eigen::Index>(i)]);
    return acc / static_cast<double>(preds.size());
}

double normal_quantile(double p)
{
    if (!(p > 0.0 && p < 1.0)) throw ValidationError(detail::msg("normal_quantile: p = ", p, " outside (0, 1)"));

    // Acklam's approximation.
    static const double a[] = { -3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00 };
    static const double b[] = { -5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                6.680131188771972e+01, -1.328068155288572e+01 };
    static const double c[] = { -7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00 };
    static const double d[] = { 7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                3.754408661907416e+00 };
    const double plow = 0.02425;
    double x;
    if (p < plow) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - plow) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    // One Newton step against the exact CDF.
    const double e = normal_cdf(x) - p;
    x -= e / normal_pdf(x);
    return x;
}

std::vector<double> default_confidence_levels()
{
    std::vector<double> levels;
    levels.reserve(99);
    for (int i = 1; i <= 99; ++i) levels.push_back(static_cast<double>(i) / 100.0);
    return levels;
}

CalibrationResult calibration(std::span<const PredictiveDistribution> preds, const Eigen::VectorXd& truth,
                              const std::vector<double>& levels)
{
    require_same_length(preds.size(), truth.size(), "calibration");
    if (preds.size() < 10) throw ValidationError("calibration: need at least 10 points");
    if (levels.empty()) throw ValidationError("calibration: empty level list");

    CalibrationResult res;
    res.curve.reserve(levels.size());
    double area = 0.0;
    for (double p : levels) {
        const double z = normal_quantile(0.5 * (1.0 + p));
        std::size_t inside = 0;
        for (std::size_t i = 0; i < preds.size(); ++i) {
            const double sd = std::sqrt(std::max(0.0, preds[i].total_var));
            if (std::fabs(truth[static_cast<Eigen::Index>(i)] - preds[i].mean) <= z * sd) ++inside;
        }
        const double coverage = static_cast<double>(inside) / static_cast<double>(preds.size());
        res.curve.push_back({ p, coverage });
        area += std::fabs(coverage - p);
    }
    res.miscalibration_area = area / static_cast<double>(levels.size());

    double sharp = 0.0;
    for (const auto& pr : preds) sharp += std::sqrt(std::max(0.0, pr.total_var));
    res.sharpness = sharp / static_cast<double>(preds.size());
    return res;
}

void write_eval_report_json(const std::string& path, const EvalReport& report)
{
    nlohmann::ordered_json j;
    j["probabilistic"] = report.probabilistic;
    j["rmse"] = report.rmse;
    if (report.probabilistic) {
        j["crps"] = report.crps_mean;
        j["nll"] = report.nll_mean;
        j["miscalibration_area"] = report.miscalibration_area;
        j["sharpness"] = report.sharpness;
    } else {
        j["crps"] = nullptr;
        j["nll"] = nullptr;
        j["miscalibration_area"] = nullptr;
        j["sharpness"] = nullptr;
    }
    j["instants"] = nlohmann::ordered_json::array();
    for (const auto& row : report.instants) {
        nlohmann::ordered_json r;
        r["hours"] = row.hours;
        r["n_points"] = row.n_points;
        r["rmse"] = row.rmse;
        if (std::isfinite(row.crps))
            r["crps"] = row.crps;
        else
            r["crps"] = nullptr;
        if (std::isfinite(row.nll))
            r["nll"] = row.nll;
        else
            r["nll"] = nullptr;
        j["instants"].push_back(r);
    }
    std::ofstream out(path);
    if (!out) throw IoError(detail::msg("cannot write report: ", path));
    out << j.dump(2) << "\n";
    if (!out) throw IoError(detail::msg("write failed: ", path));
}

void write_instant_rows_csv(const std::string& path, const EvalReport& report)
{
    std::ofstream out(path);
    if (!out) throw IoError(detail::msg("cannot write instants file: ", path));
    out << "hours,n_points,rmse,crps,nll\n";
    char buf[160];
    for (const auto& row : report.instants) {
        std::snprintf(buf, sizeof(buf), "%.17g,%d,%.17g,", row.hours, row.n_points, row.rmse);
        out << buf;
        if (std::isfinite(row.crps)) {
            std::snprintf(buf, sizeof(buf), "%.17g,", row.crps);
            out << buf;
        } else {
            out << "na,";
        }
        if (std::isfinite(row.nll)) {
            std::snprintf(buf, sizeof(buf), "%.17g\n", row.nll);
            out << buf;
        } else {
            out << "na\n";
        }
    }
    if (!out) throw IoError(detail::msg("write failed: ", path));
}

} // namespace bpinn
