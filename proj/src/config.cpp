#include "bpinn/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace bpinn {

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

} // namespace

const std::vector<ConfigKey>& config_registry()
{
    static const std::vector<ConfigKey> keys = {
        { "seed", "1", "global random seed" },
        { "out", "out", "output directory" },

        { "data.path", "", "input series CSV; empty synthesizes data" },
        { "data.days", "4", "synthetic series length in days" },
        { "data.noise", "0.02", "synthetic noise amplitude" },

        { "physics.k", "0.11", "thermal conductivity [W/(m K)]" },
        { "physics.rho_cp", "1.53e6", "volumetric heat capacity [J/(m^3 K)]" },
        { "physics.h", "50", "volumetric convective coefficient [W/(m^3 K)]" },
        { "physics.height", "1.0", "column height H [m]" },
        { "physics.p0", "842", "no-load losses [W/m^3]" },
        { "physics.mu_rated", "9800", "rated load losses [W/m^3]" },

        { "refsolver.nx", "201", "interior node count" },
        { "refsolver.dt", "60", "time step [s]" },

        { "train.variant", "bpinn_hetero", "bpinn_hetero|bpinn_homo|dpinn_hetero|dpinn_homo|pinn" },
        { "train.hidden", "50,50", "hidden layer sizes" },
        { "train.lr", "0.01", "Adam learning rate" },
        { "train.batch", "16", "IC/BC batch size (also the per-step collocation batch)" },
        { "train.max_epochs", "15000", "epoch cap" },
        { "train.patience", "200", "early-stopping patience [epochs]" },
        { "train.lambda_ic", "", "IC loss weight; empty uses the variant default" },
        { "train.lambda_bc", "", "BC loss weight; empty uses the variant default" },
        { "train.lambda_res", "", "residual loss weight; empty uses the variant default" },
        { "train.sigma_ic", "0.01", "homoscedastic IC noise (normalized units)" },
        { "train.sigma_bc", "0.01", "homoscedastic BC noise (normalized units)" },
        { "train.sigma_res", "0.01", "residual likelihood sigma (normalized units)" },
        { "train.dropout", "0.1", "d-PINN dropout rate" },
        { "train.prior", "laplace", "laplace|gaussian" },
        { "train.prior_scale", "1.0", "Laplace lambda (or Gaussian sd)" },
        { "train.posterior_sigma0", "0.05", "initial posterior sd" },
        { "train.k_samples", "1", "posterior samples per step" },
        { "train.adam_iters", "20000", "vanilla PINN Adam iterations" },
        { "train.lbfgs_iters", "10000", "vanilla PINN L-BFGS iterations" },
        { "train.n_initial", "100", "initial-condition sample count" },
        { "train.n_boundary", "11520", "boundary sample count (both boundaries)" },
        { "train.n_collocation", "10000", "collocation sample count" },
        { "train.log_walltime", "false", "record wall time in the train log (breaks byte replay)" },

        { "uq.k", "0", "prediction samples; 0 uses the variant default (500 B-PINN, 200 d-PINN)" },

        { "eval.instants", "0,3,6,18,25,50", "per-instant breakdown times [h]" },
        { "eval.stride_x", "1", "evaluation column stride over the truth grid" },
        { "eval.stride_t", "1", "evaluation row stride over the truth grid" },

        { "age.nx", "41", "ageing grid x resolution" },
        { "age.nt", "181", "ageing grid t resolution" },
        { "age.samples", "200", "Monte Carlo samples for ageing propagation" },

        { "thermal.rated_rise", "15.1", "hot-spot rise at rated load [K]" },
        { "thermal.k21", "2.32", "thermal constant k21" },
        { "thermal.k22", "2.05", "thermal constant k22" },
        { "thermal.tau_winding", "9.75", "winding time constant [min]" },
        { "thermal.tau_oil", "266.8", "oil time constant [min]" },
        { "thermal.y", "1.3", "winding exponent" },
        { "thermal.dt", "1.0", "HST integration step [min]" },

        { "sweep.n_initial", "5,100,200", "sweep grid over initial samples" },
        { "sweep.n_collocation", "5000,10000,20000", "sweep grid over collocation samples" },
        { "sweep.n_boundary", "2880,5760,8640,11520", "sweep grid over boundary samples" },
        { "sweep.reps", "5", "repetitions per cell" },
        { "sweep.scale", "1", "divides all sweep counts for desk-scale runs" },
        { "sweep.jobs", "1", "parallel sweep cells" },
    };
    return keys;
}

RunConfig::RunConfig()
{
    for (const auto& k : config_registry()) values_[k.name] = k.default_value;
}

void RunConfig::load_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw IoError(detail::msg("cannot open config file: ", path));
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ValidationError(detail::msg("config ", path, ":", line_no, ": expected 'key = value'"));
        set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
}

void RunConfig::set(const std::string& key_value)
{
    const auto eq = key_value.find('=');
    if (eq == std::string::npos)
        throw ValidationError(detail::msg("--set expects key=value, got '", key_value, "'"));
    set(trim(key_value.substr(0, eq)), trim(key_value.substr(eq + 1)));
}

void RunConfig::set(const std::string& key, const std::string& value)
{
    if (values_.find(key) == values_.end()) throw ValidationError(detail::msg("unknown config key '", key, "'"));
    values_[key] = value;
}

bool RunConfig::has(const std::string& key) const
{
    const auto it = values_.find(key);
    return it != values_.end() && !it->second.empty();
}

const std::string& RunConfig::raw(const std::string& key) const
{
    const auto it = values_.find(key);
    if (it == values_.end()) throw ValidationError(detail::msg("unknown config key '", key, "'"));
    return it->second;
}

std::string RunConfig::get_str(const std::string& key) const { return raw(key); }

double RunConfig::get_double(const std::string& key) const
{
    const std::string& s = raw(key);
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ValidationError(detail::msg("config key '", key, "': '", s, "' is not a number"));
    }
}

int RunConfig::get_int(const std::string& key) const
{
    const double v = get_double(key);
    const int i = static_cast<int>(v);
    if (static_cast<double>(i) != v)
        throw ValidationError(detail::msg("config key '", key, "': expected an integer"));
    return i;
}

std::uint64_t RunConfig::get_u64(const std::string& key) const
{
    const std::string& s = raw(key);
    try {
        std::size_t pos = 0;
        const auto v = std::stoull(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ValidationError(detail::msg("config key '", key, "': '", s, "' is not an unsigned integer"));
    }
}

bool RunConfig::get_bool(const std::string& key) const
{
    std::string s = raw(key);
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    throw ValidationError(detail::msg("config key '", key, "': '", raw(key), "' is not a boolean"));
}

std::vector<int> RunConfig::get_int_list(const std::string& key) const
{
    std::vector<int> out;
    std::stringstream ss(raw(key));
    std::string field;
    while (std::getline(ss, field, ',')) {
        field = trim(field);
        if (field.empty()) continue;
        try {
            out.push_back(std::stoi(field));
        } catch (const std::exception&) {
            throw ValidationError(detail::msg("config key '", key, "': '", field, "' is not an integer"));
        }
    }
    if (out.empty()) throw ValidationError(detail::msg("config key '", key, "': empty list"));
    return out;
}

std::vector<double> RunConfig::get_double_list(const std::string& key) const
{
    std::vector<double> out;
    std::stringstream ss(raw(key));
    std::string field;
    while (std::getline(ss, field, ',')) {
        field = trim(field);
        if (field.empty()) continue;
        try {
            out.push_back(std::stod(field));
        } catch (const std::exception&) {
            throw ValidationError(detail::msg("config key '", key, "': '", field, "' is not a number"));
        }
    }
    if (out.empty()) throw ValidationError(detail::msg("config key '", key, "': empty list"));
    return out;
}

void RunConfig::write_resolved(const std::string& path) const
{
    std::ofstream out(path);
    if (!out) throw IoError(detail::msg("cannot write resolved config: ", path));
    for (const auto& [key, value] : values_) out << key << " = " << value << "\n";
    if (!out) throw IoError(detail::msg("write failed: ", path));
}

} // namespace bpinn
