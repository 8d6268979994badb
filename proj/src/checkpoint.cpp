#include "bpinn/checkpoint.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace bpinn {

namespace {

constexpr const char* kMagic = "bpinn-checkpoint";
constexpr int kVersion = 1;

void write_vector(std::ofstream& out, const Eigen::VectorXd& v)
{
    char buf[40];
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g\n", v[i]);
        out << buf;
    }
}

Eigen::VectorXd read_vector(std::ifstream& in, Eigen::Index n, const std::string& path)
{
    Eigen::VectorXd v(n);
    std::string line;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!std::getline(in, line)) throw IoError(detail::msg("truncated checkpoint: ", path));
        v[i] = std::stod(line);
    }
    return v;
}

} // namespace

void Checkpoint::validate() const
{
    config.validate();
    norm.validate();
    const auto n = static_cast<Eigen::Index>(config.param_count());
    if (is_variational()) {
        if (mu.size() != n || rho.size() != n)
            throw ValidationError(detail::msg("Checkpoint: variational sizes ", mu.size(), "/", rho.size(),
                                              " != layout ", n));
    } else if (theta.size() != n) {
        throw ValidationError(detail::msg("Checkpoint: theta size ", theta.size(), " != layout ", n));
    }
    if (sigma_data <= 0.0) throw ValidationError("Checkpoint: sigma_data must be positive");
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt)
{
    ckpt.validate();
    std::ofstream out(path);
    if (!out) throw IoError(detail::msg("cannot write checkpoint: ", path));

    char buf[256];
    out << kMagic << " " << kVersion << "\n";
    out << "variant " << to_string(ckpt.variant) << "\n";
    out << "layers";
    for (int s : ckpt.config.layer_sizes) out << " " << s;
    out << "\n";
    out << "variance_head " << (ckpt.config.variance_head ? 1 : 0) << "\n";
    std::snprintf(buf, sizeof(buf), "dropout_rate %.17g\n", ckpt.config.dropout_rate);
    out << buf;
    std::snprintf(buf, sizeof(buf), "sigma_data %.17g\n", ckpt.sigma_data);
    out << buf;
    std::snprintf(buf, sizeof(buf), "norm %.17g %.17g %.17g %.17g\n", ckpt.norm.x_scale, ckpt.norm.t_scale,
                  ckpt.norm.temp_shift, ckpt.norm.temp_scale);
    out << buf;
    out << "kind " << (ckpt.is_variational() ? "variational" : "deterministic") << "\n";
    const auto n = static_cast<Eigen::Index>(ckpt.config.param_count());
    out << "params " << n << "\n";
    if (ckpt.is_variational()) {
        write_vector(out, ckpt.mu);
        write_vector(out, ckpt.rho);
    } else {
        write_vector(out, ckpt.theta);
    }
    if (!out) throw IoError(detail::msg("write failed: ", path));
}

Checkpoint load_checkpoint(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw IoError(detail::msg("cannot open checkpoint: ", path));

    std::string line;
    auto next_line = [&](const char* what) {
        if (!std::getline(in, line)) throw IoError(detail::msg("truncated checkpoint (missing ", what, "): ", path));
        return std::stringstream(line);
    };

    {
        auto ss = next_line("magic");
        std::string magic;
        int version = 0;
        ss >> magic >> version;
        if (magic != kMagic || version != kVersion)
            throw ValidationError(detail::msg("unsupported checkpoint header in ", path, ": '", line, "'"));
    }

    Checkpoint ckpt;
    std::string kind;
    Eigen::Index n_params = 0;
    {
        auto ss = next_line("variant");
        std::string key, v;
        ss >> key >> v;
        if (key != "variant") throw ValidationError(detail::msg("checkpoint: expected 'variant' in ", path));
        ckpt.variant = variant_from_string(v);
    }
    {
        auto ss = next_line("layers");
        std::string key;
        ss >> key;
        if (key != "layers") throw ValidationError(detail::msg("checkpoint: expected 'layers' in ", path));
        ckpt.config.layer_sizes.clear();
        int s;
        while (ss >> s) ckpt.config.layer_sizes.push_back(s);
    }
    {
        auto ss = next_line("variance_head");
        std::string key;
        int v = 0;
        ss >> key >> v;
        if (key != "variance_head") throw ValidationError(detail::msg("checkpoint: expected 'variance_head' in ", path));
        ckpt.config.variance_head = v != 0;
    }
    {
        auto ss = next_line("dropout_rate");
        std::string key;
        ss >> key >> ckpt.config.dropout_rate;
        if (key != "dropout_rate") throw ValidationError(detail::msg("checkpoint: expected 'dropout_rate' in ", path));
    }
    {
        auto ss = next_line("sigma_data");
        std::string key;
        ss >> key >> ckpt.sigma_data;
        if (key != "sigma_data") throw ValidationError(detail::msg("checkpoint: expected 'sigma_data' in ", path));
    }
    {
        auto ss = next_line("norm");
        std::string key;
        ss >> key >> ckpt.norm.x_scale >> ckpt.norm.t_scale >> ckpt.norm.temp_shift >> ckpt.norm.temp_scale;
        if (key != "norm") throw ValidationError(detail::msg("checkpoint: expected 'norm' in ", path));
    }
    {
        auto ss = next_line("kind");
        std::string key;
        ss >> key >> kind;
        if (key != "kind") throw ValidationError(detail::msg("checkpoint: expected 'kind' in ", path));
    }
    {
        auto ss = next_line("params");
        std::string key;
        ss >> key >> n_params;
        if (key != "params") throw ValidationError(detail::msg("checkpoint: expected 'params' in ", path));
    }

    if (n_params != static_cast<Eigen::Index>(ckpt.config.param_count()))
        throw ValidationError(detail::msg("checkpoint: params count ", n_params, " inconsistent with layers in ",
                                          path));
    if (kind == "variational") {
        ckpt.mu = read_vector(in, n_params, path);
        ckpt.rho = read_vector(in, n_params, path);
    } else if (kind == "deterministic") {
        ckpt.theta = read_vector(in, n_params, path);
    } else {
        throw ValidationError(detail::msg("checkpoint: unknown kind '", kind, "' in ", path));
    }
    ckpt.validate();
    return ckpt;
}

} // namespace bpinn
