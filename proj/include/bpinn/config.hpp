#pragma once

// Key-value run configuration: namespaced keys with registered defaults,
// loadable from a text file (`key = value`, '#' comments), overridable with
// --set key=value. Unknown keys are rejected and every run writes a resolved
// snapshot sufficient to reproduce its outputs.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "bpinn/error.hpp"

namespace bpinn {

struct ConfigKey {
    std::string name;
    std::string default_value;
    std::string help;
};

const std::vector<ConfigKey>& config_registry();

class RunConfig {
  public:
    RunConfig();

    /// Loads `key = value` lines; later assignments win.
    void load_file(const std::string& path);

    /// Applies one `key=value` override.
    void set(const std::string& key_value);
    void set(const std::string& key, const std::string& value);

    bool has(const std::string& key) const;
    std::string get_str(const std::string& key) const;
    double get_double(const std::string& key) const;
    int get_int(const std::string& key) const;
    std::uint64_t get_u64(const std::string& key) const;
    bool get_bool(const std::string& key) const;
    std::vector<int> get_int_list(const std::string& key) const;    // comma-separated
    std::vector<double> get_double_list(const std::string& key) const;

    /// All keys with their resolved values, sorted by name.
    void write_resolved(const std::string& path) const;

  private:
    const std::string& raw(const std::string& key) const;
    std::map<std::string, std::string> values_;
};

} // namespace bpinn
