#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mtt/runner.hpp"

namespace mtt {

// Plain declarative config: "[section]" headers, "key = value" lines,
// '#' comments. Keys mirror the config struct field names.
class ConfigFile {
public:
    static ConfigFile parse_file(const std::string& path);
    static ConfigFile parse_string(const std::string& text);

    std::optional<std::string> get(const std::string& section, const std::string& key) const;
    double get_double(const std::string& section, const std::string& key, double fallback) const;
    int get_int(const std::string& section, const std::string& key, int fallback) const;
    bool get_bool(const std::string& section, const std::string& key, bool fallback) const;

private:
    std::map<std::string, std::map<std::string, std::string>> sections_;
};

// Runner parameters from a config file; missing keys fall back to the
// default scenario preset. Throws std::invalid_argument on malformed input.
RunnerParams load_runner_params(const ConfigFile& cfg);

// Resolved parameters as "key = value" lines for reproducibility headers.
std::vector<std::string> describe_params(const RunnerParams& params, double volume);

}  // namespace mtt
