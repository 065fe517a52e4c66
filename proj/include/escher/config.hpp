#pragma once

#include <map>
#include <stdexcept>
#include <string>

#include "escher/fit.hpp"

namespace escher {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Run manifest for the fit pipeline. Every option is also a CLI flag;
// flags win over file values.
struct RunConfig {
    std::string group = "O";
    int n = 40;
    FitConfig fit;
    std::string target_path;        // polygon text file or mask PNG
    std::string target_image_path;  // texture target PNG
    std::string out_dir = ".";
    int resolution = 512;
    double window_scale = 3.0;      // tiling window in tile-bbox multiples
    std::string color_scheme = "by-orientation";
};

// Minimal TOML subset: comments, [section] tables, key = value with strings,
// numbers and booleans. Unknown keys are rejected.
std::map<std::string, std::string> parse_toml_file(const std::string& path);

RunConfig run_config_from_file(const std::string& path);
void apply_config_entry(RunConfig& config, const std::string& key,
                        const std::string& value);

}  // namespace escher
