#include "escher/config.hpp"

#include <algorithm>
#include <fstream>

namespace escher {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

}  // namespace

std::map<std::string, std::string> parse_toml_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::map<std::string, std::string> entries;
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("config line " + std::to_string(lineno) +
                                  ": malformed table header");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) +
                              ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError("config line " + std::to_string(lineno) +
                              ": empty key or value");
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
            value = value.substr(1, value.size() - 2);
        if (!section.empty()) key = section + "." + key;
        entries[key] = value;
    }
    return entries;
}

namespace {

int to_int(const std::string& key, const std::string& v) {
    try {
        size_t used = 0;
        const int out = std::stoi(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return out;
    } catch (const std::exception&) {
        throw ConfigError("config key " + key + ": expected an integer, got " + v);
    }
}

double to_double(const std::string& key, const std::string& v) {
    try {
        size_t used = 0;
        const double out = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return out;
    } catch (const std::exception&) {
        throw ConfigError("config key " + key + ": expected a number, got " + v);
    }
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
    try {
        size_t used = 0;
        const std::uint64_t out = std::stoull(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return out;
    } catch (const std::exception&) {
        throw ConfigError("config key " + key + ": expected an unsigned integer, got " + v);
    }
}

}  // namespace

void apply_config_entry(RunConfig& config, const std::string& key,
                        const std::string& value) {
    if (key == "group") config.group = value;
    else if (key == "n") config.n = to_int(key, value);
    else if (key == "seed") config.fit.seed = to_u64(key, value);
    else if (key == "target") config.target_path = value;
    else if (key == "target_image") config.target_image_path = value;
    else if (key == "out_dir") config.out_dir = value;
    else if (key == "resolution") config.resolution = to_int(key, value);
    else if (key == "window") config.window_scale = to_double(key, value);
    else if (key == "scheme") config.color_scheme = value;
    else if (key == "fit.iterations") config.fit.iterations = to_int(key, value);
    else if (key == "fit.lr_theta") config.fit.lr_theta = to_double(key, value);
    else if (key == "fit.lr_phi") config.fit.lr_phi = to_double(key, value);
    else if (key == "fit.lr_texture") config.fit.lr_texture = to_double(key, value);
    else if (key == "fit.chamfer_samples") config.fit.chamfer_samples = to_int(key, value);
    else if (key == "fit.texture_weight") config.fit.texture_weight = to_double(key, value);
    else if (key == "fit.texture_size") config.fit.texture_size = to_int(key, value);
    else throw ConfigError("unknown config key: " + key);
}

RunConfig run_config_from_file(const std::string& path) {
    RunConfig config;
    for (const auto& [key, value] : parse_toml_file(path))
        apply_config_entry(config, key, value);
    return config;
}

}  // namespace escher
