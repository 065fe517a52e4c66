#include "escher/tilefile.hpp"

#include <fstream>

#include <json.hpp>

namespace escher {

namespace {
constexpr int kFormatVersion = 1;
}

void write_tile_file(const std::string& path, const SolvedTile& tile, int n) {
    nlohmann::json j;
    j["format_version"] = kFormatVersion;
    j["group"] = std::string(group_name(tile.group));
    j["n"] = n;
    j["phi"] = tile.params.phi;
    j["theta"] = std::vector<double>(tile.params.theta.data(),
                                     tile.params.theta.data() + tile.params.theta.size());
    auto& pos = j["positions"] = nlohmann::json::array();
    for (const Point2& p : tile.positions) pos.push_back({p.x, p.y});

    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write tile file: " + path);
    out << j.dump(2) << "\n";
    if (!out) throw std::runtime_error("failed while writing tile file: " + path);
}

LoadedTile read_tile_file(const std::string& path, bool require_consistent) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open tile file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw TileFileError("tile file is not valid JSON: " + std::string(e.what()));
    }

    try {
        if (j.at("format_version").get<int>() != kFormatVersion)
            throw TileFileError("unsupported tile file version");
        const auto group = parse_group(j.at("group").get<std::string>());
        if (!group) throw TileFileError("unknown group in tile file");
        LoadedTile loaded;
        loaded.n = j.at("n").get<int>();
        std::tie(loaded.mesh, loaded.constraints) = build_tile(*group, loaded.n);

        const auto theta = j.at("theta").get<std::vector<double>>();
        if (static_cast<int>(theta.size()) != loaded.mesh.directed_edge_count())
            throw TileFileError("theta length does not match the mesh");
        TileParams params;
        params.theta = Eigen::Map<const Eigen::VectorXd>(
            theta.data(), static_cast<Eigen::Index>(theta.size()));
        params.phi = j.at("phi").get<double>();

        const SolvedTile resolved = solve_tile(loaded.mesh, loaded.constraints, params);

        const auto& pos = j.at("positions");
        if (static_cast<int>(pos.size()) != loaded.mesh.vertex_count())
            throw TileFileError("position count does not match the mesh");
        loaded.tile = resolved;
        loaded.tile.positions.resize(pos.size());
        double worst = 0.0;
        for (size_t i = 0; i < pos.size(); ++i) {
            const Point2 stored{pos[i].at(0).get<double>(), pos[i].at(1).get<double>()};
            loaded.tile.positions[i] = stored;
            worst = std::max(worst, distance(stored, resolved.positions[i]));
        }
        loaded.self_check_error = worst;
        if (require_consistent && !loaded.self_consistent())
            throw TileFileError(
                "stored positions are not re-solvable from (group, n, theta, phi)");
        return loaded;
    } catch (const nlohmann::json::exception& e) {
        throw TileFileError("malformed tile file: " + std::string(e.what()));
    }
}

}  // namespace escher
