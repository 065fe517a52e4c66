#pragma once

#include <stdexcept>
#include <string>

#include "escher/tilesolve.hpp"

namespace escher {

struct TileFileError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Versioned JSON serialization of a solved tile. Theta and phi are the
// generative parameters; positions are stored alongside so results stay
// re-derivable.
void write_tile_file(const std::string& path, const SolvedTile& tile, int n);

struct LoadedTile {
    SolvedTile tile;  // positions as stored in the file
    int n = 0;
    TriMesh mesh;
    ConstraintSet constraints;
    // Max distance between the stored positions and a fresh solve from
    // (group, n, theta, phi); consistent files stay within 1e-8.
    double self_check_error = 0.0;

    bool self_consistent() const { return self_check_error <= 1e-8; }
};

// Parses and re-solves; throws TileFileError on malformed files. Position
// mismatches are reported through self_check_error, or thrown when
// `require_consistent` is set.
LoadedTile read_tile_file(const std::string& path, bool require_consistent = true);

}  // namespace escher
