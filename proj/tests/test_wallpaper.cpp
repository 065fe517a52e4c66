#include <doctest.h>

#include <map>
#include <stdexcept>
#include <string>
#include <set>

#include "escher/validity.hpp"
#include "escher/wallpaper.hpp"

using namespace escher;

TEST_CASE("catalog lists the seventeen groups") {
    CHECK(catalog().size() == 17);
    int interesting = 0;
    std::set<std::string_view> names;
    for (const auto& spec : catalog()) {
        names.insert(group_name(spec.id));
        if (spec.interesting) ++interesting;
        CHECK(parse_group(group_name(spec.id)) == spec.id);
        CHECK(polygon_is_simple(spec.basic_tile));
        CHECK(polygon_area(spec.basic_tile) > 0.0);
    }
    CHECK(names.size() == 17);
    CHECK(interesting == 13);
    CHECK_FALSE(parse_group("bogus").has_value());
}

TEST_CASE("constraint tables are consistent on canonical placements") {
    for (const auto& spec : catalog()) {
        for (int n : {2, 4, 8, 40}) {
            CAPTURE(group_name(spec.id));
            CAPTURE(n);
            const auto [mesh, cs] = build_tile(spec.id, n);

            // Twin correspondences map canonical positions exactly.
            for (const auto& r : cs.table.pairs)
                CHECK(distance(apply(r.map, mesh.vertices[r.from]),
                               mesh.vertices[r.to]) < 1e-12);

            // Orbit assignment reproduces canonical positions.
            for (int v = 0; v < cs.vertex_count; ++v) {
                const int rep = cs.orbit(v).rep;
                CHECK(distance(apply(cs.to_rep[v], mesh.vertices[rep]),
                               mesh.vertices[v]) < 1e-12);
            }

            // Pins and lines hold at canonical positions.
            for (const auto& orbit : cs.orbits) {
                if (orbit.kind == OrbitInfo::Kind::pinned)
                    CHECK(distance(orbit.pin, mesh.vertices[orbit.rep]) < 1e-12);
                if (orbit.kind == OrbitInfo::Kind::on_line)
                    CHECK(distance(orbit.line, mesh.vertices[orbit.rep]) < 1e-12);
            }

            // Every boundary vertex is constrained; interior vertices are free
            // singletons.
            const auto kinds = cs.classify(mesh);
            for (int v = 0; v < cs.vertex_count; ++v) {
                if (mesh.on_boundary[v])
                    CHECK(kinds[v].kind != VertexConstraint::Kind::free);
                else {
                    CHECK(kinds[v].kind == VertexConstraint::Kind::free);
                    CHECK(cs.orbit(v).members.size() == 1);
                }
            }
        }
    }
}

TEST_CASE("reflection groups have fully fixed boundaries") {
    for (GroupId id : {GroupId::s2222, GroupId::s442, GroupId::s333, GroupId::s632}) {
        const auto [mesh, cs] = build_tile(id, 8);
        CHECK(cs.count_kind(mesh, VertexConstraint::Kind::free) == 0);
        CHECK(cs.count_kind(mesh, VertexConstraint::Kind::twin_pair) == 0);
        for (int v : mesh.boundary_loop) {
            const auto& orbit = cs.orbit(v);
            CHECK((orbit.kind == OrbitInfo::Kind::on_line ||
                   orbit.kind == OrbitInfo::Kind::pinned));
        }
    }
}

TEST_CASE("group O constraint kinds") {
    const auto [mesh, cs] = build_tile(GroupId::O, 8);
    const auto kinds = cs.classify(mesh);
    for (int v : mesh.boundary_loop)
        CHECK(kinds[v].kind == VertexConstraint::Kind::twin_pair);
    // Translational freedom is removed by the centroid gauge, not a pin.
    CHECK(cs.gauge_dirs.size() == 2);
    CHECK(cs.drift_dirs.size() == 2);
}

TEST_CASE("torus corners form a single orbit") {
    const auto [mesh, cs] = build_tile(GroupId::O, 2);
    const auto& corner_orbit = cs.orbit(0);  // vertex (0,0)
    CHECK(corner_orbit.members.size() == 4);
    CHECK(corner_orbit.kind == OrbitInfo::Kind::free);
    CHECK(mesh.vertex_count() == 9);
}

TEST_CASE("442 cone vertices pin at rotation fixed points") {
    const auto [mesh, cs] = build_tile(GroupId::g442, 4);
    std::vector<Point2> expected{{0.0, 0.0}, {1.0, 1.0}, {1.0, 0.0}};
    std::vector<bool> seen(expected.size(), false);
    int pinned_orbits = 0;
    for (const auto& orbit : cs.orbits) {
        if (orbit.kind != OrbitInfo::Kind::pinned) continue;
        ++pinned_orbits;
        bool matched = false;
        for (size_t i = 0; i < expected.size(); ++i) {
            if (distance(orbit.pin, expected[i]) < 1e-12) {
                seen[i] = true;
                matched = true;
            }
        }
        CHECK(matched);
    }
    CHECK(pinned_orbits == 3);
    for (bool s : seen) CHECK(s);
}

TEST_CASE("cone points must land on mesh vertices") {
    CHECK_THROWS_AS(build_tile(GroupId::g2222, 3), std::invalid_argument);
    CHECK_THROWS_AS(build_tile(GroupId::g632, 5), std::invalid_argument);
    CHECK_THROWS_AS(build_tile(GroupId::sx, 7), std::invalid_argument);
    CHECK_THROWS_AS(build_tile(GroupId::O, 1), std::invalid_argument);
    try {
        build_tile(GroupId::g2222, 3);
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("cone point") != std::string::npos);
    }
}

TEST_CASE("tiling generators") {
    const auto gens = tiling_generators(GroupId::O);
    REQUIRE(gens.size() == 2);
    CHECK(approx_equal(gens[0], Isometry2::translate({1, 0})));
    CHECK(approx_equal(gens[1], Isometry2::translate({0, 1})));

    // Enumerated copies are pairwise distinct isometries.
    for (GroupId id : {GroupId::O, GroupId::g442, GroupId::g333, GroupId::g632}) {
        const BBox2 tile_box = bbox_of(group_spec(id).basic_tile.pts);
        const BBox2 window{{-1.5, -1.5}, {2.5, 2.5}};
        const auto copies = enumerate_group_copies(tiling_generators(id), tile_box, window);
        CHECK(copies.size() > 4);
        bool identity_found = false;
        for (size_t i = 0; i < copies.size(); ++i) {
            identity_found = identity_found || is_identity(copies[i], 1e-9);
            for (size_t j = i + 1; j < copies.size(); ++j)
                CHECK_FALSE(approx_equal(copies[i], copies[j], 1e-9));
        }
        CHECK(identity_found);
    }
}

TEST_CASE("canonical tiles cover the plane with multiplicity one") {
    // The canonical placement is itself a valid tile; Monte-Carlo coverage
    // over the basic-tile bounding box exercises every group table.
    for (const auto& spec : catalog()) {
        CAPTURE(group_name(spec.id));
        const auto [mesh, cs] = build_tile(spec.id, 2);
        const BBox2 window = bbox_of(spec.basic_tile.pts);
        const CoverageStats stats =
            check_tiling_coverage(mesh, cs, mesh.vertices, 0.0, window, 2000, 99);
        CHECK(stats.min_multiplicity == 1);
        CHECK(stats.max_multiplicity == 1);
    }
}
