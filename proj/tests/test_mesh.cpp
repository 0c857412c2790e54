#include "fracmeasure/mesh.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <random>
#include <sstream>

using namespace fracmeasure;

namespace {

MeshPtr parse(const std::string& text) {
    std::istringstream in(text);
    return read_mesh(in);
}

const char* kLShape = R"(8 6
0 0 1
1 0 1
2 0 1
0 1 1
1 1 1
2 1 1
0 2 1
1 2 1
0 1 4
0 4 3
1 2 5
1 5 4
3 4 7
3 7 6
)";

} // namespace

TEST_CASE("structured square counts", "[mesh]") {
    SECTION("n = 1") {
        const auto m = build_structured_square(1);
        CHECK(m->num_vertices() == 4);
        CHECK(m->num_triangles() == 2);
        CHECK(m->num_dofs() == 0);
    }
    SECTION("n = 2") {
        const auto m = build_structured_square(2);
        CHECK(m->num_vertices() == 9);
        CHECK(m->num_triangles() == 8);
        REQUIRE(m->num_dofs() == 1);
        CHECK(m->vertices()[m->interior_vertices()[0]] == Point{0.5, 0.5});
    }
    SECTION("n = 257 reproduces the experiment resolution") {
        const auto m = build_structured_square(257);
        CHECK(m->num_dofs() == 65536);
        CHECK(mesh_size(*m).h_grid == Catch::Approx(3.89105e-3).epsilon(1e-5));
    }
    SECTION("n = 0 is rejected") { CHECK_THROWS_AS(build_structured_square(0), DomainError); }
}

TEST_CASE("mesh file loading", "[mesh]") {
    SECTION("unit square file equals the structured n = 1 mesh") {
        const auto m = parse("4 2\n0 0 1\n1 0 1\n0 1 1\n1 1 1\n0 1 3\n0 3 2\n");
        const auto ref = build_structured_square(1);
        CHECK(m->vertices() == ref->vertices());
        CHECK(m->triangles() == ref->triangles());
        CHECK(m->boundary_flags() == ref->boundary_flags());
    }
    SECTION("write then read reproduces the mesh") {
        const auto ref = build_structured_square(3);
        std::stringstream buffer;
        write_mesh(buffer, *ref);
        const auto m = read_mesh(buffer);
        CHECK(m->vertices() == ref->vertices());
        CHECK(m->triangles() == ref->triangles());
    }
    SECTION("clockwise triangle") {
        CHECK_THROWS_AS(parse("4 2\n0 0 1\n1 0 1\n0 1 1\n1 1 1\n0 3 1\n0 3 2\n"), InvalidTopology);
        try {
            parse("4 2\n0 0 1\n1 0 1\n0 1 1\n1 1 1\n0 1 3\n0 2 3\n");
            FAIL("expected InvalidTopology");
        } catch (const InvalidTopology& e) {
            CHECK(std::string(e.what()).find("triangle 1") != std::string::npos);
        }
    }
    SECTION("L-shaped domain loads (convexity is not checked)") {
        const auto m = parse(kLShape);
        CHECK(m->num_triangles() == 6);
        CHECK(m->total_area() == Catch::Approx(3.0));
        CHECK(m->boundary_edges().size() == 8);
    }
    SECTION("boundary flag inconsistent with topology") {
        CHECK_THROWS_AS(parse("4 2\n0 0 1\n1 0 1\n0 1 0\n1 1 1\n0 1 3\n0 3 2\n"), InvalidTopology);
    }
    SECTION("hanging node") {
        CHECK_THROWS_AS(parse("5 3\n0 0 1\n2 0 1\n1 1 1\n1 0 1\n1 -1 1\n0 1 2\n0 4 3\n3 4 1\n"), InvalidTopology);
    }
    SECTION("parse errors carry the line number") {
        try {
            parse("4 2\n0 0 1\n1 zero 1\n0 1 1\n1 1 1\n0 1 3\n0 3 2\n");
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.line() == 3);
        }
        CHECK_THROWS_AS(parse("4 2\n0 0 1\n1 0 1\n0 1 1\n1 1 1\n0 1 3\n"), ParseError);
        CHECK_THROWS_AS(parse("4 2\n0 0 1 7\n1 0 1\n0 1 1\n1 1 1\n0 1 3\n0 3 2\n"), ParseError);
    }
}

TEST_CASE("mesh size", "[mesh]") {
    const auto s2 = mesh_size(*build_structured_square(2));
    CHECK(s2.h_diam == Catch::Approx(std::sqrt(2.0) / 2));
    CHECK(s2.h_grid == Catch::Approx(0.5));

    const double r3 = std::sqrt(3.0) / 2;
    const Mesh tri({{0, 0}, {1, 0}, {0.5, r3}}, {{0, 1, 2}}, {true, true, true});
    const auto st = mesh_size(tri);
    CHECK(st.h_diam == Catch::Approx(1.0));
    CHECK(st.h_grid == Catch::Approx(1.0));
}

TEST_CASE("point location", "[mesh]") {
    SECTION("grid vertex") {
        const auto m = build_structured_square(2);
        const auto loc = locate_point(*m, {0.5, 0.5});
        const auto& tri = m->triangles()[loc.triangle];
        bool has_vertex = false;
        for (int i = 0; i < 3; ++i) {
            if (m->vertices()[tri[i]] == Point{0.5, 0.5}) {
                has_vertex = true;
                CHECK(loc.lambda[i] == Catch::Approx(1.0));
            }
        }
        CHECK(has_vertex);
    }
    SECTION("centroid of triangle 0") {
        const auto m = build_structured_square(4);
        const auto c = m->corners(0);
        const auto loc = locate_point(*m, (1.0 / 3) * (c[0] + c[1] + c[2]));
        CHECK(loc.triangle == 0);
        for (double l : loc.lambda) CHECK(l == Catch::Approx(1.0 / 3));
    }
    SECTION("shared edges resolve to the lowest triangle index") {
        const auto m = build_structured_square(2);
        // Midpoint of the diagonal of cell 0 lies in triangles 0 and 1.
        CHECK(locate_point(*m, {0.25, 0.25}).triangle == 0);
    }
    SECTION("experiment point on the fine mesh") {
        const auto m = build_structured_square(257);
        const Point z{0.3, 0.7};
        const auto loc = locate_point(*m, z);
        const auto c = m->corners(loc.triangle);
        const Point back = loc.lambda[0] * c[0] + loc.lambda[1] * c[1] + loc.lambda[2] * c[2];
        CHECK(std::abs(back.x - z.x) <= 1e-12);
        CHECK(std::abs(back.y - z.y) <= 1e-12);
    }
    SECTION("outside") {
        CHECK_THROWS_AS(locate_point(*build_structured_square(2), {1.5, 0.5}), OutsideDomain);
    }
}

TEST_CASE("mesh invariants", "[mesh][property]") {
    for (std::size_t n : {1u, 3u, 8u, 17u}) {
        const auto m = build_structured_square(n);
        CHECK(m->total_area() == Catch::Approx(1.0).margin(1e-12));

        std::map<std::pair<std::size_t, std::size_t>, int> uses;
        for (const auto& t : m->triangles()) {
            for (int e = 0; e < 3; ++e) {
                auto a = t[e], b = t[(e + 1) % 3];
                ++uses[{std::min(a, b), std::max(a, b)}];
            }
        }
        for (const auto& [edge, count] : uses) {
            const Point a = m->vertices()[edge.first];
            const Point b = m->vertices()[edge.second];
            const bool boundary_edge = (a.x == 0.0 && b.x == 0.0) || (a.x == 1.0 && b.x == 1.0) ||
                                       (a.y == 0.0 && b.y == 0.0) || (a.y == 1.0 && b.y == 1.0);
            CHECK(count == (boundary_edge ? 1 : 2));
        }
    }

    const auto m = build_structured_square(16);
    std::mt19937 gen(2024);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
        const Point x{u(gen), u(gen)};
        const auto loc = locate_point(*m, x);
        const auto c = m->corners(loc.triangle);
        const Point back = loc.lambda[0] * c[0] + loc.lambda[1] * c[1] + loc.lambda[2] * c[2];
        CHECK(std::abs(back.x - x.x) <= 1e-12);
        CHECK(std::abs(back.y - x.y) <= 1e-12);
        CHECK(std::abs(loc.lambda[0] + loc.lambda[1] + loc.lambda[2] - 1.0) <= 1e-12);
    }
}
