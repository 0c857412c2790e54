#pragma once

#include "fracmeasure/errors.hpp"

#include <array>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace fracmeasure {

struct Point {
    double x = 0.0;
    double y = 0.0;

    friend Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
    friend Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
    friend Point operator*(double s, Point a) { return {s * a.x, s * a.y}; }
    friend bool operator==(const Point&, const Point&) = default;
};

inline double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point a, Point b) { return a.x * b.y - a.y * b.x; }
inline double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

/// Distance from p to the closed segment [a, b].
inline double distance_to_segment(Point p, Point a, Point b) {
    const Point ab = b - a;
    const double len2 = dot(ab, ab);
    double t = len2 > 0.0 ? dot(p - a, ab) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return distance(p, a + t * ab);
}

using Triangle = std::array<std::size_t, 3>;
using Barycentric = std::array<double, 3>;

struct MeshSize {
    double h_diam = 0.0; ///< largest element diameter
    double h_grid = 0.0; ///< shortest edge
};

struct Location {
    std::size_t triangle = 0;
    Barycentric lambda{};
};

/// Conforming triangulation with per-vertex boundary flags.
///
/// Interior (non-boundary) vertices carry the finite element degrees of
/// freedom; `interior_index` maps a vertex to its dof or -1.
class Mesh {
public:
    static constexpr double kBarycentricTolerance = 1e-12;

    /// Validates orientation, edge conformity, hanging nodes and boundary flags.
    Mesh(std::vector<Point> vertices, std::vector<Triangle> triangles, std::vector<bool> boundary)
        : vertices_(std::move(vertices)), triangles_(std::move(triangles)), boundary_(std::move(boundary)) {
        validate();
        interior_index_.assign(vertices_.size(), -1);
        for (std::size_t v = 0; v < vertices_.size(); ++v) {
            if (!boundary_[v]) {
                interior_index_[v] = static_cast<long>(interior_vertices_.size());
                interior_vertices_.push_back(v);
            }
        }
    }

    const std::vector<Point>& vertices() const { return vertices_; }
    const std::vector<Triangle>& triangles() const { return triangles_; }
    const std::vector<bool>& boundary_flags() const { return boundary_; }
    const std::vector<long>& interior_index() const { return interior_index_; }
    const std::vector<std::size_t>& interior_vertices() const { return interior_vertices_; }
    const std::vector<std::pair<std::size_t, std::size_t>>& boundary_edges() const { return boundary_edges_; }

    std::size_t num_vertices() const { return vertices_.size(); }
    std::size_t num_triangles() const { return triangles_.size(); }
    /// Dimension of the finite element space (number of interior vertices).
    std::size_t num_dofs() const { return interior_vertices_.size(); }

    std::array<Point, 3> corners(std::size_t t) const {
        const auto& tri = triangles_[t];
        return {vertices_[tri[0]], vertices_[tri[1]], vertices_[tri[2]]};
    }

    double area(std::size_t t) const {
        const auto c = corners(t);
        return 0.5 * cross(c[1] - c[0], c[2] - c[0]);
    }

    double total_area() const {
        double a = 0.0;
        for (std::size_t t = 0; t < triangles_.size(); ++t) a += area(t);
        return a;
    }

    Barycentric barycentric(std::size_t t, Point p) const {
        const auto c = corners(t);
        const double det = cross(c[1] - c[0], c[2] - c[0]);
        const double l1 = cross(p - c[0], c[2] - c[0]) / det;
        const double l2 = cross(c[1] - c[0], p - c[0]) / det;
        return {1.0 - l1 - l2, l1, l2};
    }

    /// Distance from p to the polygonal boundary (union of boundary edges).
    double distance_to_boundary(Point p) const {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& [a, b] : boundary_edges_) {
            best = std::min(best, distance_to_segment(p, vertices_[a], vertices_[b]));
        }
        return best;
    }

private:
    void validate() {
        const std::size_t nv = vertices_.size();
        if (boundary_.size() != nv) throw InvalidTopology("boundary flag count differs from vertex count");
        if (triangles_.empty()) throw InvalidTopology("mesh has no triangles");

        // Directed edge -> owning triangle; a conforming, consistently oriented
        // mesh uses every directed edge at most once.
        std::map<std::pair<std::size_t, std::size_t>, std::size_t> directed;
        for (std::size_t t = 0; t < triangles_.size(); ++t) {
            const auto& tri = triangles_[t];
            for (std::size_t v : tri) {
                if (v >= nv) throw InvalidTopology("triangle " + std::to_string(t) + " references vertex out of range");
            }
            if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2]) {
                throw InvalidTopology("triangle " + std::to_string(t) + " has repeated vertices");
            }
            if (!(area(t) > 0.0)) {
                throw InvalidTopology("triangle " + std::to_string(t) + " is not counterclockwise (signed area <= 0)");
            }
            for (int e = 0; e < 3; ++e) {
                const auto key = std::make_pair(tri[e], tri[(e + 1) % 3]);
                if (!directed.emplace(key, t).second) {
                    throw InvalidTopology("triangle " + std::to_string(t) + " duplicates an oriented edge");
                }
            }
        }

        std::vector<bool> on_boundary(nv, false);
        std::vector<bool> used(nv, false);
        for (const auto& [edge, t] : directed) {
            used[edge.first] = used[edge.second] = true;
            if (!directed.contains({edge.second, edge.first})) {
                boundary_edges_.push_back(edge);
                on_boundary[edge.first] = on_boundary[edge.second] = true;
            }
        }
        for (std::size_t v = 0; v < nv; ++v) {
            if (!used[v]) throw InvalidTopology("vertex " + std::to_string(v) + " belongs to no triangle");
        }

        // Hanging nodes: a vertex lying strictly inside a boundary-looking edge.
        for (const auto& [a, b] : boundary_edges_) {
            const Point pa = vertices_[a];
            const Point pb = vertices_[b];
            const double len = distance(pa, pb);
            for (std::size_t v = 0; v < nv; ++v) {
                if (v == a || v == b) continue;
                const Point p = vertices_[v];
                if (distance_to_segment(p, pa, pb) <= 1e-12 * len && distance(p, pa) > 1e-12 * len &&
                    distance(p, pb) > 1e-12 * len) {
                    const auto t = directed.at({a, b});
                    throw InvalidTopology("triangle " + std::to_string(t) + " has a hanging node (vertex " +
                                          std::to_string(v) + ") on an edge");
                }
            }
        }

        for (std::size_t v = 0; v < nv; ++v) {
            if (on_boundary[v] != boundary_[v]) {
                throw InvalidTopology("vertex " + std::to_string(v) + " boundary flag disagrees with topology");
            }
        }
    }

    std::vector<Point> vertices_;
    std::vector<Triangle> triangles_;
    std::vector<bool> boundary_;
    std::vector<long> interior_index_;
    std::vector<std::size_t> interior_vertices_;
    std::vector<std::pair<std::size_t, std::size_t>> boundary_edges_;
};

using MeshPtr = std::shared_ptr<const Mesh>;

/// Uniform n×n grid on (0,1)², every cell split along its lower-left to upper-right diagonal.
inline MeshPtr build_structured_square(std::size_t n) {
    if (n < 1) throw DomainError("build_structured_square: n must be >= 1");
    const std::size_t row = n + 1;
    std::vector<Point> vertices;
    std::vector<bool> boundary;
    vertices.reserve(row * row);
    boundary.reserve(row * row);
    for (std::size_t j = 0; j <= n; ++j) {
        for (std::size_t i = 0; i <= n; ++i) {
            vertices.push_back({static_cast<double>(i) / static_cast<double>(n),
                                static_cast<double>(j) / static_cast<double>(n)});
            boundary.push_back(i == 0 || j == 0 || i == n || j == n);
        }
    }
    std::vector<Triangle> triangles;
    triangles.reserve(2 * n * n);
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t ll = j * row + i;
            const std::size_t lr = ll + 1;
            const std::size_t ur = ll + row + 1;
            const std::size_t ul = ll + row;
            triangles.push_back({ll, lr, ur});
            triangles.push_back({ll, ur, ul});
        }
    }
    return std::make_shared<const Mesh>(std::move(vertices), std::move(triangles), std::move(boundary));
}

/// Reads the ASCII mesh format: `nv nt`, nv lines `x y flag`, nt lines `i j k`.
inline MeshPtr read_mesh(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    auto next_line = [&](const char* what) -> std::istringstream {
        while (std::getline(in, line)) {
            ++line_no;
            if (line.find_first_not_of(" \t\r") != std::string::npos) return std::istringstream(line);
        }
        throw ParseError(std::string("unexpected end of file, expected ") + what, line_no + 1);
    };
    auto expect_end = [&](std::istringstream& ss) {
        std::string extra;
        if (ss >> extra) throw ParseError("unexpected trailing token '" + extra + "'", line_no);
    };

    long nv = 0;
    long nt = 0;
    {
        auto ss = next_line("header");
        if (!(ss >> nv >> nt) || nv <= 0 || nt <= 0) throw ParseError("header must be 'nv nt' with positive counts", line_no);
        expect_end(ss);
    }
    std::vector<Point> vertices(static_cast<std::size_t>(nv));
    std::vector<bool> boundary(static_cast<std::size_t>(nv));
    for (auto& p : vertices) {
        auto ss = next_line("vertex");
        int flag = 0;
        if (!(ss >> p.x >> p.y >> flag) || (flag != 0 && flag != 1)) {
            throw ParseError("vertex line must be 'x y flag' with flag 0 or 1", line_no);
        }
        expect_end(ss);
        boundary[static_cast<std::size_t>(&p - vertices.data())] = flag == 1;
    }
    std::vector<Triangle> triangles(static_cast<std::size_t>(nt));
    for (auto& tri : triangles) {
        auto ss = next_line("triangle");
        long i = 0, j = 0, k = 0;
        if (!(ss >> i >> j >> k) || i < 0 || j < 0 || k < 0) {
            throw ParseError("triangle line must be three non-negative vertex indices", line_no);
        }
        expect_end(ss);
        tri = {static_cast<std::size_t>(i), static_cast<std::size_t>(j), static_cast<std::size_t>(k)};
    }
    return std::make_shared<const Mesh>(std::move(vertices), std::move(triangles), std::move(boundary));
}

inline MeshPtr load_mesh(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open mesh file '" + path + "'", 0);
    return read_mesh(in);
}

inline void write_mesh(std::ostream& out, const Mesh& mesh) {
    out.precision(17);
    out << mesh.num_vertices() << ' ' << mesh.num_triangles() << '\n';
    for (std::size_t v = 0; v < mesh.num_vertices(); ++v) {
        out << mesh.vertices()[v].x << ' ' << mesh.vertices()[v].y << ' ' << (mesh.boundary_flags()[v] ? 1 : 0) << '\n';
    }
    for (const auto& t : mesh.triangles()) out << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
}

inline MeshSize mesh_size(const Mesh& mesh) {
    MeshSize size{0.0, std::numeric_limits<double>::infinity()};
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
        const auto c = mesh.corners(t);
        for (int e = 0; e < 3; ++e) {
            const double len = distance(c[e], c[(e + 1) % 3]);
            size.h_diam = std::max(size.h_diam, len);
            size.h_grid = std::min(size.h_grid, len);
        }
    }
    return size;
}

/// Brute-force scan; the lowest-index triangle containing x wins.
inline Location locate_point(const Mesh& mesh, Point x) {
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
        const auto lambda = mesh.barycentric(t, x);
        if (lambda[0] >= -Mesh::kBarycentricTolerance && lambda[1] >= -Mesh::kBarycentricTolerance &&
            lambda[2] >= -Mesh::kBarycentricTolerance) {
            return {t, lambda};
        }
    }
    throw OutsideDomain("point (" + std::to_string(x.x) + ", " + std::to_string(x.y) + ") is outside the mesh");
}

} // namespace fracmeasure
