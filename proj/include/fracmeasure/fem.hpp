#pragma once

// P1 finite elements with homogeneous Dirichlet conditions: assembly,
// evaluation, loads for measures and densities, and norms.

#include "fracmeasure/mesh.hpp"
#include "fracmeasure/numerics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <span>
#include <variant>
#include <vector>

namespace fracmeasure {

using ScalarField = std::function<double(Point)>;

/// Coefficients over the interior nodal basis of a mesh; zero on boundary vertices.
class FEFunction {
public:
    FEFunction(MeshPtr mesh, Vector coeffs) : mesh_(std::move(mesh)), coeffs_(std::move(coeffs)) {
        if (static_cast<std::size_t>(coeffs_.size()) != mesh_->num_dofs()) {
            throw DimensionMismatch("FEFunction: " + std::to_string(coeffs_.size()) + " coefficients for " +
                                    std::to_string(mesh_->num_dofs()) + " interior nodes");
        }
    }

    static FEFunction zero(MeshPtr mesh) {
        const auto n = static_cast<Eigen::Index>(mesh->num_dofs());
        return FEFunction(std::move(mesh), Vector::Zero(n));
    }

    const MeshPtr& mesh() const { return mesh_; }
    const Vector& coeffs() const { return coeffs_; }
    Vector& coeffs() { return coeffs_; }

    /// Value at mesh vertex v (0 on the boundary).
    double vertex_value(std::size_t v) const {
        const long dof = mesh_->interior_index()[v];
        return dof < 0 ? 0.0 : coeffs_[dof];
    }

    /// Values at all mesh vertices, boundary included.
    Vector nodal_values() const {
        Vector out(static_cast<Eigen::Index>(mesh_->num_vertices()));
        for (std::size_t v = 0; v < mesh_->num_vertices(); ++v) out[static_cast<Eigen::Index>(v)] = vertex_value(v);
        return out;
    }

private:
    MeshPtr mesh_;
    Vector coeffs_;
};

// ---------------------------------------------------------------------------
// Quadrature on triangles

struct QuadraturePoint {
    Barycentric lambda;
    double weight; ///< fraction of the element area
};

/// Symmetric rules exact for polynomials of the given degree (1, 2, 4 or 5).
inline std::span<const QuadraturePoint> triangle_rule(int degree) {
    static const std::array<QuadraturePoint, 1> d1{{{{1.0 / 3, 1.0 / 3, 1.0 / 3}, 1.0}}};
    static const std::array<QuadraturePoint, 3> d2{{
        {{2.0 / 3, 1.0 / 6, 1.0 / 6}, 1.0 / 3},
        {{1.0 / 6, 2.0 / 3, 1.0 / 6}, 1.0 / 3},
        {{1.0 / 6, 1.0 / 6, 2.0 / 3}, 1.0 / 3},
    }};
    constexpr double a = 0.445948490915965, wa = 0.223381589678011;
    constexpr double b = 0.091576213509771, wb = 0.109951743655322;
    static const std::array<QuadraturePoint, 6> d4{{
        {{1 - 2 * a, a, a}, wa}, {{a, 1 - 2 * a, a}, wa}, {{a, a, 1 - 2 * a}, wa},
        {{1 - 2 * b, b, b}, wb}, {{b, 1 - 2 * b, b}, wb}, {{b, b, 1 - 2 * b}, wb},
    }};
    constexpr double a1 = 0.059715871789770, b1 = 0.470142064105115, w1 = 0.132394152788506;
    constexpr double a2 = 0.797426985353087, b2 = 0.101286507323456, w2 = 0.125939180544827;
    static const std::array<QuadraturePoint, 7> d5{{
        {{1.0 / 3, 1.0 / 3, 1.0 / 3}, 0.225},
        {{a1, b1, b1}, w1}, {{b1, a1, b1}, w1}, {{b1, b1, a1}, w1},
        {{a2, b2, b2}, w2}, {{b2, a2, b2}, w2}, {{b2, b2, a2}, w2},
    }};
    switch (degree) {
    case 1: return d1;
    case 2: return d2;
    case 3:
    case 4: return d4;
    case 5: return d5;
    default: throw DomainError("triangle_rule: supported degrees are 1, 2, 4, 5");
    }
}

using RefinementPredicate = std::function<bool(const std::array<Point, 3>&)>;

/// Calls visit(point, barycentric-in-element, weight) for every quadrature
/// point of element t. Sub-triangles for which `refine` holds are split into
/// four, recursively up to `depth` levels.
template <class Visitor>
void for_each_quadrature_point(const Mesh& mesh, std::size_t t, int degree, const RefinementPredicate& refine,
                               int depth, Visitor&& visit) {
    const auto corners = mesh.corners(t);
    const double area = mesh.area(t);
    const auto rule = triangle_rule(degree);
    auto to_point = [&](const Barycentric& l) { return l[0] * corners[0] + l[1] * corners[1] + l[2] * corners[2]; };

    auto recurse = [&](auto&& self, const std::array<Barycentric, 3>& sub, double sub_area, int level) -> void {
        if (level > 0 && refine) {
            const std::array<Point, 3> pts{to_point(sub[0]), to_point(sub[1]), to_point(sub[2])};
            if (refine(pts)) {
                auto mid = [](const Barycentric& p, const Barycentric& q) {
                    return Barycentric{0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1]), 0.5 * (p[2] + q[2])};
                };
                const auto m01 = mid(sub[0], sub[1]);
                const auto m12 = mid(sub[1], sub[2]);
                const auto m20 = mid(sub[2], sub[0]);
                const double quarter = 0.25 * sub_area;
                self(self, {sub[0], m01, m20}, quarter, level - 1);
                self(self, {m01, sub[1], m12}, quarter, level - 1);
                self(self, {m20, m12, sub[2]}, quarter, level - 1);
                self(self, {m01, m12, m20}, quarter, level - 1);
                return;
            }
        }
        for (const auto& q : rule) {
            Barycentric l{};
            for (int i = 0; i < 3; ++i) {
                l[i] = q.lambda[0] * sub[0][i] + q.lambda[1] * sub[1][i] + q.lambda[2] * sub[2][i];
            }
            visit(to_point(l), l, q.weight * sub_area);
        }
    };
    recurse(recurse, {Barycentric{1, 0, 0}, Barycentric{0, 1, 0}, Barycentric{0, 0, 1}}, area, depth);
}

// ---------------------------------------------------------------------------
// Measures

struct PointDirac {
    Point location;
};

/// Uniform measure on the circle |x − center| = radius with total mass `total_weight`.
struct WeightedCircle {
    Point center;
    double radius = 0.0;
    double total_weight = 1.0;
    /// Minimum number of arc quadrature points; 0 selects max(64, ⌈8·2πr/h_grid⌉).
    std::size_t quadrature_points = 0;
};

struct Density {
    explicit Density(ScalarField f, int degree = 2, RefinementPredicate refine_if = nullptr, int depth = 0)
        : field(std::move(f)), quadrature_degree(degree), refine(std::move(refine_if)), refine_depth(depth) {}

    ScalarField field;
    int quadrature_degree = 2;
    /// Elements (or sub-elements) flagged here are split recursively `refine_depth` times.
    RefinementPredicate refine;
    int refine_depth = 0;
};

using Measure = std::variant<PointDirac, WeightedCircle, Density>;

/// Distance from the circle |x − c| = r to the mesh boundary (0 if they meet).
inline double circle_boundary_distance(const Mesh& mesh, Point center, double radius) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& [a, b] : mesh.boundary_edges()) {
        const Point pa = mesh.vertices()[a];
        const Point pb = mesh.vertices()[b];
        const double near = distance_to_segment(center, pa, pb);
        const double far = std::max(distance(center, pa), distance(center, pb));
        if (near <= radius && radius <= far) return 0.0;
        best = std::min(best, std::min(std::abs(near - radius), std::abs(far - radius)));
    }
    return best;
}

inline std::size_t circle_quadrature_count(const WeightedCircle& c, double h_grid) {
    if (c.quadrature_points > 0) return c.quadrature_points;
    const double wanted = std::ceil(8.0 * 2.0 * std::numbers::pi * c.radius / h_grid);
    return std::max<std::size_t>(64, static_cast<std::size_t>(wanted));
}

/// Gauss-Legendre nodes and weights on [−1, 1] (Newton on the three-term recurrence).
inline std::vector<std::pair<double, double>> gauss_legendre(std::size_t m) {
    std::vector<std::pair<double, double>> rule(m);
    for (std::size_t i = 0; i < m; ++i) {
        double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(m) + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (std::size_t k = 2; k <= m; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
                p0 = p1;
                p1 = p2;
            }
            dp = static_cast<double>(m) * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        rule[i] = {x, 2.0 / ((1.0 - x * x) * dp * dp)};
    }
    return rule;
}

/// Angles in [0, 2π) where the circle crosses mesh edges, sorted and deduplicated.
inline std::vector<double> circle_edge_crossings(const Mesh& mesh, Point center, double radius) {
    std::vector<double> angles;
    for (const auto& tri : mesh.triangles()) {
        for (int e = 0; e < 3; ++e) {
            const std::size_t ia = tri[e], ib = tri[(e + 1) % 3];
            const Point a = mesh.vertices()[ia];
            const Point d = mesh.vertices()[ib] - a;
            const Point f = a - center;
            const double qa = dot(d, d);
            const double qb = 2.0 * dot(f, d);
            const double qc = dot(f, f) - radius * radius;
            const double disc = qb * qb - 4.0 * qa * qc;
            if (disc < 0.0) continue;
            const double root = std::sqrt(disc);
            for (double t : {(-qb - root) / (2.0 * qa), (-qb + root) / (2.0 * qa)}) {
                if (t < 0.0 || t > 1.0) continue;
                const Point x = a + t * d;
                double angle = std::atan2(x.y - center.y, x.x - center.x);
                if (angle < 0.0) angle += 2.0 * std::numbers::pi;
                angles.push_back(angle);
            }
        }
    }
    std::sort(angles.begin(), angles.end());
    angles.erase(std::unique(angles.begin(), angles.end(), [](double p, double q) { return q - p < 1e-12; }),
                 angles.end());
    return angles;
}

/// ⟨μ, φ_v⟩ for every mesh vertex v, boundary vertices included.
inline Vector measure_load_all(const Mesh& mesh, const Measure& mu) {
    Vector g = Vector::Zero(static_cast<Eigen::Index>(mesh.num_vertices()));
    auto scatter = [&](std::size_t t, const Barycentric& lambda, double w) {
        const auto& tri = mesh.triangles()[t];
        for (int i = 0; i < 3; ++i) g[static_cast<Eigen::Index>(tri[i])] += w * lambda[i];
    };

    if (const auto* dirac = std::get_if<PointDirac>(&mu)) {
        const auto loc = locate_point(mesh, dirac->location);
        scatter(loc.triangle, loc.lambda, 1.0);
    } else if (const auto* circle = std::get_if<WeightedCircle>(&mu)) {
        if (!(circle->radius > 0.0)) throw DomainError("WeightedCircle: radius must be positive");
        if (circle_boundary_distance(mesh, circle->center, circle->radius) <= 0.0) {
            throw OutsideDomain("WeightedCircle meets the domain boundary");
        }
        // The hat functions are smooth along each arc between edge crossings, so
        // Gauss-Legendre per sub-arc converges spectrally.
        const std::size_t count = circle_quadrature_count(*circle, mesh_size(mesh).h_grid);
        auto breaks = circle_edge_crossings(mesh, circle->center, circle->radius);
        if (breaks.empty()) breaks.push_back(0.0);
        const std::size_t arcs = breaks.size();
        const std::size_t per_arc = std::max<std::size_t>(3, (count + arcs - 1) / arcs);
        const auto rule = gauss_legendre(per_arc);
        const double density = circle->total_weight / (2.0 * std::numbers::pi);
        for (std::size_t i = 0; i < arcs; ++i) {
            const double start = breaks[i];
            const double stop = i + 1 < arcs ? breaks[i + 1] : breaks[0] + 2.0 * std::numbers::pi;
            const double half = 0.5 * (stop - start);
            if (half <= 0.0) continue;
            auto on_circle = [&](double phi) {
                return Point{circle->center.x + circle->radius * std::cos(phi),
                             circle->center.y + circle->radius * std::sin(phi)};
            };
            // A sub-arc lies in a single element: locate its midpoint once.
            const std::size_t t = locate_point(mesh, on_circle(start + half)).triangle;
            for (const auto& [node, weight] : rule) {
                scatter(t, mesh.barycentric(t, on_circle(start + half * (node + 1.0))), density * half * weight);
            }
        }
    } else {
        const auto& density = std::get<Density>(mu);
        for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
            for_each_quadrature_point(mesh, t, density.quadrature_degree, density.refine, density.refine_depth,
                                      [&](Point x, const Barycentric& lambda, double w) {
                                          scatter(t, lambda, w * density.field(x));
                                      });
        }
    }
    return g;
}

/// Restriction of a full-vertex vector to the interior dofs.
inline Vector restrict_to_interior(const Mesh& mesh, const Vector& full) {
    Vector out(static_cast<Eigen::Index>(mesh.num_dofs()));
    for (std::size_t d = 0; d < mesh.num_dofs(); ++d) {
        out[static_cast<Eigen::Index>(d)] = full[static_cast<Eigen::Index>(mesh.interior_vertices()[d])];
    }
    return out;
}

/// g_m = ⟨μ, φ_m⟩ for every interior node m.
inline Vector measure_load(const Mesh& mesh, const Measure& mu) {
    return restrict_to_interior(mesh, measure_load_all(mesh, mu));
}

/// ∫_Ω f dx with the density's quadrature settings.
inline double integrate(const Mesh& mesh, const Density& density) {
    double total = 0.0;
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
        for_each_quadrature_point(mesh, t, density.quadrature_degree, density.refine, density.refine_depth,
                                  [&](Point x, const Barycentric&, double w) { total += w * density.field(x); });
    }
    return total;
}

// ---------------------------------------------------------------------------
// Assembly

enum class Restriction { Interior, AllVertices };

namespace detail {

template <class ElementMatrix>
SparseSymMatrix assemble(const Mesh& mesh, Restriction restriction, ElementMatrix&& element) {
    std::vector<Triplet> triplets;
    triplets.reserve(9 * mesh.num_triangles());
    const auto& index = mesh.interior_index();
    const bool interior = restriction == Restriction::Interior;
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
        const auto local = element(t);
        const auto& tri = mesh.triangles()[t];
        for (int i = 0; i < 3; ++i) {
            const long row = interior ? index[tri[i]] : static_cast<long>(tri[i]);
            if (row < 0) continue;
            for (int j = 0; j < 3; ++j) {
                const long col = interior ? index[tri[j]] : static_cast<long>(tri[j]);
                if (col < 0) continue;
                triplets.emplace_back(static_cast<int>(row), static_cast<int>(col), local[i][j]);
            }
        }
    }
    const std::size_t dim = interior ? mesh.num_dofs() : mesh.num_vertices();
    return SparseSymMatrix(dim, triplets);
}

} // namespace detail

/// K_ij = ∫ ∇φ_i·∇φ_j.
inline SparseSymMatrix assemble_stiffness(const Mesh& mesh, Restriction restriction = Restriction::Interior) {
    return detail::assemble(mesh, restriction, [&](std::size_t t) {
        const auto c = mesh.corners(t);
        const std::array<Point, 3> opposite{c[2] - c[1], c[0] - c[2], c[1] - c[0]};
        const double four_area = 4.0 * mesh.area(t);
        std::array<std::array<double, 3>, 3> k{};
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) k[i][j] = dot(opposite[i], opposite[j]) / four_area;
        return k;
    });
}

/// Consistent mass M_ij = ∫ φ_i φ_j; element matrix (A/12)·(1 + δ_ij).
inline SparseSymMatrix assemble_mass(const Mesh& mesh, Restriction restriction = Restriction::Interior) {
    return detail::assemble(mesh, restriction, [&](std::size_t t) {
        const double a = mesh.area(t) / 12.0;
        std::array<std::array<double, 3>, 3> m{};
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) m[i][j] = (i == j ? 2.0 : 1.0) * a;
        return m;
    });
}

// ---------------------------------------------------------------------------
// Evaluation and norms

inline double evaluate(const FEFunction& u, Point x) {
    const auto loc = locate_point(*u.mesh(), x);
    const auto& tri = u.mesh()->triangles()[loc.triangle];
    double value = 0.0;
    for (int i = 0; i < 3; ++i) value += loc.lambda[i] * u.vertex_value(tri[i]);
    return value;
}

/// Nodal interpolant of f on the interior vertices.
inline FEFunction interpolate(const MeshPtr& mesh, const ScalarField& f) {
    Vector c(static_cast<Eigen::Index>(mesh->num_dofs()));
    for (std::size_t d = 0; d < mesh->num_dofs(); ++d) {
        c[static_cast<Eigen::Index>(d)] = f(mesh->vertices()[mesh->interior_vertices()[d]]);
    }
    return FEFunction(mesh, std::move(c));
}

/// Interpolates u at the interior vertices of `target`; exact for nested refinements.
inline FEFunction transfer(const FEFunction& u, const MeshPtr& target) {
    return interpolate(target, [&](Point x) { return evaluate(u, x); });
}

inline double quadratic_form(const SparseSymMatrix& a, const Vector& c) {
    if (static_cast<std::size_t>(c.size()) != a.dimension()) {
        throw DimensionMismatch("norm: coefficient length differs from matrix dimension");
    }
    return std::max(0.0, c.dot(a.multiply(c)));
}

inline double l2_norm(const FEFunction& u, const SparseSymMatrix& mass) { return std::sqrt(quadratic_form(mass, u.coeffs())); }

inline double h1_seminorm(const FEFunction& u, const SparseSymMatrix& stiffness) {
    return std::sqrt(quadratic_form(stiffness, u.coeffs()));
}

/// ‖u_h − f‖_{L²} by elementwise quadrature of the given degree.
inline double l2_error(const FEFunction& u, const ScalarField& f, int degree = 5) {
    const Mesh& mesh = *u.mesh();
    double total = 0.0;
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
        const auto& tri = mesh.triangles()[t];
        const std::array<double, 3> nodal{u.vertex_value(tri[0]), u.vertex_value(tri[1]), u.vertex_value(tri[2])};
        for_each_quadrature_point(mesh, t, degree, nullptr, 0, [&](Point x, const Barycentric& l, double w) {
            const double diff = l[0] * nodal[0] + l[1] * nodal[1] + l[2] * nodal[2] - f(x);
            total += w * diff * diff;
        });
    }
    return std::sqrt(total);
}

} // namespace fracmeasure
