#pragma once

// L² regularizations of measures: convolution with a compactly supported
// bump, and indicator densities on a disk or an annulus. Each regularization
// knows how to build its finite element load with quadrature adapted to its
// support or jump set.

#include "fracmeasure/fem.hpp"
#include "fracmeasure/spectral.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

namespace fracmeasure {

enum class RegularizationKind { MollifierConvolution, DiskIndicator, RingIndicator };

inline std::string to_string(RegularizationKind kind) {
    switch (kind) {
    case RegularizationKind::MollifierConvolution: return "mollifier";
    case RegularizationKind::DiskIndicator: return "disk";
    case RegularizationKind::RingIndicator: return "ring";
    }
    return "unknown";
}

/// ρ(x) = c·exp(−1/(1 − |x|²)) for |x| < 1; c makes ∫ρ = 1 over the plane.
inline constexpr double kBumpNormalization = 2.143565775792236601;

inline double bump(double r2) {
    if (r2 >= 1.0) return 0.0;
    return kBumpNormalization * std::exp(-1.0 / (1.0 - r2));
}

/// ρ_ε(x) = ε⁻² ρ(x/ε).
inline double scaled_bump(Point x, double eps) {
    const double r2 = dot(x, x) / (eps * eps);
    return bump(r2) / (eps * eps);
}

struct RegularizedMeasure {
    Measure base;
    double epsilon = 0.0;
    ScalarField density;
    RegularizationKind kind = RegularizationKind::MollifierConvolution;
    /// Distance from x to the region resolved by element subdivision: the whole
    /// support for the smooth but steep bump, the jump set for indicators.
    std::function<double(Point)> refine_distance;

    /// Quadrature description used for loads and integrals.
    Density as_density() const {
        auto near = [zone = refine_distance](const std::array<Point, 3>& c) {
            const Point centroid = (1.0 / 3.0) * (c[0] + c[1] + c[2]);
            double diameter = 0.0;
            for (int i = 0; i < 3; ++i) diameter = std::max(diameter, distance(c[i], c[(i + 1) % 3]));
            return zone(centroid) <= diameter;
        };
        if (kind == RegularizationKind::MollifierConvolution) return Density(density, 5, near, 3);
        return Density(density, 2, near, 4);
    }

    Vector load(const Mesh& mesh) const { return measure_load(mesh, as_density()); }
    double mass(const Mesh& mesh) const { return integrate(mesh, as_density()); }

    double l2_norm(const Mesh& mesh) const {
        Density squared = as_density();
        squared.field = [f = density](Point x) {
            const double v = f(x);
            return v * v;
        };
        return std::sqrt(integrate(mesh, squared));
    }
};

namespace detail {

inline void require_positive_scale(double eps, const char* who) {
    if (!(eps > 0.0) || !std::isfinite(eps)) throw DomainError(std::string(who) + ": epsilon must be positive");
}

inline void require_clearance(double clearance, double eps, const char* who) {
    if (!(clearance > eps)) {
        throw SupportTooCloseToBoundary(std::string(who) + ": support at distance " + std::to_string(clearance) +
                                        " from the boundary, scale " + std::to_string(eps));
    }
}

/// Number of arc points used for the mollified circle density.
inline constexpr int kMollifiedArcPoints = 256;

} // namespace detail

/// μ ⋆ ρ_ε for a point or circle measure.
inline RegularizedMeasure mollify(const Mesh& mesh, const Measure& mu, double eps) {
    detail::require_positive_scale(eps, "mollify");
    RegularizedMeasure out;
    out.base = mu;
    out.epsilon = eps;
    out.kind = RegularizationKind::MollifierConvolution;

    if (const auto* dirac = std::get_if<PointDirac>(&mu)) {
        detail::require_clearance(mesh.distance_to_boundary(dirac->location), eps, "mollify");
        const Point z = dirac->location;
        out.density = [z, eps](Point x) { return scaled_bump(x - z, eps); };
        out.refine_distance = [z, eps](Point x) { return std::max(0.0, distance(x, z) - eps); };
        return out;
    }
    if (const auto* circle = std::get_if<WeightedCircle>(&mu)) {
        if (!(circle->radius > 0.0)) throw DomainError("mollify: circle radius must be positive");
        detail::require_clearance(circle_boundary_distance(mesh, circle->center, circle->radius), eps, "mollify");
        const Point c = circle->center;
        const double r = circle->radius;
        const double line_density = circle->total_weight / (2.0 * std::numbers::pi * r);
        out.density = [c, r, eps, line_density](Point x) {
            const double d = distance(x, c);
            if (std::abs(d - r) >= eps) return 0.0;
            // Arc of the circle within distance eps of x.
            double half = std::numbers::pi;
            if (d > 0.0) {
                const double cosine = (d * d + r * r - eps * eps) / (2.0 * d * r);
                if (cosine > -1.0) half = std::acos(std::min(1.0, cosine));
            }
            const double mid = d > 0.0 ? std::atan2(x.y - c.y, x.x - c.x) : 0.0;
            const int m = detail::kMollifiedArcPoints;
            const double step = 2.0 * half / m;
            double sum = 0.0;
            for (int k = 0; k < m; ++k) {
                const double phi = mid - half + (k + 0.5) * step;
                const Point y{c.x + r * std::cos(phi), c.y + r * std::sin(phi)};
                sum += scaled_bump(x - y, eps);
            }
            return line_density * r * step * sum;
        };
        out.refine_distance = [c, r, eps](Point x) { return std::max(0.0, std::abs(distance(x, c) - r) - eps); };
        return out;
    }
    throw DomainError("mollify: only point and circle measures can be mollified");
}

/// (πε²)⁻¹ χ_{B(z, ε)}.
inline RegularizedMeasure disk_indicator(const Mesh& mesh, Point z, double eps) {
    detail::require_positive_scale(eps, "disk_indicator");
    detail::require_clearance(mesh.distance_to_boundary(z), eps, "disk_indicator");
    RegularizedMeasure out;
    out.base = PointDirac{z};
    out.epsilon = eps;
    out.kind = RegularizationKind::DiskIndicator;
    const double height = 1.0 / (std::numbers::pi * eps * eps);
    out.density = [z, eps, height](Point x) { return distance(x, z) < eps ? height : 0.0; };
    out.refine_distance = [z, eps](Point x) { return std::abs(distance(x, z) - eps); };
    return out;
}

/// (4πεr)⁻¹ χ_{r−ε < |x − c| < r+ε}, scaled by the circle's total weight.
inline RegularizedMeasure ring_indicator(const Mesh& mesh, const WeightedCircle& circle, double eps) {
    detail::require_positive_scale(eps, "ring_indicator");
    if (!(eps < circle.radius)) throw DomainError("ring_indicator: epsilon must be smaller than the radius");
    detail::require_clearance(circle_boundary_distance(mesh, circle.center, circle.radius), eps, "ring_indicator");
    RegularizedMeasure out;
    out.base = circle;
    out.epsilon = eps;
    out.kind = RegularizationKind::RingIndicator;
    const Point c = circle.center;
    const double r = circle.radius;
    const double height = circle.total_weight / (4.0 * std::numbers::pi * eps * r);
    out.density = [c, r, eps, height](Point x) { return std::abs(distance(x, c) - r) < eps ? height : 0.0; };
    out.refine_distance = [c, r, eps](Point x) { return std::abs(std::abs(distance(x, c) - r) - eps); };
    return out;
}

/// Regularization of the requested kind; indicators require the matching base measure.
inline RegularizedMeasure regularize(const Mesh& mesh, const Measure& mu, RegularizationKind kind, double eps) {
    switch (kind) {
    case RegularizationKind::MollifierConvolution: return mollify(mesh, mu, eps);
    case RegularizationKind::DiskIndicator:
        if (const auto* dirac = std::get_if<PointDirac>(&mu)) return disk_indicator(mesh, dirac->location, eps);
        throw DomainError("disk regularization applies to point measures only");
    case RegularizationKind::RingIndicator:
        if (const auto* circle = std::get_if<WeightedCircle>(&mu)) return ring_indicator(mesh, *circle, eps);
        throw DomainError("ring regularization applies to circle measures only");
    }
    throw DomainError("unknown regularization kind");
}

struct RegularizationRow {
    double epsilon;
    double negative_norm; ///< discrete ‖μ − μ_ε‖ in the dual of the test space
    double l2_norm;       ///< ‖μ_ε‖_{L²}
};

struct RegularizationStudy {
    std::vector<RegularizationRow> rows;
    double negative_norm_exponent; ///< least-squares slope of log(negative_norm) against log ε
    double l2_exponent;            ///< least-squares slope of log(l2_norm) against log ε
};

/// Least-squares slope of log y against log x.
inline double fit_exponent(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw DomainError("fit_exponent: need at least two matching samples");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(x.size());
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = std::log(x[i]) - mx;
        sxy += dx * (std::log(y[i]) - my);
        sxx += dx * dx;
    }
    return sxy / sxx;
}

/// Negative-norm error and L² size of the regularizations at each scale.
inline RegularizationStudy verify_regularization(const EigenDecomposition& e, const Measure& mu,
                                                 const std::vector<double>& eps_list, const FracParams& p,
                                                 RegularizationKind kind = RegularizationKind::MollifierConvolution) {
    const Mesh& mesh = *e.mesh();
    const Vector exact = measure_load(mesh, mu);
    RegularizationStudy study{};
    std::vector<double> eps, neg, l2;
    for (double epsilon : eps_list) {
        const auto reg = regularize(mesh, mu, kind, epsilon);
        const double negative = dual_load_norm(e, p.test_order(), exact - reg.load(mesh));
        const double size = reg.l2_norm(mesh);
        study.rows.push_back({epsilon, negative, size});
        eps.push_back(epsilon);
        neg.push_back(negative);
        l2.push_back(size);
    }
    study.negative_norm_exponent = fit_exponent(eps, neg);
    study.l2_exponent = fit_exponent(eps, l2);
    return study;
}

} // namespace fracmeasure
