#pragma once

// Convergence studies: observed orders, analytic references on the unit
// square, self-convergence against a fine reference, and the distance
// between the ideal and practical schemes.

#include "fracmeasure/quadrature.hpp"
#include "fracmeasure/regularize.hpp"
#include "fracmeasure/spectral.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace fracmeasure {

struct ConvergenceRow {
    std::size_t n;
    double h_grid;
    double error;
    double observed_order; ///< NaN on the first row and below the noise floor
};

class ConvergenceTable {
public:
    std::string scheme;
    std::string norm = "L2";
    double s = 0.0;
    double theta = 0.0;
    std::string measure;
    /// Errors at or below 1e3·ε_mach·reference_norm are treated as noise.
    double reference_norm = 0.0;

    const std::vector<ConvergenceRow>& rows() const { return rows_; }

    void add_row(std::size_t n, double h_grid, double error) {
        if (!rows_.empty() && n <= rows_.back().n) throw DomainError("ConvergenceTable: n must increase strictly");
        double order = std::numeric_limits<double>::quiet_NaN();
        if (!rows_.empty()) {
            const auto& prev = rows_.back();
            if (above_noise(prev.error) && above_noise(error)) {
                order = std::log(prev.error / error) / std::log(prev.h_grid / h_grid);
            }
        }
        rows_.push_back({n, h_grid, error, order});
    }

    bool above_noise(double error) const {
        return error > 1e3 * std::numeric_limits<double>::epsilon() * reference_norm;
    }

    bool strictly_decreasing() const {
        for (std::size_t i = 1; i < rows_.size(); ++i) {
            if (!(rows_[i].error < rows_[i - 1].error)) return false;
        }
        return true;
    }

    /// Smallest defined observed order (NaN if none is defined).
    double min_order() const {
        double best = std::numeric_limits<double>::quiet_NaN();
        for (const auto& row : rows_) {
            if (!std::isnan(row.observed_order) && (std::isnan(best) || row.observed_order < best)) {
                best = row.observed_order;
            }
        }
        return best;
    }

    /// Header row, then one row per level; numbers with 12 significant digits.
    void write_csv(std::ostream& out) const {
        out << "n,h_grid,error,observed_order,scheme,norm,s,theta,measure\n";
        std::ostringstream line;
        line << std::setprecision(12);
        for (const auto& row : rows_) {
            line.str("");
            line << row.n << ',' << row.h_grid << ',' << row.error << ',';
            if (!std::isnan(row.observed_order)) line << row.observed_order;
            line << ',' << scheme << ',' << norm << ',' << s << ',' << theta << ',' << measure << '\n';
            out << line.str();
        }
    }

private:
    std::vector<ConvergenceRow> rows_;
};

struct SquareMode {
    int m;
    int n;
    double coefficient;
};

/// u(x, y) = Σ c_mn (π²(m² + n²))^{−s} · 2 sin(mπx) sin(nπy): the solution of
/// (−Δ)^s u = Σ c_mn · 2 sin(mπx) sin(nπy) on the unit square.
inline ScalarField analytic_reference_square(double s, std::vector<SquareMode> modes) {
    for (const auto& mode : modes) {
        if (mode.m < 1 || mode.n < 1) throw DomainError("analytic_reference_square: mode indices start at 1");
    }
    return [s, modes = std::move(modes)](Point p) {
        constexpr double pi = std::numbers::pi;
        double sum = 0.0;
        for (const auto& mode : modes) {
            const double lambda = pi * pi * (mode.m * mode.m + mode.n * mode.n);
            sum += mode.coefficient * std::pow(lambda, -s) * 2.0 * std::sin(mode.m * pi * p.x) *
                   std::sin(mode.n * pi * p.y);
        }
        return sum;
    };
}

enum class SolveScheme { Ideal, Practical };

inline std::string to_string(SolveScheme scheme) { return scheme == SolveScheme::Ideal ? "ideal" : "practical"; }

/// Everything needed to solve one problem on a structured square of any size.
struct SchemeConfig {
    SolveScheme scheme = SolveScheme::Ideal;
    FracParams params{0.65};
    Measure measure = PointDirac{{0.5, 0.5}};
    /// Practical scheme, point or circle measures: regularization kind and ε = factor·h_grid.
    RegularizationKind regularization = RegularizationKind::DiskIndicator;
    double epsilon_factor = 1.0;
    /// Quadrature: explicit (Y, K) or select_params(s, h_grid, c).
    std::optional<QuadratureParams> quadrature;
    double quadrature_c = 2.0;
    PracticalOptions solver;
};

inline std::string describe(const Measure& mu) {
    std::ostringstream out;
    out << std::setprecision(6);
    if (const auto* d = std::get_if<PointDirac>(&mu)) {
        out << "dirac(" << d->location.x << ";" << d->location.y << ")";
    } else if (const auto* c = std::get_if<WeightedCircle>(&mu)) {
        out << "circle(" << c->center.x << ";" << c->center.y << ";r=" << c->radius << ";w=" << c->total_weight << ")";
    } else {
        out << "density";
    }
    return out.str();
}

inline bool is_singular(const Measure& mu) { return !std::holds_alternative<Density>(mu); }

inline QuadratureParams quadrature_for(const SchemeConfig& config, double h_grid) {
    return config.quadrature ? *config.quadrature : select_params(config.params.s(), h_grid, config.quadrature_c);
}

/// Load used by the practical scheme: singular measures are regularized first.
inline Vector practical_load(const SchemeConfig& config, const Mesh& mesh) {
    if (!is_singular(config.measure)) return measure_load(mesh, config.measure);
    const double eps = config.epsilon_factor * mesh_size(mesh).h_grid;
    return regularize(mesh, config.measure, config.regularization, eps).load(mesh);
}

/// Solves with the configured scheme; `multiplier` scales the number of quadrature terms.
inline FEFunction solve_configured(const SchemeConfig& config, const MeshPtr& mesh, std::size_t multiplier = 1) {
    if (config.scheme == SolveScheme::Ideal) {
        const EigenDecomposition e(mesh);
        return solve_ideal(e, config.params, measure_load(*mesh, config.measure));
    }
    const auto q = quadrature_for(config, mesh_size(*mesh).h_grid);
    const auto rule = build_rule(config.params.s(), q.truncation, q.terms * multiplier);
    return solve_practical(mesh, assemble_stiffness(*mesh), assemble_mass(*mesh), rule, practical_load(config, *mesh),
                           config.solver);
}

/// Reference solution on the mesh of size n: for singular measures the practical
/// scheme with four times as many quadrature terms and ε tied to that mesh; for
/// densities the configured scheme itself.
inline FEFunction reference_solution(const SchemeConfig& config, std::size_t n) {
    const auto mesh = build_structured_square(n);
    if (!is_singular(config.measure)) return solve_configured(config, mesh);
    SchemeConfig reference = config;
    reference.scheme = SolveScheme::Practical;
    return solve_configured(reference, mesh, 4);
}

/// L² errors of the configured scheme on each n in n_list against a reference
/// on the mesh of size reference_n (default: the finest n). Coarse solutions are
/// prolonged to the reference mesh by P1 interpolation.
inline ConvergenceTable self_convergence(const SchemeConfig& config, const std::vector<std::size_t>& n_list,
                                         std::optional<FEFunction> reference = std::nullopt) {
    if (n_list.empty()) throw DomainError("self_convergence: empty mesh list");
    for (std::size_t i = 1; i < n_list.size(); ++i) {
        if (n_list[i] <= n_list[i - 1]) throw DomainError("self_convergence: mesh sizes must increase");
    }
    if (!reference) reference = reference_solution(config, n_list.back());
    const MeshPtr fine = reference->mesh();
    const auto mass = assemble_mass(*fine);

    ConvergenceTable table;
    table.scheme = to_string(config.scheme);
    table.s = config.params.s();
    table.theta = config.params.theta();
    table.measure = describe(config.measure);
    table.reference_norm = l2_norm(*reference, mass);
    for (std::size_t n : n_list) {
        const auto mesh = build_structured_square(n);
        const auto u = solve_configured(config, mesh);
        const auto on_fine = u.mesh() == fine ? u : transfer(u, fine);
        const double error = l2_norm(FEFunction(fine, on_fine.coeffs() - reference->coeffs()), mass);
        table.add_row(n, mesh_size(*mesh).h_grid, error);
    }
    return table;
}

/// ‖solve_ideal(b) − solve_practical(b)‖_{L²}.
inline double compare_schemes(const EigenDecomposition& e, const DiagonalizationRule& rule, const Vector& load,
                              const PracticalOptions& options = {}) {
    const auto ideal = solve_ideal(e, rule.s, load);
    const auto practical = solve_practical(e.mesh(), e.stiffness(), e.mass(), rule, load, options);
    return l2_norm(FEFunction(e.mesh(), ideal.coeffs() - practical.coeffs()), e.mass());
}

inline double compare_schemes(const EigenDecomposition& e, const DiagonalizationRule& rule,
                              const RegularizedMeasure& mu, const PracticalOptions& options = {}) {
    return compare_schemes(e, rule, mu.load(*e.mesh()), options);
}

/// max_n |Λ_n^{−s} − r(Λ_n)| · ‖b‖: bound on compare_schemes from the eigen-expansion.
inline double scheme_distance_bound(const EigenDecomposition& e, const DiagonalizationRule& rule, const Vector& load) {
    double worst = 0.0;
    for (Eigen::Index n = 0; n < e.values().size(); ++n) worst = std::max(worst, scalar_error(rule, e.values()[n]));
    return worst * dual_load_norm(e, 0.0, load);
}

} // namespace fracmeasure
