#pragma once

// Pointwise-tracking optimal control with box constraints:
//
//   minimize  ½ Σ_z |u(z) − u_z|² + (α/2)‖q‖²   subject to  (−Δ)^s u = f + q,  a ≤ q ≤ b.
//
// The adjoint state carries Dirac sources at the observation points. The
// optimal control satisfies q = Π_[a,b](−p/α), which a damped fixed-point
// iteration enforces.

#include "fracmeasure/quadrature.hpp"
#include "fracmeasure/regularize.hpp"
#include "fracmeasure/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace fracmeasure {

struct ControlProblem {
    ControlProblem(ScalarField forcing_field, std::vector<Point> observation_points, std::vector<double> target_values,
                   double regularization, double lower_bound, double upper_bound)
        : forcing(std::move(forcing_field)), observations(std::move(observation_points)),
          targets(std::move(target_values)), alpha(regularization), lower(lower_bound), upper(upper_bound) {
        if (!(alpha > 0.0) || !std::isfinite(alpha)) throw DomainError("ControlProblem: alpha must be positive");
        if (!std::isfinite(lower) || !std::isfinite(upper) || !(lower < upper)) {
            throw DomainError("ControlProblem: bounds must be finite with a < b");
        }
        if (observations.size() != targets.size()) {
            throw DimensionMismatch("ControlProblem: one target per observation point is required");
        }
        if (observations.empty()) throw DomainError("ControlProblem: at least one observation point is required");
    }

    /// Throws OutsideDomain unless every observation point lies strictly inside the mesh.
    void validate(const Mesh& mesh) const {
        for (const Point& z : observations) {
            locate_point(mesh, z);
            if (!(mesh.distance_to_boundary(z) > 0.0)) {
                throw OutsideDomain("ControlProblem: observation point on the boundary");
            }
        }
    }

    ScalarField forcing;
    std::vector<Point> observations;
    std::vector<double> targets;
    double alpha;
    double lower;
    double upper;
};

enum class ControlScheme { Ideal, Practical };

struct ControlOptions {
    double tolerance = 1e-10;
    std::size_t max_iterations = 500;
    /// Damping in (0, 1]; 0 selects 0.9·α/(α + L̂) from the curvature estimate.
    double omega = 0.0;
    ControlScheme scheme = ControlScheme::Ideal;
    /// Practical scheme only: quadrature rule and disk-regularization scale of the adjoint Diracs.
    std::optional<DiagonalizationRule> rule;
    double epsilon = 0.0;
};

struct OCPSolution {
    FEFunction control;
    FEFunction state;
    FEFunction adjoint;
    std::vector<double> cost_history;
    std::size_t iterations = 0;
    double vi_residual = 0.0;
    double omega = 0.0;
    double curvature_estimate = 0.0;
};

class OcpNoConvergence : public NoConvergence {
public:
    OcpNoConvergence(std::size_t max_iterations, double residual, OCPSolution last)
        : NoConvergence("solve_ocp: no convergence after " + std::to_string(max_iterations) +
                            " iterations (step " + std::to_string(residual) + ")",
                        max_iterations, residual),
          last_(std::move(last)) {}

    const OCPSolution& last_iterate() const { return last_; }

private:
    OCPSolution last_;
};

inline FEFunction project_admissible(const FEFunction& v, double a, double b) {
    if (!(a < b)) throw DomainError("project_admissible: requires a < b");
    return FEFunction(v.mesh(), v.coeffs().cwiseMax(a).cwiseMin(b));
}

/// Load of the distributed forcing f.
inline Vector forcing_load(const Mesh& mesh, const ScalarField& f) { return measure_load(mesh, Density(f, 5)); }

/// u solving the state equation with load ⟨f + q, φ⟩.
inline FEFunction solve_state(const EigenDecomposition& e, const FracParams& p, const ScalarField& f,
                              const FEFunction& q) {
    e.check(q);
    return solve_ideal(e, p, forcing_load(*e.mesh(), f) + e.mass().multiply(q.coeffs()));
}

/// Dirac load Σ_z (u(z) − u_z) δ_z of the adjoint equation.
inline Vector adjoint_load(const FEFunction& u, const ControlProblem& prob) {
    const Mesh& mesh = *u.mesh();
    Vector g = Vector::Zero(static_cast<Eigen::Index>(mesh.num_dofs()));
    for (std::size_t i = 0; i < prob.observations.size(); ++i) {
        const double residual = evaluate(u, prob.observations[i]) - prob.targets[i];
        if (residual != 0.0) g += residual * measure_load(mesh, PointDirac{prob.observations[i]});
    }
    return g;
}

inline FEFunction solve_adjoint(const EigenDecomposition& e, const FracParams& p, const FEFunction& u,
                                const ControlProblem& prob) {
    e.check(u);
    return solve_ideal(e, p, adjoint_load(u, prob));
}

/// J(u, q) = ½ Σ |u(z) − u_z|² + (α/2)‖q‖²_{L²}.
inline double evaluate_cost(const FEFunction& u, const FEFunction& q, const ControlProblem& prob,
                            const SparseSymMatrix& mass) {
    double tracking = 0.0;
    for (std::size_t i = 0; i < prob.observations.size(); ++i) {
        const double r = evaluate(u, prob.observations[i]) - prob.targets[i];
        tracking += r * r;
    }
    const double norm = l2_norm(q, mass);
    return 0.5 * tracking + 0.5 * prob.alpha * norm * norm;
}

/// Solves state and adjoint equations for a given control with either scheme.
class ReducedProblem {
public:
    ReducedProblem(const EigenDecomposition& e, const FracParams& p, const ControlProblem& prob,
                   const ControlOptions& options = {})
        : e_(e), params_(p), prob_(prob), options_(options), forcing_(forcing_load(*e.mesh(), prob.forcing)) {
        prob_.validate(*e.mesh());
        if (options_.scheme == ControlScheme::Practical) {
            if (!options_.rule) throw DomainError("practical control scheme requires a quadrature rule");
            const double eps = options_.epsilon > 0.0 ? options_.epsilon : mesh_size(*e.mesh()).h_grid;
            for (const Point& z : prob_.observations) {
                observation_loads_.push_back(disk_indicator(*e.mesh(), z, eps).load(*e.mesh()));
            }
        }
    }

    const ControlProblem& problem() const { return prob_; }
    const EigenDecomposition& decomposition() const { return e_; }

    FEFunction state(const FEFunction& q) const {
        e_.check(q);
        return solve(forcing_ + e_.mass().multiply(q.coeffs()));
    }

    FEFunction adjoint(const FEFunction& u) const {
        if (options_.scheme == ControlScheme::Ideal) return solve(adjoint_load(u, prob_));
        Vector g = Vector::Zero(static_cast<Eigen::Index>(e_.size()));
        for (std::size_t i = 0; i < prob_.observations.size(); ++i) {
            g += (evaluate(u, prob_.observations[i]) - prob_.targets[i]) * observation_loads_[i];
        }
        return solve(g);
    }

    /// j(q) = J(S(f + q), q).
    double cost(const FEFunction& q) const { return evaluate_cost(state(q), q, prob_, e_.mass()); }

    /// Riesz representative of j'(q) in the L² inner product: p + αq.
    FEFunction gradient(const FEFunction& q) const {
        const auto p = adjoint(state(q));
        return FEFunction(q.mesh(), p.coeffs() + prob_.alpha * q.coeffs());
    }

    /// j'(q)·d = (p + αq, d)_{L²}.
    double directional_derivative(const FEFunction& q, const FEFunction& d) const {
        return gradient(q).coeffs().dot(e_.mass().multiply(d.coeffs()));
    }

    /// Rayleigh-quotient estimate of the curvature L of the tracking term:
    /// with e = S*(Σ δ_z) and w = S e, L̂ = Σ w(z)² / ‖e‖². One adjoint-type and
    /// one state-type solve; exact when there is a single observation.
    double curvature_estimate() const {
        Vector g = Vector::Zero(static_cast<Eigen::Index>(e_.size()));
        for (const Point& z : prob_.observations) g += measure_load(*e_.mesh(), PointDirac{z});
        const FEFunction direction = solve(g);
        const double norm2 = quadratic_form(e_.mass(), direction.coeffs());
        if (norm2 == 0.0) return 0.0;
        const FEFunction response = solve(e_.mass().multiply(direction.coeffs()));
        double sum = 0.0;
        for (const Point& z : prob_.observations) {
            const double v = evaluate(response, z);
            sum += v * v;
        }
        return sum / norm2;
    }

private:
    FEFunction solve(const Vector& load) const {
        if (options_.scheme == ControlScheme::Ideal) return solve_ideal(e_, params_, load);
        return solve_practical(e_.mesh(), e_.stiffness(), e_.mass(), *options_.rule, load);
    }

    const EigenDecomposition& e_;
    FracParams params_;
    ControlProblem prob_;
    ControlOptions options_;
    Vector forcing_;
    std::vector<Vector> observation_loads_;
};

/// Damped fixed-point iteration q ← (1 − ω) q + ω Π_[a,b](−p/α), starting from q = Π(0).
/// The step is halved whenever the cost would increase by more than rounding (1e-12 relative),
/// so accepted costs never increase beyond that level.
inline OCPSolution solve_ocp(const EigenDecomposition& e, const FracParams& p, const ControlProblem& prob,
                             const ControlOptions& options = {}) {
    const ReducedProblem reduced(e, p, prob, options);
    const auto& mass = e.mass();
    const double alpha = prob.alpha;

    OCPSolution sol{FEFunction::zero(e.mesh()), FEFunction::zero(e.mesh()), FEFunction::zero(e.mesh()), {}, 0, 0.0,
                    0.0, 0.0};
    sol.curvature_estimate = reduced.curvature_estimate();
    sol.omega = options.omega > 0.0 ? std::min(1.0, options.omega) : 0.9 * alpha / (alpha + sol.curvature_estimate);

    FEFunction q = project_admissible(FEFunction::zero(e.mesh()), prob.lower, prob.upper);
    FEFunction u = reduced.state(q);
    FEFunction adj = reduced.adjoint(u);
    double cost = evaluate_cost(u, q, prob, mass);
    sol.cost_history.push_back(cost);

    auto fixed_point_target = [&](const FEFunction& adjoint) {
        return project_admissible(FEFunction(e.mesh(), -adjoint.coeffs() / alpha), prob.lower, prob.upper);
    };
    auto finish = [&](std::size_t iterations) {
        sol.control = q;
        sol.state = u;
        sol.adjoint = adj;
        sol.iterations = iterations;
        const FEFunction target = fixed_point_target(adj);
        sol.vi_residual = l2_norm(FEFunction(e.mesh(), q.coeffs() - target.coeffs()), mass);
    };

    double step = 0.0;
    for (std::size_t it = 1; it <= options.max_iterations; ++it) {
        const FEFunction target = fixed_point_target(adj);
        const Vector direction = target.coeffs() - q.coeffs();
        double omega = sol.omega;
        for (int halving = 0;; ++halving) {
            // Convex combination of admissible vectors stays inside the box; the
            // clamp only removes rounding.
            const FEFunction trial = project_admissible(FEFunction(e.mesh(), q.coeffs() + omega * direction),
                                                        prob.lower, prob.upper);
            const FEFunction trial_state = reduced.state(trial);
            const double trial_cost = evaluate_cost(trial_state, trial, prob, mass);
            // Near the optimum true decreases fall below rounding; only increases
            // beyond that level trigger a halving.
            const double noise = 1e-12 * std::max(std::abs(cost), std::numeric_limits<double>::min());
            if (trial_cost <= cost + noise || halving >= 40) {
                step = l2_norm(FEFunction(e.mesh(), trial.coeffs() - q.coeffs()), mass);
                q = trial;
                u = trial_state;
                adj = reduced.adjoint(u);
                cost = std::min(cost, trial_cost);
                sol.cost_history.push_back(trial_cost);
                break;
            }
            omega *= 0.5;
        }
        if (step <= options.tolerance) {
            finish(it);
            return sol;
        }
    }
    finish(options.max_iterations);
    throw OcpNoConvergence(options.max_iterations, step, sol);
}

} // namespace fracmeasure
