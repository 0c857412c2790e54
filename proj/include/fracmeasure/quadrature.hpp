#pragma once

// Bessel-root diagonalization of (−Δ_h)^{−s}: a positive sum of shifted
// resolvents Σ ψ_k (−Δ_h + Υ_k)^{−1} approximating the fractional inverse.

#include "fracmeasure/bessel.hpp"
#include "fracmeasure/fem.hpp"
#include "fracmeasure/numerics.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

namespace fracmeasure {

/// Nodes Υ_k = (η_k / Y)² and weights ψ_k built from the positive roots η_k of J_{−s}.
struct DiagonalizationRule {
    double s = 0.0;
    double truncation = 0.0; ///< Y
    std::size_t terms = 0;   ///< K
    std::vector<double> eta;
    std::vector<double> upsilon;
    std::vector<double> psi;
};

/// ψ_k = 4 sin(πs) / (Υ_k^s Y² π J_{1−s}(η_k)²).
inline DiagonalizationRule build_rule(double s, double truncation, std::size_t terms) {
    if (!(s > 0.0 && s < 1.0)) throw DomainError("build_rule: s must lie in (0, 1)");
    if (!(truncation > 0.0)) throw DomainError("build_rule: Y must be positive");
    if (terms < 1) throw DomainError("build_rule: K must be >= 1");

    DiagonalizationRule rule;
    rule.s = s;
    rule.truncation = truncation;
    rule.terms = terms;
    rule.eta = bessel_roots(-s, terms);
    rule.upsilon.resize(terms);
    rule.psi.resize(terms);
    const double scale = 4.0 * std::sin(std::numbers::pi * s) / (truncation * truncation * std::numbers::pi);
    for (std::size_t k = 0; k < terms; ++k) {
        const double ratio = rule.eta[k] / truncation;
        rule.upsilon[k] = ratio * ratio;
        const double j = bessel_j(1.0 - s, rule.eta[k]);
        rule.psi[k] = scale / (std::pow(rule.upsilon[k], s) * j * j);
    }
    return rule;
}

/// Σ_k ψ_k / (λ + Υ_k), summed in ascending k.
inline double rational_value(const DiagonalizationRule& rule, double lambda) {
    double sum = 0.0;
    for (std::size_t k = 0; k < rule.terms; ++k) sum += rule.psi[k] / (lambda + rule.upsilon[k]);
    return sum;
}

/// |λ^{−s} − Σ ψ_k/(λ + Υ_k)|.
inline double scalar_error(const DiagonalizationRule& rule, double lambda) {
    if (!(lambda > 0.0)) throw DomainError("scalar_error: lambda must be positive");
    return std::abs(std::pow(lambda, -rule.s) - rational_value(rule, lambda));
}

inline double relative_scalar_error(const DiagonalizationRule& rule, double lambda) {
    return scalar_error(rule, lambda) * std::pow(lambda, rule.s);
}

struct QuadratureParams {
    double truncation = 0.0; ///< Y
    std::size_t terms = 0;   ///< K
};

/// Y = c·s·|ln h|, K = Y/h rounded to the nearest integer (at least 1).
inline QuadratureParams select_params(double s, double h, double c = 2.0) {
    if (!(h > 0.0 && h < 1.0)) throw DomainError("select_params: h must lie in (0, 1)");
    const double y = c * s * std::abs(std::log(h));
    const double k = std::max(1.0, std::round(y / h));
    return {y, static_cast<std::size_t>(k)};
}

/// Raised when the shifted solve for term k fails.
class ShiftedSolveFailure : public NoConvergence {
public:
    ShiftedSolveFailure(const NoConvergence& cause, std::size_t term)
        : NoConvergence("shifted solve k = " + std::to_string(term + 1) + ": " + cause.what(), cause.max_iterations(),
                        cause.residual()),
          term_(term) {}

    /// Zero-based index of the failing term.
    std::size_t term() const { return term_; }

private:
    std::size_t term_;
};

struct PracticalOptions {
    double tolerance = 1e-10;
    std::size_t max_iterations = 20000;
};

/// u = Σ_k ψ_k U_k with (K + Υ_k M) U_k = b. Terms are accumulated in ascending k.
inline Vector practical_coefficients(const SparseSymMatrix& stiffness, const SparseSymMatrix& mass,
                                     const DiagonalizationRule& rule, const Vector& b,
                                     const PracticalOptions& options = {}) {
    if (stiffness.dimension() != mass.dimension() || static_cast<std::size_t>(b.size()) != mass.dimension()) {
        throw DimensionMismatch("solve_practical: K, M and b must share one dimension");
    }
    Vector u = Vector::Zero(b.size());
    if (b.norm() == 0.0) return u;
    for (std::size_t k = 0; k < rule.terms; ++k) {
        const auto shifted = SparseSymMatrix::combine(1.0, stiffness, rule.upsilon[k], mass);
        try {
            const auto cg = conjugate_gradient(shifted, b, options.tolerance, options.max_iterations);
            u += rule.psi[k] * cg.x;
        } catch (const NoConvergence& e) {
            throw ShiftedSolveFailure(e, k);
        }
    }
    return u;
}

inline FEFunction solve_practical(const MeshPtr& mesh, const SparseSymMatrix& stiffness, const SparseSymMatrix& mass,
                                  const DiagonalizationRule& rule, const Vector& b,
                                  const PracticalOptions& options = {}) {
    return FEFunction(mesh, practical_coefficients(stiffness, mass, rule, b, options));
}

} // namespace fracmeasure
