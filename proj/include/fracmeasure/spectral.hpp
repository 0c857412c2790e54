#pragma once

// Discrete spectral calculus on the eigenpairs of the discrete Dirichlet
// Laplacian: fractional powers, discrete H^r norms, negative norms of loads
// and the ideal (eigenbasis) scheme.

#include "fracmeasure/fem.hpp"
#include "fracmeasure/numerics.hpp"

#include <cmath>
#include <string>

namespace fracmeasure {

/// Exponent s of the operator and the shift θ of the trial/test pair (s − θ, s + θ).
class FracParams {
public:
    static constexpr double kMargin = 1e-10;

    explicit FracParams(double s) : FracParams(s, default_theta(s)) {}

    FracParams(double s, double theta) : s_(s), theta_(theta) {
        if (!(s >= 0.5 + kMargin && s <= 1.0 - kMargin)) {
            throw DomainError("FracParams: s = " + std::to_string(s) + " must lie in (1/2, 1)");
        }
        if (!(theta >= 1.0 - s + kMargin && theta <= s - kMargin)) {
            throw DomainError("FracParams: theta = " + std::to_string(theta) + " must lie in (1 - s, s)");
        }
    }

    /// Midpoint of (1 − s, s).
    static double default_theta(double s) { return 0.5 * ((1.0 - s) + s); }

    double s() const { return s_; }
    double theta() const { return theta_; }
    double trial_order() const { return s_ - theta_; }
    double test_order() const { return s_ + theta_; }

    /// The ideal-scheme error analysis assumes s < 3/4.
    bool outside_ideal_theory() const { return s_ >= 0.75; }

private:
    double s_;
    double theta_;
};

/// Eigenpairs (Λ_n, Φ_n) of −Δ_h on a mesh, Φ M-orthonormal, Λ ascending.
class EigenDecomposition {
public:
    explicit EigenDecomposition(MeshPtr mesh)
        : mesh_(std::move(mesh)), stiffness_(assemble_stiffness(*mesh_)), mass_(assemble_mass(*mesh_)) {
        auto pairs = sym_eigendecompose(stiffness_, mass_);
        values_ = std::move(pairs.values);
        vectors_ = std::move(pairs.vectors);
    }

    const MeshPtr& mesh() const { return mesh_; }
    const SparseSymMatrix& stiffness() const { return stiffness_; }
    const SparseSymMatrix& mass() const { return mass_; }
    const Vector& values() const { return values_; }
    const DenseMatrix& vectors() const { return vectors_; }
    std::size_t size() const { return static_cast<std::size_t>(values_.size()); }

    /// ŵ = Φᵀ M c.
    Vector coefficients_of(const FEFunction& w) const {
        check(w);
        return vectors_.transpose() * mass_.multiply(w.coeffs());
    }

    /// ĝ = Φᵀ g for a load vector g (a functional on the FE space).
    Vector coefficients_of_load(const Vector& g) const {
        if (static_cast<std::size_t>(g.size()) != size()) {
            throw DimensionMismatch("load vector length " + std::to_string(g.size()) + " vs " + std::to_string(size()));
        }
        return vectors_.transpose() * g;
    }

    FEFunction synthesize(const Vector& spectral) const { return FEFunction(mesh_, vectors_ * spectral); }

    FEFunction mode(std::size_t n) const { return FEFunction(mesh_, vectors_.col(static_cast<Eigen::Index>(n))); }

    /// Throws DimensionMismatch unless w has one coefficient per interior node.
    void check(const FEFunction& w) const {
        if (static_cast<std::size_t>(w.coeffs().size()) != size()) {
            throw DimensionMismatch("FEFunction has " + std::to_string(w.coeffs().size()) + " coefficients, expected " +
                                    std::to_string(size()));
        }
    }

private:
    MeshPtr mesh_;
    SparseSymMatrix stiffness_;
    SparseSymMatrix mass_;
    Vector values_;
    DenseMatrix vectors_;
};

inline Vector spectral_power(const EigenDecomposition& e, double r) { return e.values().array().pow(r).matrix(); }

/// (−Δ_h)^r w = Σ Λ_n^r ŵ_n Φ_n.
inline FEFunction apply_fractional_power(const EigenDecomposition& e, double r, const FEFunction& w) {
    return e.synthesize(spectral_power(e, r).cwiseProduct(e.coefficients_of(w)));
}

/// (Σ Λ_n^r ŵ_n²)^{1/2}.
inline double discrete_norm(const EigenDecomposition& e, double r, const FEFunction& w) {
    const Vector c = e.coefficients_of(w);
    return std::sqrt(spectral_power(e, r).dot(c.cwiseAbs2()));
}

/// Discrete H^{−r} norm of the functional v ↦ gᵀv: (Σ Λ_n^{−r} ĝ_n²)^{1/2}.
/// r = 0 gives the L² norm of the Riesz representative M⁻¹g.
inline double dual_load_norm(const EigenDecomposition& e, double r, const Vector& g) {
    if (!(r >= 0.0)) throw DomainError("dual_load_norm: r must be non-negative");
    const Vector c = e.coefficients_of_load(g);
    return std::sqrt(spectral_power(e, -r).dot(c.cwiseAbs2()));
}

/// u_h = Σ Λ_n^{−s} ĝ_n Φ_n for any exponent s > 0 (s = 1 is the classical Galerkin solve).
inline FEFunction solve_ideal(const EigenDecomposition& e, double s, const Vector& g) {
    if (!(s > 0.0)) throw DomainError("solve_ideal: exponent must be positive");
    return e.synthesize(spectral_power(e, -s).cwiseProduct(e.coefficients_of_load(g)));
}

inline FEFunction solve_ideal(const EigenDecomposition& e, const FracParams& p, const Vector& g) {
    return solve_ideal(e, p.s(), g);
}

/// A_h(u, v) = Σ Λ_n^s û_n v̂_n.
inline double ideal_bilinear_form(const EigenDecomposition& e, double s, const FEFunction& u, const FEFunction& v) {
    return spectral_power(e, s).dot(e.coefficients_of(u).cwiseProduct(e.coefficients_of(v)));
}

/// ‖(−Δ)^{−r}F − (−Δ_h)^{−r} P_h F‖_{L²} against an exact field for (−Δ)^{−r}F.
/// P_h is the L² projection; r = 0 measures the projection error of F.
inline double operator_power_error(const EigenDecomposition& e, double r, const ScalarField& f,
                                   const ScalarField& exact, int degree = 5) {
    if (!(r >= 0.0 && r <= 1.0)) throw DomainError("operator_power_error: r must lie in [0, 1]");
    const Vector g = measure_load(*e.mesh(), Density{f, degree, nullptr, 0});
    const FEFunction approx = e.synthesize(spectral_power(e, -r).cwiseProduct(e.coefficients_of_load(g)));
    return l2_error(approx, exact, degree);
}

} // namespace fracmeasure
