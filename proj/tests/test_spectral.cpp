#include "fracmeasure/spectral.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <memory>
#include <numbers>

using namespace fracmeasure;
using std::numbers::pi;

namespace {

const EigenDecomposition& decomposition(std::size_t n) {
    static std::map<std::size_t, std::unique_ptr<EigenDecomposition>> cache;
    auto& slot = cache[n];
    if (!slot) slot = std::make_unique<EigenDecomposition>(build_structured_square(n));
    return *slot;
}

double sine_mode(Point p) { return std::sin(pi * p.x) * std::sin(pi * p.y); }

double max_nodal(const FEFunction& a, const FEFunction& b) { return (a.coeffs() - b.coeffs()).cwiseAbs().maxCoeff(); }

} // namespace

TEST_CASE("fractional parameters", "[spectral]") {
    const FracParams p(0.65, 0.4);
    CHECK(p.trial_order() == Catch::Approx(0.25));
    CHECK(p.test_order() == Catch::Approx(1.05));
    CHECK_FALSE(p.outside_ideal_theory());
    CHECK(FracParams(0.8).outside_ideal_theory());
    CHECK(FracParams(0.65).theta() == Catch::Approx(0.5));
    CHECK_THROWS_AS(FracParams(0.5, 0.5), DomainError);
    CHECK_THROWS_AS(FracParams(1.0, 0.5), DomainError);
    CHECK_THROWS_AS(FracParams(0.65, 0.35), DomainError);
    CHECK_THROWS_AS(FracParams(0.65, 0.65), DomainError);
    const FracParams tight(0.65, 0.35 + 2e-10);
    CHECK(tight.s() + tight.theta() > 1.0);
}

TEST_CASE("fractional powers", "[spectral]") {
    const auto& e = decomposition(16);
    const auto mesh = e.mesh();
    const auto w = interpolate(mesh, [](Point p) { return p.x * p.y * (1 - p.x) * (1 - p.y) * std::exp(p.x); });

    SECTION("r = 0 is the identity") {
        const auto out = apply_fractional_power(e, 0.0, w);
        CHECK(l2_norm(FEFunction(mesh, out.coeffs() - w.coeffs()), e.mass()) <= 1e-10);
    }
    SECTION("single mode") {
        const auto out = apply_fractional_power(e, 0.65, e.mode(0));
        CHECK(max_nodal(out, FEFunction(mesh, std::pow(e.values()[0], 0.65) * e.vectors().col(0))) <= 1e-10);
    }
    SECTION("r = -1 matches a CG solve of K x = M c") {
        const auto out = apply_fractional_power(e, -1.0, w);
        const auto cg = conjugate_gradient(e.stiffness(), e.mass().multiply(w.coeffs()), 1e-13, 2000);
        CHECK(l2_norm(FEFunction(mesh, out.coeffs() - cg.x), e.mass()) <= 1e-8);
    }
    SECTION("r = 1 matches the operator M^-1 K") {
        const auto out = apply_fractional_power(e, 1.0, w);
        CHECK((e.mass().multiply(out.coeffs()) - e.stiffness().multiply(w.coeffs())).norm() <= 1e-9);
    }
    SECTION("semigroup and round trip") {
        const double s = 0.65;
        for (double r1 : {-s, s, 0.5, 1.0}) {
            for (double r2 : {-s, s, 0.5, 1.0}) {
                const auto two_steps = apply_fractional_power(e, r2, apply_fractional_power(e, r1, w));
                const auto one_step = apply_fractional_power(e, r1 + r2, w);
                const double scale = std::max(1.0, one_step.coeffs().cwiseAbs().maxCoeff());
                CHECK(max_nodal(two_steps, one_step) <= 1e-9 * scale);
            }
        }
        CHECK(max_nodal(apply_fractional_power(e, -s, apply_fractional_power(e, s, w)), w) <= 1e-9);
    }
    SECTION("dimension mismatch") {
        CHECK_THROWS_AS(apply_fractional_power(e, 0.5, FEFunction::zero(build_structured_square(8))),
                        DimensionMismatch);
    }
}

TEST_CASE("discrete norms", "[spectral]") {
    const auto& e = decomposition(16);
    const auto w = interpolate(e.mesh(), [](Point p) { return std::sin(2 * p.x) * p.y * (1 - p.y) * (1 - p.x); });
    CHECK(discrete_norm(e, 0.0, w) == Catch::Approx(l2_norm(w, e.mass())).epsilon(1e-10));
    CHECK(discrete_norm(e, 1.0, w) == Catch::Approx(h1_seminorm(w, e.stiffness())).epsilon(1e-10));
    for (double r : {-1.0, 0.3, 1.4}) {
        CHECK(discrete_norm(e, r, e.mode(2)) == Catch::Approx(std::pow(e.values()[2], r / 2)).epsilon(1e-10));
    }
}

TEST_CASE("dual load norm", "[spectral]") {
    const auto& e = decomposition(16);
    SECTION("single-mode functional") {
        const Vector g = e.mass().multiply(e.vectors().col(0));
        for (double r : {0.5, 1.05, 2.0}) {
            CHECK(dual_load_norm(e, r, g) == Catch::Approx(std::pow(e.values()[0], -r / 2)).epsilon(1e-10));
        }
    }
    SECTION("zero load") { CHECK(dual_load_norm(e, 1.05, Vector::Zero(e.size())) == 0.0); }
    SECTION("Dirac negative norms under refinement") {
        // Order 2 is well inside the dual space of a point mass and converges
        // quickly; order s + θ = 1.05 sits just past the threshold, so the
        // discrete norm is finite but still creeps upward as modes are added.
        const auto& fine = decomposition(64);
        const Vector g_coarse = measure_load(*e.mesh(), PointDirac{{0.3, 0.7}});
        const Vector g_fine = measure_load(*fine.mesh(), PointDirac{{0.3, 0.7}});
        const auto& middle = decomposition(32);
        const double coarse2 = dual_load_norm(e, 2.0, g_coarse);
        const double middle2 = dual_load_norm(middle, 2.0, measure_load(*middle.mesh(), PointDirac{{0.3, 0.7}}));
        const double fine2 = dual_load_norm(fine, 2.0, g_fine);
        CHECK(std::abs(middle2 - fine2) < 0.5 * std::abs(coarse2 - fine2));
        CHECK(std::abs(coarse2 - fine2) <= 0.05 * fine2);
        const FracParams p(0.65, 0.4);
        const double coarse = dual_load_norm(e, p.test_order(), g_coarse);
        const double finer = dual_load_norm(fine, p.test_order(), g_fine);
        CHECK(std::isfinite(finer));
        CHECK(finer > coarse);
        CHECK(finer < 1.5 * coarse);
    }
    SECTION("wrong length") { CHECK_THROWS_AS(dual_load_norm(e, 1.0, Vector::Zero(3)), DimensionMismatch); }
}

TEST_CASE("ideal scheme", "[spectral]") {
    SECTION("single-mode load") {
        const auto& e = decomposition(16);
        const Vector g = e.mass().multiply(e.vectors().col(0));
        const auto u = solve_ideal(e, FracParams(0.65, 0.4), g);
        CHECK(max_nodal(u, FEFunction(e.mesh(), std::pow(e.values()[0], -0.65) * e.vectors().col(0))) <= 1e-10);
    }
    SECTION("s = 1 is the classical Galerkin solution") {
        const auto& e = decomposition(16);
        const Vector g = measure_load(*e.mesh(), PointDirac{{0.3, 0.7}});
        const auto u = solve_ideal(e, 1.0, g);
        const auto cg = conjugate_gradient(e.stiffness(), g, 1e-13, 5000);
        CHECK((u.coeffs() - cg.x).norm() <= 1e-8 * cg.x.norm());
    }
    SECTION("Galerkin identity in the eigenbasis") {
        const auto& e = decomposition(16);
        const Vector g = measure_load(*e.mesh(), PointDirac{{0.3, 0.7}});
        const auto u = solve_ideal(e, 0.65, g);
        const Vector g_hat = e.coefficients_of_load(g);
        double worst = 0.0;
        for (std::size_t n = 0; n < e.size(); n += 7) {
            worst = std::max(worst, std::abs(ideal_bilinear_form(e, 0.65, u, e.mode(n)) - g_hat[static_cast<Eigen::Index>(n)]));
        }
        CHECK(worst <= 1e-9);
    }
    SECTION("smooth load converges to the separated-variables solution") {
        const double s = 0.65;
        const double amplitude = std::pow(2 * pi * pi, -s);
        double previous = std::numeric_limits<double>::infinity();
        for (std::size_t n : {8u, 16u, 32u}) {
            const auto& e = decomposition(n);
            const auto u = solve_ideal(e, s, measure_load(*e.mesh(), Density{sine_mode, 5}));
            const double err = l2_error(u, [&](Point p) { return amplitude * sine_mode(p); });
            CHECK(err < previous);
            previous = err;
        }
        CHECK(previous < 1e-3);
    }
}

TEST_CASE("operator power error", "[spectral]") {
    const auto& e = decomposition(16);
    SECTION("r = 0 is the projection error") {
        const auto f = [](Point p) { return p.x * p.x * p.y; };
        const Vector g = measure_load(*e.mesh(), Density{f, 5});
        const auto projection = FEFunction(e.mesh(), e.vectors() * e.coefficients_of_load(g));
        CHECK(operator_power_error(e, 0.0, f, f) == Catch::Approx(l2_error(projection, f)).epsilon(1e-12));
    }
    SECTION("zero data") {
        const auto zero = [](Point) { return 0.0; };
        CHECK(operator_power_error(e, 0.65, zero, zero) == 0.0);
    }
    SECTION("errors decrease for a single mode") {
        const double r = 0.65;
        const auto f = [](Point p) { return 2 * sine_mode(p); };
        const auto exact = [&](Point p) { return std::pow(2 * pi * pi, -r) * f(p); };
        double previous = std::numeric_limits<double>::infinity();
        for (std::size_t n : {8u, 16u, 32u}) {
            const double err = operator_power_error(decomposition(n), r, f, exact);
            CHECK(err < previous);
            previous = err;
        }
    }
}

TEST_CASE("eigenvalue bounds on the unit square", "[spectral][property]") {
    const double lambda11 = 2 * pi * pi;
    double previous = std::numeric_limits<double>::infinity();
    double growth_min = std::numeric_limits<double>::infinity();
    double growth_max = 0.0;
    for (std::size_t n : {8u, 16u, 32u, 64u}) {
        const auto& e = decomposition(n);
        const double first = e.values()[0];
        CHECK(first >= lambda11);
        CHECK(first < previous);
        previous = first;
        const double h = 1.0 / static_cast<double>(n);
        const double scaled = e.values()[e.values().size() - 1] * h * h;
        growth_min = std::min(growth_min, scaled);
        growth_max = std::max(growth_max, scaled);

        if (n <= 32) {
            const DenseMatrix m_phi = e.mass().storage() * e.vectors();
            const DenseMatrix gram = e.vectors().transpose() * m_phi;
            CHECK((gram - DenseMatrix::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff() <= 1e-8);
        }
    }
    CHECK(growth_max <= 1.5 * growth_min);
    CHECK(growth_max < 100.0);
}
