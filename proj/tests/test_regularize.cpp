#include "fracmeasure/regularize.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

using namespace fracmeasure;
using std::numbers::pi;

namespace {

// Test-only oracle: 2π ∫₀¹ r·exp(−1/(1−r²)) dr by composite Simpson in long double.
long double bump_integral_oracle() {
    const int n = 200000;
    const long double h = 1.0L / n;
    auto f = [](long double r) { return r < 1.0L ? r * std::exp(-1.0L / (1.0L - r * r)) : 0.0L; };
    long double sum = f(0.0L) + f(1.0L);
    for (int i = 1; i < n; ++i) sum += (i % 2 ? 4.0L : 2.0L) * f(i * h);
    return 2.0L * std::numbers::pi_v<long double> * sum * h / 3.0L;
}

} // namespace

TEST_CASE("bump normalization", "[regularize]") {
    const double oracle = static_cast<double>(1.0L / bump_integral_oracle());
    CHECK(oracle == Catch::Approx(2.143565775792236601).epsilon(1e-12));
    CHECK(kBumpNormalization == Catch::Approx(oracle).epsilon(1e-12));
    CHECK(bump(1.0) == 0.0);
    CHECK(bump(0.0) == Catch::Approx(kBumpNormalization * std::exp(-1.0)));
}

TEST_CASE("mollified measures", "[regularize]") {
    const auto mesh = build_structured_square(32);
    const double h = 1.0 / 32;
    SECTION("Dirac: peak value and mass") {
        const double eps = 4 * h;
        const auto reg = mollify(*mesh, PointDirac{{0.3, 0.7}}, eps);
        CHECK(reg.kind == RegularizationKind::MollifierConvolution);
        CHECK(reg.density({0.3, 0.7}) == Catch::Approx(kBumpNormalization * std::exp(-1.0) / (eps * eps)));
        CHECK(std::abs(reg.mass(*mesh) - 1.0) <= 1e-6);
        CHECK(reg.density({0.3 + eps, 0.7}) == 0.0);
    }
    SECTION("circle: mass and support") {
        const double eps = 4 * h;
        const WeightedCircle circle{{0.5, 0.5}, 0.3, 1.0};
        const auto reg = mollify(*mesh, circle, eps);
        CHECK(std::abs(reg.mass(*mesh) - 1.0) <= 1e-6);
        CHECK(reg.density({0.5, 0.5}) == 0.0);
        CHECK(reg.density({0.5 + 0.3 + eps, 0.5}) == 0.0);
        CHECK(reg.density({0.5 + 0.3, 0.5}) > 0.0);
        // Rotational symmetry of the convolved density.
        const double a = reg.density({0.5 + 0.31, 0.5});
        const double b = reg.density({0.5, 0.5 - 0.31});
        CHECK(a == Catch::Approx(b).epsilon(1e-10));
    }
    SECTION("support too close to the boundary") {
        CHECK_THROWS_AS(mollify(*mesh, PointDirac{{0.05, 0.5}}, 0.1), SupportTooCloseToBoundary);
        CHECK_THROWS_AS(mollify(*mesh, WeightedCircle{{0.5, 0.5}, 0.3, 1.0}, 0.25), SupportTooCloseToBoundary);
    }
    SECTION("invalid arguments") {
        CHECK_THROWS_AS(mollify(*mesh, PointDirac{{0.5, 0.5}}, 0.0), DomainError);
        CHECK_THROWS_AS(mollify(*mesh, Density{[](Point) { return 1.0; }}, 0.1), DomainError);
    }
}

TEST_CASE("indicator regularizations", "[regularize]") {
    const auto mesh = build_structured_square(32);
    const double h = 1.0 / 32;
    SECTION("disk: analytic height, mass and L2 norm") {
        const auto reg = disk_indicator(*mesh, {0.3, 0.7}, h);
        CHECK(reg.density({0.3, 0.7}) == Catch::Approx(1.0 / (pi * h * h)));
        CHECK(reg.density({0.3 + 1.01 * h, 0.7}) == 0.0);
        CHECK(std::abs(reg.mass(*mesh) - 1.0) <= 0.05);
        CHECK(reg.l2_norm(*mesh) == Catch::Approx(1.0 / (std::sqrt(pi) * h)).epsilon(0.05));
    }
    SECTION("ring: analytic height, mass and L2 norm") {
        const WeightedCircle circle{{0.5, 0.5}, 0.3, 1.0};
        const auto reg = ring_indicator(*mesh, circle, h);
        const double height = 1.0 / (4 * pi * h * 0.3);
        CHECK(reg.density({0.8, 0.5}) == Catch::Approx(height));
        CHECK(reg.density({0.5, 0.5}) == 0.0);
        CHECK(std::abs(reg.mass(*mesh) - 1.0) <= 0.05);
        CHECK(reg.l2_norm(*mesh) == Catch::Approx(std::sqrt(height)).epsilon(0.05));
    }
    SECTION("ring height with the experiment values") {
        const auto fine = build_structured_square(257);
        const auto reg = ring_indicator(*fine, WeightedCircle{{0.5, 0.5}, 0.3, 1.0}, 1.0 / 257);
        CHECK(reg.density({0.8, 0.5}) == Catch::Approx(68.2).epsilon(1e-3));
    }
    SECTION("halving epsilon: disk norm doubles, ring norm grows by sqrt(2)") {
        // ‖disk‖ = (√π ε)⁻¹ and ‖ring‖² = (4πεr)⁻¹: exponents −1 and −1/2, each with ±0.2 slack.
        for (double eps : {4 * h, 2 * h}) {
            const double disk = disk_indicator(*mesh, {0.3, 0.7}, eps / 2).l2_norm(*mesh) /
                                disk_indicator(*mesh, {0.3, 0.7}, eps).l2_norm(*mesh);
            const WeightedCircle circle{{0.5, 0.5}, 0.3, 1.0};
            const double ring =
                ring_indicator(*mesh, circle, eps / 2).l2_norm(*mesh) / ring_indicator(*mesh, circle, eps).l2_norm(*mesh);
            CHECK(disk >= 1.6);
            CHECK(disk <= 2.4);
            CHECK(ring >= std::pow(2.0, 0.3));
            CHECK(ring <= std::pow(2.0, 0.7));
        }
    }
    SECTION("errors") {
        CHECK_THROWS_AS(disk_indicator(*mesh, {0.02, 0.5}, 0.05), SupportTooCloseToBoundary);
        CHECK_THROWS_AS(ring_indicator(*mesh, WeightedCircle{{0.5, 0.5}, 0.1, 1.0}, 0.1), DomainError);
        CHECK_THROWS_AS(ring_indicator(*mesh, WeightedCircle{{0.5, 0.5}, 0.45, 1.0}, 0.1), SupportTooCloseToBoundary);
        CHECK_THROWS_AS(regularize(*mesh, WeightedCircle{{0.5, 0.5}, 0.3, 1.0}, RegularizationKind::DiskIndicator, h),
                        DomainError);
        CHECK_THROWS_AS(regularize(*mesh, PointDirac{{0.5, 0.5}}, RegularizationKind::RingIndicator, h), DomainError);
    }
}

TEST_CASE("exponent fit", "[regularize]") {
    CHECK(fit_exponent({1.0, 2.0, 4.0}, {3.0, 3.0 * std::pow(2.0, -1.5), 3.0 * std::pow(4.0, -1.5)}) ==
          Catch::Approx(-1.5));
    CHECK_THROWS_AS(fit_exponent({1.0}, {1.0}), DomainError);
}

TEST_CASE("regularization study", "[regularize]") {
    const auto mesh = build_structured_square(32);
    const EigenDecomposition e(mesh);
    const double h = 1.0 / 32;
    const FracParams p(0.65, 0.4);
    SECTION("disk indicator L2 blow-up") {
        const auto study = verify_regularization(e, PointDirac{{0.3, 0.7}}, {8 * h, 4 * h, 2 * h}, p,
                                                 RegularizationKind::DiskIndicator);
        REQUIRE(study.rows.size() == 3);
        CHECK(std::abs(study.l2_exponent + 1.0) <= 0.2);
    }
    SECTION("mollified Dirac: negative norm shrinks with epsilon") {
        const auto study = verify_regularization(e, PointDirac{{0.3, 0.7}}, {8 * h, 4 * h, 2 * h}, p);
        for (std::size_t i = 1; i < study.rows.size(); ++i) {
            CHECK(study.rows[i].negative_norm < study.rows[i - 1].negative_norm);
            CHECK(study.rows[i].l2_norm > study.rows[i - 1].l2_norm);
        }
        CHECK(study.negative_norm_exponent > 0.0);
    }
    SECTION("fixed epsilon: refinement follows the spectral truncation model") {
        // The Dirac tail Σ λ^{-(s+θ)} over eigenvalues between ε⁻² and Λ_max ≈ h⁻²
        // dominates the discrete norm, and in 2D the eigenvalue density is flat,
        // so the squared norm scales like ε^{2γ} − h^{2γ} with γ = s + θ − 1.
        const EigenDecomposition coarse(build_structured_square(16));
        const double eps = 0.125;
        const double a = verify_regularization(coarse, PointDirac{{0.3, 0.7}}, {eps, 2 * eps}, p).rows[0].negative_norm;
        const double b = verify_regularization(e, PointDirac{{0.3, 0.7}}, {eps, 2 * eps}, p).rows[0].negative_norm;
        const double g2 = 2.0 * (p.test_order() - 1.0);
        const double model = std::sqrt((std::pow(eps, g2) - std::pow(h, g2)) / (std::pow(eps, g2) - std::pow(2 * h, g2)));
        CHECK(b > a);
        CHECK(b / a == Catch::Approx(model).epsilon(0.1));
    }
}
