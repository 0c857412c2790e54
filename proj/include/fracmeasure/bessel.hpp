#pragma once

// Bessel functions of the first kind of fractional order and the positive
// roots of J_ν.

#include "fracmeasure/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

namespace fracmeasure {

namespace detail {

inline constexpr double kSeriesLimit = 12.0;

/// Ascending series Σ (−1)^k (x/2)^{2k+ν} / (k! Γ(k+ν+1)), accumulated in long double.
inline double bessel_j_series(double nu, double x) {
    const long double half = 0.5L * x;
    long double term = std::pow(half, static_cast<long double>(nu)) / std::tgamma(static_cast<long double>(nu) + 1.0L);
    long double sum = term;
    long double largest = std::abs(term);
    const long double q = -half * half;
    for (int k = 1; k < 500; ++k) {
        term *= q / (static_cast<long double>(k) * (static_cast<long double>(k) + nu));
        sum += term;
        largest = std::max(largest, std::abs(term));
        if (k > half && std::abs(term) < 1e-19L * largest) break;
    }
    return static_cast<double>(sum);
}

/// Hankel asymptotic expansion, truncated at its smallest term.
inline double bessel_j_hankel(double nu, double x) {
    const double mu = 4.0 * nu * nu;
    double p = 1.0;
    double q = 0.0;
    double a = 1.0;
    double previous = std::numeric_limits<double>::infinity();
    for (int k = 1; k < 200; ++k) {
        const double odd = 2.0 * k - 1.0;
        a *= (mu - odd * odd) / (k * 8.0 * x);
        const double mag = std::abs(a);
        if (mag >= previous) break;
        previous = mag;
        // a_k contributes (−1)^{k/2} to P for even k and (−1)^{(k−1)/2} to Q for odd k.
        switch (k % 4) {
        case 0: p += a; break;
        case 1: q += a; break;
        case 2: p -= a; break;
        case 3: q -= a; break;
        }
        if (mag < 1e-17) break;
    }
    const double chi = x - (0.5 * nu + 0.25) * std::numbers::pi;
    return std::sqrt(2.0 / (std::numbers::pi * x)) * (p * std::cos(chi) - q * std::sin(chi));
}

/// J_ν(x) for ν > −1 non-restricted, x > 0.
inline double bessel_j_any(double nu, double x) {
    return x <= kSeriesLimit ? bessel_j_series(nu, x) : bessel_j_hankel(nu, x);
}

} // namespace detail

/// J_ν(x) for ν ∈ (−1, 1), x > 0: ascending series up to x = 12, Hankel expansion beyond.
inline double bessel_j(double nu, double x) {
    if (!(nu > -1.0 && nu < 1.0)) throw DomainError("bessel_j: order " + std::to_string(nu) + " outside (-1, 1)");
    if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("bessel_j: argument must be positive and finite");
    return detail::bessel_j_any(nu, x);
}

/// J_ν'(x) = (ν/x) J_ν(x) − J_{ν+1}(x).
inline double bessel_j_derivative(double nu, double x) {
    if (!(nu > -1.0 && nu < 1.0)) throw DomainError("bessel_j_derivative: order outside (-1, 1)");
    if (!(x > 0.0)) throw DomainError("bessel_j_derivative: argument must be positive");
    return nu / x * detail::bessel_j_any(nu, x) - detail::bessel_j_any(nu + 1.0, x);
}

/// The first `count` positive roots of J_ν, ν ∈ (−1, 1), in increasing order.
///
/// Each root is bracketed around McMahon's estimate (k + ν/2 − 1/4)π, bisected
/// to width 1e−13 (or floating-point resolution) and polished with one Newton step.
inline std::vector<double> bessel_roots(double nu, std::size_t count) {
    if (!(nu > -1.0 && nu < 1.0)) throw DomainError("bessel_roots: order outside (-1, 1)");
    if (count < 1) throw DomainError("bessel_roots: count must be >= 1");

    std::vector<double> roots;
    roots.reserve(count);
    for (std::size_t k = 1; k <= count; ++k) {
        const double guess = (static_cast<double>(k) + 0.5 * nu - 0.25) * std::numbers::pi;
        double lo = std::max(guess - 0.5 * std::numbers::pi, 0.05 * guess);
        double hi = guess + 0.5 * std::numbers::pi;
        double f_lo = detail::bessel_j_any(nu, lo);
        const double f_hi = detail::bessel_j_any(nu, hi);
        if (f_lo == 0.0) {
            roots.push_back(lo);
            continue;
        }
        if ((f_lo > 0.0) == (f_hi > 0.0)) {
            throw RootNotBracketed("bessel_roots: no sign change around root " + std::to_string(k) + " of J_" +
                                   std::to_string(nu));
        }
        while (hi - lo > 1e-13) {
            const double mid = 0.5 * (lo + hi);
            if (mid <= lo || mid >= hi) break;
            const double f_mid = detail::bessel_j_any(nu, mid);
            if (f_mid == 0.0) {
                lo = hi = mid;
                break;
            }
            if ((f_mid > 0.0) == (f_lo > 0.0)) {
                lo = mid;
                f_lo = f_mid;
            } else {
                hi = mid;
            }
        }
        double root = 0.5 * (lo + hi);
        const double f_root = detail::bessel_j_any(nu, root);
        const double polished = root - f_root / bessel_j_derivative(nu, root);
        if (polished >= lo && polished <= hi &&
            std::abs(detail::bessel_j_any(nu, polished)) <= std::abs(f_root)) {
            root = polished;
        }
        if (!roots.empty() && root <= roots.back()) {
            throw RootNotBracketed("bessel_roots: roots not strictly increasing at k = " + std::to_string(k));
        }
        roots.push_back(root);
    }
    return roots;
}

} // namespace fracmeasure
