#pragma once

#include "odt/grid.hpp"
#include "odt/parallel.hpp"

#include <cmath>
#include <random>

namespace odt::testing {

inline constexpr double kLambda = 532e-9;
inline constexpr double kEtaB = 1.3388;

/// Cube of n samples at spacing lambda / 8 in water-like background.
inline Geometry small_geometry(std::size_t n, double h = kLambda / 8.0) {
    return Geometry::cubic(n, h * static_cast<double>(n), kLambda, kEtaB);
}

inline ComplexVolume random_complex(const Shape3& s, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, 1.0);
    ComplexVolume v(s);
    for (auto& x : v.span()) x = cplx(n(rng), n(rng));
    return v;
}

inline ComplexImage random_image(std::size_t m, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, 1.0);
    ComplexImage v(m, m);
    for (auto& x : v.span()) x = cplx(n(rng), n(rng));
    return v;
}

inline RealVolume random_real(const Shape3& s, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(lo, hi);
    RealVolume v(s);
    for (auto& x : v.span()) x = u(rng);
    return v;
}

template <class A, class B>
double max_rel_diff(const A& a, const B& b) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num = std::max(num, std::abs(a[i] - b[i]));
        den = std::max(den, std::abs(b[i]));
    }
    return den > 0.0 ? num / den : num;
}

template <class A, class B>
double rel_l2(const A& a, const B& b) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += std::norm(a[i] - b[i]);
        den += std::norm(b[i]);
    }
    return std::sqrt(num / den);
}

} // namespace odt::testing
