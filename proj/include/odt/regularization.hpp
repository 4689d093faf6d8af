#pragma once

// Isotropic total variation and Hessian-Schatten (S1) regularizers with their
// proximity operators, optionally combined with a nonnegativity constraint.
//
// Differences are divided by h (second differences by h^2) and sums carry the
// voxel volume h^3, so with h = 1 everything is in grid units. Both use
// Neumann boundaries: a difference that would leave the grid is zero.

#include "odt/grid.hpp"

#include <array>
#include <cstddef>

namespace odt {

enum class RegularizerKind { TV, HessianSchatten, None };

struct ProxConfig {
    RegularizerKind kind = RegularizerKind::TV;
    double weight = 0.0; // gamma * tau
    bool nonnegative = true;
    std::size_t inner_iterations = 50;
    double inner_tolerance = 1e-5; // relative change of the dual variable
    double spacing = 1.0;          // h

    void validate() const;
};

struct ProxResult {
    RealVolume x;
    std::size_t iterations = 0;
};

/// h^3 sum_k |grad v(k)| with forward differences divided by h.
[[nodiscard]] double tv_value(const RealVolume& v, double h);
/// h^3 sum_k ||Hess v(k)||_S1 with second differences divided by h^2.
[[nodiscard]] double hessian_schatten_value(const RealVolume& v, double h);

/// argmin_x 1/2 |x - v|^2 + weight R(x) (+ indicator of x >= 0).
[[nodiscard]] ProxResult prox(const RealVolume& v, const ProxConfig& cfg);

/// Value of R selected by cfg.kind (0 for None).
[[nodiscard]] double regularizer_value(const RealVolume& v, const ProxConfig& cfg);

// Linear operators behind the regularizers, exposed for adjoint tests.
using Gradient = std::array<RealVolume, 3>;
/// Hessian components ordered xx, yy, zz, xy, xz, yz.
using Hessian = std::array<RealVolume, 6>;

[[nodiscard]] Gradient gradient(const RealVolume& v, double h);
[[nodiscard]] RealVolume gradient_adjoint(const Gradient& p, double h);
[[nodiscard]] Hessian hessian(const RealVolume& v, double h);
/// Adjoint for the Frobenius pairing, in which off-diagonal components count twice.
[[nodiscard]] RealVolume hessian_adjoint(const Hessian& p, double h);

} // namespace odt
