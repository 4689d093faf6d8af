#pragma once

// Matrix-free Krylov solvers on complex volumes.

#include "odt/grid.hpp"

#include <cstddef>
#include <functional>
#include <stdexcept>

namespace odt {

/// Raised when a solver or an operator produces non-finite values.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using LinearOperator = std::function<void(const ComplexVolume& in, ComplexVolume& out)>;

struct KrylovResult {
    std::size_t iterations = 0;
    double residual = 0.0; // true relative residual ||b - A x|| / ||b|| of the returned x
    bool converged = false;
};

/// x holds the initial guess on entry and the best iterate on return.
KrylovResult bicgstab(const LinearOperator& A, const ComplexVolume& b, ComplexVolume& x, double tol,
                      std::size_t max_iterations);

/// Conjugate gradient on the normal equations A^* A x = A^* b.
KrylovResult cgnr(const LinearOperator& A, const LinearOperator& A_adjoint, const ComplexVolume& b, ComplexVolume& x,
                  double tol, std::size_t max_iterations);

} // namespace odt
