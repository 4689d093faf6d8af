#pragma once

// Thread control and reductions whose result does not depend on the number
// of threads: the index range is always split into the same fixed chunks and
// the partial sums are combined in chunk order.

#include <complex>
#include <cstddef>
#include <span>

namespace odt {

/// Caps internal parallelism (OpenMP and FFTW). 0 restores the default.
void set_num_threads(int n);
[[nodiscard]] int num_threads();

[[nodiscard]] double sum(std::span<const double> v);
[[nodiscard]] double dot(std::span<const double> a, std::span<const double> b);
[[nodiscard]] double norm2(std::span<const double> v); // squared L2 norm
/// sum conj(a_i) b_i
[[nodiscard]] std::complex<double> dot(std::span<const std::complex<double>> a,
                                       std::span<const std::complex<double>> b);
[[nodiscard]] double norm2(std::span<const std::complex<double>> v);

} // namespace odt
