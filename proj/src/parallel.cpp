#include "odt/parallel.hpp"

#include <array>
#include <omp.h>

namespace odt {

namespace {

constexpr std::size_t kChunks = 64;
int g_threads = 0;

template <class T, class F>
T chunked_sum(std::size_t n, F term) {
    std::array<T, kChunks> partial{};
#pragma omp parallel for schedule(static) if (n > 4096)
    for (std::size_t c = 0; c < kChunks; ++c) {
        const std::size_t lo = n * c / kChunks;
        const std::size_t hi = n * (c + 1) / kChunks;
        T acc{};
        for (std::size_t i = lo; i < hi; ++i) acc += term(i);
        partial[c] = acc;
    }
    T total{};
    for (const T& p : partial) total += p;
    return total;
}

} // namespace

void set_num_threads(int n) {
    g_threads = n > 0 ? n : 0;
    omp_set_num_threads(n > 0 ? n : omp_get_num_procs());
}

int num_threads() { return g_threads > 0 ? g_threads : omp_get_max_threads(); }

double sum(std::span<const double> v) {
    return chunked_sum<double>(v.size(), [&](std::size_t i) { return v[i]; });
}

double dot(std::span<const double> a, std::span<const double> b) {
    return chunked_sum<double>(a.size(), [&](std::size_t i) { return a[i] * b[i]; });
}

double norm2(std::span<const double> v) {
    return chunked_sum<double>(v.size(), [&](std::size_t i) { return v[i] * v[i]; });
}

std::complex<double> dot(std::span<const std::complex<double>> a, std::span<const std::complex<double>> b) {
    return chunked_sum<std::complex<double>>(a.size(), [&](std::size_t i) { return std::conj(a[i]) * b[i]; });
}

double norm2(std::span<const std::complex<double>> v) {
    return chunked_sum<double>(v.size(), [&](std::size_t i) { return std::norm(v[i]); });
}

} // namespace odt
