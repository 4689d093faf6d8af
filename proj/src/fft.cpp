#include "odt/fft.hpp"

#include "odt/parallel.hpp"

#include <fftw3.h>
#include <omp.h>

#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>

namespace odt::fft {

namespace {

struct Key {
    std::vector<std::size_t> dims;
    int sign;
    bool single;
    int threads;
    auto tie() const { return std::tie(dims, sign, single, threads); }
    bool operator<(const Key& o) const { return tie() < o.tie(); }
};

struct Plans {
    std::mutex mutex;
    std::map<Key, fftw_plan> dplans;
    std::map<Key, fftwf_plan> fplans;

    Plans() {
        fftw_make_planner_thread_safe();
        fftw_init_threads();
        fftwf_init_threads();
    }
    ~Plans() {
        for (auto& [k, p] : dplans) fftw_destroy_plan(p);
        for (auto& [k, p] : fplans) fftwf_destroy_plan(p);
    }
};

Plans& plans() {
    static Plans instance;
    return instance;
}

std::size_t total(const std::vector<std::size_t>& dims) {
    std::size_t n = 1;
    for (std::size_t d : dims) n *= d;
    return n;
}

int thread_count(std::size_t size) {
    if (omp_in_parallel() || size < 32768) return 1;
    return num_threads();
}

// FFTW wants the slowest dimension first.
std::vector<int> fftw_dims(const std::vector<std::size_t>& dims) {
    if (dims.empty()) throw std::invalid_argument("fft: empty dims");
    std::vector<int> out(dims.rbegin(), dims.rend());
    return out;
}

} // namespace

void transform(std::complex<double>* data, const std::vector<std::size_t>& dims, Direction dir) {
    const std::size_t n = total(dims);
    if (n == 0) return;
    const int sign = dir == Direction::Forward ? FFTW_FORWARD : FFTW_BACKWARD;
    Key key{dims, sign, false, thread_count(n)};
    fftw_plan plan;
    {
        Plans& p = plans();
        std::lock_guard lock(p.mutex);
        auto it = p.dplans.find(key);
        if (it == p.dplans.end()) {
            std::vector<std::complex<double>> scratch(n);
            auto rd = fftw_dims(dims);
            fftw_plan_with_nthreads(key.threads);
            auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
            plan = fftw_plan_dft(static_cast<int>(rd.size()), rd.data(), buf, buf, sign,
                                 FFTW_ESTIMATE | FFTW_UNALIGNED);
            if (!plan) throw std::runtime_error("fft: plan creation failed");
            p.dplans.emplace(std::move(key), plan);
        } else {
            plan = it->second;
        }
    }
    auto* buf = reinterpret_cast<fftw_complex*>(data);
    fftw_execute_dft(plan, buf, buf);
    if (dir == Direction::Inverse) {
        const double s = 1.0 / static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) data[i] *= s;
    }
}

void transform(std::complex<float>* data, const std::vector<std::size_t>& dims, Direction dir) {
    const std::size_t n = total(dims);
    if (n == 0) return;
    const int sign = dir == Direction::Forward ? FFTW_FORWARD : FFTW_BACKWARD;
    Key key{dims, sign, true, thread_count(n)};
    fftwf_plan plan;
    {
        Plans& p = plans();
        std::lock_guard lock(p.mutex);
        auto it = p.fplans.find(key);
        if (it == p.fplans.end()) {
            std::vector<std::complex<float>> scratch(n);
            auto rd = fftw_dims(dims);
            fftwf_plan_with_nthreads(key.threads);
            auto* buf = reinterpret_cast<fftwf_complex*>(scratch.data());
            plan = fftwf_plan_dft(static_cast<int>(rd.size()), rd.data(), buf, buf, sign,
                                  FFTW_ESTIMATE | FFTW_UNALIGNED);
            if (!plan) throw std::runtime_error("fft: plan creation failed");
            p.fplans.emplace(std::move(key), plan);
        } else {
            plan = it->second;
        }
    }
    auto* buf = reinterpret_cast<fftwf_complex*>(data);
    fftwf_execute_dft(plan, buf, buf);
    if (dir == Direction::Inverse) {
        const float s = 1.0f / static_cast<float>(n);
        for (std::size_t i = 0; i < n; ++i) data[i] *= s;
    }
}

std::size_t good_size(std::size_t n) {
    if (n <= 1) return 1;
    for (std::size_t m = n;; ++m) {
        std::size_t r = m;
        for (std::size_t f : {2u, 3u, 5u, 7u})
            while (r % f == 0) r /= f;
        if (r == 1) return m;
    }
}

std::size_t cached_plans() {
    Plans& p = plans();
    std::lock_guard lock(p.mutex);
    return p.dplans.size() + p.fplans.size();
}

} // namespace odt::fft
