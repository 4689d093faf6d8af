#include "odt/krylov.hpp"

#include "odt/parallel.hpp"

#include <cmath>

namespace odt {

namespace {

double norm(const ComplexVolume& v) { return std::sqrt(norm2(v.span())); }
cplx inner(const ComplexVolume& a, const ComplexVolume& b) { return dot(a.span(), b.span()); }

void check_finite(double v, const char* where) {
    if (!std::isfinite(v)) throw NumericalError(std::string(where) + ": non-finite value encountered");
}

// out = a - A x
void residual(const LinearOperator& A, const ComplexVolume& b, const ComplexVolume& x, ComplexVolume& out) {
    A(x, out);
    const std::size_t n = b.size();
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < n; ++i) out[i] = b[i] - out[i];
}

} // namespace

KrylovResult bicgstab(const LinearOperator& A, const ComplexVolume& b, ComplexVolume& x, double tol,
                      std::size_t max_iterations) {
    const Shape3 shape = b.shape();
    const std::size_t n = b.size();
    if (x.shape() != shape) x = b;
    KrylovResult res;
    const double bnorm = norm(b);
    if (bnorm == 0.0) {
        x = ComplexVolume(shape);
        res.converged = true;
        return res;
    }

    ComplexVolume r(shape), rhat(shape), p(shape), v(shape), s(shape), t(shape);
    residual(A, b, x, r);
    double rel = norm(r) / bnorm;
    check_finite(rel, "bicgstab");
    ComplexVolume best = x;
    double best_rel = rel;

    while (rel > tol && res.iterations < max_iterations) {
        // (Re)start from the current iterate.
        rhat = r;
        cplx rho = 1.0, alpha = 1.0, omega = 1.0;
        std::fill(p.vector().begin(), p.vector().end(), cplx{});
        std::fill(v.vector().begin(), v.vector().end(), cplx{});
        bool restart = false;
        while (!restart && res.iterations < max_iterations) {
            ++res.iterations;
            const cplx rho_new = inner(rhat, r);
            if (std::abs(rho_new) == 0.0) break;
            const cplx beta = (rho_new / rho) * (alpha / omega);
            rho = rho_new;
#pragma omp parallel for schedule(static)
            for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * (p[i] - omega * v[i]);
            A(p, v);
            const cplx rv = inner(rhat, v);
            if (std::abs(rv) == 0.0) break;
            alpha = rho / rv;
#pragma omp parallel for schedule(static)
            for (std::size_t i = 0; i < n; ++i) s[i] = r[i] - alpha * v[i];
            const double snorm = norm(s) / bnorm;
            check_finite(snorm, "bicgstab");
            if (snorm <= tol) {
#pragma omp parallel for schedule(static)
                for (std::size_t i = 0; i < n; ++i) x[i] += alpha * p[i];
                restart = true;
            } else {
                A(s, t);
                const double tt = norm2(t.span());
                omega = tt > 0.0 ? inner(t, s) / tt : cplx{};
#pragma omp parallel for schedule(static)
                for (std::size_t i = 0; i < n; ++i) {
                    x[i] += alpha * p[i] + omega * s[i];
                    r[i] = s[i] - omega * t[i];
                }
                const double rr = norm(r) / bnorm;
                check_finite(rr, "bicgstab");
                if (rr <= tol || std::abs(omega) == 0.0) restart = true;
                if (rr < best_rel) {
                    best_rel = rr;
                    best = x;
                }
            }
        }
        residual(A, b, x, r);
        rel = norm(r) / bnorm;
        check_finite(rel, "bicgstab");
        if (rel < best_rel || rel <= tol) {
            best_rel = rel;
            best = x;
        }
        if (!restart) break; // breakdown without progress
    }

    // The recursive residual can drift from the true one; report the latter.
    x = std::move(best);
    residual(A, b, x, r);
    res.residual = norm(r) / bnorm;
    res.converged = res.residual <= tol;
    return res;
}

KrylovResult cgnr(const LinearOperator& A, const LinearOperator& A_adjoint, const ComplexVolume& b, ComplexVolume& x,
                  double tol, std::size_t max_iterations) {
    const Shape3 shape = b.shape();
    const std::size_t n = b.size();
    if (x.shape() != shape) x = b;
    KrylovResult res;
    const double bnorm = norm(b);
    if (bnorm == 0.0) {
        x = ComplexVolume(shape);
        res.converged = true;
        return res;
    }

    ComplexVolume r(shape), z(shape), p(shape), w(shape);
    residual(A, b, x, r);
    double rel = norm(r) / bnorm;
    check_finite(rel, "cgnr");
    ComplexVolume best = x;
    double best_rel = rel;
    A_adjoint(r, z);
    p = z;
    double zz = norm2(z.span());

    while (rel > tol && res.iterations < max_iterations && zz > 0.0) {
        ++res.iterations;
        A(p, w);
        const double ww = norm2(w.span());
        check_finite(ww, "cgnr");
        if (ww == 0.0) break;
        const double alpha = zz / ww;
#pragma omp parallel for schedule(static)
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * w[i];
        }
        rel = norm(r) / bnorm;
        check_finite(rel, "cgnr");
        if (rel < best_rel) {
            best_rel = rel;
            best = x;
        }
        A_adjoint(r, z);
        const double zz_new = norm2(z.span());
        const double beta = zz_new / zz;
        zz = zz_new;
#pragma omp parallel for schedule(static)
        for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }

    x = std::move(best);
    residual(A, b, x, r);
    res.residual = norm(r) / bnorm;
    res.converged = res.residual <= tol;
    return res;
}

} // namespace odt
