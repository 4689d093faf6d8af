#include "odt/regularization.hpp"

#include "odt/parallel.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace odt {

namespace {

struct Axis {
    std::size_t stride;
    std::size_t len;
    [[nodiscard]] std::size_t coord(std::size_t i) const { return (i / stride) % len; }
};

Axis axis_of(const Shape3& s, int a) {
    if (a == 0) return {1, s.nx};
    if (a == 1) return {s.nx, s.ny};
    return {s.nx * s.ny, s.nz};
}

// out = scale * (v[i+1] - v[i]), zero at the last index.
RealVolume fdiff(const RealVolume& v, int a, double scale) {
    const Axis ax = axis_of(v.shape(), a);
    RealVolume out(v.shape());
    const std::size_t n = v.size();
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < n; ++i)
        out[i] = ax.coord(i) + 1 < ax.len ? scale * (v[i + ax.stride] - v[i]) : 0.0;
    return out;
}

RealVolume fdiff_t(const RealVolume& p, int a, double scale) {
    const Axis ax = axis_of(p.shape(), a);
    RealVolume out(p.shape());
    const std::size_t n = p.size();
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t c = ax.coord(i);
        double acc = 0.0;
        if (c > 0) acc += p[i - ax.stride];
        if (c + 1 < ax.len) acc -= p[i];
        out[i] = scale * acc;
    }
    return out;
}

bool interior(std::size_t c, std::size_t len) { return c >= 1 && c + 2 <= len; }

// Central second difference, zero at both boundary indices.
RealVolume cdiff2(const RealVolume& v, int a, double scale) {
    const Axis ax = axis_of(v.shape(), a);
    RealVolume out(v.shape());
    const std::size_t n = v.size();
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < n; ++i)
        out[i] = interior(ax.coord(i), ax.len) ? scale * (v[i + ax.stride] - 2.0 * v[i] + v[i - ax.stride]) : 0.0;
    return out;
}

RealVolume cdiff2_t(const RealVolume& p, int a, double scale) {
    const Axis ax = axis_of(p.shape(), a);
    RealVolume out(p.shape());
    const std::size_t n = p.size();
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t c = ax.coord(i);
        double acc = 0.0;
        if (c >= 1 && interior(c - 1, ax.len)) acc += p[i - ax.stride];
        if (interior(c + 1, ax.len)) acc += p[i + ax.stride];
        if (interior(c, ax.len)) acc -= 2.0 * p[i];
        out[i] = scale * acc;
    }
    return out;
}

void add_to(RealVolume& acc, const RealVolume& v, double s = 1.0) {
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += s * v[i];
}

constexpr int kPairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};

Eigen::Matrix3d voxel_matrix(const Hessian& H, std::size_t i) {
    Eigen::Matrix3d m;
    m << H[0][i], H[3][i], H[4][i], H[3][i], H[1][i], H[5][i], H[4][i], H[5][i], H[2][i];
    return m;
}

double dual_distance(const std::vector<RealVolume>& a, const std::vector<RealVolume>& b, double& norm_b) {
    double d = 0.0, nb = 0.0;
    for (std::size_t c = 0; c < a.size(); ++c) {
        std::vector<double> diff(a[c].size());
        for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = a[c][i] - b[c][i];
        d += norm2(diff);
        nb += norm2(b[c].span());
    }
    norm_b = std::sqrt(nb);
    return std::sqrt(d);
}

void project_nonneg(RealVolume& x, bool on) {
    if (!on) return;
    for (auto& v : x.vector()) v = std::max(v, 0.0);
}

// Fast gradient projection on the dual of
//   min_x 1/2 |x - v|^2 + lambda sum_k phi((K x)(k)) + i_C(x)
// where phi is a norm whose dual ball has the projection `project`.
template <class Forward, class Adjoint, class Project>
ProxResult fgp(const RealVolume& v, const ProxConfig& cfg, double lambda, double lipschitz, std::size_t components,
               Forward K, Adjoint Kt, Project project) {
    const Shape3 s = v.shape();
    std::vector<RealVolume> p(components, RealVolume(s)), r = p, p_old;
    auto primal = [&](const std::vector<RealVolume>& dual) {
        RealVolume x = Kt(dual);
        for (std::size_t i = 0; i < x.size(); ++i) x[i] = v[i] - lambda * x[i];
        project_nonneg(x, cfg.nonnegative);
        return x;
    };
    const double step = 1.0 / (lambda * lipschitz);
    double t = 1.0;
    ProxResult res;
    for (std::size_t k = 0; k < cfg.inner_iterations; ++k) {
        ++res.iterations;
        const RealVolume x = primal(r);
        std::vector<RealVolume> kx = K(x);
        p_old = p;
        for (std::size_t c = 0; c < components; ++c)
            for (std::size_t i = 0; i < kx[c].size(); ++i) p[c][i] = r[c][i] + step * kx[c][i];
        project(p);
        const double t_new = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        const double beta = (t - 1.0) / t_new;
        for (std::size_t c = 0; c < components; ++c)
            for (std::size_t i = 0; i < p[c].size(); ++i) r[c][i] = p[c][i] + beta * (p[c][i] - p_old[c][i]);
        t = t_new;
        double np = 0.0;
        const double change = dual_distance(p, p_old, np);
        if (change <= cfg.inner_tolerance * std::max(np, 1e-300)) break;
    }
    res.x = primal(p);
    return res;
}

} // namespace

void ProxConfig::validate() const {
    if (!(weight >= 0.0) || !std::isfinite(weight)) throw std::invalid_argument("ProxConfig: weight must be >= 0");
    if (inner_iterations < 1) throw std::invalid_argument("ProxConfig: inner_iterations must be >= 1");
    if (!(spacing > 0.0)) throw std::invalid_argument("ProxConfig: spacing must be positive");
}

Gradient gradient(const RealVolume& v, double h) {
    return {fdiff(v, 0, 1.0 / h), fdiff(v, 1, 1.0 / h), fdiff(v, 2, 1.0 / h)};
}

RealVolume gradient_adjoint(const Gradient& p, double h) {
    RealVolume out = fdiff_t(p[0], 0, 1.0 / h);
    add_to(out, fdiff_t(p[1], 1, 1.0 / h));
    add_to(out, fdiff_t(p[2], 2, 1.0 / h));
    return out;
}

Hessian hessian(const RealVolume& v, double h) {
    const double s2 = 1.0 / (h * h);
    Hessian H;
    for (int a = 0; a < 3; ++a) H[static_cast<std::size_t>(a)] = cdiff2(v, a, s2);
    for (int k = 0; k < 3; ++k)
        H[static_cast<std::size_t>(3 + k)] = fdiff(fdiff(v, kPairs[k][1], 1.0 / h), kPairs[k][0], 1.0 / h);
    return H;
}

RealVolume hessian_adjoint(const Hessian& p, double h) {
    const double s2 = 1.0 / (h * h);
    RealVolume out = cdiff2_t(p[0], 0, s2);
    add_to(out, cdiff2_t(p[1], 1, s2));
    add_to(out, cdiff2_t(p[2], 2, s2));
    for (int k = 0; k < 3; ++k)
        add_to(out, fdiff_t(fdiff_t(p[static_cast<std::size_t>(3 + k)], kPairs[k][0], 1.0 / h), kPairs[k][1], 1.0 / h),
               2.0);
    return out;
}

double tv_value(const RealVolume& v, double h) {
    const Gradient g = gradient(v, h);
    std::vector<double> mag(v.size());
    for (std::size_t i = 0; i < v.size(); ++i)
        mag[i] = std::sqrt(g[0][i] * g[0][i] + g[1][i] * g[1][i] + g[2][i] * g[2][i]);
    return h * h * h * sum(mag);
}

double hessian_schatten_value(const RealVolume& v, double h) {
    const Hessian H = hessian(v, h);
    std::vector<double> s1(v.size());
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < v.size(); ++i) {
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(voxel_matrix(H, i), Eigen::EigenvaluesOnly);
        s1[i] = es.eigenvalues().cwiseAbs().sum();
    }
    return h * h * h * sum(s1);
}

double regularizer_value(const RealVolume& v, const ProxConfig& cfg) {
    switch (cfg.kind) {
    case RegularizerKind::TV: return tv_value(v, cfg.spacing);
    case RegularizerKind::HessianSchatten: return hessian_schatten_value(v, cfg.spacing);
    case RegularizerKind::None: return 0.0;
    }
    return 0.0;
}

ProxResult prox(const RealVolume& v, const ProxConfig& cfg) {
    cfg.validate();
    if (cfg.weight == 0.0 || cfg.kind == RegularizerKind::None) {
        ProxResult r{v, 0};
        project_nonneg(r.x, cfg.nonnegative);
        return r;
    }
    const double h = cfg.spacing;
    const double lambda = cfg.weight * h * h * h;

    if (cfg.kind == RegularizerKind::TV) {
        auto K = [h](const RealVolume& x) {
            Gradient g = gradient(x, h);
            return std::vector<RealVolume>{std::move(g[0]), std::move(g[1]), std::move(g[2])};
        };
        auto Kt = [h](const std::vector<RealVolume>& p) { return gradient_adjoint({p[0], p[1], p[2]}, h); };
        auto project = [](std::vector<RealVolume>& p) {
            const std::size_t n = p[0].size();
#pragma omp parallel for schedule(static)
            for (std::size_t i = 0; i < n; ++i) {
                const double m = std::sqrt(p[0][i] * p[0][i] + p[1][i] * p[1][i] + p[2][i] * p[2][i]);
                if (m > 1.0)
                    for (auto& c : p) c[i] /= m;
            }
        };
        return fgp(v, cfg, lambda, 12.0 / (h * h), 3, K, Kt, project);
    }

    auto K = [h](const RealVolume& x) {
        Hessian H = hessian(x, h);
        return std::vector<RealVolume>(std::make_move_iterator(H.begin()), std::make_move_iterator(H.end()));
    };
    auto Kt = [h](const std::vector<RealVolume>& p) {
        return hessian_adjoint({p[0], p[1], p[2], p[3], p[4], p[5]}, h);
    };
    // Projection onto the spectral-norm unit ball, the dual ball of S1.
    auto project = [](std::vector<RealVolume>& p) {
        const std::size_t n = p[0].size();
#pragma omp parallel for schedule(static)
        for (std::size_t i = 0; i < n; ++i) {
            const double fro = p[0][i] * p[0][i] + p[1][i] * p[1][i] + p[2][i] * p[2][i] +
                               2.0 * (p[3][i] * p[3][i] + p[4][i] * p[4][i] + p[5][i] * p[5][i]);
            if (fro <= 1.0) continue;
            Eigen::Matrix3d m;
            m << p[0][i], p[3][i], p[4][i], p[3][i], p[1][i], p[5][i], p[4][i], p[5][i], p[2][i];
            Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(m);
            const Eigen::Vector3d lam = es.eigenvalues().cwiseMax(-1.0).cwiseMin(1.0);
            const Eigen::Matrix3d r = es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
            p[0][i] = r(0, 0);
            p[1][i] = r(1, 1);
            p[2][i] = r(2, 2);
            p[3][i] = r(0, 1);
            p[4][i] = r(0, 2);
            p[5][i] = r(1, 2);
        }
    };
    return fgp(v, cfg, lambda, 144.0 / (h * h * h * h), 6, K, Kt, project);
}

} // namespace odt
