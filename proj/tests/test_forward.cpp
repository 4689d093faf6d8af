#include "odt/forward.hpp"
#include "odt/oracle.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

using namespace odt;

namespace {

struct Fixture {
    Geometry g = odt::testing::small_geometry(8);
    ReducedKernel kernel = ReducedKernel::build(g, 4);
    ForwardModel model{kernel, make_sensor(g, 1.0)};
    ComplexField3D u_in = plane_wave({0.2 * g.wavenumber(), 0.0, std::sqrt(0.96) * g.wavenumber()}, g);

    // Weak random potential supported away from the boundary.
    ScatteringPotential weak(std::uint64_t seed, double contrast = 0.05) const {
        RealVolume v = odt::testing::random_real(g.shape(), seed, 0.0, contrast * g.wavenumber() * g.wavenumber());
        for (std::size_t iz = 0; iz < 8; ++iz)
            for (std::size_t iy = 0; iy < 8; ++iy)
                for (std::size_t ix = 0; ix < 8; ++ix)
                    if (ix == 0 || iy == 0 || iz == 0 || ix == 7 || iy == 7 || iz == 7) v(ix, iy, iz) = 0.0;
        return ScatteringPotential(v, g);
    }
};

SolverConfig tight() {
    SolverConfig c;
    c.tolerance = 1e-12;
    c.max_iterations = 1000;
    return c;
}

ScatteringPotential axpy(const ScatteringPotential& f, double t, const RealVolume& d) {
    RealVolume v = f.values();
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += t * d[i];
    return ScatteringPotential(v, f.geometry());
}

} // namespace

TEST(Forward, ZeroPotentialReturnsIncidentField) {
    Fixture fx;
    const ForwardState s = solve_total_field(ScatteringPotential(RealVolume(fx.g.shape()), fx.g), fx.u_in, fx.model, {});
    EXPECT_EQ(s.iterations, 0u);
    EXPECT_TRUE(s.converged);
    EXPECT_EQ(s.total_field.values(), fx.u_in.values());
    const ViewResult r = forward_view(ScatteringPotential(RealVolume(fx.g.shape()), fx.g), fx.u_in, fx.model, {});
    for (const cplx& v : r.y_sc.values().span()) EXPECT_EQ(v, cplx{});
}

TEST(Forward, TotalFieldSatisfiesLippmannSchwinger) {
    Fixture fx;
    const ScatteringPotential f = fx.weak(1, 0.3);
    const ForwardState s = solve_total_field(f, fx.u_in, fx.model, tight());
    ASSERT_TRUE(s.converged);
    const ComplexVolume Gfu = fx.model.green().apply(s.contrast_source.values());
    ComplexVolume lhs(fx.g.shape());
    for (std::size_t i = 0; i < lhs.size(); ++i) lhs[i] = s.total_field.values()[i] - Gfu[i];
    EXPECT_LT(odt::testing::rel_l2(lhs, fx.u_in.values()), 1e-11);
}

TEST(Forward, SolversAgree) {
    Fixture fx;
    const ScatteringPotential f = fx.weak(2, 0.2);
    SolverConfig a = tight(), b = tight();
    b.method = SolverMethod::CGNormal;
    const ViewResult ra = forward_view(f, fx.u_in, fx.model, a);
    const ViewResult rb = forward_view(f, fx.u_in, fx.model, b);
    EXPECT_LT(odt::testing::rel_l2(rb.y_sc.values(), ra.y_sc.values()), 1e-9);
}

TEST(Forward, WarmStartNeedsFewerIterations) {
    Fixture fx;
    const ScatteringPotential f = fx.weak(3, 0.3);
    SolverConfig c;
    c.tolerance = 1e-10;
    const ForwardState cold = solve_total_field(f, fx.u_in, fx.model, c);
    c.warm_start = cold.total_field;
    const ForwardState warm = solve_total_field(axpy(f, 1e-3, f.values()), fx.u_in, fx.model, c);
    EXPECT_LT(warm.iterations, cold.iterations);
}

TEST(Forward, BornIsTheFirstOrderTerm) {
    // |LS - Born| is quadratic in the contrast.
    Fixture fx;
    const ScatteringPotential f = fx.weak(4, 0.02);
    const ScatteringPotential f2 = axpy(f, -0.5, f.values());
    auto gap = [&](const ScatteringPotential& p) {
        const ComplexImage a = forward_view(p, fx.u_in, fx.model, tight()).y_sc.values();
        const ComplexImage b = born_forward_view(p, fx.u_in, fx.model).values();
        double s = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) s += std::norm(a[i] - b[i]);
        return std::sqrt(s);
    };
    const double ratio = gap(f) / gap(f2);
    EXPECT_GT(ratio, 3.5);
    EXPECT_LT(ratio, 4.5);
}

TEST(Forward, JacobianAdjointMatchesFiniteDifferences) {
    Fixture fx;
    const ScatteringPotential f = fx.weak(5);
    const RealVolume df = fx.weak(6).values();
    const ComplexImage r = odt::testing::random_image(fx.g.detector().m, 7);
    const ForwardState s = solve_total_field(f, fx.u_in, fx.model, tight());
    const AdjointResult adj = jacobian_adjoint_apply(f, s, fx.model, r, tight());
    EXPECT_TRUE(adj.converged);

    const double eps = 1e-3;
    const ComplexImage yp = forward_view(axpy(f, eps, df), fx.u_in, fx.model, tight()).y_sc.values();
    const ComplexImage ym = forward_view(axpy(f, -eps, df), fx.u_in, fx.model, tight()).y_sc.values();
    cplx lhs = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) lhs += std::conj((yp[i] - ym[i]) / (2 * eps)) * r[i];
    const double rhs = dot(df.span(), adj.gradient.span());
    EXPECT_LT(std::abs(lhs.real() - rhs), 1e-4 * std::abs(rhs));
}

TEST(Forward, BornAdjointDotProduct) {
    Fixture fx;
    const RealVolume df = odt::testing::random_real(fx.g.shape(), 8);
    const ComplexImage r = odt::testing::random_image(fx.g.detector().m, 9);
    const ComplexImage y = born_forward_view(ScatteringPotential(df, fx.g), fx.u_in, fx.model).values();
    const double lhs = dot(y.span(), r.span()).real();
    const double rhs = dot(df.span(), born_adjoint_apply(fx.u_in, fx.model, r).span());
    EXPECT_LT(std::abs(lhs - rhs), 1e-10 * std::abs(lhs));
}

TEST(Forward, AdjointAtZeroPotentialIsBorn) {
    Fixture fx;
    const ScatteringPotential zero(RealVolume(fx.g.shape()), fx.g);
    const ComplexImage r = odt::testing::random_image(fx.g.detector().m, 10);
    const ForwardState s = solve_total_field(zero, fx.u_in, fx.model, {});
    const AdjointResult a = jacobian_adjoint_apply(zero, s, fx.model, r, {});
    const RealVolume b = born_adjoint_apply(fx.u_in, fx.model, r);
    EXPECT_LT(odt::testing::max_rel_diff(a.gradient, b), 1e-14);
}

TEST(Forward, GeometryMismatchIsRejected) {
    Fixture fx;
    const Geometry other = odt::testing::small_geometry(8, 532e-9 / 10);
    EXPECT_THROW((void)solve_total_field(ScatteringPotential(RealVolume(other.shape()), other), fx.u_in, fx.model, {}),
                 std::invalid_argument);
}

TEST(Forward, SolverConfigValidation) {
    SolverConfig c;
    c.tolerance = 0.0;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c.tolerance = 1e-6;
    c.max_iterations = 0;
    EXPECT_THROW(c.validate(), std::invalid_argument);
}
