#include "odt/far_field.hpp"
#include "odt/incident.hpp"
#include "odt/krylov.hpp"
#include "odt/oracle.hpp"
#include "odt/sensor.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <numbers>

using namespace odt;
using odt::testing::kEtaB;
using odt::testing::kLambda;

namespace {

cplx inner(const ComplexImage& a, const ComplexImage& b) { return dot(a.span(), b.span()); }
cplx inner(const ComplexVolume& a, const ComplexVolume& b) { return dot(a.span(), b.span()); }

// Transverse wave vector on the DFT grid of an m-sample detector.
Vec3 on_grid_k(const Geometry& g, int ax, int ay) {
    const double dw = 2.0 * std::numbers::pi / g.detector().side();
    const double kx = dw * ax, ky = dw * ay;
    const double kb = g.wavenumber();
    return {kx, ky, std::sqrt(kb * kb - kx * kx - ky * ky)};
}

} // namespace

// --- Krylov ----------------------------------------------------------------

TEST(Krylov, BicgstabSolvesDiagonallyDominantSystem) {
    const Shape3 s{4, 4, 4};
    const ComplexVolume d = odt::testing::random_complex(s, 5);
    LinearOperator A = [&](const ComplexVolume& x, ComplexVolume& y) {
        y = ComplexVolume(s);
        for (std::size_t i = 0; i < x.size(); ++i) {
            const cplx nb = x[(i + 1) % x.size()];
            y[i] = (3.0 + 0.3 * d[i]) * x[i] + 0.5 * nb;
        }
    };
    const ComplexVolume b = odt::testing::random_complex(s, 6);
    ComplexVolume x;
    const KrylovResult r = bicgstab(A, b, x, 1e-12, 200);
    EXPECT_TRUE(r.converged);
    ComplexVolume Ax;
    A(x, Ax);
    EXPECT_LT(odt::testing::rel_l2(Ax, b), 1e-11);
    EXPECT_NEAR(r.residual, odt::testing::rel_l2(Ax, b), 1e-13);
}

TEST(Krylov, ZeroRightHandSideGivesZero) {
    const Shape3 s{2, 2, 2};
    LinearOperator A = [](const ComplexVolume& x, ComplexVolume& y) { y = x; };
    ComplexVolume x = odt::testing::random_complex(s, 1);
    const KrylovResult r = bicgstab(A, ComplexVolume(s), x, 1e-10, 10);
    EXPECT_TRUE(r.converged);
    for (const cplx& v : x.span()) EXPECT_EQ(v, cplx{});
}

TEST(Krylov, NonFiniteOperatorThrows) {
    const Shape3 s{2, 2, 2};
    LinearOperator A = [](const ComplexVolume& x, ComplexVolume& y) {
        y = x;
        y[0] = std::nan("");
    };
    ComplexVolume x;
    EXPECT_THROW((void)bicgstab(A, odt::testing::random_complex(s, 2), x, 1e-10, 10), NumericalError);
}

TEST(Krylov, CgnrSolvesNonHermitianSystem) {
    const Shape3 s{4, 2, 2};
    LinearOperator A = [](const ComplexVolume& x, ComplexVolume& y) {
        y = ComplexVolume(x.shape());
        for (std::size_t i = 0; i < x.size(); ++i) y[i] = cplx(2.0, 1.0) * x[i] + (i > 0 ? 0.5 * x[i - 1] : 0.0);
    };
    LinearOperator AH = [](const ComplexVolume& x, ComplexVolume& y) {
        y = ComplexVolume(x.shape());
        for (std::size_t i = 0; i < x.size(); ++i)
            y[i] = cplx(2.0, -1.0) * x[i] + (i + 1 < x.size() ? 0.5 * x[i + 1] : 0.0);
    };
    const ComplexVolume b = odt::testing::random_complex(s, 7);
    ComplexVolume x;
    const KrylovResult r = cgnr(A, AH, b, x, 1e-12, 200);
    EXPECT_TRUE(r.converged);
    EXPECT_LT(r.residual, 1e-11);
}

TEST(Krylov, ReportsNonConvergence) {
    const Shape3 s{4, 4, 4};
    LinearOperator A = [](const ComplexVolume& x, ComplexVolume& y) {
        y = ComplexVolume(x.shape());
        for (std::size_t i = 0; i < x.size(); ++i) y[i] = double(i + 1) * x[(i * 7) % x.size()];
    };
    ComplexVolume x;
    const KrylovResult r = bicgstab(A, odt::testing::random_complex(s, 8), x, 1e-14, 2);
    EXPECT_FALSE(r.converged);
    EXPECT_LE(r.iterations, 2u);
}

// --- Far field ---------------------------------------------------------------

TEST(FarField, SingleVoxelRadiatesSampledGreenFunction) {
    const Geometry g = odt::testing::small_geometry(8);
    const double h = g.spacing();
    ComplexVolume s(g.shape());
    s(3, 3, 3) = 1.0; // origin
    const ComplexImage y = FarFieldOperator(g).apply(s);
    double err = 0.0, ref = 0.0;
    for (std::size_t j = 0; j < y.ny(); ++j)
        for (std::size_t i = 0; i < y.nx(); ++i) {
            const cplx e = h * h * h *
                           green_pointwise({g.coordinate(0, i), g.coordinate(1, j), g.detector().position},
                                           g.wavenumber());
            err += std::norm(y(i, j) - e);
            ref += std::norm(e);
        }
    EXPECT_LT(std::sqrt(err / ref), 1e-2);
}

TEST(FarField, CoarseDetectorSamplesEveryQthPoint) {
    const double h = kLambda / 8.0;
    const Geometry g = Geometry::cubic(8, 8 * h, kLambda, kEtaB, DetectorPlane{6, 2 * h, 12 * h});
    ComplexVolume s(g.shape());
    s(4, 2, 5) = cplx(0.5, -1.0);
    const ComplexImage y = FarFieldOperator(g).apply(s);
    ASSERT_EQ(y.nx(), 6u);
    for (std::size_t j = 0; j < 6; ++j)
        for (std::size_t i = 0; i < 6; ++i) {
            const Vec3 d{2 * h * centered_index(i, 6) - g.coordinate(0, 4), 2 * h * centered_index(j, 6) - g.coordinate(1, 2),
                         12 * h - g.coordinate(2, 5)};
            const cplx e = h * h * h * cplx(0.5, -1.0) * green_pointwise(d, g.wavenumber());
            EXPECT_LT(std::abs(y(i, j) - e), 1e-10 * std::abs(e));
        }
}

TEST(FarField, AdjointDotProduct) {
    const double h = kLambda / 8.0;
    for (const Geometry& g : {odt::testing::small_geometry(8),
                              Geometry::cubic(8, 8 * h, kLambda, kEtaB, DetectorPlane{12, 2 * h, 10 * h})}) {
        const FarFieldOperator F(g);
        const ComplexVolume x = odt::testing::random_complex(g.shape(), 3);
        const ComplexImage r = odt::testing::random_image(g.detector().m, 4);
        const cplx lhs = inner(F.apply(x), r);
        const cplx rhs = inner(x, F.apply_adjoint(r));
        EXPECT_LT(std::abs(lhs - rhs), 1e-10 * std::abs(lhs));
    }
}

TEST(FarField, PointwiseGreenRejectsOrigin) {
    EXPECT_THROW((void)green_pointwise({0.0, 0.0, 0.0}, 1.0), std::invalid_argument);
}

// --- Sensor ------------------------------------------------------------------

TEST(Sensor, PassesPlaneWaveInsideTheAperture) {
    const Geometry g = odt::testing::small_geometry(16);
    SensorModel m = make_sensor(g, 0.5);
    m.padding = 1;
    const SensorOperator P(m, 16, g.spacing());
    const ComplexImage y = plane_wave_on_detector(on_grid_k(g, 1, -1), g).values();
    EXPECT_LT(odt::testing::max_rel_diff(P.apply(y), y), 1e-12);
}

TEST(Sensor, RemovesModesBeyondCutoff) {
    const Geometry g = odt::testing::small_geometry(16);
    SensorModel m = make_sensor(g, 0.2);
    m.padding = 1;
    const SensorOperator P(m, 16, g.spacing());
    const double dw = 2.0 * std::numbers::pi / g.detector().side();
    const int a = static_cast<int>(std::ceil(m.cutoff() / dw)) + 1;
    ASSERT_LE(a, 8);
    ComplexImage y(16, 16);
    for (std::size_t j = 0; j < 16; ++j)
        for (std::size_t i = 0; i < 16; ++i) y(i, j) = std::polar(1.0, dw * a * g.coordinate(0, i));
    for (const cplx& v : P.apply(y).span()) EXPECT_LT(std::abs(v), 1e-12);
}

TEST(Sensor, RefocusAppliesAxialPhase) {
    const Geometry g = odt::testing::small_geometry(16);
    SensorModel m = make_sensor(g, 1.0, PupilKind::None);
    m.padding = 1;
    m.refocus = 3e-7;
    const SensorOperator P(m, 16, g.spacing());
    const Vec3 k = on_grid_k(g, 2, 1);
    const ComplexImage y = plane_wave_on_detector(k, g).values();
    const ComplexImage out = P.apply(y);
    const cplx phase = std::polar(1.0, -k[2] * m.refocus);
    for (std::size_t i = 0; i < y.size(); ++i) EXPECT_LT(std::abs(out[i] - phase * y[i]), 1e-12);
}

TEST(Sensor, AdjointDotProduct) {
    const Geometry g = odt::testing::small_geometry(12);
    SensorModel m = make_sensor(g, 0.4);
    m.refocus = -2e-7;
    const SensorOperator P(m, 12, g.spacing());
    const ComplexImage x = odt::testing::random_image(12, 1);
    const ComplexImage y = odt::testing::random_image(12, 2);
    const cplx lhs = inner(P.apply(x), y);
    const cplx rhs = inner(x, P.apply_adjoint(y));
    EXPECT_LT(std::abs(lhs - rhs), 1e-10 * std::abs(lhs));
}

TEST(Sensor, NoPupilNoRefocusIsIdentity) {
    const Geometry g = odt::testing::small_geometry(8);
    const SensorOperator P(make_sensor(g, 1.0, PupilKind::None), 8, g.spacing());
    EXPECT_TRUE(P.is_identity());
    const ComplexImage x = odt::testing::random_image(8, 3);
    EXPECT_EQ(P.apply(x), x);
}

TEST(Sensor, RejectsBadModel) {
    SensorModel m;
    m.wavelength = kLambda;
    m.numerical_aperture = 0.0;
    EXPECT_THROW(m.validate(), std::invalid_argument);
}

// --- Incident field ---------------------------------------------------------

TEST(Incident, TransferIsUnimodularOrDecaying) {
    const double kb = 1.0e7;
    EXPECT_NEAR(std::abs(angular_spectrum_transfer({3e6, 4e6}, 1e-6, kb)), 1.0, 1e-14);
    const cplx ev = angular_spectrum_transfer({1.5e7, 0.0}, 1e-6, kb);
    EXPECT_NEAR(std::abs(ev), std::exp(-1e-6 * std::sqrt(1.5e7 * 1.5e7 - kb * kb)), 1e-14);
    EXPECT_NEAR(std::abs(angular_spectrum_transfer({1.5e7, 0.0}, -1e-6, kb)), std::abs(ev), 1e-14);
}

TEST(Incident, EstimatesOnGridTiltExactly) {
    const Geometry g = odt::testing::small_geometry(16);
    const Vec3 k = on_grid_k(g, 2, -1);
    const TiltedWaveSpec t = estimate_tilt(plane_wave_on_detector(k, g), g.wavenumber());
    EXPECT_NEAR(t.k_tilt[0], k[0], 1e-9 * g.wavenumber());
    EXPECT_NEAR(t.k_tilt[1], k[1], 1e-9 * g.wavenumber());
}

TEST(Incident, EstimatesOffGridTiltApproximately) {
    const Geometry g = odt::testing::small_geometry(32);
    const double dw = 2.0 * std::numbers::pi / g.detector().side();
    const double kx = 2.3 * dw, ky = -1.6 * dw, kb = g.wavenumber();
    const Vec3 k{kx, ky, std::sqrt(kb * kb - kx * kx - ky * ky)};
    const TiltedWaveSpec t = estimate_tilt(plane_wave_on_detector(k, g), kb);
    EXPECT_NEAR(t.k_tilt[0], kx, 0.25 * dw);
    EXPECT_NEAR(t.k_tilt[1], ky, 0.25 * dw);
}

TEST(Incident, ZeroFieldHasNoTilt) {
    const Geometry g = odt::testing::small_geometry(8);
    EXPECT_THROW((void)estimate_tilt(ComplexField2D(ComplexImage(8, 8), g.spacing(), g.detector().position),
                                     g.wavenumber()),
                 std::invalid_argument);
}

TEST(Incident, OnGridPlaneWavePropagatesExactly) {
    const Geometry g = odt::testing::small_geometry(16);
    const Vec3 k = on_grid_k(g, 2, 1);
    const ComplexField2D y = plane_wave_on_detector(k, g);
    const IncidentVolume v = propagate_tilt_transfer(y, estimate_tilt(y, g.wavenumber()), g);
    const ComplexField3D exact = plane_wave(k, g);
    double err = 0.0;
    for (std::size_t i = 0; i < exact.values().size(); ++i)
        err = std::max(err, std::abs(v.u_in.values()[i] - exact.values()[i]));
    EXPECT_LT(err, 1e-10);
}

TEST(Incident, OnGridPlaneWaveWithCoarseDetector) {
    const double h = kLambda / 8.0;
    const Geometry g = Geometry::cubic(16, 16 * h, kLambda, kEtaB, DetectorPlane{8, 2 * h, 16 * h});
    const Vec3 k = on_grid_k(g, 1, 2);
    const ComplexField2D y = plane_wave_on_detector(k, g);
    const IncidentVolume v = propagate_tilt_transfer(y, estimate_tilt(y, g.wavenumber()), g);
    EXPECT_LT(odt::testing::max_rel_diff(v.u_in.values(), plane_wave(k, g).values()), 1e-10);
}

TEST(Incident, PlanePropagationRoundTrip) {
    const Geometry g = odt::testing::small_geometry(16);
    const Vec3 k = on_grid_k(g, -1, 2);
    const ComplexField2D y = plane_wave_on_detector(k, g);
    const TiltedWaveSpec t{{k[0], k[1]}};
    const ComplexField2D there = propagate_plane(y, t, 4e-7, g.wavenumber());
    EXPECT_NEAR(there.position(), y.position() - 4e-7, 1e-20);
    const ComplexField2D back = propagate_plane(there, t, -4e-7, g.wavenumber());
    EXPECT_LT(odt::testing::max_rel_diff(back.values(), y.values()), 1e-12);
}
