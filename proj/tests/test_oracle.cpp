#include "odt/oracle.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <numbers>

using namespace odt;
using odt::testing::kEtaB;
using odt::testing::kLambda;

namespace {

BeadSpec bead(double eta_inside, double diameter = 3 * kLambda) {
    return BeadSpec{{0.0, 0.0, 0.0}, diameter, eta_inside, kEtaB, kLambda};
}

Vec3 k_along_z() { return {0.0, 0.0, 2 * std::numbers::pi * kEtaB / kLambda}; }

} // namespace

TEST(Mie, MatchedSphereIsInvisible) {
    const std::vector<Vec3> pts{{0, 0, 0}, {1e-7, 2e-7, -3e-7}, {1e-6, 0, 1e-6}, {0, -2e-6, 0}};
    const std::vector<cplx> u = mie_total_field(bead(kEtaB), k_along_z(), pts);
    const double kz = k_along_z()[2];
    for (std::size_t i = 0; i < pts.size(); ++i)
        EXPECT_LT(std::abs(u[i] - std::polar(1.0, kz * pts[i][2])), 1e-12);
}

TEST(Mie, SeriesHasConverged) {
    const std::vector<Vec3> pts{{0, 0, 0.5e-6}, {0.4e-6, 0, -0.3e-6}, {1.2e-6, 0.3e-6, 1e-6}};
    const auto a = mie_total_field(bead(1.4388), k_along_z(), pts);
    const auto b = mie_total_field(bead(1.4388), k_along_z(), pts, 15);
    for (std::size_t i = 0; i < pts.size(); ++i) EXPECT_LT(std::abs(a[i] - b[i]), 1e-10 * std::abs(b[i]));
}

TEST(Mie, FieldAndRadialDerivativeAreContinuous) {
    const double a = 1.5 * kLambda, eps = 1e-14;
    for (double theta : {0.3, 1.2, 2.5}) {
        const Vec3 d{std::sin(theta), 0.0, std::cos(theta)};
        auto at = [&](double r) { return Vec3{r * d[0], r * d[1], r * d[2]}; };
        const double dr = 1e-10;
        const auto u = mie_total_field(bead(1.4388), k_along_z(),
                                       {at(a - eps), at(a + eps), at(a - eps - dr), at(a + eps + dr)});
        EXPECT_LT(std::abs(u[0] - u[1]), 1e-6 * std::abs(u[0]));
        const cplx din = (u[0] - u[2]) / dr, dout = (u[3] - u[1]) / dr;
        EXPECT_LT(std::abs(din - dout), 1e-3 * std::abs(din) + 1e-3 * k_along_z()[2]);
    }
}

TEST(Mie, MirrorSymmetryAboutTheIncidenceAxis) {
    const auto u = mie_total_field(bead(1.4388), k_along_z(), {{0.7e-6, 0.2e-6, 0.4e-6}, {-0.7e-6, -0.2e-6, 0.4e-6}});
    EXPECT_LT(std::abs(u[0] - u[1]), 1e-12 * std::abs(u[0]));
}

TEST(Mie, OrderRule) {
    EXPECT_EQ(mie_order(0.0), 10);
    EXPECT_EQ(mie_order(8.0), 26);
}

TEST(Mie, GridOverloadMatchesPointOverload) {
    const Geometry g = odt::testing::small_geometry(8);
    const Vec3 k{0.0, 0.0, g.wavenumber()};
    const BeadSpec b{{0, 0, 0}, 4 * g.spacing(), 1.4, kEtaB, kLambda};
    const ComplexField3D u = mie_total_field(b, k, g);
    const auto v = mie_total_field(b, k, {{g.coordinate(0, 1), g.coordinate(1, 5), g.coordinate(2, 6)}});
    EXPECT_EQ(u.values()(1, 5, 6), v[0]);
}

TEST(PlaneWave, UnitAmplitudeAndShellCheck) {
    const Geometry g = odt::testing::small_geometry(8);
    const Vec3 k{0.6 * g.wavenumber(), 0.0, 0.8 * g.wavenumber()};
    const ComplexField3D u = plane_wave(k, g);
    EXPECT_NEAR(std::abs(u.values()(3, 3, 3) - 1.0), 0.0, 1e-15);
    for (const cplx& v : u.values().span()) EXPECT_NEAR(std::abs(v), 1.0, 1e-14);
    EXPECT_THROW((void)plane_wave({0, 0, 1.1 * g.wavenumber()}, g), std::invalid_argument);
}

TEST(Phantom, EmptyIsBackground) {
    const Geometry g = odt::testing::small_geometry(8);
    for (double v : make_phantom(PhantomSpec{}, g).span()) EXPECT_EQ(v, kEtaB);
}

TEST(Phantom, BeadVolume) {
    const Geometry g = odt::testing::small_geometry(32);
    PhantomSpec p;
    p.kind = PhantomKind::Bead;
    const double r = 10 * g.spacing();
    p.spheres.push_back({{0, 0, 0}, r, 1.4});
    const RealVolume ri = make_phantom(p, g);
    double n = 0;
    for (double v : ri.span()) n += v == 1.4;
    const double expected = 4.0 / 3.0 * std::numbers::pi * std::pow(r / g.spacing(), 3);
    EXPECT_NEAR(n, expected, 0.03 * expected);
}

TEST(Phantom, AntialiasingProducesPartialVoxels) {
    const Geometry g = odt::testing::small_geometry(16);
    PhantomSpec p;
    p.kind = PhantomKind::Bead;
    p.antialias = true;
    p.spheres.push_back({{0.1 * g.spacing(), 0, 0}, 4.3 * g.spacing(), 1.4});
    bool partial = false;
    for (double v : make_phantom(p, g).span()) {
        EXPECT_GE(v, kEtaB);
        EXPECT_LE(v, 1.4);
        partial = partial || (v > kEtaB && v < 1.4);
    }
    EXPECT_TRUE(partial);
}

TEST(Phantom, ObjectsMustFit) {
    const Geometry g = odt::testing::small_geometry(8);
    PhantomSpec p;
    p.kind = PhantomKind::Bead;
    p.spheres.push_back({{0, 0, 0}, g.length(0), 1.4});
    EXPECT_THROW((void)make_phantom(p, g), std::invalid_argument);
}

TEST(Phantom, RedBloodCellIsBiconcave) {
    const double h = 7.82e-6 / 48;
    const Geometry g = Geometry::cubic(64, 64 * h, kLambda, kEtaB);
    PhantomSpec p;
    p.kind = PhantomKind::RbcLike;
    p.rbc.ri = 1.42;
    const RealVolume ri = make_phantom(p, g);
    auto thickness = [&](std::size_t ix) {
        int t = 0;
        for (std::size_t iz = 0; iz < 64; ++iz) t += ri(ix, 31, iz) == 1.42;
        return t;
    };
    EXPECT_GT(thickness(31), 0);                 // center
    EXPECT_GT(thickness(31 + 17), thickness(31)); // rim thicker than the dimple
    EXPECT_EQ(thickness(31 + 25), 0);             // outside the disk
    EXPECT_EQ(*std::max_element(ri.span().begin(), ri.span().end()), 1.42);
}

TEST(ConeViews, StayInsideTheCone) {
    const double kb = 2 * std::numbers::pi * kEtaB / kLambda;
    for (auto [count, deg] : {std::pair{40u, 45.0}, std::pair{61u, 35.0}}) {
        const double half = deg * std::numbers::pi / 180;
        const auto ks = cone_views(count, half, kb);
        ASSERT_EQ(ks.size(), count);
        for (const Vec3& k : ks) {
            EXPECT_NEAR(std::sqrt(k[0] * k[0] + k[1] * k[1] + k[2] * k[2]), kb, 1e-9 * kb);
            EXPECT_LE(std::hypot(k[0], k[1]), kb * std::sin(half) * (1 + 1e-12));
            EXPECT_GT(k[2], 0.0);
        }
    }
    EXPECT_THROW((void)cone_views(0, 0.5, kb), std::invalid_argument);
}

TEST(Bump, CompactAndNormalized) {
    const Geometry g = odt::testing::small_geometry(16);
    const ComplexField3D b = bump_function(g, 5 * g.spacing());
    EXPECT_NEAR(b.values()(7, 7, 7).real(), 1.0, 1e-15);
    EXPECT_EQ(b.values()(7, 7, 13), cplx{});
    EXPECT_EQ(b.values()(0, 0, 0), cplx{});
}
