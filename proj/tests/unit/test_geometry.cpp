// Copyright 2026 The yyrf Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <yyrf/geometry.hpp>
#include <yyrf/rng.hpp>

#include <cmath>

using namespace yyrf;

namespace {

Vec3
randomUnit(Rng &rng)
{
    // Uniform on the sphere: z uniform in [-1, 1], longitude uniform.
    double z = 2.0 * rng.uniform() - 1.0;
    double a = 2.0 * kPi * rng.uniform();
    double s = std::sqrt(1.0 - z * z);
    return {s * std::cos(a), s * std::sin(a), z};
}

bool
insideBounds(const LocalSpherical &s)
{
    return s.theta >= kThetaMin - 1e-12 && s.theta <= kThetaMax + 1e-12 && std::abs(s.phi) <= kPhiMax + 1e-12;
}

} // namespace

TEST_CASE("yang_to_yin matrix entries")
{
    CHECK(yangToYin(Vec3(0, 0, 1)) == Vec3(0, 1, 0));
    CHECK(yangToYin(Vec3(1, 0, 0)) == Vec3(-1, 0, 0));
    Rng rng(7);
    for (int i = 0; i < 100; ++i) {
        Vec3 p(rng.normal(), rng.normal(), rng.normal());
        CHECK(yangToYin(yangToYin(p)) == p);
    }
}

TEST_CASE("locate picks the grid whose bounds contain the point")
{
    GridConfig cfg = GridConfig::make(8, 10, 30, 0.1, 10.0);
    CHECK(locate(Vec3(1, 0, 0), cfg).grid == GridId::Yin);

    GridAssignment top = locate(Vec3(0, 0, 1), cfg);
    CHECK(top.grid == GridId::Yang);
    CHECK(top.local.theta == doctest::Approx(kPi / 2));
    CHECK(top.local.phi == doctest::Approx(kPi / 2));

    GridAssignment back = locate(Vec3(-1, 0, 0), cfg);
    CHECK(back.grid == GridId::Yang);
    CHECK(back.local.theta == doctest::Approx(kPi / 2));
    CHECK(back.local.phi == doctest::Approx(0.0));
}

TEST_CASE("every direction is covered and ownership is a pure function")
{
    GridConfig cfg = GridConfig::make(8, 10, 30, 0.1, 10.0);
    Rng rng(11);
    for (int i = 0; i < 100000; ++i) {
        Vec3 d = randomUnit(rng);
        GridAssignment a = locate(d, cfg);
        REQUIRE(insideBounds(a.local));
        LocalSpherical own = cartesianToSpherical(toGridFrame(d, a.grid));
        LocalSpherical other = cartesianToSpherical(toGridFrame(d, a.grid == GridId::Yin ? GridId::Yang : GridId::Yin));
        CHECK(angularMargin(own) >= angularMargin(other));
        CHECK(locate(d, cfg).grid == a.grid);
    }
}

TEST_CASE("overlap ties go to Yin")
{
    // On the plane x = 0, y = z the two frames see mirror-image angles with
    // equal margins.
    GridConfig cfg = GridConfig::make(8, 10, 30, 0.1, 10.0);
    Vec3 p(0.0, std::sqrt(0.5), std::sqrt(0.5));
    LocalSpherical yin = cartesianToSpherical(p);
    LocalSpherical yang = cartesianToSpherical(yinToYang(p));
    REQUIRE(angularMargin(yin) == doctest::Approx(angularMargin(yang)));
    if (angularMargin(yin) == angularMargin(yang)) {
        CHECK(locate(p, cfg).grid == GridId::Yin);
    }
}

TEST_CASE("radial shells: hand-enumerated example")
{
    GridConfig cfg = GridConfig::make(4, 4, 4, 1.0, 8.0);
    CHECK(cfg.growth() == doctest::Approx(2.0));
    REQUIRE(cfg.shells().size() == 4);
    CHECK(cfg.shells()[0] == doctest::Approx(1.0));
    CHECK(cfg.shells()[1] == doctest::Approx(2.0));
    CHECK(cfg.shells()[2] == doctest::Approx(4.0));
    CHECK(cfg.shells()[3] == 8.0);
    CHECK(radiusToIndex(4.0, cfg) == doctest::Approx(2.0));
    CHECK(radiusToIndex(3.0, cfg) == doctest::Approx(1.5));
    CHECK(radiusToIndex(1.0, cfg) == 0.0);
    CHECK(radiusToIndex(8.0, cfg) == 3.0);
    CHECK(radiusToIndex(0.2, cfg) == 0.0);
    CHECK(radiusToIndex(100.0, cfg) == 3.0);
}

TEST_CASE("radial shells with the r0 floor active")
{
    // Pure exponential spacing would start below r0 here.
    GridConfig cfg = GridConfig::make(48, 56, 166, 0.03, 15.0);
    const auto &s = cfg.shells();
    CHECK(s.front() == 0.03);
    CHECK(s.back() == 15.0);
    double prev = 0.0;
    for (size_t i = 1; i < s.size(); ++i) {
        double d = s[i] - s[i - 1];
        CHECK(d >= 0.03 * (1.0 - 1e-12));
        CHECK(d >= prev * (1.0 - 1e-9));
        prev = d;
    }
    Rng rng(5);
    double last = -1.0;
    for (int i = 0; i <= 1000; ++i) {
        double r = 0.03 + (15.0 - 0.03) * i / 1000.0;
        double u = radiusToIndex(r, cfg);
        if (i > 0 && i < 1000) {
            CHECK(u > last);
        }
        last = u;
        CHECK(indexToRadius(u, cfg) == doctest::Approx(r).epsilon(1e-9));
    }
}

TEST_CASE("grid configuration is validated")
{
    CHECK_THROWS_AS(GridConfig::make(1, 4, 4, 0.1, 10.0), InputError);
    CHECK_THROWS_AS(GridConfig::make(4, 4, 4, 0.0, 10.0), InputError);
    CHECK_THROWS_AS(GridConfig::make(10, 4, 4, 1.0, 10.0), InputError);
    GridConfig b = GridConfig::withBalancedRatio(300, 0.03, 15.0);
    CHECK(b.nTheta() == 346);
    CHECK(b.nPhi() == 1039);
}

TEST_CASE("angular indices are cell centred")
{
    GridConfig cfg = GridConfig::make(4, 12, 30, 0.1, 10.0);
    CHECK(anglesToIndex(kThetaMin + cfg.dTheta() / 2, 0.0, cfg).first == doctest::Approx(0.0));
    CHECK(anglesToIndex(kThetaMax - cfg.dTheta() / 2, 0.0, cfg).first == doctest::Approx(11.0));
    GridConfig two = GridConfig::make(4, 2, 30, 0.1, 10.0);
    CHECK(anglesToIndex(kPi / 2, 0.0, two).first == doctest::Approx(0.5));
    Rng rng(3);
    for (int i = 0; i < 1000; ++i) {
        double t = kThetaMin + rng.uniform() * (kThetaMax - kThetaMin);
        double p = -kPhiMax + rng.uniform() * 2 * kPhiMax;
        auto [ut, up] = anglesToIndex(t, p, cfg);
        auto [t2, p2] = indexToAngles(ut, up, cfg);
        CHECK(std::abs(t2 - t) < 1e-9);
        CHECK(std::abs(p2 - p) < 1e-9);
    }
}

TEST_CASE("spherical round trip away from the poles")
{
    Rng rng(9);
    for (int i = 0; i < 1000; ++i) {
        LocalSpherical s{0.1 + 5 * rng.uniform(), 0.1 + (kPi - 0.2) * rng.uniform(), -kPi + 2 * kPi * rng.uniform()};
        LocalSpherical b = cartesianToSpherical(sphericalToCartesian(s));
        CHECK(std::abs(b.r - s.r) < 1e-9);
        CHECK(std::abs(b.theta - s.theta) < 1e-9);
        CHECK(std::abs(b.phi - s.phi) < 1e-9);
    }
}

TEST_CASE("equirectangular pixel rays")
{
    const int W = 64, H = 32;
    Ray r = pixelToRay(W / 2, H / 2, W, H, CameraPose());
    // Column W/2 has phi = pi/W; row H/2 has theta = pi/2 + pi/(2H).
    Vec3 expect = equirectDirection(W / 2 + 0.5, H / 2 + 0.5, W, H);
    CHECK((r.direction - expect).norm() < 1e-15);

    // u + 0.5 = W/2 and v + 0.5 = H/2 land exactly on +x.
    Vec3 ex = equirectDirection(W / 2.0, H / 2.0, W, H);
    CHECK((ex - Vec3(1, 0, 0)).norm() < 1e-15);

    Ray top = pixelToRay(5, 0, W, H, CameraPose());
    CHECK(top.direction.z() == doctest::Approx(std::cos(kPi * 0.5 / H)));
    CHECK(top.direction.norm() == doctest::Approx(1.0));

    CameraPose moved = CameraPose::make(Mat3::Identity(), Vec3(1, 2, 3));
    CHECK(pixelToRay(0, 0, W, H, moved).origin == Vec3(1, 2, 3));

    CHECK_THROWS_AS(pixelToRay(W, 0, W, H, CameraPose()), InputError);
    CHECK_THROWS_AS(pixelToRay(0, -1, W, H, CameraPose()), InputError);
}

TEST_CASE("camera poses must be rigid")
{
    Mat3 bad = Mat3::Identity();
    bad(0, 0) = 1.1;
    CHECK_THROWS_AS(CameraPose::make(bad, Vec3::Zero()), InputError);
    Mat3 mirror = Mat3::Identity();
    mirror(2, 2) = -1.0;
    CHECK_THROWS_AS(CameraPose::make(mirror, Vec3::Zero()), InputError);
    Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
    m(3, 0) = 1.0;
    CHECK_THROWS_AS(CameraPose::fromMatrix(m), InputError);
}

TEST_CASE("sphere exit")
{
    CHECK(sphereExit(Vec3::Zero(), Vec3::UnitX(), 2.0) == doctest::Approx(2.0));
    CHECK(sphereExit(Vec3(0.5, 0, 0), Vec3::UnitX(), 2.0) == doctest::Approx(1.5));
    CHECK(sphereExit(Vec3(5, 5, 0), Vec3::UnitX(), 2.0) < 0.0);
}
