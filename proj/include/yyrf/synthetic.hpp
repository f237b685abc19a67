// Copyright 2026 The yyrf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <yyrf/dataset.hpp>
#include <yyrf/geometry.hpp>
#include <yyrf/image.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace yyrf {

/// 3x^2 - 2x^3 on [0, 1], clamped outside.
double smoothstep(double x);

enum class ColorKind { Solid, Checker, AngularGradient };

/// Analytic colour of a primitive, evaluated at a world point.
struct ColorFn
{
    ColorKind kind = ColorKind::Solid;
    Vec3 a = Vec3::Constant(0.5);
    Vec3 b = Vec3::Constant(0.5);
    /// Checker: cell size. AngularGradient: unused.
    double scale = 1.0;
    /// AngularGradient: blend axis (unit); colour a at -axis, b at +axis.
    Vec3 axis = Vec3::UnitZ();

    static ColorFn solid(const Vec3 &c);
    /// Soft checker: blend of a and b by a smoothed sign of sin(pi x/s) sin(pi y/s) sin(pi z/s).
    static ColorFn checker(const Vec3 &a, const Vec3 &b, double cell);
    static ColorFn angularGradient(const Vec3 &a, const Vec3 &b, const Vec3 &axis);

    Vec3 eval(const Vec3 &p, const Vec3 &center) const;
};

enum class PrimitiveKind { SolidBall, SphereShell, BoxRoom };

/// Density is amplitude * occupancy, where occupancy ramps from 1 to 0 with a
/// smoothstep of width `edge` centred on the surface.
struct Primitive
{
    PrimitiveKind kind = PrimitiveKind::SolidBall;
    Vec3 center = Vec3::Zero();
    double radius = 1.0;                  ///< ball radius / shell inner radius
    Vec3 halfExtents = Vec3::Ones();      ///< box room inner half-size
    double thickness = 0.1;               ///< shell and wall thickness
    double amplitude = 10.0;
    double edge = 0.05;
    ColorFn color;

    static Primitive solidBall(const Vec3 &center, double radius, double amplitude, double edge, ColorFn color);
    static Primitive sphereShell(const Vec3 &center, double innerRadius, double thickness, double amplitude,
                                 double edge, ColorFn color);
    static Primitive boxRoom(const Vec3 &center, const Vec3 &halfExtents, double thickness, double amplitude,
                             double edge, ColorFn color);

    double occupancy(const Vec3 &p) const;
    double density(const Vec3 &p) const { return amplitude * occupancy(p); }
};

/// Background radiance: blends nadir -> horizon -> zenith by direction z.
struct EnvColor
{
    Vec3 zenith = Vec3::Zero();
    Vec3 horizon = Vec3::Zero();
    Vec3 nadir = Vec3::Zero();

    static EnvColor constant(const Vec3 &c) { return {c, c, c}; }
    Vec3 eval(const Vec3 &d) const;
};

struct SyntheticScene
{
    std::vector<Primitive> primitives;
    EnvColor env;
    /// Rays are marched over [0, marchDistance].
    double marchDistance = 15.0;

    double density(const Vec3 &p) const;
    /// Density-weighted mix of primitive colours (zero where empty).
    Vec3 color(const Vec3 &p) const;

    /// Box room with two balls: the reference indoor scene.
    static SyntheticScene room();
};

/// Radiance of one ray by uniform left-endpoint quadrature with `steps`
/// intervals over [0, marchDistance].
Vec3 synthRenderRay(const SyntheticScene &scene, const Ray &ray, int steps);

/// Requires steps >= 64.
Image synthRender(const SyntheticScene &scene, const CameraPose &pose, int width, int height, int steps);

/// Camera i of n sits at angle 2 pi i / n on a horizontal circle, yawed by the
/// same angle, with a seeded vertical jitter of up to 10% of the radius.
/// Even indices are training views, odd ones test views.
std::vector<CameraPose> circlePoses(int nViews, double radius, uint64_t seed);

struct SynthOptions
{
    int nViews = 16;
    double radius = 0.15;
    int width = 200;
    int height = 100;
    int steps = 512;
    uint64_t seed = 0;
    double rMaxHint = 15.0;
};

/// Renders every view, writes PNGs + manifest.json into dir (if non-empty),
/// and returns the dataset with images quantized exactly as stored.
Dataset makeSyntheticDataset(const SyntheticScene &scene, const SynthOptions &opt, const std::string &dir);

} // namespace yyrf
