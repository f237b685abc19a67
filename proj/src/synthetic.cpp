// Copyright 2026 The yyrf Authors
// SPDX-License-Identifier: Apache-2.0

#include <yyrf/renderer.hpp>
#include <yyrf/rng.hpp>
#include <yyrf/synthetic.hpp>

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace yyrf {

double
smoothstep(double x)
{
    x = std::clamp(x, 0.0, 1.0);
    return x * x * (3.0 - 2.0 * x);
}

ColorFn
ColorFn::solid(const Vec3 &c)
{
    ColorFn f;
    f.kind = ColorKind::Solid;
    f.a = f.b = c;
    return f;
}

ColorFn
ColorFn::checker(const Vec3 &a, const Vec3 &b, double cell)
{
    ColorFn f;
    f.kind = ColorKind::Checker;
    f.a = a;
    f.b = b;
    f.scale = cell;
    return f;
}

ColorFn
ColorFn::angularGradient(const Vec3 &a, const Vec3 &b, const Vec3 &axis)
{
    ColorFn f;
    f.kind = ColorKind::AngularGradient;
    f.a = a;
    f.b = b;
    f.axis = axis.normalized();
    return f;
}

Vec3
ColorFn::eval(const Vec3 &p, const Vec3 &center) const
{
    switch (kind) {
    case ColorKind::Solid:
        return a;
    case ColorKind::Checker: {
        // Half-cell offset keeps the pattern away from its zero set on
        // axis-aligned planes through whole cells.
        Vec3 q = (p - center) / scale + Vec3::Constant(0.5);
        double v = std::sin(kPi * q.x()) * std::sin(kPi * q.y()) * std::sin(kPi * q.z());
        double s = 0.5 + 0.5 * std::tanh(4.0 * v) / std::tanh(4.0);
        return a + s * (b - a);
    }
    case ColorKind::AngularGradient: {
        Vec3 d = p - center;
        double n = d.norm();
        double s = n > 0.0 ? 0.5 + 0.5 * d.dot(axis) / n : 0.5;
        return a + s * (b - a);
    }
    }
    return a;
}

Primitive
Primitive::solidBall(const Vec3 &center, double radius, double amplitude, double edge, ColorFn color)
{
    Primitive p;
    p.kind = PrimitiveKind::SolidBall;
    p.center = center;
    p.radius = radius;
    p.amplitude = amplitude;
    p.edge = edge;
    p.color = color;
    return p;
}

Primitive
Primitive::sphereShell(const Vec3 &center, double innerRadius, double thickness, double amplitude, double edge,
                       ColorFn color)
{
    Primitive p = solidBall(center, innerRadius, amplitude, edge, color);
    p.kind = PrimitiveKind::SphereShell;
    p.thickness = thickness;
    return p;
}

Primitive
Primitive::boxRoom(const Vec3 &center, const Vec3 &halfExtents, double thickness, double amplitude, double edge,
                   ColorFn color)
{
    Primitive p;
    p.kind = PrimitiveKind::BoxRoom;
    p.center = center;
    p.halfExtents = halfExtents;
    p.thickness = thickness;
    p.amplitude = amplitude;
    p.edge = edge;
    p.color = color;
    return p;
}

namespace {

/// 1 well inside (s << 0), 0 well outside; symmetric ramp of width edge around s = 0.
double
inside(double s, double edge)
{
    if (edge <= 0.0) {
        return s < 0.0 ? 1.0 : 0.0;
    }
    return smoothstep(0.5 - s / edge);
}

} // namespace

double
Primitive::occupancy(const Vec3 &p) const
{
    const Vec3 d = p - center;
    switch (kind) {
    case PrimitiveKind::SolidBall:
        return inside(d.norm() - radius, edge);
    case PrimitiveKind::SphereShell: {
        double r = d.norm();
        return inside(r - (radius + thickness), edge) * (1.0 - inside(r - radius, edge));
    }
    case PrimitiveKind::BoxRoom: {
        // Chebyshev distance past the inner box, in units of the wall normal.
        double s = (d.cwiseAbs() - halfExtents).maxCoeff();
        return inside(s - thickness, edge) * (1.0 - inside(s, edge));
    }
    }
    return 0.0;
}

Vec3
EnvColor::eval(const Vec3 &d) const
{
    double z = std::clamp(d.z(), -1.0, 1.0);
    return z >= 0.0 ? horizon + z * (zenith - horizon) : horizon + (-z) * (nadir - horizon);
}

double
SyntheticScene::density(const Vec3 &p) const
{
    double s = 0.0;
    for (const Primitive &q : primitives) {
        s += q.density(p);
    }
    return s;
}

Vec3
SyntheticScene::color(const Vec3 &p) const
{
    Vec3 c = Vec3::Zero();
    double total = 0.0;
    for (const Primitive &q : primitives) {
        double s = q.density(p);
        if (s > 0.0) {
            c += s * q.color.eval(p, q.center);
            total += s;
        }
    }
    return total > 0.0 ? Vec3(c / total) : Vec3::Zero();
}

SyntheticScene
SyntheticScene::room()
{
    SyntheticScene s;
    s.primitives.push_back(Primitive::boxRoom(Vec3::Zero(), Vec3(3.0, 3.0, 2.0), 0.3, 30.0, 0.1,
                                              ColorFn::checker(Vec3(0.85, 0.78, 0.62), Vec3(0.30, 0.42, 0.58), 1.0)));
    s.primitives.push_back(Primitive::solidBall(Vec3(1.5, 0.8, -0.5), 0.6, 30.0, 0.1,
                                                ColorFn::angularGradient(Vec3(0.9, 0.2, 0.15), Vec3(0.95, 0.85, 0.3),
                                                                         Vec3(0.0, 0.0, 1.0))));
    s.primitives.push_back(Primitive::solidBall(Vec3(-1.2, -1.4, 0.3), 0.5, 30.0, 0.1,
                                                ColorFn::checker(Vec3(0.15, 0.35, 0.8), Vec3(0.8, 0.9, 0.95), 0.35)));
    s.env = EnvColor{Vec3(0.6, 0.7, 0.9), Vec3(0.8, 0.8, 0.8), Vec3(0.3, 0.25, 0.2)};
    s.marchDistance = 6.0;
    return s;
}

Vec3
synthRenderRay(const SyntheticScene &scene, const Ray &ray, int steps)
{
    const double dt = scene.marchDistance / steps;
    std::vector<double> sigma(static_cast<size_t>(steps));
    std::vector<Vec3> color(static_cast<size_t>(steps));
    std::vector<double> delta(static_cast<size_t>(steps), dt);
    for (int i = 0; i < steps; ++i) {
        Vec3 p = ray.origin + (i * dt) * ray.direction;
        sigma[i] = scene.density(p);
        color[i] = sigma[i] > 0.0 ? scene.color(p) : Vec3::Zero();
    }
    return composite(sigma, color, delta, scene.env.eval(ray.direction)).rgb;
}

Image
synthRender(const SyntheticScene &scene, const CameraPose &pose, int width, int height, int steps)
{
    if (steps < 64) {
        throw InputError("synthRender needs at least 64 steps per ray");
    }
    if (width <= 0 || height <= 0) {
        throw InputError("synthRender: image size must be positive");
    }
    Image img(width, height);
#pragma omp parallel for schedule(dynamic, 1)
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            img.set(x, y, synthRenderRay(scene, pixelToRay(x, y, width, height, pose), steps));
        }
    }
    return img;
}

std::vector<CameraPose>
circlePoses(int nViews, double radius, uint64_t seed)
{
    if (nViews < 1) {
        throw InputError("need at least one view");
    }
    std::vector<CameraPose> poses;
    for (int i = 0; i < nViews; ++i) {
        double a = 2.0 * kPi * i / nViews;
        Rng rng = Rng::stream(seed, 0x5ca1eULL, static_cast<uint64_t>(i));
        double z = i == 0 ? 0.0 : 0.1 * radius * (2.0 * rng.uniform() - 1.0);
        Mat3 rot = Eigen::AngleAxisd(a, Vec3::UnitZ()).toRotationMatrix();
        poses.push_back(CameraPose::make(rot, Vec3(radius * std::cos(a), radius * std::sin(a), z)));
    }
    return poses;
}

Dataset
makeSyntheticDataset(const SyntheticScene &scene, const SynthOptions &opt, const std::string &dir)
{
    Dataset data;
    data.width = opt.width;
    data.height = opt.height;
    data.rMaxHint = opt.rMaxHint;
    std::vector<CameraPose> poses = circlePoses(opt.nViews, opt.radius, opt.seed);
    for (int i = 0; i < opt.nViews; ++i) {
        Frame f;
        char name[32];
        std::snprintf(name, sizeof name, "view_%03d.png", i);
        f.file = name;
        f.pose = poses[i];
        f.split = i % 2 == 0 ? Split::Train : Split::Test;
        Image img = synthRender(scene, f.pose, opt.width, opt.height, opt.steps);
        // Keep exactly what a reload from disk would produce.
        for (double &v : img.pixels) {
            v = decodeSrgb8(encodeSrgb8(v));
        }
        f.image = std::move(img);
        data.frames.push_back(std::move(f));
    }
    if (!dir.empty()) {
        saveDataset(data, dir);
    }
    return data;
}

} // namespace yyrf
