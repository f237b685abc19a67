// Copyright 2026 The yyrf Authors
// SPDX-License-Identifier: Apache-2.0

#include <yyrf/geometry.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace yyrf {

const char *
gridName(GridId id)
{
    return id == GridId::Yin ? "yin" : "yang";
}

std::vector<double>
shellRadii(int nR, double r0, double growth)
{
    std::vector<double> s(static_cast<size_t>(nR));
    s[0] = r0;
    double expo = r0;
    for (int i = 1; i < nR; ++i) {
        expo *= growth;
        s[i] = std::max(s[i - 1] + r0, expo);
    }
    return s;
}

GridConfig
GridConfig::make(int nR, int nTheta, int nPhi, double r0, double rMax)
{
    if (nR < 2 || nTheta < 2 || nPhi < 2) {
        throw InputError("grid resolution must be at least 2 along every axis");
    }
    if (!(r0 > 0.0) || !std::isfinite(r0) || !std::isfinite(rMax)) {
        throw InputError("r0 must be positive and finite");
    }
    if (!(rMax > nR * r0)) {
        std::ostringstream os;
        os << "rMax (" << rMax << ") must exceed nR * r0 (" << nR * r0
           << ") so that shells spaced at least r0 apart reach it";
        throw InputError(os.str());
    }

    GridConfig cfg;
    cfg.mNR = nR;
    cfg.mNTheta = nTheta;
    cfg.mNPhi = nPhi;
    cfg.mR0 = r0;
    cfg.mRMax = rMax;

    // Closed form first; if the r0 floor still dominates at the outer shell,
    // shrink k by bisection until the outermost shell lands on rMax.
    double k = std::pow(rMax / r0, 1.0 / (nR - 1));
    auto outer = [&](double g) { return shellRadii(nR, r0, g).back(); };
    if (outer(k) > rMax * (1.0 + 1e-12)) {
        double lo = 1.0, hi = k;
        for (int it = 0; it < 200; ++it) {
            double mid = 0.5 * (lo + hi);
            (outer(mid) < rMax ? lo : hi) = mid;
        }
        k = hi;
    }
    cfg.mGrowth = k;
    cfg.mShells = shellRadii(nR, r0, k);
    cfg.mShells.back() = rMax;
    return cfg;
}

GridConfig
GridConfig::withBalancedRatio(int nR, double r0, double rMax)
{
    const double s3 = std::sqrt(3.0);
    int nTheta = static_cast<int>(std::lround(nR * 2.0 / s3));
    int nPhi = static_cast<int>(std::lround(nR * 2.0 * s3));
    return make(nR, nTheta, nPhi, r0, rMax);
}

std::string
GridConfig::describe() const
{
    std::ostringstream os;
    os << mNR << "x" << mNTheta << "x" << mNPhi << " r0=" << mR0 << " rMax=" << mRMax
       << " k=" << mGrowth;
    return os.str();
}

CameraPose
CameraPose::make(const Mat3 &rotation, const Vec3 &translation, double tol)
{
    if (!rotation.allFinite() || !translation.allFinite()) {
        throw InputError("camera pose has non-finite entries");
    }
    double orthoErr = (rotation.transpose() * rotation - Mat3::Identity()).cwiseAbs().maxCoeff();
    if (orthoErr > tol) {
        throw InputError("camera rotation is not orthonormal (max |R^T R - I| = " +
                         std::to_string(orthoErr) + ")");
    }
    if (std::abs(rotation.determinant() - 1.0) > tol) {
        throw InputError("camera rotation must have determinant +1");
    }
    CameraPose p;
    p.mRotation = rotation;
    p.mTranslation = translation;
    return p;
}

CameraPose
CameraPose::fromMatrix(const Eigen::Matrix4d &m, double tol)
{
    if (std::abs(m(3, 0)) > tol || std::abs(m(3, 1)) > tol || std::abs(m(3, 2)) > tol ||
        std::abs(m(3, 3) - 1.0) > tol) {
        throw InputError("pose matrix bottom row must be [0 0 0 1]");
    }
    return make(m.topLeftCorner<3, 3>(), m.topRightCorner<3, 1>(), tol);
}

Eigen::Matrix4d
CameraPose::matrix() const
{
    Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
    m.topLeftCorner<3, 3>() = mRotation;
    m.topRightCorner<3, 1>() = mTranslation;
    return m;
}

LocalSpherical
cartesianToSpherical(const Vec3 &p)
{
    LocalSpherical s;
    s.r = p.norm();
    if (s.r <= 1e-300) {
        return s; // origin: theta = pi/2, phi = 0 by convention
    }
    s.theta = std::acos(std::clamp(p.z() / s.r, -1.0, 1.0));
    s.phi = std::atan2(p.y(), p.x());
    return s;
}

Vec3
sphericalToCartesian(const LocalSpherical &s)
{
    double st = std::sin(s.theta);
    return {s.r * st * std::cos(s.phi), s.r * st * std::sin(s.phi), s.r * std::cos(s.theta)};
}

double
angularMargin(const LocalSpherical &s)
{
    return std::min({kPhiMax - std::abs(s.phi), s.theta - kThetaMin, kThetaMax - s.theta});
}

double
radiusToIndex(double r, const GridConfig &cfg)
{
    const auto &sh = cfg.shells();
    if (r <= sh.front()) {
        return 0.0;
    }
    if (r >= sh.back()) {
        return static_cast<double>(sh.size() - 1);
    }
    auto it = std::upper_bound(sh.begin(), sh.end(), r);
    auto i = static_cast<size_t>(it - sh.begin()) - 1;
    return static_cast<double>(i) + (r - sh[i]) / (sh[i + 1] - sh[i]);
}

double
indexToRadius(double u, const GridConfig &cfg)
{
    const auto &sh = cfg.shells();
    const double last = static_cast<double>(sh.size() - 1);
    u = std::clamp(u, 0.0, last);
    auto i = std::min(static_cast<size_t>(u), sh.size() - 2);
    double f = u - static_cast<double>(i);
    return sh[i] + f * (sh[i + 1] - sh[i]);
}

std::pair<double, double>
anglesToIndex(double theta, double phi, const GridConfig &cfg)
{
    return {(theta - kThetaMin) / cfg.dTheta() - 0.5, (phi + kPhiMax) / cfg.dPhi() - 0.5};
}

std::pair<double, double>
indexToAngles(double uTheta, double uPhi, const GridConfig &cfg)
{
    return {kThetaMin + (uTheta + 0.5) * cfg.dTheta(), -kPhiMax + (uPhi + 0.5) * cfg.dPhi()};
}

GridAssignment
locate(const Vec3 &p, const GridConfig &cfg)
{
    LocalSpherical yin = cartesianToSpherical(p);
    LocalSpherical yang = cartesianToSpherical(yinToYang(p));

    GridAssignment a;
    if (angularMargin(yang) > angularMargin(yin)) {
        a.grid = GridId::Yang;
        a.local = yang;
    } else {
        a.grid = GridId::Yin;
        a.local = yin;
    }
    // Rounding can leave a boundary point a few ulps outside; pin it back.
    a.local.theta = std::clamp(a.local.theta, kThetaMin, kThetaMax);
    a.local.phi = std::clamp(a.local.phi, -kPhiMax, kPhiMax);

    auto [ut, up] = anglesToIndex(a.local.theta, a.local.phi, cfg);
    a.index.r = radiusToIndex(a.local.r, cfg);
    a.index.theta = std::clamp(ut, 0.0, static_cast<double>(cfg.nTheta() - 1));
    a.index.phi = std::clamp(up, 0.0, static_cast<double>(cfg.nPhi() - 1));
    return a;
}

Vec3
equirectDirection(double u, double v, int width, int height)
{
    double phi = 2.0 * kPi * u / width - kPi;
    double theta = kPi * v / height;
    double st = std::sin(theta);
    return {st * std::cos(phi), st * std::sin(phi), std::cos(theta)};
}

std::pair<double, double>
directionToEquirect(const Vec3 &d, int width, int height)
{
    double theta = std::acos(std::clamp(d.z(), -1.0, 1.0));
    double phi = std::atan2(d.y(), d.x());
    return {(phi + kPi) / (2.0 * kPi) * width, theta / kPi * height};
}

Ray
pixelToRay(int u, int v, int width, int height, const CameraPose &pose)
{
    if (width <= 0 || height <= 0 || u < 0 || u >= width || v < 0 || v >= height) {
        throw InputError("pixel (" + std::to_string(u) + ", " + std::to_string(v) +
                         ") outside " + std::to_string(width) + "x" + std::to_string(height));
    }
    Ray ray;
    ray.origin = pose.translation();
    ray.direction = (pose.rotation() * equirectDirection(u + 0.5, v + 0.5, width, height)).normalized();
    return ray;
}

double
sphereExit(const Vec3 &origin, const Vec3 &direction, double radius)
{
    double b = origin.dot(direction);
    double c = origin.squaredNorm() - radius * radius;
    double disc = b * b - c;
    if (disc < 0.0) {
        return -1.0;
    }
    return -b + std::sqrt(disc);
}

} // namespace yyrf
