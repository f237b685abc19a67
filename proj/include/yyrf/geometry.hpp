// Copyright 2026 The yyrf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>

#include <array>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace yyrf {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Thrown for violated preconditions on caller-supplied values.
class InputError : public std::invalid_argument
{
public:
    using std::invalid_argument::invalid_argument;
};

inline constexpr double kPi = std::numbers::pi;

/// Angular extent of one component grid: theta in [pi/4, 3pi/4], phi in [-3pi/4, 3pi/4].
inline constexpr double kThetaMin = kPi / 4.0;
inline constexpr double kThetaMax = 3.0 * kPi / 4.0;
inline constexpr double kPhiMax = 3.0 * kPi / 4.0;

enum class GridId : int { Yin = 0, Yang = 1 };

inline constexpr std::array<GridId, 2> kGridIds{GridId::Yin, GridId::Yang};

inline int
gridIndex(GridId id)
{
    return static_cast<int>(id);
}

const char *gridName(GridId id);

/// Geometry of the balanced spherical grid. Each of the two component grids
/// has nR x nTheta x nPhi nodes; radial shells grow exponentially with a
/// minimum spacing of r0.
class GridConfig
{
public:
    /// Validates the resolutions and radii and solves for the growth factor.
    /// Requires rMax > nR * r0 so that shells spaced at least r0 apart can
    /// reach rMax.
    static GridConfig make(int nR, int nTheta, int nPhi, double r0, double rMax);

    /// Resolution with nR : nTheta : nPhi = 1 : 2/sqrt(3) : 2 sqrt(3), rounded.
    static GridConfig withBalancedRatio(int nR, double r0, double rMax);

    int nR() const { return mNR; }
    int nTheta() const { return mNTheta; }
    int nPhi() const { return mNPhi; }
    double r0() const { return mR0; }
    double rMax() const { return mRMax; }
    double growth() const { return mGrowth; }
    double dTheta() const { return (kPi / 2.0) / mNTheta; }
    double dPhi() const { return (3.0 * kPi / 2.0) / mNPhi; }

    /// Shell radii, shells()[0] == r0 and shells().back() == rMax.
    const std::vector<double> &shells() const { return mShells; }

    bool operator==(const GridConfig &o) const
    {
        return mNR == o.mNR && mNTheta == o.mNTheta && mNPhi == o.mNPhi && mR0 == o.mR0 &&
               mRMax == o.mRMax;
    }

    std::string describe() const;

private:
    GridConfig() = default;

    int mNR = 0;
    int mNTheta = 0;
    int mNPhi = 0;
    double mR0 = 0.0;
    double mRMax = 0.0;
    double mGrowth = 0.0;
    std::vector<double> mShells;
};

/// Shell radii for a given growth factor: s[0] = r0, s[i] = max(s[i-1] + r0, r0 k^i).
std::vector<double> shellRadii(int nR, double r0, double growth);

struct LocalSpherical
{
    double r = 0.0;
    double theta = kPi / 2.0; ///< colatitude
    double phi = 0.0;         ///< longitude
};

/// Continuous node coordinates; node i sits at coordinate i.
struct GridIndex
{
    double r = 0.0;
    double theta = 0.0;
    double phi = 0.0;
};

struct GridAssignment
{
    GridId grid = GridId::Yin;
    LocalSpherical local;
    GridIndex index;
};

struct Ray
{
    Vec3 origin = Vec3::Zero();
    Vec3 direction = Vec3::UnitX();
    double tNear = 0.0;
    double tFar = std::numeric_limits<double>::infinity();
};

/// Rigid camera-to-world transform.
class CameraPose
{
public:
    CameraPose() = default;

    /// Throws InputError unless rotation is orthonormal with det +1 within tol.
    static CameraPose make(const Mat3 &rotation, const Vec3 &translation, double tol = 1e-9);
    /// Rows of a 4x4 row-major camera-to-world matrix.
    static CameraPose fromMatrix(const Eigen::Matrix4d &m, double tol = 1e-9);

    const Mat3 &rotation() const { return mRotation; }
    const Vec3 &translation() const { return mTranslation; }
    Eigen::Matrix4d matrix() const;

private:
    Mat3 mRotation = Mat3::Identity();
    Vec3 mTranslation = Vec3::Zero();
};

LocalSpherical cartesianToSpherical(const Vec3 &p);
Vec3 sphericalToCartesian(const LocalSpherical &s);

/// Multiplies by M = [[-1,0,0],[0,0,1],[0,1,0]]. M is its own inverse, so the
/// same map converts Yin coordinates to Yang coordinates.
inline Vec3
yangToYin(const Vec3 &p)
{
    return Vec3(-p.x(), p.z(), p.y());
}

inline Vec3
yinToYang(const Vec3 &p)
{
    return yangToYin(p);
}

/// Point expressed in the frame of the given component grid.
inline Vec3
toGridFrame(const Vec3 &p, GridId id)
{
    return id == GridId::Yin ? p : yinToYang(p);
}

inline Vec3
fromGridFrame(const Vec3 &p, GridId id)
{
    return id == GridId::Yin ? p : yangToYin(p);
}

/// Signed distance (in radians) to the nearest angular boundary of a component
/// grid; non-negative inside.
double angularMargin(const LocalSpherical &s);

/// Assigns p to Yin or Yang (larger angular margin, ties to Yin) and computes
/// its clamped continuous grid coordinates.
GridAssignment locate(const Vec3 &p, const GridConfig &cfg);

/// Continuous radial coordinate in [0, nR-1]; linear between shells, clamped outside.
double radiusToIndex(double r, const GridConfig &cfg);
double indexToRadius(double u, const GridConfig &cfg);

/// Cell-centred angular coordinates: theta = pi/4 + (u + 1/2) dTheta.
std::pair<double, double> anglesToIndex(double theta, double phi, const GridConfig &cfg);
std::pair<double, double> indexToAngles(double uTheta, double uPhi, const GridConfig &cfg);

/// Unit direction for equirectangular image coordinates (column u, row v,
/// both continuous, pixel centres at +0.5) in the camera frame.
Vec3 equirectDirection(double u, double v, int width, int height);

/// Inverse of equirectDirection: continuous (column, row) for a unit direction.
std::pair<double, double> directionToEquirect(const Vec3 &d, int width, int height);

/// World-space ray through the centre of pixel (u, v).
Ray pixelToRay(int u, int v, int width, int height, const CameraPose &pose);

/// Parameter t at which origin + t * direction leaves the sphere of the given
/// radius, or a negative value when the ray never reaches the sphere interior.
double sphereExit(const Vec3 &origin, const Vec3 &direction, double radius);

} // namespace yyrf
