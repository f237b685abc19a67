// Copyright 2026 The yyrf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <yyrf/geometry.hpp>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace yyrf {

/// Per-cell counts of rays passing through each cell (each cell at most once
/// per ray) plus summary statistics over non-empty cells.
struct HitHistogram
{
    std::vector<uint64_t> counts;
    uint64_t rays = 0;
    uint64_t total = 0; ///< sum of per-ray traversed-cell counts
    size_t nonEmpty = 0;
    double mean = 0.0;
    double cv = 0.0; ///< population std / mean over non-empty cells

    void summarize();
};

/// Axis-aligned cube [-halfSide, halfSide]^3 split into n^3 cells.
struct CartesianGrid
{
    int n = 1;
    double halfSide = 1.0;

    size_t cellCount() const { return static_cast<size_t>(n) * n * n; }
};

/// Cube of side 2 rMax whose cell count is closest to 2 nR nTheta nPhi.
CartesianGrid matchedCartesianGrid(const GridConfig &cfg);

/// Flat index of spherical cell (grid, ir, itheta, iphi).
inline size_t
sphericalCell(GridId g, int ir, int it, int ip, const GridConfig &cfg)
{
    return ((static_cast<size_t>(gridIndex(g)) * cfg.nR() + ir) * cfg.nTheta() + it) * cfg.nPhi() + ip;
}

/// Every pixel ray of every pose at width x height.
std::vector<Ray> equirectRays(std::span<const CameraPose> poses, int width, int height);

/// Distinct cells (sorted) visited by one ray from t = 0 to the rMax sphere.
/// Marches with steps of a quarter of the local cell size, so cells clipped
/// over less than that may be missed.
std::vector<size_t> sphericalCellsOnRay(const Ray &ray, const GridConfig &cfg);

/// Exact voxel traversal of the cube from t = 0, in visiting order.
std::vector<size_t> cartesianCellsOnRay(const Ray &ray, const CartesianGrid &grid);

HitHistogram sphericalHits(std::span<const Ray> rays, const GridConfig &cfg);
HitHistogram cartesianHits(std::span<const Ray> rays, const CartesianGrid &grid);

/// CSV rows grid,i_r,i_theta,i_phi,count for every cell.
void writeSphericalCsv(const std::string &path, const HitHistogram &h, const GridConfig &cfg);
/// CSV rows i_x,i_y,i_z,count for every cell.
void writeCartesianCsv(const std::string &path, const HitHistogram &h, const CartesianGrid &grid);

/// Heat image (log scale) of one radial shell: Yin (theta x phi) stacked
/// above Yang.
void writeSphericalSlicePng(const std::string &path, const HitHistogram &h, const GridConfig &cfg, int shell);
/// Heat image (log scale) of the z slice through the cube centre.
void writeCartesianSlicePng(const std::string &path, const HitHistogram &h, const CartesianGrid &grid);

} // namespace yyrf
