// Copyright 2026 The yyrf Authors
// SPDX-License-Identifier: Apache-2.0

#include <yyrf/hitmap.hpp>
#include <yyrf/image.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>

namespace yyrf {

void
HitHistogram::summarize()
{
    total = 0;
    nonEmpty = 0;
    for (uint64_t c : counts) {
        total += c;
        nonEmpty += c > 0;
    }
    if (nonEmpty == 0) {
        mean = cv = 0.0;
        return;
    }
    mean = static_cast<double>(total) / static_cast<double>(nonEmpty);
    double ss = 0.0;
    for (uint64_t c : counts) {
        if (c > 0) {
            double d = static_cast<double>(c) - mean;
            ss += d * d;
        }
    }
    cv = std::sqrt(ss / static_cast<double>(nonEmpty)) / mean;
}

CartesianGrid
matchedCartesianGrid(const GridConfig &cfg)
{
    double cells = 2.0 * cfg.nR() * cfg.nTheta() * cfg.nPhi();
    CartesianGrid g;
    g.n = std::max(1, static_cast<int>(std::lround(std::cbrt(cells))));
    g.halfSide = cfg.rMax();
    return g;
}

std::vector<Ray>
equirectRays(std::span<const CameraPose> poses, int width, int height)
{
    std::vector<Ray> rays;
    rays.reserve(poses.size() * static_cast<size_t>(width) * height);
    for (const CameraPose &p : poses) {
        for (int y = 0; y < height; ++y) {
            for (int x = 0; x < width; ++x) {
                rays.push_back(pixelToRay(x, y, width, height, p));
            }
        }
    }
    return rays;
}

std::vector<size_t>
sphericalCellsOnRay(const Ray &ray, const GridConfig &cfg)
{
    std::vector<size_t> cells;
    const double tEnd = sphereExit(ray.origin, ray.direction, cfg.rMax());
    if (!(tEnd > 0.0)) {
        return cells;
    }
    const double angular = std::min(cfg.dTheta(), std::sin(kThetaMin) * cfg.dPhi());
    const double minStep = 0.25 * cfg.r0() * angular;
    const std::vector<double> &shells = cfg.shells();
    double t = 0.0;
    while (true) {
        const Vec3 p = ray.origin + t * ray.direction;
        if (p.squaredNorm() < 1e-24 * cfg.rMax() * cfg.rMax()) {
            // The origin itself has no direction; step off it.
            t = std::min(tEnd, minStep);
            continue;
        }
        GridAssignment a = locate(p, cfg);
        int ir = static_cast<int>(std::lround(a.index.r));
        int it = static_cast<int>(std::lround(a.index.theta));
        int ip = static_cast<int>(std::lround(a.index.phi));
        size_t id = sphericalCell(a.grid, ir, it, ip, cfg);
        if (cells.empty() || cells.back() != id) {
            cells.push_back(id);
        }
        if (t >= tEnd) {
            break;
        }
        int i0 = std::min(static_cast<int>(a.index.r), cfg.nR() - 2);
        double dr = shells[i0 + 1] - shells[i0];
        double step = 0.25 * std::min(dr, a.local.r * angular);
        t = std::min(tEnd, t + std::max(step, minStep));
    }
    std::sort(cells.begin(), cells.end());
    cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
    return cells;
}

std::vector<size_t>
cartesianCellsOnRay(const Ray &ray, const CartesianGrid &grid)
{
    std::vector<size_t> cells;
    const double h = grid.halfSide;
    const double cell = 2.0 * h / grid.n;
    const Vec3 &o = ray.origin;
    const Vec3 &d = ray.direction;
    // Clip the ray to the cube.
    double t0 = 0.0;
    double t1 = std::numeric_limits<double>::infinity();
    for (int a = 0; a < 3; ++a) {
        if (d[a] == 0.0) {
            if (o[a] < -h || o[a] > h) {
                return cells;
            }
            continue;
        }
        double ta = (-h - o[a]) / d[a];
        double tb = (h - o[a]) / d[a];
        t0 = std::max(t0, std::min(ta, tb));
        t1 = std::min(t1, std::max(ta, tb));
    }
    if (!(t1 > t0)) {
        return cells;
    }
    const Vec3 p = o + t0 * d;
    int idx[3], stepDir[3];
    double tMax[3], tDelta[3];
    for (int a = 0; a < 3; ++a) {
        idx[a] = std::clamp(static_cast<int>(std::floor((p[a] + h) / cell)), 0, grid.n - 1);
        if (d[a] > 0.0) {
            stepDir[a] = 1;
            tMax[a] = t0 + ((idx[a] + 1) * cell - h - p[a]) / d[a];
            tDelta[a] = cell / d[a];
        } else if (d[a] < 0.0) {
            stepDir[a] = -1;
            tMax[a] = t0 + (idx[a] * cell - h - p[a]) / d[a];
            tDelta[a] = -cell / d[a];
        } else {
            stepDir[a] = 0;
            tMax[a] = tDelta[a] = std::numeric_limits<double>::infinity();
        }
    }
    while (true) {
        cells.push_back((static_cast<size_t>(idx[2]) * grid.n + idx[1]) * grid.n + idx[0]);
        int a = tMax[0] < tMax[1] ? (tMax[0] < tMax[2] ? 0 : 2) : (tMax[1] < tMax[2] ? 1 : 2);
        if (tMax[a] >= t1) {
            break;
        }
        idx[a] += stepDir[a];
        if (idx[a] < 0 || idx[a] >= grid.n) {
            break;
        }
        tMax[a] += tDelta[a];
    }
    return cells;
}

namespace {

template <typename CellsFn>
HitHistogram
accumulate(std::span<const Ray> rays, size_t cellCount, CellsFn &&cellsOf)
{
    HitHistogram h;
    h.counts.assign(cellCount, 0);
    h.rays = rays.size();
    const long n = static_cast<long>(rays.size());
    // Integer sums: the merge order does not affect the result.
#pragma omp parallel
    {
        std::vector<uint64_t> local(cellCount, 0);
#pragma omp for schedule(dynamic, 256)
        for (long i = 0; i < n; ++i) {
            for (size_t c : cellsOf(rays[i])) {
                ++local[c];
            }
        }
#pragma omp critical
        for (size_t c = 0; c < cellCount; ++c) {
            h.counts[c] += local[c];
        }
    }
    h.summarize();
    return h;
}

std::array<uint8_t, 3>
heat(double x)
{
    x = std::clamp(x, 0.0, 1.0);
    double r = std::clamp(3.0 * x, 0.0, 1.0);
    double g = std::clamp(3.0 * x - 1.0, 0.0, 1.0);
    double b = std::clamp(3.0 * x - 2.0, 0.0, 1.0);
    return {static_cast<uint8_t>(std::lround(255 * r)), static_cast<uint8_t>(std::lround(255 * g)),
            static_cast<uint8_t>(std::lround(255 * b))};
}

void
writeHeat(const std::string &path, int w, int hgt, const std::vector<uint64_t> &vals)
{
    uint64_t mx = vals.empty() ? 0 : *std::max_element(vals.begin(), vals.end());
    double denom = std::log1p(static_cast<double>(mx));
    std::vector<uint8_t> rgb(static_cast<size_t>(w) * hgt * 3);
    for (size_t i = 0; i < vals.size(); ++i) {
        auto c = heat(denom > 0 ? std::log1p(static_cast<double>(vals[i])) / denom : 0.0);
        std::copy(c.begin(), c.end(), rgb.begin() + static_cast<long>(3 * i));
    }
    writePng8(path, w, hgt, rgb);
}

std::ofstream
openCsv(const std::string &path)
{
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write " + path);
    }
    return out;
}

} // namespace

HitHistogram
sphericalHits(std::span<const Ray> rays, const GridConfig &cfg)
{
    size_t cells = 2ULL * cfg.nR() * cfg.nTheta() * cfg.nPhi();
    return accumulate(rays, cells, [&](const Ray &r) { return sphericalCellsOnRay(r, cfg); });
}

HitHistogram
cartesianHits(std::span<const Ray> rays, const CartesianGrid &grid)
{
    return accumulate(rays, grid.cellCount(), [&](const Ray &r) { return cartesianCellsOnRay(r, grid); });
}

void
writeSphericalCsv(const std::string &path, const HitHistogram &h, const GridConfig &cfg)
{
    std::ofstream out = openCsv(path);
    out << "grid,i_r,i_theta,i_phi,count\n";
    for (GridId g : kGridIds) {
        for (int i = 0; i < cfg.nR(); ++i) {
            for (int j = 0; j < cfg.nTheta(); ++j) {
                for (int k = 0; k < cfg.nPhi(); ++k) {
                    out << gridName(g) << ',' << i << ',' << j << ',' << k << ','
                        << h.counts[sphericalCell(g, i, j, k, cfg)] << '\n';
                }
            }
        }
    }
}

void
writeCartesianCsv(const std::string &path, const HitHistogram &h, const CartesianGrid &grid)
{
    std::ofstream out = openCsv(path);
    out << "i_x,i_y,i_z,count\n";
    size_t c = 0;
    for (int z = 0; z < grid.n; ++z) {
        for (int y = 0; y < grid.n; ++y) {
            for (int x = 0; x < grid.n; ++x) {
                out << x << ',' << y << ',' << z << ',' << h.counts[c++] << '\n';
            }
        }
    }
}

void
writeSphericalSlicePng(const std::string &path, const HitHistogram &h, const GridConfig &cfg, int shell)
{
    if (shell < 0 || shell >= cfg.nR()) {
        throw InputError("shell index out of range");
    }
    std::vector<uint64_t> vals;
    for (GridId g : kGridIds) {
        for (int j = 0; j < cfg.nTheta(); ++j) {
            for (int k = 0; k < cfg.nPhi(); ++k) {
                vals.push_back(h.counts[sphericalCell(g, shell, j, k, cfg)]);
            }
        }
    }
    writeHeat(path, cfg.nPhi(), 2 * cfg.nTheta(), vals);
}

void
writeCartesianSlicePng(const std::string &path, const HitHistogram &h, const CartesianGrid &grid)
{
    const size_t n = static_cast<size_t>(grid.n);
    const size_t z = n / 2;
    std::vector<uint64_t> vals(h.counts.begin() + static_cast<long>(z * n * n),
                               h.counts.begin() + static_cast<long>((z + 1) * n * n));
    writeHeat(path, grid.n, grid.n, vals);
}

} // namespace yyrf
