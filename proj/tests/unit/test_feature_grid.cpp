// Copyright 2026 The yyrf Authors
// SPDX-License-Identifier: Apache-2.0

#include "oracles.hpp"

#include <doctest.h>

#include <yyrf/feature_grid.hpp>

using namespace yyrf;

namespace {

GridConfig
smallConfig(int nR, int nT, int nP)
{
    return GridConfig::make(nR, nT, nP, 0.1, 0.1 * nR * 4);
}

bool
close(double a, double b, double rel = 1e-5)
{
    return std::abs(a - b) <= rel * (1.0 + std::abs(b));
}

} // namespace

TEST_CASE("materialize: single outer product")
{
    GridConfig cfg = smallConfig(4, 5, 6);
    FactorizedGrid g(cfg, 1, 1, 1);
    FactorSet &d = g.density(GridId::Yin);
    d.vec(0, 0, 2) = 1.0;
    d.mat(0, 0, 3, 4) = 1.0;
    DenseTensor t = materialize(g, FieldKind::Density, GridId::Yin);
    REQUIRE(t.shape == std::vector<int>{4, 5, 6});
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 5; ++j) {
            for (int k = 0; k < 6; ++k) {
                CHECK(t.at(i, j, k) == (i == 2 && j == 3 && k == 4 ? 1.0 : 0.0));
            }
        }
    }
    DenseTensor z = materialize(g, FieldKind::Density, GridId::Yang);
    for (double v : z.values) {
        CHECK(v == 0.0);
    }
}

TEST_CASE("materialize matches direct summation")
{
    GridConfig cfg = smallConfig(4, 5, 6);
    FactorizedGrid g = FactorizedGrid::random(cfg, 3, 2, 4, 21, 0.5);
    for (GridId y : kGridIds) {
        oracle::Dense ref = oracle::expand(g.density(y));
        DenseTensor t = materialize(g, FieldKind::Density, y);
        for (int i = 0; i < 4; ++i) {
            for (int j = 0; j < 5; ++j) {
                for (int k = 0; k < 6; ++k) {
                    CHECK(close(t.at(i, j, k), ref.at(i, j, k), 1e-12));
                }
            }
        }
        DenseTensor a = materialize(g, FieldKind::Appearance, y);
        REQUIRE(a.shape == std::vector<int>{4, 5, 6, 4});
        for (int ch = 0; ch < 4; ++ch) {
            oracle::Dense rc = oracle::expandChannel(g, y, ch);
            for (int i = 0; i < 4; ++i) {
                for (int j = 0; j < 5; ++j) {
                    for (int k = 0; k < 6; ++k) {
                        CHECK(close(a.at(i, j, k, ch), rc.at(i, j, k), 1e-12));
                    }
                }
            }
        }
    }
}

TEST_CASE("materialize refuses large grids")
{
    GridConfig cfg = GridConfig::make(100, 100, 101, 0.01, 10.0);
    FactorizedGrid g(cfg, 1, 1, 1);
    CHECK_THROWS_AS(materialize(g, FieldKind::Density, GridId::Yin), InputError);
}

TEST_CASE("density query equals trilinear interpolation of the dense tensor")
{
    GridConfig cfg = smallConfig(6, 8, 10);
    FactorizedGrid g = FactorizedGrid::random(cfg, 3, 2, 4, 5, 0.5);
    std::array<oracle::Dense, 2> dense{oracle::expand(g.density(GridId::Yin)),
                                       oracle::expand(g.density(GridId::Yang))};
    Rng rng(17);
    for (int i = 0; i < 200; ++i) {
        Vec3 p = oracle::randomPoint(rng, cfg.rMax() * 1.1);
        GridAssignment a = locate(p, cfg);
        double ref = oracle::trilinear(dense[gridIndex(a.grid)], a.index.r, a.index.theta, a.index.phi);
        CHECK(close(queryDensity(g, p), ref));
    }
}

TEST_CASE("density query at a node returns the stored value")
{
    GridConfig cfg = smallConfig(6, 8, 10);
    FactorizedGrid g = FactorizedGrid::random(cfg, 2, 2, 2, 8, 0.5);
    auto [theta, phi] = indexToAngles(3.0, 4.0, cfg);
    double r = indexToRadius(2.0, cfg);
    Vec3 p = sphericalToCartesian({r, theta, phi});
    REQUIRE(locate(p, cfg).grid == GridId::Yin);
    CHECK(close(queryDensity(g, p), g.density(GridId::Yin).node(2, 3, 4), 1e-9));
}

TEST_CASE("constant rank-1 grid gives a constant field")
{
    GridConfig cfg = smallConfig(5, 6, 7);
    FactorizedGrid g(cfg, 1, 1, 1);
    // Only the R mode is active: v = 1, M = s.
    for (GridId y : kGridIds) {
        FactorSet &d = g.density(y);
        std::fill(d.vectors(0).begin(), d.vectors(0).end(), 1.0);
        std::fill(d.matrices(0).begin(), d.matrices(0).end(), 2.5);
    }
    Rng rng(2);
    for (int i = 0; i < 50; ++i) {
        Vec3 p = oracle::randomPoint(rng, 3.0);
        CHECK(queryDensity(g, p) == doctest::Approx(2.5));
        CHECK(queryDensityCoarse(g, p, 2) == doctest::Approx(2.5));
    }
}

TEST_CASE("appearance query matches the per-channel oracle")
{
    GridConfig cfg = smallConfig(5, 6, 7);
    FactorizedGrid g = FactorizedGrid::random(cfg, 2, 3, 4, 33, 0.5);
    std::array<std::vector<oracle::Dense>, 2> dense;
    for (GridId y : kGridIds) {
        for (int ch = 0; ch < 4; ++ch) {
            dense[gridIndex(y)].push_back(oracle::expandChannel(g, y, ch));
        }
    }
    Rng rng(4);
    for (int i = 0; i < 200; ++i) {
        Vec3 p = oracle::randomPoint(rng, cfg.rMax());
        GridAssignment a = locate(p, cfg);
        Eigen::VectorXd f = queryAppearance(g, p);
        REQUIRE(f.size() == 4);
        for (int ch = 0; ch < 4; ++ch) {
            double ref = oracle::trilinear(dense[gridIndex(a.grid)][ch], a.index.r, a.index.theta, a.index.phi);
            CHECK(close(f(ch), ref));
        }
    }
}

TEST_CASE("appearance basis collapse")
{
    GridConfig cfg = smallConfig(5, 6, 7);
    FactorizedGrid g = FactorizedGrid::random(cfg, 2, 3, 1, 9, 0.5);
    g.basis().setZero();
    Rng rng(6);
    Vec3 p = oracle::randomPoint(rng, 1.0);
    CHECK(queryAppearance(g, p).norm() == 0.0);

    // C = 1 with an all-ones basis is the density-style scalar query of the
    // appearance factors.
    g.basis().setOnes();
    for (int i = 0; i < 50; ++i) {
        Vec3 q = oracle::randomPoint(rng, 2.0);
        GridAssignment a = locate(q, cfg);
        double v = g.appearance(a.grid).value(pointStencil(a.index, g.appearance(a.grid).dims()));
        CHECK(queryAppearance(g, q)(0) == doctest::Approx(v));
    }
}

TEST_CASE("query is linear in the vector factors")
{
    GridConfig cfg = smallConfig(5, 6, 7);
    FactorizedGrid a = FactorizedGrid::random(cfg, 2, 2, 2, 1, 0.5);
    FactorizedGrid b = FactorizedGrid::random(cfg, 2, 2, 2, 2, 0.5);
    FactorizedGrid c(cfg, 2, 2, 2);
    std::vector<std::span<const double>> as, bs;
    a.forEachTensor([&](const std::string &, std::span<const double> t) { as.push_back(t); });
    b.forEachTensor([&](const std::string &, std::span<const double> t) { bs.push_back(t); });
    // Matrices are shared, so the query is linear in the vectors alone.
    size_t idx = 0;
    c.forEachTensor([&](const std::string &name, std::span<double> t) {
        const bool vec = name.find(".vec.") != std::string::npos;
        for (size_t i = 0; i < t.size(); ++i) {
            t[i] = vec ? 2.0 * as[idx][i] - 0.5 * bs[idx][i] : as[idx][i];
        }
        ++idx;
    });
    idx = 0;
    b.forEachTensor([&](const std::string &name, std::span<double> t) {
        if (name.find(".vec.") == std::string::npos) {
            std::copy(as[idx].begin(), as[idx].end(), t.begin());
        }
        ++idx;
    });
    Rng rng(3);
    for (int i = 0; i < 50; ++i) {
        Vec3 p = oracle::randomPoint(rng, 2.0);
        CHECK(queryDensity(c, p) == doctest::Approx(2.0 * queryDensity(a, p) - 0.5 * queryDensity(b, p)));
    }
}

TEST_CASE("coarse density equals pool-then-interpolate")
{
    Rng rng(12);
    for (int trial = 0; trial < 5; ++trial) {
        GridConfig cfg = smallConfig(8, 8, 8);
        FactorizedGrid g = FactorizedGrid::random(cfg, 3, 1, 1, 100 + trial, 0.5);
        std::array<oracle::Dense, 2> pooled{oracle::pool(oracle::expand(g.density(GridId::Yin)), {2, 2, 2}),
                                            oracle::pool(oracle::expand(g.density(GridId::Yang)), {2, 2, 2})};
        for (int i = 0; i < 100; ++i) {
            Vec3 p = oracle::randomPoint(rng, cfg.rMax());
            GridAssignment a = locate(p, cfg);
            // Coarse node j is the centre of fine nodes 2j and 2j+1.
            auto cc = [](double u) { return (u + 0.5) / 2.0 - 0.5; };
            double ref = oracle::trilinear(pooled[gridIndex(a.grid)], cc(a.index.r), cc(a.index.theta),
                                           cc(a.index.phi));
            CHECK(close(queryDensityCoarse(g, p, 2), ref));
        }
    }
}

TEST_CASE("coarse density with kernel 1 is the fine query")
{
    GridConfig cfg = smallConfig(6, 7, 9);
    FactorizedGrid g = FactorizedGrid::random(cfg, 2, 1, 1, 44, 0.5);
    Rng rng(1);
    for (int i = 0; i < 100; ++i) {
        Vec3 p = oracle::randomPoint(rng, cfg.rMax());
        CHECK(queryDensityCoarse(g, p, 1) == doctest::Approx(queryDensity(g, p)).epsilon(1e-12));
    }
}

TEST_CASE("pooling kernel is clamped to the axis length")
{
    GridConfig cfg = smallConfig(3, 4, 4);
    FactorizedGrid g = FactorizedGrid::random(cfg, 2, 1, 1, 4, 0.5);
    CoarseDensity cd = poolDensity(g, 10);
    CHECK(cd.kernels == std::array<int, 3>{3, 4, 4});
    CHECK(cd.factors[0].dims() == std::array<int, 3>{1, 1, 1});
    // One coarse node: the mean of the whole tensor.
    oracle::Dense t = oracle::expand(g.density(GridId::Yin));
    double mean = 0.0;
    for (double v : t.v) {
        mean += v;
    }
    mean /= static_cast<double>(t.v.size());
    CHECK(cd.factors[0].node(0, 0, 0) == doctest::Approx(mean));
    CHECK_THROWS_AS(poolDensity(g, 0), InputError);
}

TEST_CASE("TV penalty")
{
    GridConfig cfg = smallConfig(3, 3, 3);
    FactorizedGrid g(cfg, 1, 1, 1);
    g.fill(0.7);
    CHECK(tvPenalty(g) == 0.0);

    FactorizedGrid one(cfg, 1, 1, 1);
    FactorSet &d = one.density(GridId::Yin);
    d.vec(0, 0, 0) = 0.0;
    d.vec(0, 0, 1) = 1.0;
    d.vec(0, 0, 2) = 2.0;
    CHECK(tvPenalty(one) == 2.0);

    FactorizedGrid r = FactorizedGrid::random(smallConfig(4, 5, 6), 2, 3, 2, 77, 0.5);
    double ref = 0.0;
    for (GridId y : kGridIds) {
        for (const FactorSet *fs : {&r.density(y), &r.appearance(y)}) {
            for (int m = 0; m < 3; ++m) {
                for (int c = 0; c < fs->comps(); ++c) {
                    for (int i = 0; i + 1 < fs->vecLen(m); ++i) {
                        ref += std::pow(fs->vec(m, c, i + 1) - fs->vec(m, c, i), 2);
                    }
                    for (int j = 0; j < fs->matRows(m); ++j) {
                        for (int k = 0; k < fs->matCols(m); ++k) {
                            if (j + 1 < fs->matRows(m)) {
                                ref += std::pow(fs->mat(m, c, j + 1, k) - fs->mat(m, c, j, k), 2);
                            }
                            if (k + 1 < fs->matCols(m)) {
                                ref += std::pow(fs->mat(m, c, j, k + 1) - fs->mat(m, c, j, k), 2);
                            }
                        }
                    }
                }
            }
        }
    }
    CHECK(tvPenalty(r) == doctest::Approx(ref).epsilon(1e-12));
}

TEST_CASE("TV gradient matches finite differences and vanishes on constants")
{
    GridConfig cfg = smallConfig(3, 4, 5);
    FactorizedGrid g(cfg, 1, 1, 1);
    g.fill(0.3);
    FactorizedGrid zero(cfg, 1, 1, 1);
    addTvGradient(g, 1.0, zero);
    zero.forEachTensor([](const std::string &, std::span<const double> t) {
        for (double v : t) {
            CHECK(v == 0.0);
        }
    });

    FactorizedGrid r = FactorizedGrid::random(cfg, 2, 2, 2, 3, 0.5);
    FactorizedGrid grad(cfg, 2, 2, 2);
    addTvGradient(r, 0.5, grad);
    std::vector<std::span<double>> ps;
    std::vector<std::span<const double>> gs;
    r.forEachTensor([&](const std::string &, std::span<double> t) { ps.push_back(t); });
    grad.forEachTensor([&](const std::string &, std::span<const double> t) { gs.push_back(t); });
    Rng rng(8);
    for (int trial = 0; trial < 40; ++trial) {
        size_t ti = rng.below(ps.size() - 1); // basis has no TV
        size_t i = rng.below(ps[ti].size());
        const double h = 1e-4, x0 = ps[ti][i];
        ps[ti][i] = x0 + h;
        double up = 0.5 * tvPenalty(r);
        ps[ti][i] = x0 - h;
        double dn = 0.5 * tvPenalty(r);
        ps[ti][i] = x0;
        CHECK(gs[ti][i] == doctest::Approx((up - dn) / (2 * h)).epsilon(1e-6));
    }
}

TEST_CASE("parameter count grows with faces, not volume")
{
    GridConfig cfg = GridConfig::make(20, 23, 69, 0.03, 15.0);
    FactorizedGrid g(cfg, 4, 6, 5);
    size_t per = 0;
    for (int m = 0; m < 3; ++m) {
        per += static_cast<size_t>(g.density(GridId::Yin).vecLen(m)) +
               static_cast<size_t>(g.density(GridId::Yin).matRows(m)) * g.density(GridId::Yin).matCols(m);
    }
    CHECK(g.parameterCount() == 2 * (4 + 6) * per + 5 * 36);
    // A dense grid would hold every component at every node of both grids.
    CHECK(g.parameterCount() < static_cast<size_t>(2) * (4 + 6) * 20 * 23 * 69 / 8);
}

TEST_CASE("environment map lookup")
{
    EnvironmentMap c(4, 8, 0.3);
    Rng rng(1);
    for (int i = 0; i < 20; ++i) {
        Vec3 d = oracle::randomPoint(rng, 1.0).normalized();
        Vec3 v = envFetch(c, d);
        CHECK(v.x() == doctest::Approx(sigmoid(0.3)));
    }
    EnvironmentMap single(1, 1);
    single.at(0, 0, 0) = 1.0;
    single.at(0, 0, 1) = -2.0;
    single.at(0, 0, 2) = 0.5;
    for (int i = 0; i < 20; ++i) {
        Vec3 d = oracle::randomPoint(rng, 1.0).normalized();
        Vec3 v = envFetch(single, d);
        CHECK(v.x() == doctest::Approx(sigmoid(1.0)));
        CHECK(v.y() == doctest::Approx(sigmoid(-2.0)));
        CHECK(v.z() == doctest::Approx(sigmoid(0.5)));
    }

    // +z maps to column 4 of 8 (texel centres at 3.5 and 4.5) on the top row:
    // an even blend of texels (0, 3) and (0, 4).
    EnvironmentMap m(4, 8);
    for (int row = 0; row < 4; ++row) {
        for (int col = 0; col < 8; ++col) {
            m.at(row, col, 0) = 0.1 * col - 0.2 * row;
        }
    }
    Vec3 top = envFetch(m, Vec3(0, 0, 1));
    CHECK(top.x() == doctest::Approx(sigmoid(0.5 * 0.3 + 0.5 * 0.4)));

    // Longitude wraps: phi = -pi sits between columns 7 and 0; the equator
    // sits between rows 1 and 2.
    Vec3 back = envFetch(m, Vec3(-1, -1e-12, 0).normalized());
    CHECK(back.x() == doctest::Approx(sigmoid(0.25 * (0.5 - 0.2 + 0.3 - 0.4))).epsilon(1e-6));
}
