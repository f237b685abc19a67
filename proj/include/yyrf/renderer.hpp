// Copyright 2026 The yyrf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <yyrf/field.hpp>
#include <yyrf/geometry.hpp>
#include <yyrf/rng.hpp>

#include <span>
#include <vector>

namespace yyrf {

/// Sorted sample distances along a ray. delta[i] = t[i+1] - t[i]; the last
/// delta runs to tFar, the exit point of the bounding sphere.
struct SampleSet
{
    Ray ray;
    std::vector<double> t;
    std::vector<double> delta;
    double tFar = 0.0;

    size_t size() const { return t.size(); }
    bool empty() const { return t.empty(); }
};

struct RenderOut
{
    Vec3 rgb = Vec3::Zero();
    double transmittanceBg = 1.0;
    std::vector<double> weights;
};

struct SamplerConfig
{
    int nCoarse = 64;
    int nFine = 32;
    int kernel = 2;
    bool stochastic = false;
    /// Added to every bin before inverse-transform sampling.
    double weightFloor = 1e-5;
    /// Samples whose compositing weight falls below this get no colour
    /// evaluation (their colour term is dropped). 0 evaluates every sample.
    double weightThreshold = 0.0;
};

/// [start, end] of the sampled segment: start = max(tNear, r0), end = exit of
/// the rMax sphere clipped to tFar. Empty (end <= start) when the ray misses.
std::pair<double, double> sampleRange(const Ray &ray, const GridConfig &cfg);

/// nCoarse distances log-uniform between the segment ends. Deterministic mode
/// (rng == nullptr) includes both endpoints; stochastic mode draws one
/// jittered sample per log-stratum.
std::vector<double> coarseSamples(const Ray &ray, int nCoarse, const GridConfig &cfg, Rng *rng = nullptr);

/// w_i = tau_i (1 - exp(-sigma_i delta_i)), tau_i = exp(-sum_{j<i} sigma_j delta_j).
std::vector<double> importanceWeights(std::span<const double> sigmas, std::span<const double> deltas);

/// Inverse-transform samples from the piecewise-constant density proportional
/// to weights over the bins [edges[i], edges[i+1]]. Stratified: one sample per
/// 1/nFine quantile band (band centre when rng == nullptr). Falls back to
/// uniform over [edges.front(), edges.back()] when the weights sum to zero.
std::vector<double> fineSamples(std::span<const double> weights, std::span<const double> edges, int nFine,
                                Rng *rng = nullptr, double floor = 1e-5);

/// Sorts t, collapses values within 1e-9 and fills deltas.
SampleSet makeSampleSet(const Ray &ray, std::vector<double> t, double tFar);

/// Emission-absorption quadrature with background term:
/// rgb = sum_i w_i c_i + tau_{N+1} background.
RenderOut composite(std::span<const double> sigmas, std::span<const Vec3> colors,
                    std::span<const double> deltas, const Vec3 &background);

/// Full-resolution render of one ray with the given samples. Density comes
/// from the fine grid at every sample; colour is decoded where the weight is
/// at least weightThreshold.
RenderOut renderRay(const RadianceField &field, const Ray &ray, const SampleSet &samples,
                    double weightThreshold = 0.0);

/// Coarse pass on the pooled grid, importance sampling, merge.
SampleSet planRay(const CoarseDensity &coarse, const GridConfig &cfg, const Ray &ray,
                  const SamplerConfig &sc, Rng *rng);

} // namespace yyrf
