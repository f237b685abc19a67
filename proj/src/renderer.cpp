// Copyright 2026 The yyrf Authors
// SPDX-License-Identifier: Apache-2.0

#include <yyrf/renderer.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace yyrf {

std::pair<double, double>
sampleRange(const Ray &ray, const GridConfig &cfg)
{
    double start = std::max(ray.tNear, cfg.r0());
    double exit = sphereExit(ray.origin, ray.direction, cfg.rMax());
    double end = std::min(ray.tFar, exit);
    return {start, end};
}

std::vector<double>
coarseSamples(const Ray &ray, int nCoarse, const GridConfig &cfg, Rng *rng)
{
    if (nCoarse < 2) {
        throw InputError("coarse sample count must be >= 2");
    }
    auto [start, end] = sampleRange(ray, cfg);
    if (!(end > start)) {
        return {};
    }
    const double la = std::log(start);
    const double lb = std::log(end);
    std::vector<double> t(static_cast<size_t>(nCoarse));
    for (int i = 0; i < nCoarse; ++i) {
        double s = rng ? (i + rng->uniform()) / nCoarse : static_cast<double>(i) / (nCoarse - 1);
        t[i] = std::exp(la + s * (lb - la));
    }
    if (!rng) {
        t.front() = start;
        t.back() = end;
    }
    return t;
}

std::vector<double>
importanceWeights(std::span<const double> sigmas, std::span<const double> deltas)
{
    if (sigmas.size() != deltas.size()) {
        throw InputError("importanceWeights: sigma and delta lengths differ");
    }
    std::vector<double> w(sigmas.size());
    double depth = 0.0;
    for (size_t i = 0; i < sigmas.size(); ++i) {
        double x = deltas[i] > 0.0 ? sigmas[i] * deltas[i] : 0.0;
        double tau = std::exp(-depth);
        w[i] = tau * -std::expm1(-x);
        depth += x;
    }
    return w;
}

std::vector<double>
fineSamples(std::span<const double> weights, std::span<const double> edges, int nFine, Rng *rng,
            double floor)
{
    if (nFine <= 0 || edges.size() < 2) {
        return {};
    }
    if (weights.size() + 1 != edges.size()) {
        throw InputError("fineSamples: need one weight per bin");
    }
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    std::vector<double> out(static_cast<size_t>(nFine));
    auto quantile = [&](int i) { return rng ? (i + rng->uniform()) / nFine : (i + 0.5) / nFine; };

    if (!(total > 0.0)) {
        const double a = edges.front();
        const double b = edges.back();
        for (int i = 0; i < nFine; ++i) {
            out[i] = a + quantile(i) * (b - a);
        }
        return out;
    }

    const size_t bins = weights.size();
    std::vector<double> cdf(bins + 1, 0.0);
    for (size_t b = 0; b < bins; ++b) {
        cdf[b + 1] = cdf[b] + std::max(weights[b], 0.0) + floor;
    }
    const double mass = cdf.back();
    for (double &c : cdf) {
        c /= mass;
    }
    size_t b = 0;
    for (int i = 0; i < nFine; ++i) {
        double u = quantile(i);
        while (b + 1 < bins && cdf[b + 1] <= u) {
            ++b;
        }
        double width = cdf[b + 1] - cdf[b];
        double f = width > 0.0 ? std::clamp((u - cdf[b]) / width, 0.0, 1.0) : 0.5;
        out[i] = edges[b] + f * (edges[b + 1] - edges[b]);
    }
    return out;
}

SampleSet
makeSampleSet(const Ray &ray, std::vector<double> t, double tFar)
{
    SampleSet s;
    s.ray = ray;
    s.tFar = tFar;
    std::sort(t.begin(), t.end());
    for (double v : t) {
        if (s.t.empty() || v - s.t.back() > 1e-9) {
            s.t.push_back(v);
        }
    }
    s.delta.resize(s.t.size());
    for (size_t i = 0; i < s.t.size(); ++i) {
        double next = i + 1 < s.t.size() ? s.t[i + 1] : tFar;
        s.delta[i] = std::max(next - s.t[i], 0.0);
    }
    return s;
}

RenderOut
composite(std::span<const double> sigmas, std::span<const Vec3> colors, std::span<const double> deltas,
          const Vec3 &background)
{
    if (sigmas.size() != colors.size() || sigmas.size() != deltas.size()) {
        throw InputError("composite: sigma, color and delta lengths differ");
    }
    RenderOut out;
    out.weights = importanceWeights(sigmas, deltas);
    double depth = 0.0;
    for (size_t i = 0; i < sigmas.size(); ++i) {
        out.rgb += out.weights[i] * colors[i];
        depth += deltas[i] > 0.0 ? sigmas[i] * deltas[i] : 0.0;
    }
    out.transmittanceBg = std::exp(-depth);
    out.rgb += out.transmittanceBg * background;
    return out;
}

RenderOut
renderRay(const RadianceField &field, const Ray &ray, const SampleSet &samples, double weightThreshold)
{
    const size_t n = samples.size();
    std::vector<double> sigmas(n);
    for (size_t i = 0; i < n; ++i) {
        sigmas[i] = field.density(ray.origin + samples.t[i] * ray.direction);
    }
    std::vector<double> w = importanceWeights(sigmas, samples.delta);
    std::vector<Vec3> colors(n, Vec3::Zero());
    for (size_t i = 0; i < n; ++i) {
        if (w[i] >= weightThreshold) {
            colors[i] = field.color(ray.origin + samples.t[i] * ray.direction, ray.direction);
        }
    }
    return composite(sigmas, colors, samples.delta, field.background(ray.direction));
}

SampleSet
planRay(const CoarseDensity &coarse, const GridConfig &cfg, const Ray &ray, const SamplerConfig &sc,
        Rng *rng)
{
    Rng *jitter = sc.stochastic ? rng : nullptr;
    auto [start, end] = sampleRange(ray, cfg);
    std::vector<double> tc = coarseSamples(ray, sc.nCoarse, cfg, jitter);
    if (tc.empty()) {
        return makeSampleSet(ray, {}, std::max(end, 0.0));
    }
    SampleSet cs = makeSampleSet(ray, tc, end);
    std::vector<double> sigmas(cs.size());
    for (size_t i = 0; i < cs.size(); ++i) {
        sigmas[i] = activateDensity(queryDensityCoarse(coarse, ray.origin + cs.t[i] * ray.direction, cfg));
    }
    std::vector<double> w = importanceWeights(sigmas, cs.delta);

    std::vector<double> edges = cs.t;
    if (end > edges.back() + 1e-9) {
        edges.push_back(end);
    } else {
        w.pop_back();
    }
    std::vector<double> tf = fineSamples(w, edges, sc.nFine, jitter, sc.weightFloor);
    std::vector<double> all = std::move(cs.t);
    all.insert(all.end(), tf.begin(), tf.end());
    return makeSampleSet(ray, std::move(all), end);
}

} // namespace yyrf
