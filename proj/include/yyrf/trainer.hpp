// Copyright 2026 The yyrf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <yyrf/field.hpp>
#include <yyrf/image.hpp>
#include <yyrf/renderer.hpp>

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace yyrf {

struct Dataset;

struct TrainConfig
{
    double lr = 0.02;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-7;
    /// Exponential decay of the learning rate to 0.1x over the run.
    bool lrDecay = false;
    int batchRays = 4096;
    int steps = 0;
    double tvWeight = 0.0;
    int nCoarse = 64;
    int nFine = 32;
    int kernel = 2;
    double weightThreshold = 1e-4;
    uint64_t seed = 0;
    /// Rays per work unit. Part of the reduction order, so results depend on
    /// it but not on the thread count.
    int chunkRays = 64;
    /// Runs the colour decoder in 32-bit arithmetic. Faster; gradients are
    /// then only accurate to single precision.
    bool floatDecoder = false;
    int checkpointEvery = 0;
    std::string checkpointPath;

    void validate() const;
    SamplerConfig sampler(bool stochastic) const;
};

/// Raised when a forward or backward pass produces a non-finite value.
class NonFiniteError : public std::runtime_error
{
public:
    NonFiniteError(const std::string &what, long rayIndex)
        : std::runtime_error(what), mRay(rayIndex)
    {
    }
    long rayIndex() const { return mRay; }

private:
    long mRay;
};

/// Mean over rays of the squared L2 RGB error.
double photometricLoss(std::span<const Vec3> pred, std::span<const Vec3> target);

/// PSNR implied by a photometric loss (per-channel MSE = loss / 3).
double lossToPsnr(double loss);

struct RayBatch
{
    std::vector<Ray> rays;
    std::vector<Vec3> targets;
};

/// Coarse pass + importance sampling for every ray. Stochastic plans use one
/// RNG stream per (seed, step, ray index).
std::vector<SampleSet> planBatch(const RadianceField &field, std::span<const Ray> rays,
                                 const TrainConfig &cfg, bool stochastic, uint64_t step);

struct BackwardResult
{
    double loss = 0.0;        ///< photometric + tvWeight * TV
    double photometric = 0.0;
    std::vector<Vec3> predictions;
    GradientSet grads;
};

/// Loss and analytic gradients with the sample positions held fixed.
BackwardResult forwardBackward(const RadianceField &field, const RayBatch &batch,
                               std::span<const SampleSet> plans, const TrainConfig &cfg);

/// planBatch (stochastic) followed by forwardBackward.
BackwardResult backward(const RadianceField &field, const RayBatch &batch, const TrainConfig &cfg,
                        uint64_t step = 0);

/// Batched forward only (same code path as training).
std::vector<RenderOut> renderRays(const RadianceField &field, std::span<const SampleSet> plans,
                                  const TrainConfig &cfg);

struct AdamState
{
    std::vector<double> m;
    std::vector<double> v;
    int64_t step = 0;
};

/// One bias-corrected Adam update over every tensor of the field.
void adamStep(RadianceField &field, const GradientSet &grads, AdamState &state, const TrainConfig &cfg,
              double lr);

/// Flat parameter views for adamStep on arbitrary tensors.
void adamStep(std::span<double> params, std::span<const double> grads, AdamState &state,
              const TrainConfig &cfg, double lr);

struct LogRow
{
    int64_t step = 0;
    double wallMs = 0.0;
    double loss = 0.0;
    double batchPsnr = 0.0;
};

struct TrainResult
{
    std::vector<LogRow> log;
};

/// Optional per-step observer (e.g. progress output).
using StepCallback = std::function<void(const LogRow &)>;

/// Optimizes field in place on the training split. Throws NonFiniteError on a
/// non-finite loss or gradient; the field then holds the last finite state and
/// the last written checkpoint is left untouched.
TrainResult train(const Dataset &data, RadianceField &field, const TrainConfig &cfg,
                  const StepCallback &onStep = {});

/// Every pixel of an equirectangular view rendered deterministically.
Image renderImage(const RadianceField &field, const CameraPose &pose, int width, int height,
                  const TrainConfig &cfg);

void setThreadCount(int threads);
int threadCount();

} // namespace yyrf
