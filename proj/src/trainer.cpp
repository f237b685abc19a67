// Copyright 2026 The yyrf Authors
// SPDX-License-Identifier: Apache-2.0

#include <yyrf/checkpoint.hpp>
#include <yyrf/dataset.hpp>
#include <yyrf/trainer.hpp>

#include <Eigen/Dense>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

namespace yyrf {

void
TrainConfig::validate() const
{
    if (!(lr > 0.0) || batchRays <= 0 || steps < 0 || nCoarse < 2 || nFine < 0 || kernel < 1 ||
        chunkRays <= 0 || tvWeight < 0.0 || checkpointEvery < 0) {
        throw InputError("invalid training configuration");
    }
}

SamplerConfig
TrainConfig::sampler(bool stochastic) const
{
    SamplerConfig sc;
    sc.nCoarse = nCoarse;
    sc.nFine = nFine;
    sc.kernel = kernel;
    sc.stochastic = stochastic;
    sc.weightThreshold = weightThreshold;
    return sc;
}

void
setThreadCount(int threads)
{
#ifdef _OPENMP
    omp_set_num_threads(std::max(threads, 1));
#endif
    // Parallelism lives in the chunk loops; nested GEMM threading would make
    // the reduction order depend on the thread count.
    Eigen::setNbThreads(1);
#ifndef _OPENMP
    (void)threads;
#endif
}

int
threadCount()
{
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

double
photometricLoss(std::span<const Vec3> pred, std::span<const Vec3> target)
{
    if (pred.size() != target.size()) {
        throw InputError("photometricLoss: prediction and target counts differ");
    }
    if (pred.empty()) {
        return 0.0;
    }
    double s = 0.0;
    for (size_t i = 0; i < pred.size(); ++i) {
        s += (pred[i] - target[i]).squaredNorm();
    }
    return s / static_cast<double>(pred.size());
}

double
lossToPsnr(double loss)
{
    double mse = loss / 3.0;
    return mse < 1e-10 ? 99.0 : -10.0 * std::log10(mse);
}

std::vector<SampleSet>
planBatch(const RadianceField &field, std::span<const Ray> rays, const TrainConfig &cfg, bool stochastic,
          uint64_t step)
{
    const CoarseDensity coarse = poolDensity(field.grid, cfg.kernel);
    const SamplerConfig sc = cfg.sampler(stochastic);
    std::vector<SampleSet> plans(rays.size());
    const long n = static_cast<long>(rays.size());
#pragma omp parallel for schedule(dynamic, 64)
    for (long i = 0; i < n; ++i) {
        Rng rng = Rng::stream(cfg.seed, step, static_cast<uint64_t>(i));
        plans[i] = planRay(coarse, field.grid.config(), rays[i], sc, &rng);
    }
    return plans;
}

namespace {

using Eigen::MatrixXd;

struct DensityRecord
{
    int grid;
    PointStencil st;
    double dRaw;
};

struct EnvRecord
{
    EnvStencil st;
    Vec3 dRaw;
};

/// Everything one chunk of rays contributes; merged in chunk order.
struct ChunkOut
{
    double lossSum = 0.0;
    long badRay = -1;
    std::vector<RenderOut> renders;
    std::vector<DensityRecord> density;
    /// Per component grid: stencils of the colour-evaluated samples, the
    /// upstream derivative of their 3 nApp coefficients (one column each)
    /// and the chunk's basis gradient block (C x 3 nApp).
    std::array<std::vector<PointStencil>, 2> appSt;
    std::array<MatrixXd, 2> dCoef;
    std::array<MatrixXd, 2> dBasis;
    std::vector<EnvRecord> env;
    Decoder mlpGrad;
};

struct SampleState
{
    int grid;
    PointStencil st;
    double raw;
};

/// Decoder forward/backward over a block of samples in scalar type S. Inputs
/// and outputs stay 64-bit; only the decoder arithmetic runs in S.
template <typename S>
class DecoderPass
{
public:
    using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
    using VecS = Eigen::Matrix<S, Eigen::Dynamic, 1>;

    explicit DecoderPass(const Decoder &mlp)
        : mW1(mlp.w1.cast<S>()), mW2(mlp.w2.cast<S>()), mW3(mlp.w3.cast<S>()), mB1(mlp.b1.cast<S>()),
          mB2(mlp.b2.cast<S>()), mB3(mlp.b3.cast<S>())
    {
    }

    /// Returns 3 x N colours.
    MatrixXd forward(const MatrixXd &X)
    {
        mX = X.cast<S>();
        mH1.noalias() = mW1 * mX;
        mH1.colwise() += mB1;
        mH1 = mH1.cwiseMax(S(0));
        mH2.noalias() = mW2 * mH1;
        mH2.colwise() += mB2;
        mH2 = mH2.cwiseMax(S(0));
        Mat z3 = mW3 * mH2;
        z3.colwise() += mB3;
        mColor = z3.unaryExpr([](S v) { return S(1) / (S(1) + std::exp(-v)); });
        return mColor.template cast<double>();
    }

    /// Accumulates decoder gradients into grad and returns d(loss)/d(feature), C x N.
    MatrixXd backward(const MatrixXd &dColor, int features, Decoder &grad)
    {
        Mat dZ3 = dColor.cast<S>().cwiseProduct(mColor.cwiseProduct((S(1) - mColor.array()).matrix()));
        grad.w3 = (dZ3 * mH2.transpose()).template cast<double>();
        grad.b3 = dZ3.rowwise().sum().template cast<double>();
        Mat dZ2 = mW3.transpose() * dZ3;
        reluMask(dZ2, mH2);
        mH2.resize(0, 0);
        grad.w2 = (dZ2 * mH1.transpose()).template cast<double>();
        grad.b2 = dZ2.rowwise().sum().template cast<double>();
        Mat dZ1 = mW2.transpose() * dZ2;
        reluMask(dZ1, mH1);
        dZ2.resize(0, 0);
        grad.w1 = (dZ1 * mX.transpose()).template cast<double>();
        grad.b1 = dZ1.rowwise().sum().template cast<double>();
        Mat dFeature = mW1.leftCols(features).transpose() * dZ1;
        return dFeature.template cast<double>();
    }

private:
    /// Zeroes d wherever the ReLU output h is not positive.
    static void reluMask(Mat &d, const Mat &h)
    {
        S *dp = d.data();
        const S *hp = h.data();
        const Eigen::Index n = d.size();
        for (Eigen::Index i = 0; i < n; ++i) {
            dp[i] = hp[i] > S(0) ? dp[i] : S(0);
        }
    }

    Mat mW1, mW2, mW3;
    VecS mB1, mB2, mB3;
    Mat mX, mH1, mH2, mColor;
};

/// Forward (and optionally backward) pass over rays [begin, end).
template <typename S>
void
processChunk(const RadianceField &field, std::span<const SampleSet> plans, const Vec3 *targets,
             size_t begin, size_t end, double invBatch, bool wantGrad, double weightThreshold,
             ChunkOut &out)
{
    const FactorizedGrid &grid = field.grid;
    const GridConfig &gc = grid.config();
    const std::array<int, 3> dims{gc.nR(), gc.nTheta(), gc.nPhi()};
    const int C = grid.channels();
    const int nCoef = 3 * grid.nApp();

    // Density at every sample and compositing weights.
    std::vector<size_t> rayStart(end - begin + 1, 0);
    for (size_t r = begin; r < end; ++r) {
        rayStart[r - begin + 1] = rayStart[r - begin] + plans[r].size();
    }
    const size_t total = rayStart.back();
    std::vector<SampleState> samples(total);
    std::vector<double> sigma(total), weight(total), depthBefore(total);
    std::vector<double> tauBg(end - begin);
    std::vector<long> activeCol(total, -1);
    std::array<long, 2> nPerGrid{0, 0};

    for (size_t r = begin; r < end; ++r) {
        const SampleSet &ps = plans[r];
        const Ray &ray = ps.ray;
        const size_t base = rayStart[r - begin];
        double depth = 0.0;
        for (size_t i = 0; i < ps.size(); ++i) {
            GridAssignment a = locate(ray.origin + ps.t[i] * ray.direction, gc);
            SampleState &s = samples[base + i];
            s.grid = gridIndex(a.grid);
            s.st = pointStencil(a.index, dims);
            s.raw = grid.density(a.grid).value(s.st);
            sigma[base + i] = activateDensity(s.raw);
            double x = ps.delta[i] > 0.0 ? sigma[base + i] * ps.delta[i] : 0.0;
            weight[base + i] = std::exp(-depth) * -std::expm1(-x);
            depthBefore[base + i] = depth;
            depth += x;
            if (weight[base + i] >= weightThreshold) {
                activeCol[base + i] = nPerGrid[s.grid]++;
            }
        }
        tauBg[r - begin] = std::exp(-depth);
    }
    // Columns are grouped by component grid: Yin first, then Yang.
    const long nActive = nPerGrid[0] + nPerGrid[1];
    for (size_t k = 0; k < total; ++k) {
        if (activeCol[k] >= 0 && samples[k].grid == 1) {
            activeCol[k] += nPerGrid[0];
        }
    }

    // Decoder inputs: basis-projected appearance coefficients + encoded direction.
    const int inDim = C + kDirEncodingSize;
    MatrixXd X(inDim, nActive);
    std::array<MatrixXd, 2> coef{MatrixXd(nCoef, nPerGrid[0]), MatrixXd(nCoef, nPerGrid[1])};
    if (wantGrad) {
        for (int y = 0; y < 2; ++y) {
            out.appSt[y].resize(static_cast<size_t>(nPerGrid[y]));
        }
    }
    for (size_t r = begin; r < end; ++r) {
        const SampleSet &ps = plans[r];
        const size_t base = rayStart[r - begin];
        const auto enc = encodeDirection(ps.ray.direction);
        for (size_t i = 0; i < ps.size(); ++i) {
            long col = activeCol[base + i];
            if (col < 0) {
                continue;
            }
            const SampleState &s = samples[base + i];
            const long local = s.grid == 0 ? col : col - nPerGrid[0];
            grid.appearance(static_cast<GridId>(s.grid))
                .coefficients(s.st, std::span(coef[s.grid].col(local).data(), static_cast<size_t>(nCoef)));
            X.col(col).tail(kDirEncodingSize) = enc;
            if (wantGrad) {
                out.appSt[s.grid][static_cast<size_t>(local)] = s.st;
            }
        }
    }
    for (int y = 0; y < 2; ++y) {
        const long first = y == 0 ? 0 : nPerGrid[0];
        const auto By = grid.basis().middleCols(grid.basisColumn(static_cast<GridId>(y), 0, 0), nCoef);
        X.block(0, first, C, nPerGrid[y]).noalias() = By * coef[y];
    }

    DecoderPass<S> decoder(field.mlp);
    const MatrixXd color = decoder.forward(X);
    X.resize(0, 0);

    MatrixXd dColor;
    if (wantGrad) {
        dColor = MatrixXd::Zero(3, nActive);
        out.density.clear();
        out.density.reserve(total);
        out.env.clear();
    }
    out.renders.assign(end - begin, RenderOut{});

    for (size_t r = begin; r < end; ++r) {
        const SampleSet &ps = plans[r];
        const size_t base = rayStart[r - begin];
        const size_t n = ps.size();
        const Vec3 &d = ps.ray.direction;
        EnvStencil envSt;
        Vec3 bg = Vec3::Zero();
        if (field.env) {
            envSt = envStencil(*field.env, d);
            bg = envRaw(*field.env, envSt).unaryExpr([](double v) { return sigmoid(v); });
        }
        RenderOut &ro = out.renders[r - begin];
        ro.transmittanceBg = tauBg[r - begin];
        ro.weights.assign(weight.begin() + static_cast<long>(base), weight.begin() + static_cast<long>(base + n));
        Vec3 rgb = ro.transmittanceBg * bg;
        for (size_t i = 0; i < n; ++i) {
            long col = activeCol[base + i];
            if (col >= 0) {
                rgb += weight[base + i] * color.col(col);
            }
        }
        ro.rgb = rgb;
        if (!rgb.allFinite() && out.badRay < 0) {
            out.badRay = static_cast<long>(r);
        }
        if (!wantGrad) {
            continue;
        }

        const Vec3 resid = rgb - targets[r];
        out.lossSum += resid.squaredNorm();
        const Vec3 g = 2.0 * invBatch * resid;

        // suffix = radiance arriving from behind sample k (later samples + background).
        Vec3 suffix = ro.transmittanceBg * bg;
        for (size_t k = n; k-- > 0;) {
            long col = activeCol[base + k];
            Vec3 ck = col >= 0 ? Vec3(color.col(col)) : Vec3::Zero();
            double x = ps.delta[k] > 0.0 ? sigma[base + k] * ps.delta[k] : 0.0;
            double tauNext = std::exp(-(depthBefore[base + k] + x));
            double dSigma = ps.delta[k] > 0.0 ? ps.delta[k] * g.dot(tauNext * ck - suffix) : 0.0;
            const SampleState &s = samples[base + k];
            double dRaw = dSigma * activateDensityGrad(s.raw);
            if (!std::isfinite(dRaw) && out.badRay < 0) {
                out.badRay = static_cast<long>(r);
            }
            if (dRaw != 0.0) {
                out.density.push_back({s.grid, s.st, dRaw});
            }
            if (col >= 0) {
                dColor.col(col) = weight[base + k] * g;
                suffix += weight[base + k] * ck;
            }
        }
        if (field.env) {
            Vec3 dRawEnv = (g * ro.transmittanceBg).cwiseProduct(bg.cwiseProduct(Vec3::Ones() - bg));
            out.env.push_back({envSt, dRawEnv});
        }
    }

    if (!wantGrad) {
        return;
    }

    const MatrixXd dFeature = decoder.backward(dColor, C, out.mlpGrad);
    for (int y = 0; y < 2; ++y) {
        const long first = y == 0 ? 0 : nPerGrid[0];
        const auto By = grid.basis().middleCols(grid.basisColumn(static_cast<GridId>(y), 0, 0), nCoef);
        const auto dF = dFeature.middleCols(first, nPerGrid[y]);
        out.dBasis[y].noalias() = dF * coef[y].transpose();
        out.dCoef[y].noalias() = By.transpose() * dF;
    }
}

void
runChunk(const RadianceField &field, std::span<const SampleSet> plans, const Vec3 *targets, size_t begin,
         size_t end, double invBatch, bool wantGrad, const TrainConfig &cfg, ChunkOut &out)
{
    if (cfg.floatDecoder) {
        processChunk<float>(field, plans, targets, begin, end, invBatch, wantGrad, cfg.weightThreshold, out);
    } else {
        processChunk<double>(field, plans, targets, begin, end, invBatch, wantGrad, cfg.weightThreshold, out);
    }
}

/// Accumulates a wave of chunk outputs into grads. Each task owns a disjoint
/// set of gradient tensors and visits records in chunk order, so the sum
/// order is fixed by the chunk layout alone.
void
scatterWave(const RadianceField &field, std::span<const ChunkOut> outs, GradientSet &grads)
{
    const FactorizedGrid &grid = field.grid;
    FactorizedGrid &gg = grads.d.grid;
    const int nApp = grid.nApp();
    // 0..5: density (grid, mode); 6..11: appearance (grid, mode); 12: basis;
    // 13: decoder; 14: environment.
    constexpr int kTasks = 15;
#pragma omp parallel for schedule(dynamic, 1)
    for (int task = 0; task < kTasks; ++task) {
        if (task < 6) {
            const int y = task / 3;
            const int m = task % 3;
            const FactorSet &fs = grid.density(static_cast<GridId>(y));
            FactorSet &gs = gg.density(static_cast<GridId>(y));
            std::vector<double> dcoef(static_cast<size_t>(fs.comps()));
            for (const ChunkOut &co : outs) {
                for (const DensityRecord &rec : co.density) {
                    if (rec.grid != y) {
                        continue;
                    }
                    std::fill(dcoef.begin(), dcoef.end(), rec.dRaw);
                    fs.scatterMode(rec.st, m, dcoef.data(), gs);
                }
            }
        } else if (task < 12) {
            const int y = (task - 6) / 3;
            const int m = task % 3;
            const FactorSet &fs = grid.appearance(static_cast<GridId>(y));
            FactorSet &gs = gg.appearance(static_cast<GridId>(y));
            for (const ChunkOut &co : outs) {
                const std::vector<PointStencil> &sts = co.appSt[y];
                for (size_t a = 0; a < sts.size(); ++a) {
                    const double *dc = co.dCoef[y].col(static_cast<long>(a)).data() + m * nApp;
                    fs.scatterMode(sts[a], m, dc, gs);
                }
            }
        } else if (task == 12) {
            for (const ChunkOut &co : outs) {
                for (int y = 0; y < 2; ++y) {
                    if (co.dBasis[y].size() == 0) {
                        continue;
                    }
                    gg.basis().middleCols(grid.basisColumn(static_cast<GridId>(y), 0, 0), 3 * nApp) +=
                        co.dBasis[y];
                }
            }
        } else if (task == 13) {
            Decoder &g = grads.d.mlp;
            for (const ChunkOut &co : outs) {
                if (co.mlpGrad.w1.size() == 0) {
                    continue;
                }
                g.w1 += co.mlpGrad.w1;
                g.b1 += co.mlpGrad.b1;
                g.w2 += co.mlpGrad.w2;
                g.b2 += co.mlpGrad.b2;
                g.w3 += co.mlpGrad.w3;
                g.b3 += co.mlpGrad.b3;
            }
        } else if (grads.d.env) {
            EnvironmentMap &ge = *grads.d.env;
            for (const ChunkOut &co : outs) {
                for (const EnvRecord &rec : co.env) {
                    for (int k = 0; k < 4; ++k) {
                        double *t = ge.texels.data() + static_cast<size_t>(rec.st.texel[k]) * 3;
                        for (int ch = 0; ch < 3; ++ch) {
                            t[ch] += rec.st.weight[k] * rec.dRaw(ch);
                        }
                    }
                }
            }
        }
    }
}

} // namespace

BackwardResult
forwardBackward(const RadianceField &field, const RayBatch &batch, std::span<const SampleSet> plans,
                const TrainConfig &cfg)
{
    if (batch.rays.size() != batch.targets.size() || plans.size() != batch.rays.size()) {
        throw InputError("forwardBackward: rays, targets and plans must have equal length");
    }
    BackwardResult res;
    res.grads = GradientSet::zerosLike(field);
    res.predictions.reserve(batch.rays.size());
    double lossSum = 0.0;

    // Chunks are processed in waves that bound the memory held by gradient
    // records; chunk boundaries never depend on the thread count.
    const size_t n = plans.size();
    const size_t chunk = static_cast<size_t>(cfg.chunkRays);
    const long nChunks = static_cast<long>((n + chunk - 1) / chunk);
    const long wave = std::max(4L, 2L * threadCount());
    const double invBatch = n ? 1.0 / static_cast<double>(n) : 0.0;
    std::vector<ChunkOut> outs;
    for (long w0 = 0; w0 < nChunks; w0 += wave) {
        const long w1 = std::min(nChunks, w0 + wave);
        outs.assign(static_cast<size_t>(w1 - w0), ChunkOut{});
#pragma omp parallel for schedule(dynamic, 1)
        for (long c = w0; c < w1; ++c) {
            size_t b = static_cast<size_t>(c) * chunk;
            size_t e = std::min(n, b + chunk);
            runChunk(field, plans, batch.targets.data(), b, e, invBatch, true, cfg, outs[c - w0]);
        }
        for (const ChunkOut &co : outs) {
            if (co.badRay >= 0) {
                throw NonFiniteError("non-finite value while rendering ray " + std::to_string(co.badRay),
                                     co.badRay);
            }
            lossSum += co.lossSum;
            for (const RenderOut &ro : co.renders) {
                res.predictions.push_back(ro.rgb);
            }
        }
        scatterWave(field, outs, res.grads);
    }
    res.photometric = n ? lossSum / static_cast<double>(n) : 0.0;
    res.loss = res.photometric;
    if (cfg.tvWeight > 0.0) {
        res.loss += cfg.tvWeight * tvPenalty(field.grid);
        addTvGradient(field.grid, cfg.tvWeight, res.grads.d.grid);
    }
    return res;
}

BackwardResult
backward(const RadianceField &field, const RayBatch &batch, const TrainConfig &cfg, uint64_t step)
{
    std::vector<SampleSet> plans = planBatch(field, batch.rays, cfg, true, step);
    return forwardBackward(field, batch, plans, cfg);
}

std::vector<RenderOut>
renderRays(const RadianceField &field, std::span<const SampleSet> plans, const TrainConfig &cfg)
{
    const size_t n = plans.size();
    const size_t chunk = static_cast<size_t>(cfg.chunkRays);
    const long nChunks = static_cast<long>((n + chunk - 1) / chunk);
    std::vector<ChunkOut> outs(static_cast<size_t>(nChunks));
#pragma omp parallel for schedule(dynamic, 1)
    for (long c = 0; c < nChunks; ++c) {
        size_t b = static_cast<size_t>(c) * chunk;
        size_t e = std::min(n, b + chunk);
        runChunk(field, plans, nullptr, b, e, 0.0, false, cfg, outs[c]);
    }
    std::vector<RenderOut> res;
    res.reserve(plans.size());
    for (ChunkOut &co : outs) {
        for (RenderOut &ro : co.renders) {
            res.push_back(std::move(ro));
        }
    }
    return res;
}

void
adamStep(std::span<double> params, std::span<const double> grads, AdamState &state, const TrainConfig &cfg,
         double lr)
{
    if (params.size() != grads.size()) {
        throw InputError("adamStep: parameter and gradient sizes differ");
    }
    if (state.m.empty()) {
        state.m.assign(params.size(), 0.0);
        state.v.assign(params.size(), 0.0);
    }
    if (state.m.size() != params.size()) {
        throw InputError("adamStep: optimizer state does not match parameter count");
    }
    ++state.step;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
    const long n = static_cast<long>(params.size());
#pragma omp parallel for schedule(static)
    for (long i = 0; i < n; ++i) {
        double g = grads[i];
        double m = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * g;
        double v = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * g * g;
        state.m[i] = m;
        state.v[i] = v;
        params[i] -= lr * (m / bc1) / (std::sqrt(v / bc2) + cfg.eps);
    }
}

void
adamStep(RadianceField &field, const GradientSet &grads, AdamState &state, const TrainConfig &cfg, double lr)
{
    std::vector<std::span<double>> ps;
    std::vector<std::span<const double>> gs;
    field.forEachTensor([&](const std::string &, std::span<double> t) { ps.push_back(t); });
    grads.forEachTensor([&](const std::string &, std::span<const double> t) { gs.push_back(t); });
    if (ps.size() != gs.size()) {
        throw InputError("adamStep: gradient set does not match field layout");
    }
    size_t total = 0;
    for (size_t i = 0; i < ps.size(); ++i) {
        if (ps[i].size() != gs[i].size()) {
            throw InputError("adamStep: tensor " + std::to_string(i) + " shape mismatch");
        }
        total += ps[i].size();
    }
    if (state.m.empty()) {
        state.m.assign(total, 0.0);
        state.v.assign(total, 0.0);
    }
    if (state.m.size() != total) {
        throw InputError("adamStep: optimizer state does not match parameter count");
    }
    // One shared step counter across tensors: slice the state per tensor.
    const int64_t stepBefore = state.step;
    size_t offset = 0;
    for (size_t i = 0; i < ps.size(); ++i) {
        AdamState slice;
        slice.m.assign(state.m.begin() + static_cast<long>(offset),
                       state.m.begin() + static_cast<long>(offset + ps[i].size()));
        slice.v.assign(state.v.begin() + static_cast<long>(offset),
                       state.v.begin() + static_cast<long>(offset + ps[i].size()));
        slice.step = stepBefore;
        adamStep(ps[i], gs[i], slice, cfg, lr);
        std::copy(slice.m.begin(), slice.m.end(), state.m.begin() + static_cast<long>(offset));
        std::copy(slice.v.begin(), slice.v.end(), state.v.begin() + static_cast<long>(offset));
        offset += ps[i].size();
    }
    state.step = stepBefore + 1;
}

namespace {

std::string
checkpointMeta(const TrainConfig &cfg, int64_t step)
{
    return "{\"step\":" + std::to_string(step) + ",\"seed\":" + std::to_string(cfg.seed) + "}";
}

} // namespace

TrainResult
train(const Dataset &data, RadianceField &field, const TrainConfig &cfg, const StepCallback &onStep)
{
    cfg.validate();
    TrainResult result;
    if (cfg.steps == 0) {
        return result;
    }
    std::vector<const Frame *> frames = data.split(Split::Train);
    if (frames.empty()) {
        throw InputError("training split is empty");
    }
    const int W = data.width;
    const int H = data.height;
    const uint64_t perImage = static_cast<uint64_t>(W) * H;
    const uint64_t totalPixels = perImage * frames.size();

    std::vector<uint64_t> order(totalPixels);
    uint64_t cursor = totalPixels;
    uint64_t epoch = 0;
    auto reshuffle = [&] {
        std::iota(order.begin(), order.end(), 0);
        Rng rng = Rng::stream(cfg.seed, 0x0e90c4ULL, epoch++);
        for (uint64_t i = totalPixels - 1; i > 0; --i) {
            std::swap(order[i], order[rng.below(i + 1)]);
        }
        cursor = 0;
    };

    AdamState adam;
    const auto t0 = std::chrono::steady_clock::now();
    RayBatch batch;
    for (int64_t step = 0; step < cfg.steps; ++step) {
        batch.rays.clear();
        batch.targets.clear();
        for (int i = 0; i < cfg.batchRays; ++i) {
            if (cursor == totalPixels) {
                reshuffle();
            }
            uint64_t id = order[cursor++];
            const Frame &f = *frames[id / perImage];
            int px = static_cast<int>((id % perImage) % static_cast<uint64_t>(W));
            int py = static_cast<int>((id % perImage) / static_cast<uint64_t>(W));
            batch.rays.push_back(pixelToRay(px, py, W, H, f.pose));
            batch.targets.push_back(f.image.at(px, py));
        }

        BackwardResult res = backward(field, batch, cfg, static_cast<uint64_t>(step));
        if (!std::isfinite(res.loss)) {
            throw NonFiniteError("non-finite loss at step " + std::to_string(step), -1);
        }
        if (!res.grads.allFinite()) {
            throw NonFiniteError("non-finite gradient at step " + std::to_string(step), -1);
        }
        double lr = cfg.lr;
        if (cfg.lrDecay) {
            lr *= std::pow(0.1, static_cast<double>(step) / static_cast<double>(cfg.steps));
        }
        adamStep(field, res.grads, adam, cfg, lr);
        if (!field.allFinite()) {
            throw NonFiniteError("non-finite parameter after step " + std::to_string(step), -1);
        }

        LogRow row;
        row.step = step + 1;
        row.wallMs = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        row.loss = res.loss;
        row.batchPsnr = lossToPsnr(res.photometric);
        result.log.push_back(row);
        if (onStep) {
            onStep(row);
        }
        if (cfg.checkpointEvery > 0 && !cfg.checkpointPath.empty() && (step + 1) % cfg.checkpointEvery == 0) {
            saveCheckpoint(field, cfg.checkpointPath, checkpointMeta(cfg, step + 1));
        }
    }
    return result;
}

Image
renderImage(const RadianceField &field, const CameraPose &pose, int width, int height, const TrainConfig &cfg)
{
    Image img(width, height);
    // Row blocks bound the memory held by sample plans.
    const int rowsPerBlock = std::max(1, 8192 / std::max(width, 1));
    for (int y0 = 0; y0 < height; y0 += rowsPerBlock) {
        int y1 = std::min(height, y0 + rowsPerBlock);
        std::vector<Ray> rays;
        rays.reserve(static_cast<size_t>(y1 - y0) * width);
        for (int y = y0; y < y1; ++y) {
            for (int x = 0; x < width; ++x) {
                rays.push_back(pixelToRay(x, y, width, height, pose));
            }
        }
        std::vector<SampleSet> plans = planBatch(field, rays, cfg, false, 0);
        std::vector<RenderOut> outs = renderRays(field, plans, cfg);
        size_t k = 0;
        for (int y = y0; y < y1; ++y) {
            for (int x = 0; x < width; ++x) {
                img.set(x, y, outs[k++].rgb.cwiseMax(0.0).cwiseMin(1.0));
            }
        }
    }
    return img;
}

} // namespace yyrf
