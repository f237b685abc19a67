// Copyright 2026 The yyrf Authors
// SPDX-License-Identifier: Apache-2.0

#include <yyrf/feature_grid.hpp>
#include <yyrf/rng.hpp>

#include <algorithm>
#include <cmath>

namespace yyrf {

AxisStencil
axisStencil(double u, int n)
{
    AxisStencil s;
    if (n <= 1) {
        return s;
    }
    u = std::clamp(u, 0.0, static_cast<double>(n - 1));
    s.i0 = std::min(static_cast<int>(u), n - 2);
    s.i1 = s.i0 + 1;
    s.f = u - s.i0;
    return s;
}

PointStencil
pointStencil(const GridIndex &idx, const std::array<int, 3> &dims)
{
    return {axisStencil(idx.r, dims[0]), axisStencil(idx.theta, dims[1]),
            axisStencil(idx.phi, dims[2])};
}

FactorSet::FactorSet(std::array<int, 3> dims, int comps) : mDims(dims), mComps(comps)
{
    for (int m = 0; m < kModes; ++m) {
        mVec[m].assign(static_cast<size_t>(comps) * vecLen(m), 0.0);
        mMat[m].assign(static_cast<size_t>(comps) * matRows(m) * matCols(m), 0.0);
    }
}

namespace {

/// Pointers to the two vector entries and four matrix corners of mode m,
/// each the start of a run of comps values, with their weights.
struct ModeStencil
{
    size_t v[2];
    double wv[2];
    size_t q[4];
    double wq[4];
};

inline ModeStencil
modeStencil(const PointStencil &st, int m, int cols, int comps)
{
    const AxisStencil &sv = st[m];
    const AxisStencil &sr = st[(m + 1) % 3];
    const AxisStencil &sc = st[(m + 2) % 3];
    ModeStencil ms;
    ms.v[0] = static_cast<size_t>(sv.i0) * comps;
    ms.v[1] = static_cast<size_t>(sv.i1) * comps;
    ms.wv[0] = 1.0 - sv.f;
    ms.wv[1] = sv.f;
    ms.q[0] = (static_cast<size_t>(sr.i0) * cols + sc.i0) * comps;
    ms.q[1] = (static_cast<size_t>(sr.i0) * cols + sc.i1) * comps;
    ms.q[2] = (static_cast<size_t>(sr.i1) * cols + sc.i0) * comps;
    ms.q[3] = (static_cast<size_t>(sr.i1) * cols + sc.i1) * comps;
    ms.wq[0] = (1.0 - sr.f) * (1.0 - sc.f);
    ms.wq[1] = (1.0 - sr.f) * sc.f;
    ms.wq[2] = sr.f * (1.0 - sc.f);
    ms.wq[3] = sr.f * sc.f;
    return ms;
}

} // namespace

void
FactorSet::modeTerms(const PointStencil &st, int m, double *lv, double *bm) const
{
    const ModeStencil ms = modeStencil(st, m, matCols(m), mComps);
    const double *v0 = mVec[m].data() + ms.v[0];
    const double *v1 = mVec[m].data() + ms.v[1];
    const double *q0 = mMat[m].data() + ms.q[0];
    const double *q1 = mMat[m].data() + ms.q[1];
    const double *q2 = mMat[m].data() + ms.q[2];
    const double *q3 = mMat[m].data() + ms.q[3];
    for (int c = 0; c < mComps; ++c) {
        lv[c] = ms.wv[0] * v0[c] + ms.wv[1] * v1[c];
        bm[c] = ms.wq[0] * q0[c] + ms.wq[1] * q1[c] + ms.wq[2] * q2[c] + ms.wq[3] * q3[c];
    }
}

void
FactorSet::coefficients(const PointStencil &st, std::span<double> out) const
{
    for (int m = 0; m < kModes; ++m) {
        const ModeStencil ms = modeStencil(st, m, matCols(m), mComps);
        const double *v0 = mVec[m].data() + ms.v[0];
        const double *v1 = mVec[m].data() + ms.v[1];
        const double *q0 = mMat[m].data() + ms.q[0];
        const double *q1 = mMat[m].data() + ms.q[1];
        const double *q2 = mMat[m].data() + ms.q[2];
        const double *q3 = mMat[m].data() + ms.q[3];
        double *o = out.data() + static_cast<size_t>(m) * mComps;
        for (int c = 0; c < mComps; ++c) {
            double lv = ms.wv[0] * v0[c] + ms.wv[1] * v1[c];
            double bm = ms.wq[0] * q0[c] + ms.wq[1] * q1[c] + ms.wq[2] * q2[c] + ms.wq[3] * q3[c];
            o[c] = lv * bm;
        }
    }
}

double
FactorSet::value(const PointStencil &st) const
{
    double s = 0.0;
    for (int m = 0; m < kModes; ++m) {
        const ModeStencil ms = modeStencil(st, m, matCols(m), mComps);
        const double *v0 = mVec[m].data() + ms.v[0];
        const double *v1 = mVec[m].data() + ms.v[1];
        const double *q0 = mMat[m].data() + ms.q[0];
        const double *q1 = mMat[m].data() + ms.q[1];
        const double *q2 = mMat[m].data() + ms.q[2];
        const double *q3 = mMat[m].data() + ms.q[3];
        for (int c = 0; c < mComps; ++c) {
            double lv = ms.wv[0] * v0[c] + ms.wv[1] * v1[c];
            double bm = ms.wq[0] * q0[c] + ms.wq[1] * q1[c] + ms.wq[2] * q2[c] + ms.wq[3] * q3[c];
            s += lv * bm;
        }
    }
    return s;
}

void
FactorSet::scatterMode(const PointStencil &st, int m, const double *dcoef, FactorSet &grad) const
{
    const ModeStencil ms = modeStencil(st, m, matCols(m), mComps);
    const double *v0 = mVec[m].data() + ms.v[0];
    const double *v1 = mVec[m].data() + ms.v[1];
    const double *q0 = mMat[m].data() + ms.q[0];
    const double *q1 = mMat[m].data() + ms.q[1];
    const double *q2 = mMat[m].data() + ms.q[2];
    const double *q3 = mMat[m].data() + ms.q[3];
    double *gv0 = grad.mVec[m].data() + ms.v[0];
    double *gv1 = grad.mVec[m].data() + ms.v[1];
    double *gq0 = grad.mMat[m].data() + ms.q[0];
    double *gq1 = grad.mMat[m].data() + ms.q[1];
    double *gq2 = grad.mMat[m].data() + ms.q[2];
    double *gq3 = grad.mMat[m].data() + ms.q[3];
    // Corners may coincide at clamped borders, so accumulate one by one.
    for (int c = 0; c < mComps; ++c) {
        double lv = ms.wv[0] * v0[c] + ms.wv[1] * v1[c];
        double bm = ms.wq[0] * q0[c] + ms.wq[1] * q1[c] + ms.wq[2] * q2[c] + ms.wq[3] * q3[c];
        double gb = dcoef[c] * bm;
        double gl = dcoef[c] * lv;
        gv0[c] += ms.wv[0] * gb;
        gv1[c] += ms.wv[1] * gb;
        gq0[c] += ms.wq[0] * gl;
        gq1[c] += ms.wq[1] * gl;
        gq2[c] += ms.wq[2] * gl;
        gq3[c] += ms.wq[3] * gl;
    }
}

double
FactorSet::node(int i, int j, int k) const
{
    const std::array<int, 3> at{i, j, k};
    double s = 0.0;
    for (int m = 0; m < kModes; ++m) {
        for (int c = 0; c < mComps; ++c) {
            s += vec(m, c, at[m]) * mat(m, c, at[(m + 1) % 3], at[(m + 2) % 3]);
        }
    }
    return s;
}

FactorSet
FactorSet::pooled(const std::array<int, 3> &kernels) const
{
    std::array<int, 3> pd{};
    for (int a = 0; a < 3; ++a) {
        pd[a] = mDims[a] / kernels[a];
    }
    FactorSet out(pd, mComps);
    for (int m = 0; m < kModes; ++m) {
        const int kv = kernels[m];
        const int kr = kernels[(m + 1) % 3];
        const int kc = kernels[(m + 2) % 3];
        for (int c = 0; c < mComps; ++c) {
            for (int i = 0; i < out.vecLen(m); ++i) {
                double s = 0.0;
                for (int t = 0; t < kv; ++t) {
                    s += vec(m, c, i * kv + t);
                }
                out.vec(m, c, i) = s / kv;
            }
            for (int j = 0; j < out.matRows(m); ++j) {
                for (int k = 0; k < out.matCols(m); ++k) {
                    double s = 0.0;
                    for (int a = 0; a < kr; ++a) {
                        for (int b = 0; b < kc; ++b) {
                            s += mat(m, c, j * kr + a, k * kc + b);
                        }
                    }
                    out.mat(m, c, j, k) = s / (kr * kc);
                }
            }
        }
    }
    return out;
}

size_t
FactorSet::parameterCount() const
{
    size_t n = 0;
    for (int m = 0; m < kModes; ++m) {
        n += mVec[m].size() + mMat[m].size();
    }
    return n;
}

void
FactorSet::fill(double v)
{
    for (int m = 0; m < kModes; ++m) {
        std::fill(mVec[m].begin(), mVec[m].end(), v);
        std::fill(mMat[m].begin(), mMat[m].end(), v);
    }
}

FactorizedGrid::FactorizedGrid(const GridConfig &cfg, int nSigma, int nApp, int channels)
    : mConfig(cfg), mNSigma(nSigma), mNApp(nApp), mChannels(channels)
{
    if (nSigma < 1 || nApp < 1 || channels < 1) {
        throw InputError("component counts and channel count must be positive");
    }
    const std::array<int, 3> dims{cfg.nR(), cfg.nTheta(), cfg.nPhi()};
    for (int y = 0; y < 2; ++y) {
        mDensity[y] = FactorSet(dims, nSigma);
        mAppearance[y] = FactorSet(dims, nApp);
    }
    mBasis = Eigen::MatrixXd::Zero(channels, 6 * nApp);
}

FactorizedGrid
FactorizedGrid::random(const GridConfig &cfg, int nSigma, int nApp, int channels, uint64_t seed,
                       double stddev)
{
    FactorizedGrid g(cfg, nSigma, nApp, channels);
    Rng rng(seed);
    g.forEachTensor([&](const std::string &, std::span<double> t) {
        for (double &x : t) {
            x = stddev * rng.normal();
        }
    });
    return g;
}

size_t
FactorizedGrid::parameterCount() const
{
    size_t n = static_cast<size_t>(mBasis.size());
    for (int y = 0; y < 2; ++y) {
        n += mDensity[y].parameterCount() + mAppearance[y].parameterCount();
    }
    return n;
}

namespace {

const char *kModeNames[3] = {"r", "theta", "phi"};

template <class Grid, class Fn>
void
visitTensors(Grid &g, Fn &&fn)
{
    for (GridId y : kGridIds) {
        for (int kind = 0; kind < 2; ++kind) {
            auto &fs = kind == 0 ? g.density(y) : g.appearance(y);
            const std::string prefix = std::string(kind == 0 ? "density." : "appearance.") +
                                       gridName(y) + ".";
            for (int m = 0; m < kModes; ++m) {
                fn(prefix + "vec." + kModeNames[m], std::span(fs.vectors(m)));
                fn(prefix + "mat." + kModeNames[m], std::span(fs.matrices(m)));
            }
        }
    }
    fn(std::string("basis"), std::span(g.basis().data(), static_cast<size_t>(g.basis().size())));
}

} // namespace

void
FactorizedGrid::forEachTensor(const std::function<void(const std::string &, std::span<double>)> &fn)
{
    visitTensors(*this, fn);
}

void
FactorizedGrid::forEachTensor(
    const std::function<void(const std::string &, std::span<const double>)> &fn) const
{
    visitTensors(*this, fn);
}

void
FactorizedGrid::fill(double v)
{
    forEachTensor([v](const std::string &, std::span<double> t) { std::fill(t.begin(), t.end(), v); });
}

DenseTensor
materialize(const FactorizedGrid &grid, FieldKind which, GridId y)
{
    const GridConfig &cfg = grid.config();
    const size_t nodes = static_cast<size_t>(cfg.nR()) * cfg.nTheta() * cfg.nPhi();
    if (nodes > kMaterializeLimit) {
        throw InputError("materialize refused: " + std::to_string(nodes) + " nodes exceeds " +
                         std::to_string(kMaterializeLimit));
    }
    DenseTensor t;
    if (which == FieldKind::Density) {
        const FactorSet &fs = grid.density(y);
        t.shape = {cfg.nR(), cfg.nTheta(), cfg.nPhi()};
        t.values.resize(nodes);
        size_t idx = 0;
        for (int i = 0; i < cfg.nR(); ++i) {
            for (int j = 0; j < cfg.nTheta(); ++j) {
                for (int k = 0; k < cfg.nPhi(); ++k) {
                    t.values[idx++] = fs.node(i, j, k);
                }
            }
        }
        return t;
    }

    const FactorSet &fs = grid.appearance(y);
    const int C = grid.channels();
    t.shape = {cfg.nR(), cfg.nTheta(), cfg.nPhi(), C};
    t.values.assign(nodes * C, 0.0);
    const Eigen::MatrixXd &B = grid.basis();
    size_t idx = 0;
    for (int i = 0; i < cfg.nR(); ++i) {
        for (int j = 0; j < cfg.nTheta(); ++j) {
            for (int k = 0; k < cfg.nPhi(); ++k, ++idx) {
                const std::array<int, 3> at{i, j, k};
                for (int m = 0; m < kModes; ++m) {
                    for (int c = 0; c < fs.comps(); ++c) {
                        double a = fs.vec(m, c, at[m]) * fs.mat(m, c, at[(m + 1) % 3], at[(m + 2) % 3]);
                        int col = grid.basisColumn(y, c, m);
                        for (int ch = 0; ch < C; ++ch) {
                            t.values[idx * C + ch] += a * B(ch, col);
                        }
                    }
                }
            }
        }
    }
    return t;
}

namespace {

std::array<int, 3>
fineDims(const GridConfig &cfg)
{
    return {cfg.nR(), cfg.nTheta(), cfg.nPhi()};
}

} // namespace

double
queryDensity(const FactorizedGrid &grid, const Vec3 &p)
{
    GridAssignment a = locate(p, grid.config());
    return grid.density(a.grid).value(pointStencil(a.index, fineDims(grid.config())));
}

Eigen::VectorXd
queryAppearance(const FactorizedGrid &grid, const Vec3 &p)
{
    GridAssignment a = locate(p, grid.config());
    const FactorSet &fs = grid.appearance(a.grid);
    Eigen::VectorXd coef(3 * fs.comps());
    fs.coefficients(pointStencil(a.index, fineDims(grid.config())), std::span(coef.data(), coef.size()));
    const int first = grid.basisColumn(a.grid, 0, 0);
    return grid.basis().middleCols(first, 3 * grid.nApp()) * coef;
}

CoarseDensity
poolDensity(const FactorizedGrid &grid, int kernel)
{
    if (kernel < 1) {
        throw InputError("pooling kernel must be >= 1");
    }
    CoarseDensity cd;
    const auto dims = fineDims(grid.config());
    for (int a = 0; a < 3; ++a) {
        cd.kernels[a] = std::min(kernel, dims[a]);
    }
    for (GridId y : kGridIds) {
        cd.factors[gridIndex(y)] = grid.density(y).pooled(cd.kernels);
    }
    return cd;
}

double
queryDensityCoarse(const CoarseDensity &coarse, const Vec3 &p, const GridConfig &cfg)
{
    GridAssignment a = locate(p, cfg);
    const FactorSet &fs = coarse.factors[gridIndex(a.grid)];
    GridIndex ci{coarseCoordinate(a.index.r, coarse.kernels[0]),
                 coarseCoordinate(a.index.theta, coarse.kernels[1]),
                 coarseCoordinate(a.index.phi, coarse.kernels[2])};
    return fs.value(pointStencil(ci, fs.dims()));
}

double
queryDensityCoarse(const FactorizedGrid &grid, const Vec3 &p, int kernel)
{
    return queryDensityCoarse(poolDensity(grid, kernel), p, grid.config());
}

namespace {

/// Sum of squared differences x[k + step] - x[k] over k in [begin, end).
double
tvRun(const double *x, size_t begin, size_t end, size_t step)
{
    double s = 0.0;
    for (size_t k = begin; k < end; ++k) {
        double d = x[k + step] - x[k];
        s += d * d;
    }
    return s;
}

void
tvRunGrad(const double *x, double *g, size_t begin, size_t end, size_t step, double w)
{
    for (size_t k = begin; k < end; ++k) {
        double d = 2.0 * w * (x[k + step] - x[k]);
        g[k + step] += d;
        g[k] -= d;
    }
}

/// Visits every run of neighbour pairs of a factor set: vectors along their
/// axis, matrices along rows and along columns.
template <typename Fn>
void
forEachTvRun(const FactorSet &fs, Fn &&fn)
{
    const size_t C = static_cast<size_t>(fs.comps());
    for (int m = 0; m < kModes; ++m) {
        const size_t len = static_cast<size_t>(fs.vecLen(m));
        const size_t rows = static_cast<size_t>(fs.matRows(m));
        const size_t cols = static_cast<size_t>(fs.matCols(m));
        fn(m, false, 0, (len - 1) * C, C);
        fn(m, true, 0, (rows - 1) * cols * C, cols * C);
        for (size_t j = 0; j < rows; ++j) {
            fn(m, true, j * cols * C, (j * cols + cols - 1) * C, C);
        }
    }
}

} // namespace

double
tvPenalty(const FactorizedGrid &grid)
{
    double s = 0.0;
    for (GridId y : kGridIds) {
        for (const FactorSet *fs : {&grid.density(y), &grid.appearance(y)}) {
            forEachTvRun(*fs, [&](int m, bool isMat, size_t b, size_t e, size_t step) {
                const double *x = isMat ? fs->matrices(m).data() : fs->vectors(m).data();
                s += tvRun(x, b, e, step);
            });
        }
    }
    return s;
}

void
addTvGradient(const FactorizedGrid &grid, double weight, FactorizedGrid &grad)
{
    if (weight == 0.0) {
        return;
    }
    for (GridId y : kGridIds) {
        for (int kind = 0; kind < 2; ++kind) {
            const FactorSet &fs = kind == 0 ? grid.density(y) : grid.appearance(y);
            FactorSet &gs = kind == 0 ? grad.density(y) : grad.appearance(y);
            forEachTvRun(fs, [&](int m, bool isMat, size_t b, size_t e, size_t step) {
                const double *x = isMat ? fs.matrices(m).data() : fs.vectors(m).data();
                double *g = isMat ? gs.matrices(m).data() : gs.vectors(m).data();
                tvRunGrad(x, g, b, e, step, weight);
            });
        }
    }
}

EnvStencil
envStencil(const EnvironmentMap &env, const Vec3 &d)
{
    auto [col, row] = directionToEquirect(d, env.width, env.height);
    double x = col - 0.5;
    double yv = std::clamp(row - 0.5, 0.0, static_cast<double>(env.height - 1));
    double fx0 = std::floor(x);
    double fx = x - fx0;
    int x0 = static_cast<int>(fx0);
    x0 = ((x0 % env.width) + env.width) % env.width;
    int x1 = (x0 + 1) % env.width;
    int y0 = std::min(static_cast<int>(yv), std::max(env.height - 2, 0));
    int y1 = std::min(y0 + 1, env.height - 1);
    double fy = env.height > 1 ? yv - y0 : 0.0;

    EnvStencil st;
    st.texel = {y0 * env.width + x0, y0 * env.width + x1, y1 * env.width + x0, y1 * env.width + x1};
    st.weight = {(1 - fy) * (1 - fx), (1 - fy) * fx, fy * (1 - fx), fy * fx};
    return st;
}

Vec3
envRaw(const EnvironmentMap &env, const EnvStencil &st)
{
    Vec3 v = Vec3::Zero();
    for (int i = 0; i < 4; ++i) {
        const double *t = env.texels.data() + static_cast<size_t>(st.texel[i]) * 3;
        v += st.weight[i] * Vec3(t[0], t[1], t[2]);
    }
    return v;
}

Vec3
envFetch(const EnvironmentMap &env, const Vec3 &d)
{
    Vec3 raw = envRaw(env, envStencil(env, d));
    return raw.unaryExpr([](double x) { return sigmoid(x); });
}

} // namespace yyrf
