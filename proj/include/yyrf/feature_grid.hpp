// Copyright 2026 The yyrf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <yyrf/geometry.hpp>

#include <Eigen/Core>

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace yyrf {

/// Factor modes. Mode m owns a vector along axis m and a matrix over the two
/// remaining axes taken cyclically: R -> (Theta, Phi), Theta -> (Phi, R),
/// Phi -> (R, Theta).
enum class Mode : int { R = 0, Theta = 1, Phi = 2 };

inline constexpr int kModes = 3;

/// Linear interpolation stencil along one axis: value = (1-f) x[i] + f x[i+1].
struct AxisStencil
{
    int i0 = 0;
    int i1 = 0;
    double f = 0.0;
};

/// Clamps u to [0, n-1] and splits it into a cell and a fraction.
AxisStencil axisStencil(double u, int n);

/// Interpolation stencils for the three axes of one point.
using PointStencil = std::array<AxisStencil, 3>;

PointStencil pointStencil(const GridIndex &idx, const std::array<int, 3> &dims);

/// Vector-matrix factors of one 3D tensor (one kind, one component grid).
/// Storage is component-innermost: vectors[m] holds dims[m] x comps values
/// (index i * comps + c), matrices[m] holds rows(m) x cols(m) x comps values
/// (index (j * cols + k) * comps + c).
class FactorSet
{
public:
    FactorSet() = default;
    FactorSet(std::array<int, 3> dims, int comps);

    const std::array<int, 3> &dims() const { return mDims; }
    int comps() const { return mComps; }
    int vecLen(int m) const { return mDims[m]; }
    int matRows(int m) const { return mDims[(m + 1) % 3]; }
    int matCols(int m) const { return mDims[(m + 2) % 3]; }

    std::vector<double> &vectors(int m) { return mVec[m]; }
    const std::vector<double> &vectors(int m) const { return mVec[m]; }
    std::vector<double> &matrices(int m) { return mMat[m]; }
    const std::vector<double> &matrices(int m) const { return mMat[m]; }

    double &vec(int m, int c, int i) { return mVec[m][static_cast<size_t>(i) * mComps + c]; }
    double vec(int m, int c, int i) const { return mVec[m][static_cast<size_t>(i) * mComps + c]; }
    double &mat(int m, int c, int j, int k)
    {
        return mMat[m][(static_cast<size_t>(j) * matCols(m) + k) * mComps + c];
    }
    double mat(int m, int c, int j, int k) const
    {
        return mMat[m][(static_cast<size_t>(j) * matCols(m) + k) * mComps + c];
    }

    /// Linear vector term lv[c] and bilinear matrix term bm[c] of mode m.
    void modeTerms(const PointStencil &st, int m, double *lv, double *bm) const;

    /// Per (mode, component) products lv * bm laid out as out[m * comps + c].
    /// out must hold 3 * comps() values.
    void coefficients(const PointStencil &st, std::span<double> out) const;

    /// Sum of all coefficients: the trilinearly interpolated tensor value.
    double value(const PointStencil &st) const;

    /// Adds d(coefficient)/d(factor) * dcoef[c] for mode m into grad, where
    /// dcoef[c] is the upstream derivative of coefficient (m, c).
    void scatterMode(const PointStencil &st, int m, const double *dcoef, FactorSet &grad) const;

    /// Tensor entry at integer node (i, j, k) = (r, theta, phi).
    double node(int i, int j, int k) const;

    /// Factors of the tensor average-pooled with the given per-axis windows
    /// (stride = window, trailing partial windows dropped). Exact since each
    /// term is separable across the pooled blocks.
    FactorSet pooled(const std::array<int, 3> &kernels) const;

    size_t parameterCount() const;

    void fill(double v);

private:
    std::array<int, 3> mDims{};
    int mComps = 0;
    std::array<std::vector<double>, 3> mVec;
    std::array<std::vector<double>, 3> mMat;
};

enum class FieldKind { Density, Appearance };

/// VM-factorized density and appearance tensors for both component grids
/// plus the appearance basis B (C x 6 nApp). Basis column for (grid y,
/// mode m, component n) is y * 3 nApp + m * nApp + n, matching the layout
/// of FactorSet::coefficients.
class FactorizedGrid
{
public:
    FactorizedGrid() = default;
    FactorizedGrid(const GridConfig &cfg, int nSigma, int nApp, int channels);

    /// Every factor entry and basis entry i.i.d. normal(0, stddev).
    static FactorizedGrid random(const GridConfig &cfg, int nSigma, int nApp, int channels,
                                 uint64_t seed, double stddev = 0.1);

    const GridConfig &config() const { return mConfig; }
    int nSigma() const { return mNSigma; }
    int nApp() const { return mNApp; }
    int channels() const { return mChannels; }

    FactorSet &density(GridId y) { return mDensity[gridIndex(y)]; }
    const FactorSet &density(GridId y) const { return mDensity[gridIndex(y)]; }
    FactorSet &appearance(GridId y) { return mAppearance[gridIndex(y)]; }
    const FactorSet &appearance(GridId y) const { return mAppearance[gridIndex(y)]; }
    Eigen::MatrixXd &basis() { return mBasis; }
    const Eigen::MatrixXd &basis() const { return mBasis; }

    int basisColumn(GridId y, int comp, int mode) const
    {
        return gridIndex(y) * 3 * mNApp + mode * mNApp + comp;
    }

    size_t parameterCount() const;

    /// Visits every parameter tensor in a fixed order (the checkpoint order).
    void forEachTensor(const std::function<void(const std::string &, std::span<double>)> &fn);
    void forEachTensor(
        const std::function<void(const std::string &, std::span<const double>)> &fn) const;

    void fill(double v);

private:
    GridConfig mConfig = GridConfig::make(2, 2, 2, 1.0, 3.0);
    int mNSigma = 0;
    int mNApp = 0;
    int mChannels = 0;
    std::array<FactorSet, 2> mDensity;
    std::array<FactorSet, 2> mAppearance;
    Eigen::MatrixXd mBasis;
};

/// Dense row-major tensor from materialize(): density has shape
/// nR x nTheta x nPhi, appearance nR x nTheta x nPhi x C.
struct DenseTensor
{
    std::vector<int> shape;
    std::vector<double> values;

    double at(int i, int j, int k, int c = 0) const
    {
        size_t idx = ((static_cast<size_t>(i) * shape[1] + j) * shape[2] + k);
        return shape.size() == 4 ? values[idx * shape[3] + c] : values[idx];
    }
};

inline constexpr size_t kMaterializeLimit = 1'000'000;

/// Expands the factor sum into a dense tensor. Refuses grids larger than
/// kMaterializeLimit nodes; intended for verification only.
DenseTensor materialize(const FactorizedGrid &grid, FieldKind which, GridId y);

/// Raw (pre-activation) density at p, interpolating factors in place.
double queryDensity(const FactorizedGrid &grid, const Vec3 &p);

/// C-dimensional appearance feature at p.
Eigen::VectorXd queryAppearance(const FactorizedGrid &grid, const Vec3 &p);

/// Density factors of both component grids pooled with the given kernel.
struct CoarseDensity
{
    std::array<int, 3> kernels{1, 1, 1}; ///< effective kernel per axis (r, theta, phi)
    std::array<FactorSet, 2> factors;
};

/// Kernel is clamped per axis to the axis length.
CoarseDensity poolDensity(const FactorizedGrid &grid, int kernel);

/// Fine-grid coordinate u mapped onto an axis pooled by kernel (window
/// centres: coarse node j sits at fine coordinate j k + (k - 1) / 2).
inline double
coarseCoordinate(double u, int kernel)
{
    return (u + 0.5) / kernel - 0.5;
}

double queryDensityCoarse(const CoarseDensity &coarse, const Vec3 &p, const GridConfig &cfg);

/// Convenience: pools on every call.
double queryDensityCoarse(const FactorizedGrid &grid, const Vec3 &p, int kernel);

/// Sum of squared neighbour differences over every vector (along its axis) and
/// every matrix (along both axes), density and appearance, both grids.
double tvPenalty(const FactorizedGrid &grid);

/// Adds weight * d(tvPenalty)/d(factor) into grad.
void addTvGradient(const FactorizedGrid &grid, double weight, FactorizedGrid &grad);

/// Equirectangular background stored as unconstrained values; fetch applies a
/// sigmoid to bilinearly interpolated texels.
struct EnvironmentMap
{
    int height = 0;
    int width = 0;
    std::vector<double> texels; ///< height x width x 3, row-major

    EnvironmentMap() = default;
    EnvironmentMap(int h, int w, double value = 0.0)
        : height(h), width(w), texels(static_cast<size_t>(h) * w * 3, value)
    {
    }

    double &at(int row, int col, int ch) { return texels[(static_cast<size_t>(row) * width + col) * 3 + ch]; }
    double at(int row, int col, int ch) const
    {
        return texels[(static_cast<size_t>(row) * width + col) * 3 + ch];
    }
};

/// Four texels and bilinear weights for a direction (longitude wraps, latitude clamps).
struct EnvStencil
{
    std::array<int, 4> texel{}; ///< row * width + col
    std::array<double, 4> weight{};
};

EnvStencil envStencil(const EnvironmentMap &env, const Vec3 &d);

/// Interpolated raw value before the sigmoid.
Vec3 envRaw(const EnvironmentMap &env, const EnvStencil &st);

Vec3 envFetch(const EnvironmentMap &env, const Vec3 &d);

inline double
sigmoid(double x)
{
    return 1.0 / (1.0 + std::exp(-x));
}

} // namespace yyrf
