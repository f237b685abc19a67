// Copyright 2026 The yyrf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <yyrf/feature_grid.hpp>

#include <Eigen/Core>

#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <string>

namespace yyrf {

/// Offset added to raw density before the softplus activation.
inline constexpr double kDensityShift = -1.0;

inline double
softplus(double x)
{
    return x > 30.0 ? x : std::log1p(std::exp(x));
}

/// Raw grid value -> volume density.
inline double
activateDensity(double raw)
{
    return softplus(raw + kDensityShift);
}

/// d(density)/d(raw).
inline double
activateDensityGrad(double raw)
{
    return sigmoid(raw + kDensityShift);
}

/// Two frequency bands of sin/cos appended to the raw direction.
inline constexpr int kDirEncodingSize = 15;

/// [d, sin d, cos d, sin 2d, cos 2d] (component-wise).
Eigen::Matrix<double, kDirEncodingSize, 1> encodeDirection(const Vec3 &d);

/// Colour decoder: (feature ⊕ encoded direction) -> 128 -> 128 -> RGB with
/// ReLU hidden units and a sigmoid output.
struct Decoder
{
    Eigen::MatrixXd w1, w2, w3;
    Eigen::VectorXd b1, b2, b3;

    Decoder() = default;
    Decoder(int features, int hidden);

    /// He-normal hidden layers, zero biases, small output layer.
    static Decoder random(int features, int hidden, uint64_t seed);

    int features() const { return static_cast<int>(w1.cols()) - kDirEncodingSize; }
    int hidden() const { return static_cast<int>(w1.rows()); }

    /// Reference single-sample evaluation.
    Vec3 operator()(const Eigen::VectorXd &feature, const Vec3 &d) const;

    size_t parameterCount() const;
};

inline constexpr int kDefaultHidden = 128;

/// Everything that is optimized: factor grids, decoder and optional
/// environment map. Without an environment map the background is black.
struct RadianceField
{
    FactorizedGrid grid;
    Decoder mlp;
    std::optional<EnvironmentMap> env;

    static RadianceField random(const GridConfig &cfg, int nSigma, int nApp, int channels,
                                std::optional<std::pair<int, int>> envSize, uint64_t seed,
                                int hidden = kDefaultHidden);

    double density(const Vec3 &p) const { return activateDensity(queryDensity(grid, p)); }
    Vec3 color(const Vec3 &p, const Vec3 &d) const { return mlp(queryAppearance(grid, p), d); }
    Vec3 background(const Vec3 &d) const { return env ? envFetch(*env, d) : Vec3::Zero(); }

    size_t parameterCount() const;

    void forEachTensor(const std::function<void(const std::string &, std::span<double>)> &fn);
    void forEachTensor(
        const std::function<void(const std::string &, std::span<const double>)> &fn) const;

    bool allFinite() const;
};

/// Gradient buffers shaped like a RadianceField (same tensor order).
struct GradientSet
{
    RadianceField d;

    static GradientSet zerosLike(const RadianceField &field);

    void forEachTensor(const std::function<void(const std::string &, std::span<double>)> &fn)
    {
        d.forEachTensor(fn);
    }
    void forEachTensor(
        const std::function<void(const std::string &, std::span<const double>)> &fn) const
    {
        d.forEachTensor(fn);
    }
    bool allFinite() const { return d.allFinite(); }
};

} // namespace yyrf
