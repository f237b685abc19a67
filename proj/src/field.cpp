// Copyright 2026 The yyrf Authors
// SPDX-License-Identifier: Apache-2.0

#include <yyrf/field.hpp>
#include <yyrf/rng.hpp>

#include <cmath>

namespace yyrf {

Eigen::Matrix<double, kDirEncodingSize, 1>
encodeDirection(const Vec3 &d)
{
    Eigen::Matrix<double, kDirEncodingSize, 1> e;
    for (int a = 0; a < 3; ++a) {
        e(a) = d(a);
        e(3 + a) = std::sin(d(a));
        e(6 + a) = std::cos(d(a));
        e(9 + a) = std::sin(2.0 * d(a));
        e(12 + a) = std::cos(2.0 * d(a));
    }
    return e;
}

Decoder::Decoder(int features, int hidden)
    : w1(Eigen::MatrixXd::Zero(hidden, features + kDirEncodingSize)),
      w2(Eigen::MatrixXd::Zero(hidden, hidden)),
      w3(Eigen::MatrixXd::Zero(3, hidden)),
      b1(Eigen::VectorXd::Zero(hidden)),
      b2(Eigen::VectorXd::Zero(hidden)),
      b3(Eigen::VectorXd::Zero(3))
{
}

Decoder
Decoder::random(int features, int hidden, uint64_t seed)
{
    Decoder m(features, hidden);
    Rng rng(seed);
    auto init = [&rng](Eigen::MatrixXd &w, double sd) {
        for (Eigen::Index i = 0; i < w.size(); ++i) {
            w.data()[i] = sd * rng.normal();
        }
    };
    init(m.w1, std::sqrt(2.0 / m.w1.cols()));
    init(m.w2, std::sqrt(2.0 / m.w2.cols()));
    init(m.w3, 0.1 / std::sqrt(static_cast<double>(m.w3.cols())));
    return m;
}

Vec3
Decoder::operator()(const Eigen::VectorXd &feature, const Vec3 &d) const
{
    Eigen::VectorXd x(w1.cols());
    x.head(feature.size()) = feature;
    x.tail(kDirEncodingSize) = encodeDirection(d);
    Eigen::VectorXd h1 = (w1 * x + b1).cwiseMax(0.0);
    Eigen::VectorXd h2 = (w2 * h1 + b2).cwiseMax(0.0);
    Eigen::Vector3d z = w3 * h2 + b3;
    return z.unaryExpr([](double v) { return sigmoid(v); });
}

size_t
Decoder::parameterCount() const
{
    return static_cast<size_t>(w1.size() + w2.size() + w3.size() + b1.size() + b2.size() + b3.size());
}

RadianceField
RadianceField::random(const GridConfig &cfg, int nSigma, int nApp, int channels,
                      std::optional<std::pair<int, int>> envSize, uint64_t seed, int hidden)
{
    RadianceField f;
    f.grid = FactorizedGrid::random(cfg, nSigma, nApp, channels, seed);
    f.mlp = Decoder::random(channels, hidden, seed ^ 0x5bd1e995ULL);
    if (envSize) {
        f.env = EnvironmentMap(envSize->first, envSize->second, 0.0);
    }
    return f;
}

size_t
RadianceField::parameterCount() const
{
    return grid.parameterCount() + mlp.parameterCount() + (env ? env->texels.size() : 0);
}

namespace {

template <class Field, class Fn>
void
visitField(Field &f, Fn &&fn)
{
    f.grid.forEachTensor(fn);
    auto mat = [&](const char *name, auto &m) {
        fn(std::string("mlp.") + name, std::span(m.data(), static_cast<size_t>(m.size())));
    };
    mat("w1", f.mlp.w1);
    mat("b1", f.mlp.b1);
    mat("w2", f.mlp.w2);
    mat("b2", f.mlp.b2);
    mat("w3", f.mlp.w3);
    mat("b3", f.mlp.b3);
    if (f.env) {
        fn(std::string("env"), std::span(f.env->texels));
    }
}

} // namespace

void
RadianceField::forEachTensor(const std::function<void(const std::string &, std::span<double>)> &fn)
{
    visitField(*this, fn);
}

void
RadianceField::forEachTensor(
    const std::function<void(const std::string &, std::span<const double>)> &fn) const
{
    visitField(*this, fn);
}

bool
RadianceField::allFinite() const
{
    bool ok = true;
    forEachTensor([&ok](const std::string &, std::span<const double> t) {
        for (double x : t) {
            ok = ok && std::isfinite(x);
        }
    });
    return ok;
}

GradientSet
GradientSet::zerosLike(const RadianceField &field)
{
    GradientSet g;
    g.d = field;
    g.d.forEachTensor([](const std::string &, std::span<double> t) {
        std::fill(t.begin(), t.end(), 0.0);
    });
    return g;
}

} // namespace yyrf
