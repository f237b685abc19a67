// Copyright 2026 The yyrf Authors
// SPDX-License-Identifier: Apache-2.0

#include "oracles.hpp"

#include <doctest.h>

#include <yyrf/checkpoint.hpp>
#include <yyrf/dataset.hpp>
#include <yyrf/synthetic.hpp>
#include <yyrf/trainer.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>

using namespace yyrf;
namespace fs = std::filesystem;

namespace {

struct Problem
{
    RadianceField field;
    RayBatch batch;
    std::vector<SampleSet> plans;
    TrainConfig cfg;
};

Problem
makeProblem(uint64_t seed, int rays = 12)
{
    Problem p;
    GridConfig gc = GridConfig::make(6, 7, 20, 0.05, 3.0);
    p.field = RadianceField::random(gc, 2, 2, 3, std::make_pair(4, 8), seed, 16);
    Rng rng(seed + 1);
    for (double &x : p.field.env->texels) {
        x = rng.normal();
    }
    for (int i = 0; i < rays; ++i) {
        Ray r;
        r.origin = oracle::randomPoint(rng, 0.2);
        r.direction = oracle::randomPoint(rng, 1.0).normalized();
        p.batch.rays.push_back(r);
        p.batch.targets.push_back(Vec3(rng.uniform(), rng.uniform(), rng.uniform()));
    }
    p.cfg.nCoarse = 12;
    p.cfg.nFine = 6;
    p.cfg.weightThreshold = 0.0;
    p.cfg.tvWeight = 1e-3;
    p.cfg.chunkRays = 5;
    p.plans = planBatch(p.field, p.batch.rays, p.cfg, true, 0);
    return p;
}

/// Loss through the scalar reference renderer.
double
referenceLoss(const Problem &p)
{
    std::vector<Vec3> pred;
    for (size_t i = 0; i < p.plans.size(); ++i) {
        pred.push_back(renderRay(p.field, p.batch.rays[i], p.plans[i]).rgb);
    }
    return photometricLoss(pred, p.batch.targets) + p.cfg.tvWeight * tvPenalty(p.field.grid);
}

std::vector<std::pair<std::string, std::span<double>>>
tensors(RadianceField &f)
{
    std::vector<std::pair<std::string, std::span<double>>> out;
    f.forEachTensor([&](const std::string &n, std::span<double> t) { out.emplace_back(n, t); });
    return out;
}

std::vector<std::span<const double>>
tensors(const GradientSet &g)
{
    std::vector<std::span<const double>> out;
    g.forEachTensor([&](const std::string &, std::span<const double> t) { out.push_back(t); });
    return out;
}

std::string
readBytes(const fs::path &p)
{
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

} // namespace

TEST_CASE("photometric loss")
{
    std::vector<Vec3> a{Vec3(0.1, 0.2, 0.3), Vec3(0.5, 0.5, 0.5)};
    CHECK(photometricLoss(a, a) == 0.0);
    std::vector<Vec3> p{Vec3(0.1, 0, 0)}, t{Vec3(0, 0, 0)};
    CHECK(photometricLoss(p, t) == doctest::Approx(0.01));
    Rng rng(1);
    std::vector<Vec3> x, y;
    double ref = 0.0;
    for (int i = 0; i < 100; ++i) {
        x.emplace_back(rng.uniform(), rng.uniform(), rng.uniform());
        y.emplace_back(rng.uniform(), rng.uniform(), rng.uniform());
        for (int c = 0; c < 3; ++c) {
            ref += (x[i](c) - y[i](c)) * (x[i](c) - y[i](c));
        }
    }
    CHECK(photometricLoss(x, y) == doctest::Approx(ref / 100));
    CHECK_THROWS_AS(photometricLoss(x, t), InputError);
    CHECK(lossToPsnr(0.03) == doctest::Approx(20.0));
}

TEST_CASE("batched forward matches the scalar renderer")
{
    Problem p = makeProblem(3);
    std::vector<RenderOut> outs = renderRays(p.field, p.plans, p.cfg);
    for (size_t i = 0; i < outs.size(); ++i) {
        RenderOut ref = renderRay(p.field, p.batch.rays[i], p.plans[i]);
        CHECK((outs[i].rgb - ref.rgb).norm() < 1e-12);
        CHECK(outs[i].transmittanceBg == doctest::Approx(ref.transmittanceBg));
    }
    BackwardResult r = forwardBackward(p.field, p.batch, p.plans, p.cfg);
    CHECK(r.loss == doctest::Approx(referenceLoss(p)).epsilon(1e-12));
}

TEST_CASE("analytic gradients match central differences")
{
    Problem p = makeProblem(5);
    BackwardResult r = forwardBackward(p.field, p.batch, p.plans, p.cfg);
    auto ps = tensors(p.field);
    auto gs = tensors(r.grads);
    REQUIRE(ps.size() == gs.size());
    Rng rng(17);
    const double h = 1e-4;
    for (size_t ti = 0; ti < ps.size(); ++ti) {
        // Prefer entries the batch actually touches; untouched ones are
        // checked to be exactly zero below.
        std::vector<size_t> touched;
        for (size_t i = 0; i < gs[ti].size(); ++i) {
            if (gs[ti][i] != 0.0) {
                touched.push_back(i);
            }
        }
        CAPTURE(ps[ti].first);
        REQUIRE(!touched.empty());
        for (int trial = 0; trial < 20; ++trial) {
            size_t i = touched[rng.below(touched.size())];
            double x0 = ps[ti].second[i];
            ps[ti].second[i] = x0 + h;
            double up = referenceLoss(p);
            ps[ti].second[i] = x0 - h;
            double dn = referenceLoss(p);
            ps[ti].second[i] = x0;
            double fd = (up - dn) / (2 * h);
            CAPTURE(i);
            CHECK(std::abs(gs[ti][i] - fd) <= 1e-3 * (std::abs(fd) + 1e-6));
        }
    }
}

TEST_CASE("float decoder stays close to the 64-bit path")
{
    Problem p = makeProblem(6);
    BackwardResult a = forwardBackward(p.field, p.batch, p.plans, p.cfg);
    p.cfg.floatDecoder = true;
    BackwardResult b = forwardBackward(p.field, p.batch, p.plans, p.cfg);
    CHECK(b.loss == doctest::Approx(a.loss).epsilon(1e-5));
    auto ga = tensors(a.grads);
    auto gb = tensors(b.grads);
    for (size_t t = 0; t < ga.size(); ++t) {
        double na = 0.0, nd = 0.0;
        for (size_t i = 0; i < ga[t].size(); ++i) {
            na += ga[t][i] * ga[t][i];
            nd += (ga[t][i] - gb[t][i]) * (ga[t][i] - gb[t][i]);
        }
        CHECK(std::sqrt(nd) <= 1e-4 * std::sqrt(na) + 1e-12);
    }
}

TEST_CASE("gradients are zero when the loss is already zero")
{
    Problem p = makeProblem(7);
    p.cfg.tvWeight = 0.0;
    for (GridId y : kGridIds) {
        FactorSet &d = p.field.grid.density(y);
        d.fill(0.0);
        std::fill(d.vectors(0).begin(), d.vectors(0).end(), 1.0);
        std::fill(d.matrices(0).begin(), d.matrices(0).end(), -1e4);
    }
    for (size_t i = 0; i < p.batch.rays.size(); ++i) {
        p.batch.targets[i] = p.field.background(p.batch.rays[i].direction);
    }
    BackwardResult r = forwardBackward(p.field, p.batch, p.plans, p.cfg);
    CHECK(r.loss == 0.0);
    r.grads.d.grid.forEachTensor([](const std::string &, std::span<const double> t) {
        for (double v : t) {
            CHECK(v == 0.0);
        }
    });
}

TEST_CASE("doubling the residuals doubles the photometric gradient")
{
    Problem p = makeProblem(8);
    p.cfg.tvWeight = 0.0;
    BackwardResult a = forwardBackward(p.field, p.batch, p.plans, p.cfg);
    RayBatch doubled = p.batch;
    for (size_t i = 0; i < doubled.targets.size(); ++i) {
        doubled.targets[i] = a.predictions[i] - 2.0 * (a.predictions[i] - p.batch.targets[i]);
    }
    BackwardResult b = forwardBackward(p.field, doubled, p.plans, p.cfg);
    auto ga = tensors(a.grads);
    auto gb = tensors(b.grads);
    for (size_t t = 0; t < ga.size(); ++t) {
        for (size_t i = 0; i < ga[t].size(); ++i) {
            CHECK(gb[t][i] == doctest::Approx(2.0 * ga[t][i]).epsilon(1e-9).scale(1e-12));
        }
    }
}

TEST_CASE("gradients do not depend on the thread count")
{
    Problem p = makeProblem(9, 40);
    const int before = threadCount();
    setThreadCount(1);
    BackwardResult a = forwardBackward(p.field, p.batch, p.plans, p.cfg);
    setThreadCount(4);
    BackwardResult b = forwardBackward(p.field, p.batch, p.plans, p.cfg);
    setThreadCount(before);
    CHECK(a.loss == b.loss);
    auto ga = tensors(a.grads);
    auto gb = tensors(b.grads);
    for (size_t t = 0; t < ga.size(); ++t) {
        CHECK(std::equal(ga[t].begin(), ga[t].end(), gb[t].begin()));
    }
}

TEST_CASE("non-finite values are reported with the ray")
{
    Problem p = makeProblem(10);
    p.field.mlp.b3(0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(forwardBackward(p.field, p.batch, p.plans, p.cfg), NonFiniteError);
}

TEST_CASE("Adam update")
{
    TrainConfig cfg;
    std::vector<double> x{1.0, 2.0};
    std::vector<double> g{0.0, 0.0};
    AdamState s;
    adamStep(x, g, s, cfg, 0.02);
    CHECK(x == std::vector<double>{1.0, 2.0});
    CHECK(s.step == 1);

    // First step: m_hat = g, v_hat = g^2, so the move is lr g / (|g| + eps).
    std::vector<double> y{0.0, 0.0};
    std::vector<double> gy{1.0, -1.0};
    AdamState t;
    adamStep(y, gy, t, cfg, 0.02);
    CHECK(y[0] == doctest::Approx(-0.02 / (1.0 + 1e-7)).epsilon(1e-12));
    CHECK(y[1] == -y[0]);

    std::vector<double> bad{1.0};
    CHECK_THROWS_AS(adamStep(bad, gy, t, cfg, 0.02), InputError);
}

TEST_CASE("Adam over a field matches the flat update")
{
    Problem p = makeProblem(11);
    BackwardResult r = forwardBackward(p.field, p.batch, p.plans, p.cfg);
    RadianceField a = p.field;
    AdamState sa;
    adamStep(a, r.grads, sa, p.cfg, 0.02);
    adamStep(a, r.grads, sa, p.cfg, 0.02);

    std::vector<double> flat, grad;
    p.field.forEachTensor([&](const std::string &, std::span<const double> t) { flat.insert(flat.end(), t.begin(), t.end()); });
    r.grads.forEachTensor([&](const std::string &, std::span<const double> t) { grad.insert(grad.end(), t.begin(), t.end()); });
    AdamState sf;
    adamStep(flat, grad, sf, p.cfg, 0.02);
    adamStep(flat, grad, sf, p.cfg, 0.02);
    std::vector<double> got;
    a.forEachTensor([&](const std::string &, std::span<const double> t) { got.insert(got.end(), t.begin(), t.end()); });
    CHECK(got == flat);
    CHECK(sa.step == 2);
}

TEST_CASE("a small step on a frozen batch lowers the loss")
{
    int ok = 0;
    const int trials = 20;
    for (int trial = 0; trial < trials; ++trial) {
        Problem p = makeProblem(100 + trial);
        BackwardResult r = forwardBackward(p.field, p.batch, p.plans, p.cfg);
        AdamState s;
        adamStep(p.field, r.grads, s, p.cfg, 1e-3);
        BackwardResult after = forwardBackward(p.field, p.batch, p.plans, p.cfg);
        ok += after.loss <= r.loss;
    }
    CHECK(ok >= 19);
}

TEST_CASE("training: zero steps, determinism, checkpoints")
{
    fs::path dir = fs::temp_directory_path() / "yyrf_unit_train";
    fs::remove_all(dir);
    fs::create_directories(dir);
    SynthOptions so;
    so.nViews = 2;
    so.width = 24;
    so.height = 12;
    so.steps = 64;
    Dataset data = makeSyntheticDataset(SyntheticScene::room(), so, "");
    GridConfig gc = GridConfig::make(8, 9, 28, 0.05, 8.0);

    TrainConfig cfg;
    cfg.batchRays = 64;
    cfg.nCoarse = 16;
    cfg.nFine = 8;
    cfg.seed = 3;

    RadianceField f0 = RadianceField::random(gc, 2, 2, 3, std::nullopt, 1, 16);
    RadianceField same = f0;
    cfg.steps = 0;
    CHECK(train(data, same, cfg).log.empty());
    saveCheckpoint(f0, (dir / "a.yyrf").string());
    saveCheckpoint(same, (dir / "b.yyrf").string());
    CHECK(readBytes(dir / "a.yyrf") == readBytes(dir / "b.yyrf"));

    cfg.steps = 6;
    cfg.checkpointEvery = 3;
    cfg.checkpointPath = (dir / "c1.yyrf").string();
    RadianceField f1 = f0;
    TrainResult r1 = train(data, f1, cfg);
    REQUIRE(r1.log.size() == 6);
    CHECK(r1.log.back().step == 6);
    CHECK(fs::exists(dir / "c1.yyrf"));

    cfg.checkpointPath = (dir / "c2.yyrf").string();
    RadianceField f2 = f0;
    train(data, f2, cfg);
    CHECK(readBytes(dir / "c1.yyrf") == readBytes(dir / "c2.yyrf"));
    CHECK(loadCheckpoint((dir / "c1.yyrf").string()).metadata.find("\"step\":6") != std::string::npos);

    Dataset empty;
    empty.width = 4;
    empty.height = 2;
    CHECK_THROWS_AS(train(empty, f1, cfg), InputError);
    TrainConfig badCfg = cfg;
    badCfg.lr = 0.0;
    CHECK_THROWS_AS(train(data, f1, badCfg), InputError);
    fs::remove_all(dir);
}
