// Copyright 2026 The yyrf Authors
// SPDX-License-Identifier: Apache-2.0

#include <yyrf/checkpoint.hpp>
#include <yyrf/cli.hpp>
#include <yyrf/dataset.hpp>
#include <yyrf/hitmap.hpp>
#include <yyrf/metrics.hpp>
#include <yyrf/synthetic.hpp>
#include <yyrf/trainer.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace yyrf::cli {

namespace fs = std::filesystem;

namespace {

struct Common
{
    int threads = 1;
    uint64_t seed = 0;
};

struct SynthArgs
{
    std::string out;
    std::string scene = "room";
    int views = 16;
    double radius = 0.15;
    int width = 200;
    int height = 100;
    int steps = 512;
    double rMaxHint = 15.0;
};

struct GridArgs
{
    int nR = 48;
    int nTheta = 56;
    int nPhi = 166;
    double r0 = 0.03;
    double rMax = 0.0; ///< 0: dataset hint, else 15
};

struct TrainArgs
{
    std::string data;
    std::string out;
    std::string init;
    GridArgs grid;
    int nSigma = 16;
    int nApp = 48;
    int channels = 27;
    int hidden = kDefaultHidden;
    int envHeight = 0;
    int envWidth = 0;
    TrainConfig train;
};

struct RenderArgs
{
    std::string checkpoint;
    std::string data;
    std::string out;
    std::string split = "test";
    int width = 0;
    int height = 0;
    TrainConfig sampler;
};

struct EvalArgs
{
    std::string pred;
    std::string gt;
    std::string out;
    std::string split = "all";
};

struct HitmapArgs
{
    std::string out;
    std::string data;
    std::string grid = "both";
    GridArgs geom;
    int width = 400;
    int height = 200;
    int shell = -1;
};

/// Options that describe where things live or how many threads run. They do
/// not influence results and are kept out of embedded provenance so that
/// artifacts compare equal across directories and thread counts.
bool
isContextOption(const std::string &key)
{
    static const char *const kKeys[] = {"threads", "config", "out", "data", "checkpoint", "init", "gt", "pred"};
    return std::any_of(std::begin(kKeys), std::end(kKeys), [&](const char *k) { return key == k; });
}

std::string
resolvedConfig(const CLI::App &sub)
{
    return sub.config_to_str(true, false);
}

std::string
provenance(const CLI::App &sub)
{
    std::istringstream in(resolvedConfig(sub));
    std::string line, out;
    while (std::getline(in, line)) {
        auto eq = line.find('=');
        std::string key = eq == std::string::npos ? line : line.substr(0, eq);
        key.erase(key.find_last_not_of(" \t") + 1);
        if (!isContextOption(key)) {
            out += line + '\n';
        }
    }
    return out;
}

void
addCommon(CLI::App *sub, Common &c)
{
    sub->add_option("--threads", c.threads, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
    sub->add_option("--seed", c.seed, "Random seed")->capture_default_str();
}

void
addGrid(CLI::App *sub, GridArgs &g)
{
    sub->add_option("--n-r", g.nR, "Radial shells per component grid")->capture_default_str();
    sub->add_option("--n-theta", g.nTheta, "Colatitude cells per component grid")->capture_default_str();
    sub->add_option("--n-phi", g.nPhi, "Longitude cells per component grid")->capture_default_str();
    sub->add_option("--r0", g.r0, "Innermost shell radius")->capture_default_str();
    sub->add_option("--r-max", g.rMax, "Outer radius (0: dataset hint, or 15)")->capture_default_str();
}

void
addSampler(CLI::App *sub, TrainConfig &t)
{
    sub->add_option("--n-coarse", t.nCoarse, "Coarse samples per ray")->capture_default_str();
    sub->add_option("--n-fine", t.nFine, "Fine samples per ray")->capture_default_str();
    sub->add_option("--kernel", t.kernel, "Pooling kernel of the coarse grid")->capture_default_str();
    sub->add_option("--weight-threshold", t.weightThreshold, "Skip colour for samples below this weight")
        ->capture_default_str();
    sub->add_option("--chunk-rays", t.chunkRays, "Rays per work unit")->capture_default_str();
    sub->add_flag("--float-decoder", t.floatDecoder, "Run the colour decoder in 32-bit floats");
}

GridConfig
makeGrid(const GridArgs &g, double hint)
{
    double rMax = g.rMax > 0.0 ? g.rMax : (hint > 0.0 ? hint : 15.0);
    return GridConfig::make(g.nR, g.nTheta, g.nPhi, g.r0, rMax);
}

std::string
toString(const Image &img)
{
    return std::to_string(img.width) + "x" + std::to_string(img.height);
}

int
runSynth(const SynthArgs &a, const Common &c, const std::string &prov)
{
    if (a.scene != "room") {
        throw InputError("unknown scene '" + a.scene + "'");
    }
    SynthOptions opt;
    opt.nViews = a.views;
    opt.radius = a.radius;
    opt.width = a.width;
    opt.height = a.height;
    opt.steps = a.steps;
    opt.seed = c.seed;
    opt.rMaxHint = a.rMaxHint;
    Dataset d = makeSyntheticDataset(SyntheticScene::room(), opt, a.out);
    std::ofstream(fs::path(a.out) / "config.toml") << prov;
    std::cout << "wrote " << d.frames.size() << " views (" << toString(d.frames.front().image) << ") to " << a.out
              << '\n';
    return kExitOk;
}

int
runTrain(TrainArgs &a, const Common &c, const std::string &prov)
{
    Dataset data = loadDataset(a.data);
    fs::create_directories(a.out);
    const std::string ckpt = (fs::path(a.out) / "checkpoint.yyrf").string();
    a.train.seed = c.seed;
    a.train.checkpointPath = ckpt;

    RadianceField field;
    if (!a.init.empty()) {
        field = loadCheckpoint(a.init, makeGrid(a.grid, data.rMaxHint)).field;
    } else {
        std::optional<std::pair<int, int>> env;
        if (a.envHeight > 0 && a.envWidth > 0) {
            env = std::make_pair(a.envHeight, a.envWidth);
        }
        field = RadianceField::random(makeGrid(a.grid, data.rMaxHint), a.nSigma, a.nApp, a.channels, env, c.seed,
                                      a.hidden);
    }
    std::cout << "grid " << field.grid.config().describe() << ", " << field.parameterCount() << " parameters\n";

    std::ofstream log((fs::path(a.out) / "metrics.csv").string());
    if (!log) {
        throw IoError("cannot write metrics log in " + a.out);
    }
    log << "step,wall_ms,loss,batch_psnr\n";
    char line[160];
    auto onStep = [&](const LogRow &r) {
        std::snprintf(line, sizeof line, "%lld,%.3f,%.9g,%.6f\n", static_cast<long long>(r.step), r.wallMs, r.loss,
                      r.batchPsnr);
        log << line;
        if (r.step % 100 == 0 || r.step == a.train.steps) {
            log.flush();
            std::snprintf(line, sizeof line, "step %lld loss %.6f batch_psnr %.3f (%.1f s)\n",
                          static_cast<long long>(r.step), r.loss, r.batchPsnr, r.wallMs / 1000.0);
            std::cout << line << std::flush;
        }
    };
    nlohmann::json meta;
    meta["config"] = prov;
    meta["steps"] = a.train.steps;
    try {
        train(data, field, a.train, onStep);
    } catch (const NonFiniteError &) {
        std::cerr << "training stopped on a non-finite value; the last checkpoint in " << a.out << " is kept\n";
        throw;
    }
    saveCheckpoint(field, ckpt, meta.dump());
    std::ofstream(fs::path(a.out) / "config.toml") << prov;
    std::cout << "wrote " << ckpt << '\n';
    return kExitOk;
}

int
runRender(const RenderArgs &a, const std::string &prov)
{
    LoadedCheckpoint ck = loadCheckpoint(a.checkpoint);
    Dataset data = loadDataset(a.data);
    const int w = a.width > 0 ? a.width : data.width;
    const int h = a.height > 0 ? a.height : data.height;
    fs::create_directories(a.out);
    Dataset out;
    out.width = w;
    out.height = h;
    out.rMaxHint = data.rMaxHint;
    for (const Frame &f : data.frames) {
        if (a.split != "all" && parseSplit(a.split) != f.split) {
            continue;
        }
        Image img = renderImage(ck.field, f.pose, w, h, a.sampler);
        writePng((fs::path(a.out) / f.file).string(), img, {{"yyrf-config", prov}});
        Frame g;
        g.file = f.file;
        g.pose = f.pose;
        g.split = f.split;
        out.frames.push_back(std::move(g));
        std::cout << "rendered " << f.file << '\n';
    }
    saveManifest(out, (fs::path(a.out) / "manifest.json").string());
    return kExitOk;
}

int
runEval(const EvalArgs &a, const std::string &prov)
{
    Dataset pred = loadDataset(a.pred);
    Dataset gt = loadDataset(a.gt);
    std::ostringstream csv;
    csv << "# " << std::string(prov.empty() ? "" : "yyrf eval") << '\n';
    csv << "file,psnr,ws_psnr,ssim,ws_ssim\n";
    ImageScores sum;
    int n = 0;
    char line[256];
    for (const Frame &g : gt.frames) {
        if (a.split != "all" && parseSplit(a.split) != g.split) {
            continue;
        }
        auto it = std::find_if(pred.frames.begin(), pred.frames.end(), [&](const Frame &p) { return p.file == g.file; });
        if (it == pred.frames.end()) {
            throw IoError("no prediction for " + g.file);
        }
        ImageScores s = scoreImages(it->image, g.image);
        std::snprintf(line, sizeof line, "%s,%.6f,%.6f,%.6f,%.6f\n", g.file.c_str(), s.psnr, s.wsPsnr, s.ssim,
                      s.wsSsim);
        csv << line;
        sum.psnr += s.psnr;
        sum.wsPsnr += s.wsPsnr;
        sum.ssim += s.ssim;
        sum.wsSsim += s.wsSsim;
        ++n;
    }
    if (n == 0) {
        throw InputError("no frames to evaluate");
    }
    std::snprintf(line, sizeof line, "mean,%.6f,%.6f,%.6f,%.6f\n", sum.psnr / n, sum.wsPsnr / n, sum.ssim / n,
                  sum.wsSsim / n);
    csv << line;
    std::string text = csv.str();
    // Provenance as comment lines so the table stays machine-readable.
    std::string header;
    std::istringstream pin(prov);
    for (std::string l; std::getline(pin, l);) {
        header += "# " + l + '\n';
    }
    text = header + text.substr(text.find('\n') + 1);
    if (a.out.empty()) {
        std::cout << text;
    } else {
        std::ofstream out(a.out);
        if (!out) {
            throw IoError("cannot write " + a.out);
        }
        out << text;
        std::cout << "wrote " << a.out << " (" << n << " images, mean psnr " << sum.psnr / n << ")\n";
    }
    return kExitOk;
}

int
runHitmap(const HitmapArgs &a)
{
    std::vector<CameraPose> poses;
    double hint = 0.0;
    if (!a.data.empty()) {
        Dataset d = loadDataset(a.data);
        hint = d.rMaxHint;
        for (const Frame &f : d.frames) {
            poses.push_back(f.pose);
        }
    } else {
        poses.emplace_back();
    }
    const GridConfig cfg = makeGrid(a.geom, hint);
    const std::vector<Ray> rays = equirectRays(poses, a.width, a.height);
    fs::create_directories(a.out);
    std::ofstream summary((fs::path(a.out) / "summary.csv").string());
    summary << "grid,cells,non_empty,total,mean,cv\n";
    char line[200];
    if (a.grid == "spherical" || a.grid == "both") {
        HitHistogram h = sphericalHits(rays, cfg);
        writeSphericalCsv((fs::path(a.out) / "spherical_hits.csv").string(), h, cfg);
        writeSphericalSlicePng((fs::path(a.out) / "spherical_slice.png").string(), h, cfg,
                               a.shell >= 0 ? a.shell : cfg.nR() / 2);
        std::snprintf(line, sizeof line, "spherical,%zu,%zu,%llu,%.6f,%.6f\n", h.counts.size(), h.nonEmpty,
                      static_cast<unsigned long long>(h.total), h.mean, h.cv);
        summary << line;
        std::cout << line;
    }
    if (a.grid == "cartesian" || a.grid == "both") {
        CartesianGrid cg = matchedCartesianGrid(cfg);
        HitHistogram h = cartesianHits(rays, cg);
        writeCartesianCsv((fs::path(a.out) / "cartesian_hits.csv").string(), h, cg);
        writeCartesianSlicePng((fs::path(a.out) / "cartesian_slice.png").string(), h, cg);
        std::snprintf(line, sizeof line, "cartesian,%zu,%zu,%llu,%.6f,%.6f\n", h.counts.size(), h.nonEmpty,
                      static_cast<unsigned long long>(h.total), h.mean, h.cv);
        summary << line;
        std::cout << line;
    }
    return kExitOk;
}

} // namespace

int
run(const std::vector<std::string> &args)
{
    CLI::App app{"Egocentric radiance fields on a balanced spherical grid", "yyrf"};
    app.set_config("--config", "", "TOML config file (flags override it)");
    app.require_subcommand(1);

    Common common;
    SynthArgs synth;
    TrainArgs train;
    RenderArgs render;
    EvalArgs eval;
    HitmapArgs hitmap;

    CLI::App *sSynth = app.add_subcommand("synth", "Render the synthetic room dataset");
    addCommon(sSynth, common);
    sSynth->add_option("--out", synth.out, "Output directory")->required();
    sSynth->add_option("--scene", synth.scene, "Scene name")->capture_default_str();
    sSynth->add_option("--views", synth.views, "Number of views")->check(CLI::PositiveNumber)->capture_default_str();
    sSynth->add_option("--radius", synth.radius, "Camera circle radius")->capture_default_str();
    sSynth->add_option("--width", synth.width, "Image width")->check(CLI::PositiveNumber)->capture_default_str();
    sSynth->add_option("--height", synth.height, "Image height")->check(CLI::PositiveNumber)->capture_default_str();
    sSynth->add_option("--steps", synth.steps, "Ray-marching steps per pixel")->capture_default_str();
    sSynth->add_option("--r-max-hint", synth.rMaxHint, "Suggested outer radius stored in the manifest")
        ->capture_default_str();

    CLI::App *sTrain = app.add_subcommand("train", "Optimize a radiance field on a dataset");
    addCommon(sTrain, common);
    sTrain->add_option("--data", train.data, "Dataset manifest")->required();
    sTrain->add_option("--out", train.out, "Output directory")->required();
    sTrain->add_option("--init", train.init, "Start from this checkpoint");
    addGrid(sTrain, train.grid);
    sTrain->add_option("--n-sigma", train.nSigma, "Density components per mode")->capture_default_str();
    sTrain->add_option("--n-app", train.nApp, "Appearance components per mode")->capture_default_str();
    sTrain->add_option("--channels", train.channels, "Appearance feature size")->capture_default_str();
    sTrain->add_option("--hidden", train.hidden, "Decoder hidden width")->capture_default_str();
    sTrain->add_option("--env-height", train.envHeight, "Environment map rows (0: none)")->capture_default_str();
    sTrain->add_option("--env-width", train.envWidth, "Environment map columns (0: none)")->capture_default_str();
    sTrain->add_option("--steps", train.train.steps, "Optimizer steps")->capture_default_str();
    sTrain->add_option("--batch", train.train.batchRays, "Rays per step")->capture_default_str();
    sTrain->add_option("--lr", train.train.lr, "Learning rate")->capture_default_str();
    sTrain->add_flag("--lr-decay", train.train.lrDecay, "Decay the learning rate to 0.1x over the run");
    sTrain->add_option("--tv-weight", train.train.tvWeight, "Total-variation weight")->capture_default_str();
    sTrain->add_option("--checkpoint-every", train.train.checkpointEvery, "Steps between checkpoints (0: end only)")
        ->capture_default_str();
    addSampler(sTrain, train.train);

    CLI::App *sRender = app.add_subcommand("render", "Render the poses of a manifest");
    addCommon(sRender, common);
    sRender->add_option("--checkpoint", render.checkpoint, "Checkpoint file")->required();
    sRender->add_option("--data", render.data, "Manifest providing poses")->required();
    sRender->add_option("--out", render.out, "Output directory")->required();
    sRender->add_option("--split", render.split, "train, test or all")
        ->check(CLI::IsMember({"train", "test", "all"}))
        ->capture_default_str();
    sRender->add_option("--width", render.width, "Image width (0: dataset)")->capture_default_str();
    sRender->add_option("--height", render.height, "Image height (0: dataset)")->capture_default_str();
    addSampler(sRender, render.sampler);

    CLI::App *sEval = app.add_subcommand("eval", "Score rendered images against ground truth");
    addCommon(sEval, common);
    sEval->add_option("--pred", eval.pred, "Manifest of rendered images")->required();
    sEval->add_option("--gt", eval.gt, "Manifest of reference images")->required();
    sEval->add_option("--out", eval.out, "CSV output (default: stdout)");
    sEval->add_option("--split", eval.split, "train, test or all")
        ->check(CLI::IsMember({"train", "test", "all"}))
        ->capture_default_str();

    CLI::App *sHit = app.add_subcommand("hitmap", "Ray-cell hit histograms of the spherical and Cartesian grids");
    addCommon(sHit, common);
    sHit->add_option("--out", hitmap.out, "Output directory")->required();
    sHit->add_option("--data", hitmap.data, "Manifest providing poses (default: one pose at the origin)");
    sHit->add_option("--grid", hitmap.grid, "spherical, cartesian or both")
        ->check(CLI::IsMember({"spherical", "cartesian", "both"}))
        ->capture_default_str();
    addGrid(sHit, hitmap.geom);
    sHit->add_option("--width", hitmap.width, "Rays per image row")->capture_default_str();
    sHit->add_option("--height", hitmap.height, "Rays per image column")->capture_default_str();
    sHit->add_option("--shell", hitmap.shell, "Radial shell of the slice image (-1: middle)")->capture_default_str();

    try {
        // CLI11 consumes the vector from the back.
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        app.exit(e);
        return kExitUsage;
    }

    CLI::App *sub = app.get_subcommands().front();
    std::cout << "# resolved configuration\n[" << sub->get_name() << "]\n" << resolvedConfig(*sub) << std::flush;
    const std::string prov = "[" + sub->get_name() + "]\n" + provenance(*sub);
    try {
        setThreadCount(common.threads);
        if (sub == sSynth) {
            return runSynth(synth, common, prov);
        }
        if (sub == sTrain) {
            return runTrain(train, common, prov);
        }
        if (sub == sRender) {
            return runRender(render, prov);
        }
        if (sub == sEval) {
            return runEval(eval, prov);
        }
        return runHitmap(hitmap);
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFailure;
    }
}

int
run(int argc, const char *const *argv)
{
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) {
        args.emplace_back(argv[i]);
    }
    return run(args);
}

} // namespace yyrf::cli
