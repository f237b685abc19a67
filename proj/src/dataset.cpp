// Copyright 2026 The yyrf Authors
// SPDX-License-Identifier: Apache-2.0

#include <yyrf/dataset.hpp>

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <optional>

namespace yyrf {

namespace fs = std::filesystem;
using nlohmann::json;

const char *
splitName(Split s)
{
    return s == Split::Train ? "train" : "test";
}

Split
parseSplit(const std::string &s)
{
    if (s == "train") {
        return Split::Train;
    }
    if (s == "test") {
        return Split::Test;
    }
    throw InputError("unknown split '" + s + "' (expected train or test)");
}

std::vector<const Frame *>
Dataset::split(Split s) const
{
    std::vector<const Frame *> out;
    for (const Frame &f : frames) {
        if (f.split == s) {
            out.push_back(&f);
        }
    }
    return out;
}

namespace {

Eigen::Matrix4d
parseTransform(const json &j)
{
    if (!j.is_array() || j.size() != 4) {
        throw IoError("transform must be a 4x4 array of rows");
    }
    Eigen::Matrix4d m;
    for (int r = 0; r < 4; ++r) {
        if (!j[r].is_array() || j[r].size() != 4) {
            throw IoError("transform row " + std::to_string(r) + " must have 4 numbers");
        }
        for (int c = 0; c < 4; ++c) {
            m(r, c) = j[r][c].get<double>();
        }
    }
    return m;
}

json
transformJson(const CameraPose &pose)
{
    Eigen::Matrix4d m = pose.matrix();
    json rows = json::array();
    for (int r = 0; r < 4; ++r) {
        rows.push_back({m(r, 0), m(r, 1), m(r, 2), m(r, 3)});
    }
    return rows;
}

} // namespace

Dataset
loadDataset(const std::string &manifestPath)
{
    std::ifstream in(manifestPath);
    if (!in) {
        throw IoError("cannot open manifest " + manifestPath);
    }
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception &e) {
        throw IoError("manifest " + manifestPath + " is not valid JSON: " + e.what());
    }

    Dataset data;
    const fs::path root = fs::path(manifestPath).parent_path();
    try {
        if (j.value("format", "") != "yyrf-dataset") {
            throw IoError("not a yyrf dataset manifest");
        }
        int version = j.at("version").get<int>();
        if (version != kManifestVersion) {
            throw IoError("unsupported manifest version " + std::to_string(version));
        }
        data.width = j.at("width").get<int>();
        data.height = j.at("height").get<int>();
        data.rMaxHint = j.value("r_max_hint", 0.0);
        if (data.width <= 0 || data.height <= 0) {
            throw IoError("image size must be positive");
        }
        for (const json &jf : j.at("frames")) {
            Frame f;
            f.file = jf.at("file").get<std::string>();
            f.split = parseSplit(jf.value("split", "train"));
            try {
                f.pose = CameraPose::fromMatrix(parseTransform(jf.at("transform")), kManifestPoseTolerance);
            } catch (const InputError &e) {
                throw IoError("frame " + f.file + ": bad pose: " + e.what());
            }
            data.frames.push_back(std::move(f));
        }
    } catch (const json::exception &e) {
        throw IoError("manifest " + manifestPath + ": " + e.what());
    } catch (const InputError &e) {
        throw IoError("manifest " + manifestPath + ": " + e.what());
    }

    const long n = static_cast<long>(data.frames.size());
    std::vector<std::optional<std::string>> errors(data.frames.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (long i = 0; i < n; ++i) {
        Frame &f = data.frames[i];
        try {
            f.image = readPng((root / f.file).string());
            if (f.image.width != data.width || f.image.height != data.height) {
                errors[i] = "frame " + f.file + " is " + std::to_string(f.image.width) + "x" +
                            std::to_string(f.image.height) + ", manifest says " + std::to_string(data.width) +
                            "x" + std::to_string(data.height);
            }
        } catch (const std::exception &e) {
            errors[i] = std::string(e.what());
        }
    }
    for (const auto &e : errors) {
        if (e) {
            throw IoError(*e);
        }
    }
    return data;
}

void
saveManifest(const Dataset &data, const std::string &manifestPath)
{
    json j;
    j["format"] = "yyrf-dataset";
    j["version"] = kManifestVersion;
    j["width"] = data.width;
    j["height"] = data.height;
    j["r_max_hint"] = data.rMaxHint;
    json frames = json::array();
    for (const Frame &f : data.frames) {
        frames.push_back({{"file", f.file}, {"split", splitName(f.split)}, {"transform", transformJson(f.pose)}});
    }
    j["frames"] = frames;
    std::ofstream out(manifestPath);
    if (!out) {
        throw IoError("cannot write manifest " + manifestPath);
    }
    out << j.dump(2) << '\n';
    if (!out) {
        throw IoError("failed writing manifest " + manifestPath);
    }
}

void
saveDataset(const Dataset &data, const std::string &dir)
{
    fs::create_directories(dir);
    for (const Frame &f : data.frames) {
        writePng((fs::path(dir) / f.file).string(), f.image);
    }
    saveManifest(data, (fs::path(dir) / "manifest.json").string());
}

} // namespace yyrf
