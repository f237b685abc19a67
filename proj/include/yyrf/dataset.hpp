// Copyright 2026 The yyrf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <yyrf/geometry.hpp>
#include <yyrf/image.hpp>

#include <string>
#include <vector>

namespace yyrf {

enum class Split { Train, Test };

const char *splitName(Split s);
Split parseSplit(const std::string &s);

struct Frame
{
    std::string file; ///< relative to the manifest directory
    CameraPose pose;
    Split split = Split::Train;
    Image image;
};

/// Equirectangular views with camera-to-world poses.
struct Dataset
{
    int width = 0;
    int height = 0;
    double rMaxHint = 0.0;
    std::vector<Frame> frames;

    std::vector<const Frame *> split(Split s) const;
};

inline constexpr int kManifestVersion = 1;

/// Pose orthonormality tolerance used when reading manifests. Looser than
/// the in-memory invariant so that hand-written matrices with a few decimals
/// are accepted.
inline constexpr double kManifestPoseTolerance = 1e-6;

/// Parses the manifest and decodes every image to linear RGB.
/// Throws IoError with the offending frame on any problem.
Dataset loadDataset(const std::string &manifestPath);

/// Writes the manifest only; images must already exist next to it.
void saveManifest(const Dataset &data, const std::string &manifestPath);

/// Writes every frame's image (8-bit sRGB PNG) and manifest.json into dir.
void saveDataset(const Dataset &data, const std::string &dir);

} // namespace yyrf
