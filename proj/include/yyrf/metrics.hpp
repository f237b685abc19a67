// Copyright 2026 The yyrf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <yyrf/image.hpp>

#include <vector>

namespace yyrf {

inline constexpr double kPsnrCap = 99.0;

/// Row weights cos((v + 0.5 - H/2) pi / H) of an H-row equirectangular image.
std::vector<double> sphericalWeights(int height);

/// 10 log10(1 / MSE) over all pixels and channels; kPsnrCap when MSE < 1e-10.
double psnr(const Image &a, const Image &b);

/// PSNR with per-row spherical weights.
double wsPsnr(const Image &a, const Image &b);

/// BT.601 luma, row-major.
std::vector<double> luma(const Image &img);

inline constexpr int kSsimWindow = 11;
inline constexpr double kSsimSigma = 1.5;
inline constexpr double kSsimK1 = 0.01;
inline constexpr double kSsimK2 = 0.03;

/// Mean SSIM over every fully contained 11x11 Gaussian window of the luma.
double ssim(const Image &a, const Image &b);

/// SSIM map averaged with the spherical weight of each window's centre row.
double wsSsim(const Image &a, const Image &b);

struct ImageScores
{
    double psnr = 0.0;
    double wsPsnr = 0.0;
    double ssim = 0.0;
    double wsSsim = 0.0;
};

ImageScores scoreImages(const Image &a, const Image &b);

} // namespace yyrf
