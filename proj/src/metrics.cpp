// Copyright 2026 The yyrf Authors
// SPDX-License-Identifier: Apache-2.0

#include <yyrf/metrics.hpp>

#include <cmath>

namespace yyrf {

namespace {

void
checkPair(const Image &a, const Image &b)
{
    if (!a.sameSize(b)) {
        throw InputError("image sizes differ: " + std::to_string(a.width) + "x" + std::to_string(a.height) + " vs " +
                         std::to_string(b.width) + "x" + std::to_string(b.height));
    }
    if (a.width <= 0 || a.height <= 0) {
        throw InputError("empty image");
    }
}

double
mseToPsnr(double mse)
{
    return mse < 1e-10 ? kPsnrCap : -10.0 * std::log10(mse);
}

/// SSIM map over valid window positions; calls fn(centreRow, value).
template <typename Fn>
void
ssimMap(const Image &a, const Image &b, Fn &&fn)
{
    checkPair(a, b);
    constexpr int kW = kSsimWindow;
    if (a.width < kW || a.height < kW) {
        throw InputError("image smaller than the 11x11 SSIM window");
    }
    double g[kW];
    double gs = 0.0;
    for (int i = 0; i < kW; ++i) {
        double x = i - kW / 2;
        g[i] = std::exp(-x * x / (2.0 * kSsimSigma * kSsimSigma));
        gs += g[i];
    }
    for (double &v : g) {
        v /= gs;
    }
    const std::vector<double> x = luma(a);
    const std::vector<double> y = luma(b);
    const int W = a.width;
    const double c1 = (kSsimK1 * 1.0) * (kSsimK1 * 1.0);
    const double c2 = (kSsimK2 * 1.0) * (kSsimK2 * 1.0);
    for (int r = 0; r + kW <= a.height; ++r) {
        for (int c = 0; c + kW <= W; ++c) {
            double mx = 0, my = 0, sxx = 0, syy = 0, sxy = 0;
            for (int i = 0; i < kW; ++i) {
                for (int j = 0; j < kW; ++j) {
                    double w = g[i] * g[j];
                    size_t k = static_cast<size_t>(r + i) * W + (c + j);
                    mx += w * x[k];
                    my += w * y[k];
                    sxx += w * x[k] * x[k];
                    syy += w * y[k] * y[k];
                    sxy += w * x[k] * y[k];
                }
            }
            double vx = sxx - mx * mx;
            double vy = syy - my * my;
            double cxy = sxy - mx * my;
            double s = ((2 * mx * my + c1) * (2 * cxy + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
            fn(r + kW / 2, s);
        }
    }
}

} // namespace

std::vector<double>
sphericalWeights(int height)
{
    std::vector<double> w(static_cast<size_t>(std::max(height, 0)));
    for (int v = 0; v < height; ++v) {
        w[v] = std::cos((v + 0.5 - height / 2.0) * kPi / height);
    }
    return w;
}

double
psnr(const Image &a, const Image &b)
{
    checkPair(a, b);
    double s = 0.0;
    for (size_t i = 0; i < a.pixels.size(); ++i) {
        double d = a.pixels[i] - b.pixels[i];
        s += d * d;
    }
    return mseToPsnr(s / static_cast<double>(a.pixels.size()));
}

double
wsPsnr(const Image &a, const Image &b)
{
    checkPair(a, b);
    const std::vector<double> w = sphericalWeights(a.height);
    double num = 0.0;
    double den = 0.0;
    for (int y = 0; y < a.height; ++y) {
        double row = 0.0;
        for (size_t k = a.offset(0, y); k < a.offset(0, y) + static_cast<size_t>(a.width) * 3; ++k) {
            double d = a.pixels[k] - b.pixels[k];
            row += d * d;
        }
        num += w[y] * row;
        den += w[y] * a.width * 3;
    }
    return mseToPsnr(num / den);
}

std::vector<double>
luma(const Image &img)
{
    std::vector<double> out(static_cast<size_t>(img.width) * img.height);
    for (size_t i = 0; i < out.size(); ++i) {
        const double *p = img.pixels.data() + 3 * i;
        out[i] = 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2];
    }
    return out;
}

double
ssim(const Image &a, const Image &b)
{
    double s = 0.0;
    size_t n = 0;
    ssimMap(a, b, [&](int, double v) {
        s += v;
        ++n;
    });
    return s / static_cast<double>(n);
}

double
wsSsim(const Image &a, const Image &b)
{
    const std::vector<double> w = sphericalWeights(a.height);
    double s = 0.0;
    double ws = 0.0;
    ssimMap(a, b, [&](int row, double v) {
        s += w[row] * v;
        ws += w[row];
    });
    return s / ws;
}

ImageScores
scoreImages(const Image &a, const Image &b)
{
    return {psnr(a, b), wsPsnr(a, b), ssim(a, b), wsSsim(a, b)};
}

} // namespace yyrf
