// Copyright 2026 The yyrf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <yyrf/geometry.hpp>

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace yyrf {

/// Linear RGB image, row-major, three doubles per pixel.
struct Image
{
    int width = 0;
    int height = 0;
    std::vector<double> pixels;

    Image() = default;
    Image(int w, int h, double fill = 0.0)
        : width(w), height(h), pixels(static_cast<size_t>(w) * h * 3, fill)
    {
    }

    size_t offset(int x, int y) const { return (static_cast<size_t>(y) * width + x) * 3; }
    Vec3 at(int x, int y) const
    {
        const double *p = pixels.data() + offset(x, y);
        return {p[0], p[1], p[2]};
    }
    void set(int x, int y, const Vec3 &c)
    {
        double *p = pixels.data() + offset(x, y);
        p[0] = c.x();
        p[1] = c.y();
        p[2] = c.z();
    }
    bool sameSize(const Image &o) const { return width == o.width && height == o.height; }
};

class IoError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

double srgbToLinear(double s);
double linearToSrgb(double l);

/// Linear value -> nearest 8-bit sRGB code.
uint8_t encodeSrgb8(double linear);
double decodeSrgb8(uint8_t code);

/// Reads an 8-bit (or 16-bit, reduced) RGB/RGBA/gray PNG and sRGB-decodes it.
Image readPng(const std::string &path);

/// Writes an 8-bit sRGB PNG. text entries become tEXt chunks in key order.
void writePng(const std::string &path, const Image &img,
              const std::map<std::string, std::string> &text = {});

/// Writes raw 8-bit RGB bytes (no colour transform), e.g. for heat maps.
void writePng8(const std::string &path, int width, int height, const std::vector<uint8_t> &rgb,
               const std::map<std::string, std::string> &text = {});

} // namespace yyrf
