// Copyright 2026 The yyrf Authors
// SPDX-License-Identifier: Apache-2.0

#include <yyrf/image.hpp>

#include <png.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <memory>

namespace yyrf {

double
srgbToLinear(double s)
{
    return s <= 0.04045 ? s / 12.92 : std::pow((s + 0.055) / 1.055, 2.4);
}

double
linearToSrgb(double l)
{
    l = std::clamp(l, 0.0, 1.0);
    return l <= 0.0031308 ? 12.92 * l : 1.055 * std::pow(l, 1.0 / 2.4) - 0.055;
}

uint8_t
encodeSrgb8(double linear)
{
    return static_cast<uint8_t>(std::lround(linearToSrgb(linear) * 255.0));
}

double
decodeSrgb8(uint8_t code)
{
    return srgbToLinear(code / 255.0);
}

namespace {

struct FileCloser
{
    void operator()(FILE *f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<FILE, FileCloser>;

// Only trivially destructible objects live across setjmp here.
bool
writeRgb8Raw(FILE *fp, int width, int height, const uint8_t *rgb, png_text *text, int ntext)
{
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) {
        return false;
    }
    png_infop info = png_create_info_struct(png);
    if (!info || setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        return false;
    }
    png_init_io(png, fp);
    png_set_compression_level(png, 6);
    png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8,
                 PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    if (ntext > 0) {
        png_set_text(png, info, text, ntext);
    }
    png_write_info(png, info);
    for (int y = 0; y < height; ++y) {
        png_write_row(png, const_cast<png_bytep>(rgb + static_cast<size_t>(y) * width * 3));
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    return true;
}

void
writeRgb8(const std::string &path, int width, int height, const uint8_t *rgb,
          const std::map<std::string, std::string> &text)
{
    std::vector<std::string> keys, values;
    for (const auto &[k, v] : text) {
        keys.push_back(k.substr(0, 79));
        values.push_back(v);
    }
    std::vector<png_text> chunks(keys.size());
    for (size_t i = 0; i < keys.size(); ++i) {
        chunks[i].compression = PNG_TEXT_COMPRESSION_NONE;
        chunks[i].key = keys[i].data();
        chunks[i].text = values[i].data();
        chunks[i].text_length = values[i].size();
    }
    FilePtr fp(std::fopen(path.c_str(), "wb"));
    if (!fp) {
        throw IoError("cannot open " + path + " for writing");
    }
    if (!writeRgb8Raw(fp.get(), width, height, rgb, chunks.data(), static_cast<int>(chunks.size()))) {
        throw IoError("failed to encode PNG " + path);
    }
}

} // namespace

Image
readPng(const std::string &path)
{
    png_image desc{};
    desc.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&desc, path.c_str())) {
        throw IoError("cannot read PNG " + path + ": " + desc.message);
    }
    desc.format = PNG_FORMAT_RGB;
    std::vector<uint8_t> bytes(PNG_IMAGE_SIZE(desc));
    if (!png_image_finish_read(&desc, nullptr, bytes.data(), 0, nullptr)) {
        std::string msg = desc.message;
        png_image_free(&desc);
        throw IoError("cannot decode PNG " + path + ": " + msg);
    }
    Image img(static_cast<int>(desc.width), static_cast<int>(desc.height));
    for (size_t i = 0; i < bytes.size(); ++i) {
        img.pixels[i] = decodeSrgb8(bytes[i]);
    }
    return img;
}

void
writePng(const std::string &path, const Image &img, const std::map<std::string, std::string> &text)
{
    std::vector<uint8_t> bytes(img.pixels.size());
    for (size_t i = 0; i < bytes.size(); ++i) {
        bytes[i] = encodeSrgb8(img.pixels[i]);
    }
    writeRgb8(path, img.width, img.height, bytes.data(), text);
}

void
writePng8(const std::string &path, int width, int height, const std::vector<uint8_t> &rgb,
          const std::map<std::string, std::string> &text)
{
    if (rgb.size() != static_cast<size_t>(width) * height * 3) {
        throw InputError("writePng8: buffer size does not match dimensions");
    }
    writeRgb8(path, width, height, rgb.data(), text);
}

} // namespace yyrf
