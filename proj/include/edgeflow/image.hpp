#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "edgeflow/error.hpp"

namespace edgeflow {

enum class Channels { Gray8 = 1, RGB8 = 3, RGBA8 = 4 };

inline int channel_count(Channels c) { return static_cast<int>(c); }

/// Row-major 8-bit pixel grid. Interleaved channels, no padding.
struct RasterImage {
    int width = 0;
    int height = 0;
    Channels channels = Channels::Gray8;
    std::vector<std::uint8_t> data;

    RasterImage() = default;
    RasterImage(int w, int h, Channels c, std::uint8_t fill = 0)
        : width(w), height(h), channels(c),
          data(static_cast<std::size_t>(w) * h * channel_count(c), fill) {}

    std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }

    std::uint8_t at(int x, int y, int c = 0) const {
        return data[(static_cast<std::size_t>(y) * width + x) * channel_count(channels) + c];
    }
    std::uint8_t& at(int x, int y, int c = 0) {
        return data[(static_cast<std::size_t>(y) * width + x) * channel_count(channels) + c];
    }

    void check_valid() const {
        if (width < 1 || height < 1)
            throw DecodeError("image dimensions must be at least 1x1");
        if (data.size() != pixel_count() * channel_count(channels))
            throw DecodeError("pixel buffer length mismatch: expected " +
                              std::to_string(pixel_count() * channel_count(channels)) +
                              ", got " + std::to_string(data.size()));
    }
};

/// Binary edge image: every pixel is 0 or 255, dimensions match the source.
struct EdgeMap {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> data;

    std::uint8_t at(int x, int y) const {
        return data[static_cast<std::size_t>(y) * width + x];
    }

    std::size_t edge_pixel_count() const {
        std::size_t n = 0;
        for (std::uint8_t v : data) n += (v != 0);
        return n;
    }
};

/// Byte conversion used throughout: round half away from zero, clamp to [0,255].
inline std::uint8_t to_byte(double v) {
    double r = v < 0.0 ? std::ceil(v - 0.5) : std::floor(v + 0.5);
    if (r < 0.0) r = 0.0;
    if (r > 255.0) r = 255.0;
    return static_cast<std::uint8_t>(r);
}

/// ITU-R 601 luma as float, 0..255.
inline std::vector<float> to_gray_f32(const RasterImage& img) {
    img.check_valid();
    std::vector<float> gray(img.pixel_count());
    const int nc = channel_count(img.channels);
    if (nc == 1) {
        for (std::size_t i = 0; i < gray.size(); ++i) gray[i] = img.data[i];
        return gray;
    }
    for (std::size_t i = 0; i < gray.size(); ++i) {
        const std::uint8_t* p = &img.data[i * nc];
        gray[i] = 0.299f * p[0] + 0.587f * p[1] + 0.114f * p[2];
    }
    return gray;
}

}  // namespace edgeflow
