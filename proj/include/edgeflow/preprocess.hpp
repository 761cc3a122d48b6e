#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "edgeflow/image.hpp"

namespace edgeflow {

/// Composites transparency onto an opaque white background and returns RGB8.
/// Gray and RGB inputs pass through value-unchanged (gray replicated per channel).
inline RasterImage normalize_alpha(const RasterImage& img) {
    img.check_valid();
    RasterImage out(img.width, img.height, Channels::RGB8);
    const std::size_t n = img.pixel_count();
    switch (img.channels) {
        case Channels::Gray8:
            for (std::size_t i = 0; i < n; ++i) {
                const std::uint8_t v = img.data[i];
                out.data[i * 3 + 0] = v;
                out.data[i * 3 + 1] = v;
                out.data[i * 3 + 2] = v;
            }
            break;
        case Channels::RGB8:
            out.data = img.data;
            break;
        case Channels::RGBA8:
            for (std::size_t i = 0; i < n; ++i) {
                const std::uint8_t* p = &img.data[i * 4];
                const double alpha = p[3] / 255.0;
                for (int c = 0; c < 3; ++c)
                    out.data[i * 3 + c] = to_byte(alpha * p[c] + (1.0 - alpha) * 255.0);
            }
            break;
    }
    return out;
}

namespace detail {

// Catmull-Rom cubic kernel (a = -0.5).
inline double cubic_weight(double t) {
    constexpr double a = -0.5;
    t = std::abs(t);
    if (t < 1.0) return ((a + 2.0) * t - (a + 3.0)) * t * t + 1.0;
    if (t < 2.0) return (((t - 5.0) * t + 8.0) * t - 4.0) * a;
    return 0.0;
}

inline int clamp_index(int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); }

// Separable bicubic resampling with clamp-to-edge, one channel plane at a time.
inline RasterImage resample_bicubic(const RasterImage& src, int dst_w, int dst_h) {
    const int nc = channel_count(src.channels);
    RasterImage dst(dst_w, dst_h, src.channels);

    // Horizontal pass into a float buffer, then vertical pass to bytes.
    std::vector<double> mid(static_cast<std::size_t>(dst_w) * src.height * nc);
    const double sx = static_cast<double>(src.width) / dst_w;
    const double sy = static_cast<double>(src.height) / dst_h;

    for (int x = 0; x < dst_w; ++x) {
        const double cx = (x + 0.5) * sx - 0.5;
        const int ix = static_cast<int>(std::floor(cx));
        double w[4];
        for (int k = 0; k < 4; ++k) w[k] = cubic_weight(cx - (ix - 1 + k));
        for (int y = 0; y < src.height; ++y) {
            for (int c = 0; c < nc; ++c) {
                double acc = 0.0;
                for (int k = 0; k < 4; ++k) {
                    const int xx = clamp_index(ix - 1 + k, 0, src.width - 1);
                    acc += w[k] * src.at(xx, y, c);
                }
                mid[(static_cast<std::size_t>(y) * dst_w + x) * nc + c] = acc;
            }
        }
    }
    for (int y = 0; y < dst_h; ++y) {
        const double cy = (y + 0.5) * sy - 0.5;
        const int iy = static_cast<int>(std::floor(cy));
        double w[4];
        for (int k = 0; k < 4; ++k) w[k] = cubic_weight(cy - (iy - 1 + k));
        for (int x = 0; x < dst_w; ++x) {
            for (int c = 0; c < nc; ++c) {
                double acc = 0.0;
                for (int k = 0; k < 4; ++k) {
                    const int yy = clamp_index(iy - 1 + k, 0, src.height - 1);
                    acc += w[k] * mid[(static_cast<std::size_t>(yy) * dst_w + x) * nc + c];
                }
                dst.at(x, y, c) = to_byte(acc);
            }
        }
    }
    return dst;
}

}  // namespace detail

/// Downscales so that max(width, height) <= max_dim, preserving aspect ratio.
/// Images already within the bound are returned unchanged.
inline RasterImage adaptive_rescale(const RasterImage& img, int max_dim = 4000) {
    img.check_valid();
    const int longest = std::max(img.width, img.height);
    if (longest <= max_dim) return img;
    const double scale = static_cast<double>(max_dim) / longest;
    const int w = std::max(1, static_cast<int>(std::lround(img.width * scale)));
    const int h = std::max(1, static_cast<int>(std::lround(img.height * scale)));
    return detail::resample_bicubic(img, w, h);
}

/// Step-1 standardization: alpha removal then resolution capping.
inline RasterImage preprocess(const RasterImage& raw, int max_dim = 4000) {
    return adaptive_rescale(normalize_alpha(raw), max_dim);
}

}  // namespace edgeflow
