#pragma once

#include <cmath>
#include <vector>

#include "edgeflow/canny.hpp"
#include "edgeflow/error.hpp"
#include "edgeflow/image.hpp"

namespace edgeflow {

/// Dataset noise diagnostics: background noise sigma and background color
/// instability mu.
struct NoiseReport {
    double background_noise_sigma = 0.0;
    double color_instability_mu = 0.0;
};

namespace detail {

constexpr int kNoiseTile = 16;
constexpr double kFlatStdCutoff = 8.0;
constexpr double kNoiseBlurSigma = 2.0;
constexpr double kLightnessCutoff = 80.0;

inline double tile_std(const std::vector<float>& plane, int w, int tx, int ty) {
    double sum = 0.0, sum2 = 0.0;
    for (int y = ty; y < ty + kNoiseTile; ++y) {
        for (int x = tx; x < tx + kNoiseTile; ++x) {
            const double v = plane[static_cast<std::size_t>(y) * w + x];
            sum += v;
            sum2 += v * v;
        }
    }
    const double n = kNoiseTile * kNoiseTile;
    const double var = sum2 / n - (sum / n) * (sum / n);
    return var > 0.0 ? std::sqrt(var) : 0.0;
}

struct LabPixel {
    double l, a, b;
};

// sRGB (D65) to CIELAB.
inline LabPixel srgb_to_lab(std::uint8_t r8, std::uint8_t g8, std::uint8_t b8) {
    auto linearize = [](double c) {
        return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
    };
    const double r = linearize(r8 / 255.0);
    const double g = linearize(g8 / 255.0);
    const double b = linearize(b8 / 255.0);

    const double x = 0.4124564 * r + 0.3575761 * g + 0.1804375 * b;
    const double y = 0.2126729 * r + 0.7151522 * g + 0.0721750 * b;
    const double z = 0.0193339 * r + 0.1191920 * g + 0.9503041 * b;

    // D65 white point.
    constexpr double xn = 0.95047, yn = 1.0, zn = 1.08883;
    auto f = [](double t) {
        constexpr double d = 6.0 / 29.0;
        return t > d * d * d ? std::cbrt(t) : t / (3.0 * d * d) + 4.0 / 29.0;
    };
    const double fx = f(x / xn), fy = f(y / yn), fz = f(z / zn);
    return {116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

}  // namespace detail

/// Standard deviation of high-frequency residuals (image minus Gaussian blur)
/// pooled over flat 16x16 tiles. Flatness is judged on the blurred intensity
/// so that the noise being measured does not disqualify a structurally flat
/// region. Returns 0 when no flat tile exists.
inline double background_noise_sigma(const RasterImage& img) {
    img.check_valid();
    if (img.width < detail::kNoiseTile || img.height < detail::kNoiseTile)
        throw DiagnosticsError("image smaller than one " + std::to_string(detail::kNoiseTile) +
                               "x" + std::to_string(detail::kNoiseTile) + " diagnostic tile");
    const int w = img.width;
    const int h = img.height;
    std::vector<float> gray = to_gray_f32(img);
    const int radius = static_cast<int>(std::ceil(3.0 * detail::kNoiseBlurSigma));
    const std::vector<float> k = detail::gaussian_kernel_1d(detail::kNoiseBlurSigma, radius);
    std::vector<float> blurred = detail::convolve_separable(gray, w, h, k, k);

    double sum = 0.0, sum2 = 0.0;
    std::size_t count = 0;
    for (int ty = 0; ty + detail::kNoiseTile <= h; ty += detail::kNoiseTile) {
        for (int tx = 0; tx + detail::kNoiseTile <= w; tx += detail::kNoiseTile) {
            if (detail::tile_std(blurred, w, tx, ty) >= detail::kFlatStdCutoff) continue;
            for (int y = ty; y < ty + detail::kNoiseTile; ++y) {
                for (int x = tx; x < tx + detail::kNoiseTile; ++x) {
                    const std::size_t i = static_cast<std::size_t>(y) * w + x;
                    const double r = static_cast<double>(gray[i]) - blurred[i];
                    sum += r;
                    sum2 += r * r;
                    ++count;
                }
            }
        }
    }
    if (count < 2) return 0.0;
    const double mean = sum / count;
    const double var = sum2 / count - mean * mean;
    return var > 0.0 ? std::sqrt(var) : 0.0;
}

/// Mean chromatic (a*, b*) deviation from the chroma centroid over light
/// background pixels (L* above the lightness cutoff). 0 with fewer than two
/// selected pixels.
inline double color_instability(const RasterImage& img) {
    img.check_valid();
    const int nc = channel_count(img.channels);
    std::vector<detail::LabPixel> selected;
    selected.reserve(img.pixel_count() / 4);
    for (std::size_t i = 0; i < img.pixel_count(); ++i) {
        const std::uint8_t* p = &img.data[i * nc];
        const detail::LabPixel lab = nc == 1 ? detail::srgb_to_lab(p[0], p[0], p[0])
                                             : detail::srgb_to_lab(p[0], p[1], p[2]);
        if (lab.l > detail::kLightnessCutoff) selected.push_back(lab);
    }
    if (selected.size() < 2) return 0.0;
    double ma = 0.0, mb = 0.0;
    for (const auto& lab : selected) {
        ma += lab.a;
        mb += lab.b;
    }
    ma /= selected.size();
    mb /= selected.size();
    double dev = 0.0;
    for (const auto& lab : selected)
        dev += std::hypot(lab.a - ma, lab.b - mb);
    return dev / selected.size();
}

inline NoiseReport noise_report(const RasterImage& img) {
    return {background_noise_sigma(img), color_instability(img)};
}

}  // namespace edgeflow
