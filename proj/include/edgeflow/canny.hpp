#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "edgeflow/error.hpp"
#include "edgeflow/image.hpp"

namespace edgeflow {

/// Hysteresis thresholds plus Sobel aperture selecting one edge-map configuration.
struct CannyParams {
    double low = 100.0;
    double high = 200.0;
    int aperture = 3;
    std::string config_id;  // optional tag, "C1".."C9"

    void check_valid() const {
        if (low < 0.0) throw ParamError("canny: low threshold must be non-negative");
        if (low > high) throw ParamError("canny: low threshold must not exceed high");
        if (aperture != 3 && aperture != 5 && aperture != 7)
            throw ParamError("canny: aperture must be 3, 5 or 7");
    }
};

/// Named configurations of the two-stage sweep. C5 is not a fixed entry: it is
/// the stage-1 winner carried into stage 2, see derive_c5().
inline const std::map<std::string, CannyParams>& canny_config_registry() {
    static const std::map<std::string, CannyParams> registry = {
        {"C1", {30.0, 100.0, 3, "C1"}},  {"C2", {50.0, 150.0, 3, "C2"}},
        {"C3", {100.0, 200.0, 3, "C3"}}, {"C4", {100.0, 300.0, 3, "C4"}},
        {"C6", {100.0, 200.0, 5, "C6"}}, {"C7", {100.0, 200.0, 7, "C7"}},
        {"C8", {50.0, 150.0, 5, "C8"}},  {"C9", {50.0, 150.0, 7, "C9"}},
    };
    return registry;
}

inline CannyParams canny_config(const std::string& id) {
    auto it = canny_config_registry().find(id);
    if (it == canny_config_registry().end())
        throw ParamError("unknown canny configuration: " + id);
    return it->second;
}

/// The stage-1 winner re-tagged as the stage-2 reference configuration.
inline CannyParams derive_c5(const CannyParams& stage1_winner) {
    CannyParams c5 = stage1_winner;
    c5.aperture = 3;
    c5.config_id = "C5";
    return c5;
}

namespace detail {

// Smoothing sigma 1.4 at aperture 3, scaled linearly with the aperture so the
// aperture stays the single smoothing knob. Radius 2 at aperture 3.
inline double gaussian_sigma(int aperture) { return 1.4 * aperture / 3.0; }
inline int gaussian_radius(int aperture) {
    return static_cast<int>(std::lround(2.0 * aperture / 3.0));
}

inline std::vector<float> gaussian_kernel_1d(double sigma, int radius) {
    std::vector<float> k(2 * radius + 1);
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        const double w = std::exp(-(static_cast<double>(i) * i) / (2.0 * sigma * sigma));
        k[i + radius] = static_cast<float>(w);
        sum += w;
    }
    for (float& w : k) w = static_cast<float>(w / sum);
    return k;
}

// Separable convolution with clamp-to-edge borders.
inline std::vector<float> convolve_separable(const std::vector<float>& src, int w, int h,
                                             const std::vector<float>& kx,
                                             const std::vector<float>& ky) {
    const int rx = static_cast<int>(kx.size() / 2);
    const int ry = static_cast<int>(ky.size() / 2);
    std::vector<float> mid(src.size()), out(src.size());
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            float acc = 0.0f;
            for (int i = -rx; i <= rx; ++i) {
                const int xx = std::clamp(x + i, 0, w - 1);
                acc += kx[i + rx] * src[static_cast<std::size_t>(y) * w + xx];
            }
            mid[static_cast<std::size_t>(y) * w + x] = acc;
        }
    }
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            float acc = 0.0f;
            for (int i = -ry; i <= ry; ++i) {
                const int yy = std::clamp(y + i, 0, h - 1);
                acc += ky[i + ry] * mid[static_cast<std::size_t>(yy) * w + x];
            }
            out[static_cast<std::size_t>(y) * w + x] = acc;
        }
    }
    return out;
}

// Sobel separable kernels: a binomial smoothing row and a central-difference
// row widened by binomial convolution.
inline std::vector<float> sobel_smooth_kernel(int aperture) {
    switch (aperture) {
        case 3: return {1, 2, 1};
        case 5: return {1, 4, 6, 4, 1};
        default: return {1, 6, 15, 20, 15, 6, 1};
    }
}
inline std::vector<float> sobel_deriv_kernel(int aperture) {
    switch (aperture) {
        case 3: return {-1, 0, 1};
        case 5: return {-1, -2, 0, 2, 1};
        default: return {-1, -4, -5, 0, 5, 4, 1};
    }
}

}  // namespace detail

/// Four-stage binary edge extraction: Gaussian smoothing, Sobel gradients,
/// 8-direction non-maximum suppression, two-threshold hysteresis with
/// 8-connected weak-to-strong flood propagation. Deterministic: identical
/// input and params give byte-identical output.
inline EdgeMap canny(const RasterImage& img, const CannyParams& params) {
    params.check_valid();
    const int w = img.width;
    const int h = img.height;

    std::vector<float> gray = to_gray_f32(img);
    const double sigma = detail::gaussian_sigma(params.aperture);
    const std::vector<float> g = detail::gaussian_kernel_1d(sigma, detail::gaussian_radius(params.aperture));
    std::vector<float> smooth = detail::convolve_separable(gray, w, h, g, g);

    const std::vector<float> ks = detail::sobel_smooth_kernel(params.aperture);
    const std::vector<float> kd = detail::sobel_deriv_kernel(params.aperture);
    std::vector<float> gx = detail::convolve_separable(smooth, w, h, kd, ks);
    std::vector<float> gy = detail::convolve_separable(smooth, w, h, ks, kd);

    std::vector<float> mag(gray.size());
    for (std::size_t i = 0; i < mag.size(); ++i)
        mag[i] = std::hypot(gx[i], gy[i]);

    // Non-maximum suppression along the quantized gradient direction.
    // Sector k covers gradient angles around k*45 degrees (mod 180).
    static constexpr std::array<std::array<int, 2>, 4> kSectorStep = {{
        {{1, 0}}, {{1, 1}}, {{0, 1}}, {{-1, 1}},
    }};
    std::vector<std::uint8_t> state(mag.size(), 0);  // 0 none, 1 weak, 2 strong
    auto mag_at = [&](int x, int y) -> float {
        if (x < 0 || y < 0 || x >= w || y >= h) return 0.0f;
        return mag[static_cast<std::size_t>(y) * w + x];
    };
    constexpr double kPi = 3.14159265358979323846;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * w + x;
            const float m = mag[i];
            if (m <= 0.0f || m < params.low) continue;
            double angle = std::atan2(gy[i], gx[i]);
            if (angle < 0.0) angle += kPi;
            const int sector = static_cast<int>(std::lround(angle / (kPi / 4.0))) % 4;
            const auto& d = kSectorStep[sector];
            if (m < mag_at(x + d[0], y + d[1]) || m < mag_at(x - d[0], y - d[1])) continue;
            state[i] = m >= params.high ? 2 : 1;
        }
    }

    // Hysteresis: flood from strong pixels across 8-connected weak pixels.
    EdgeMap edges;
    edges.width = w;
    edges.height = h;
    edges.data.assign(mag.size(), 0);
    std::vector<std::size_t> stack;
    for (std::size_t i = 0; i < state.size(); ++i) {
        if (state[i] == 2) {
            edges.data[i] = 255;
            stack.push_back(i);
        }
    }
    while (!stack.empty()) {
        const std::size_t i = stack.back();
        stack.pop_back();
        const int x = static_cast<int>(i % w);
        const int y = static_cast<int>(i / w);
        for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
                const int nx = x + dx;
                const int ny = y + dy;
                if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
                const std::size_t j = static_cast<std::size_t>(ny) * w + nx;
                if (state[j] == 1 && edges.data[j] == 0) {
                    edges.data[j] = 255;
                    stack.push_back(j);
                }
            }
        }
    }
    return edges;
}

}  // namespace edgeflow
