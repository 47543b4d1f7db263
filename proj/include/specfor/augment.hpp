#pragma once

// Training-time geometric augmentation: flip, zoom, rotation and shift folded
// into a single bilinear resample with reflected borders.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

#include "specfor/error.hpp"
#include "specfor/image.hpp"
#include "specfor/rng.hpp"

namespace specfor {

struct AugmentConfig {
    float max_rotation_deg = 15.0f;
    float max_shift_frac = 0.10f;
    float max_zoom_frac = 0.10f;
    float hflip_prob = 0.5f;
    bool enabled = true;

    void validate() const {
        const auto frac = [](float v) { return v >= 0.0f && v <= 1.0f; };
        if (!(max_rotation_deg >= 0.0f && max_rotation_deg <= 180.0f) || !frac(max_shift_frac) ||
            !frac(max_zoom_frac) || !frac(hflip_prob))
            throw Error(ErrorCode::InvalidArgument, "augmentation parameters out of range");
    }
};

/// Row-major 2x3 matrix mapping output (x, y, 1) to input coordinates; x is the column.
using Affine = std::array<double, 6>;

inline constexpr Affine kIdentityAffine{1, 0, 0, 0, 1, 0};

/// Symmetric reflection with the edge sample repeated: ..., 1, 0 | 0, 1, ..., n-1 | n-1, ...
inline std::size_t reflect_index(std::int64_t i, std::size_t n) {
    const auto len = static_cast<std::int64_t>(n);
    while (i < 0 || i >= len) {
        if (i < 0) i = -i - 1;
        if (i >= len) i = 2 * len - i - 1;
    }
    return static_cast<std::size_t>(i);
}

inline ImageTensor affine_sample(const ImageTensor& img, const Affine& t) {
    for (double v : t)
        if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteInput, "affine matrix not finite");
    ImageTensor out(img.height(), img.width(), img.channels());
    const std::size_t w = img.width(), h = img.height();
    for (std::size_t r = 0; r < h; ++r) {
        for (std::size_t c = 0; c < w; ++c) {
            const double x = static_cast<double>(c), y = static_cast<double>(r);
            const double sx = t[0] * x + t[1] * y + t[2];
            const double sy = t[3] * x + t[4] * y + t[5];
            const double fx0 = std::floor(sx), fy0 = std::floor(sy);
            const double tx = sx - fx0, ty = sy - fy0;
            const auto x0 = static_cast<std::int64_t>(fx0), y0 = static_cast<std::int64_t>(fy0);
            const std::size_t c0 = reflect_index(x0, w), c1 = reflect_index(x0 + 1, w);
            const std::size_t r0 = reflect_index(y0, h), r1 = reflect_index(y0 + 1, h);
            for (std::size_t ch = 0; ch < img.channels(); ++ch) {
                const double top = img.at(r0, c0, ch) * (1 - tx) + img.at(r0, c1, ch) * tx;
                const double bot = img.at(r1, c0, ch) * (1 - tx) + img.at(r1, c1, ch) * tx;
                out.at(r, c, ch) = static_cast<float>(std::clamp(top * (1 - ty) + bot * ty, 0.0, 1.0));
            }
        }
    }
    return out;
}

/// One random augmentation. Always consumes exactly five draws from `rng`:
/// rotation, x shift, y shift, zoom, flip.
inline ImageTensor random_augment(const ImageTensor& img, const AugmentConfig& cfg, Rng& rng) {
    cfg.validate();
    const double theta_deg = rng.uniform(-cfg.max_rotation_deg, cfg.max_rotation_deg);
    const double shift_x = rng.uniform(-cfg.max_shift_frac, cfg.max_shift_frac) * static_cast<double>(img.width());
    const double shift_y = rng.uniform(-cfg.max_shift_frac, cfg.max_shift_frac) * static_cast<double>(img.height());
    const double zoom = rng.uniform(1.0 - cfg.max_zoom_frac, 1.0 + cfg.max_zoom_frac);
    const bool flip = rng.uniform() < cfg.hflip_prob;
    if (!cfg.enabled) return img;

    // Forward map about the centre c: p_out = c + shift + R * zoom * F * (p_in - c).
    // The sampler needs the inverse: p_in = c + F * R^-1 * (p_out - c - shift) / zoom.
    const double cx = (static_cast<double>(img.width()) - 1.0) / 2.0;
    const double cy = (static_cast<double>(img.height()) - 1.0) / 2.0;
    const double theta = theta_deg * std::numbers::pi / 180.0;
    const double cs = std::cos(theta), sn = std::sin(theta);
    const double fx = flip ? -1.0 : 1.0;
    // rows of F * R^-1 / zoom, with R^-1 = [[cs, sn], [-sn, cs]]
    const double a = fx * cs / zoom, b = fx * sn / zoom;
    const double d = -sn / zoom, e = cs / zoom;
    const double ox = cx + shift_x, oy = cy + shift_y;
    const Affine t{a, b, cx - a * ox - b * oy, d, e, cy - d * ox - e * oy};
    return affine_sample(img, t);
}

} // namespace specfor
