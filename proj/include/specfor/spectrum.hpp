#pragma once

// Fourier-domain representation of an image: DFT, centre shift, log
// compression and min-max normalization, applied per channel.

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <vector>

#include "specfor/error.hpp"
#include "specfor/image.hpp"
#include "specfor/matrix.hpp"

namespace specfor {

using ComplexMatrix = Matrix<std::complex<float>>;

/// Per-channel normalized log-magnitude spectrum, channel-interleaved like ImageTensor.
struct Spectrum {
    std::size_t height = 0;
    std::size_t width = 0;
    std::size_t channels = 0;
    std::vector<float> data;
    bool shifted = false;

    float at(std::size_t r, std::size_t c, std::size_t ch) const {
        return data[(r * width + c) * channels + ch];
    }

    FloatMatrix channel(std::size_t ch) const {
        FloatMatrix m(height, width);
        for (std::size_t i = 0; i < height * width; ++i) m.data[i] = data[i * channels + ch];
        return m;
    }

    bool operator==(const Spectrum&) const = default;
};

namespace fft {

using cd = std::complex<double>;

inline bool is_pow2(std::size_t n) { return n != 0 && std::has_single_bit(n); }

/// In-place iterative radix-2 transform; n must be a power of two.
inline void radix2(std::span<cd> a, bool inverse = false) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    const double sign = inverse ? 1.0 : -1.0;
    std::vector<cd> twiddle(n / 2);
    for (std::size_t k = 0; k < n / 2; ++k) {
        const double ang = sign * 2.0 * std::numbers::pi * static_cast<double>(k) /
                           static_cast<double>(n);
        twiddle[k] = {std::cos(ang), std::sin(ang)};
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const std::size_t half = len / 2;
        const std::size_t step = n / len;
        for (std::size_t i = 0; i < n; i += len) {
            for (std::size_t k = 0; k < half; ++k) {
                const cd u = a[i + k];
                const cd v = a[i + k + half] * twiddle[k * step];
                a[i + k] = u + v;
                a[i + k + half] = u - v;
            }
        }
    }
}

/// Direct O(n^2) evaluation for arbitrary n.
inline void direct(std::span<cd> a) {
    const std::size_t n = a.size();
    std::vector<cd> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        cd acc = 0.0;
        for (std::size_t x = 0; x < n; ++x) {
            const double ang = -2.0 * std::numbers::pi *
                               static_cast<double>((k * x) % n) / static_cast<double>(n);
            acc += a[x] * cd(std::cos(ang), std::sin(ang));
        }
        out[k] = acc;
    }
    std::ranges::copy(out, a.begin());
}

inline void transform_1d(std::span<cd> a) {
    if (is_pow2(a.size()))
        radix2(a);
    else
        direct(a);
}

/// Forward unnormalized 2D transform of a row-major h x w buffer, rows then columns.
inline void forward_2d(std::vector<cd>& buf, std::size_t h, std::size_t w) {
    for (std::size_t r = 0; r < h; ++r) transform_1d(std::span<cd>(buf.data() + r * w, w));
    std::vector<cd> col(h);
    for (std::size_t c = 0; c < w; ++c) {
        for (std::size_t r = 0; r < h; ++r) col[r] = buf[r * w + c];
        transform_1d(col);
        for (std::size_t r = 0; r < h; ++r) buf[r * w + c] = col[r];
    }
}

/// Inverse 2D transform via the conjugation identity ifft(X) = conj(fft(conj(X))) / N.
inline void inverse_2d(std::vector<cd>& buf, std::size_t h, std::size_t w) {
    for (auto& v : buf) v = std::conj(v);
    forward_2d(buf, h, w);
    const double scale = 1.0 / static_cast<double>(h * w);
    for (auto& v : buf) v = std::conj(v) * scale;
}

} // namespace fft

namespace detail {

inline void require_finite(std::span<const float> values) {
    if (!std::ranges::all_of(values, [](float v) { return std::isfinite(v); }))
        throw Error(ErrorCode::NonFiniteInput, "matrix contains NaN or Inf");
}

inline void require_nonempty(const FloatMatrix& m) {
    if (m.height == 0 || m.width == 0 || m.data.size() != m.height * m.width)
        throw Error(ErrorCode::InvalidArgument, "matrix must be at least 1x1");
}

} // namespace detail

/// Unnormalized forward 2D DFT. Radix-2 row-column FFT when both sides are
/// powers of two, separable direct evaluation otherwise.
inline ComplexMatrix dft2d(const FloatMatrix& channel) {
    detail::require_nonempty(channel);
    detail::require_finite(channel.data);
    std::vector<fft::cd> buf(channel.data.begin(), channel.data.end());
    fft::forward_2d(buf, channel.height, channel.width);
    ComplexMatrix out(channel.height, channel.width);
    std::ranges::transform(buf, out.data.begin(),
                           [](const fft::cd& v) { return std::complex<float>(v); });
    return out;
}

inline constexpr std::size_t kNaiveDftMaxElements = 64 * 64;

/// Literal double-sum evaluation in double precision. Verification oracle only.
inline ComplexMatrix dft2d_naive(const FloatMatrix& channel) {
    detail::require_nonempty(channel);
    if (channel.size() > kNaiveDftMaxElements)
        throw Error(ErrorCode::InputTooLarge, "naive DFT is limited to 64x64 elements");
    detail::require_finite(channel.data);
    const std::size_t h = channel.height;
    const std::size_t w = channel.width;
    ComplexMatrix out(h, w);
    for (std::size_t u = 0; u < h; ++u) {
        for (std::size_t v = 0; v < w; ++v) {
            fft::cd acc = 0.0;
            for (std::size_t x = 0; x < h; ++x) {
                for (std::size_t y = 0; y < w; ++y) {
                    const double phase = static_cast<double>((u * x) % h) / static_cast<double>(h) +
                                         static_cast<double>((v * y) % w) / static_cast<double>(w);
                    const double ang = -2.0 * std::numbers::pi * phase;
                    acc += static_cast<double>(channel(x, y)) * fft::cd(std::cos(ang), std::sin(ang));
                }
            }
            out(u, v) = std::complex<float>(acc);
        }
    }
    return out;
}

/// Centres the zero-frequency bin: out(i, j) = m((i + ceil(H/2)) mod H, (j + ceil(W/2)) mod W),
/// so DC lands at (floor(H/2), floor(W/2)).
template <typename T>
Matrix<T> fftshift(const Matrix<T>& m) {
    Matrix<T> out(m.height, m.width);
    const std::size_t dr = (m.height + 1) / 2;
    const std::size_t dc = (m.width + 1) / 2;
    for (std::size_t i = 0; i < m.height; ++i)
        for (std::size_t j = 0; j < m.width; ++j)
            out(i, j) = m((i + dr) % m.height, (j + dc) % m.width);
    return out;
}

/// ln(1 + |F|). The base is immaterial downstream: min-max normalization cancels it.
inline FloatMatrix log_magnitude(const ComplexMatrix& m) {
    FloatMatrix out(m.height, m.width);
    std::ranges::transform(m.data, out.data.begin(), [](const std::complex<float>& v) {
        return static_cast<float>(std::log1p(std::abs(std::complex<double>(v))));
    });
    return out;
}

/// Min-max scaling to [0, 1]; a constant matrix maps to all zeros.
inline FloatMatrix normalize01(const FloatMatrix& m) {
    detail::require_finite(m.data);
    FloatMatrix out(m.height, m.width);
    if (m.data.empty()) return out;
    const auto [lo, hi] = std::ranges::minmax(m.data);
    if (!(hi > lo)) return out;
    const double range = static_cast<double>(hi) - static_cast<double>(lo);
    std::ranges::transform(m.data, out.data.begin(), [&](float v) {
        const double t = (static_cast<double>(v) - lo) / range;
        return static_cast<float>(std::clamp(t, 0.0, 1.0));
    });
    return out;
}

/// DFT -> fftshift -> log -> normalize, independently for every channel.
inline Spectrum transform_image(const ImageTensor& img) {
    Spectrum s{img.height(), img.width(), img.channels(),
               std::vector<float>(img.size()), true};
    for (std::size_t ch = 0; ch < img.channels(); ++ch) {
        const FloatMatrix plane = normalize01(log_magnitude(fftshift(dft2d(img.channel(ch)))));
        for (std::size_t i = 0; i < plane.size(); ++i) s.data[i * s.channels + ch] = plane.data[i];
    }
    return s;
}

/// Centred power spectrum |F|^2 of the luma channel.
inline FloatMatrix power_spectrum(const ImageTensor& img) {
    const ComplexMatrix f = fftshift(dft2d(to_grayscale(img).channel(0)));
    FloatMatrix out(f.height, f.width);
    std::ranges::transform(f.data, out.data.begin(),
                           [](const std::complex<float>& v) { return std::norm(v); });
    return out;
}

} // namespace specfor
