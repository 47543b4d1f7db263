#pragma once

// Raster I/O and the canonical floating-point image tensor.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cctype>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include <png.h>

#include "specfor/error.hpp"
#include "specfor/matrix.hpp"

namespace specfor {

/// Decoded raster, channel-interleaved, every sample in [0, 1].
class ImageTensor {
public:
    ImageTensor() = default;

    ImageTensor(std::size_t height, std::size_t width, std::size_t channels, float fill = 0.0f)
        : ImageTensor(height, width, channels,
                      std::vector<float>(height * width * channels, fill)) {}

    ImageTensor(std::size_t height, std::size_t width, std::size_t channels,
                std::vector<float> data)
        : height_(height), width_(width), channels_(channels), data_(std::move(data)) {
        if (height == 0 || width == 0)
            throw Error(ErrorCode::InvalidArgument, "image dimensions must be >= 1");
        if (channels != 1 && channels != 3)
            throw Error(ErrorCode::InvalidArgument, "channel count must be 1 or 3");
        if (data_.size() != height * width * channels)
            throw Error(ErrorCode::InvalidArgument, "data length does not match dimensions");
    }

    std::size_t height() const { return height_; }
    std::size_t width() const { return width_; }
    std::size_t channels() const { return channels_; }
    std::size_t size() const { return data_.size(); }

    float& at(std::size_t r, std::size_t c, std::size_t ch) {
        return data_[(r * width_ + c) * channels_ + ch];
    }
    float at(std::size_t r, std::size_t c, std::size_t ch) const {
        return data_[(r * width_ + c) * channels_ + ch];
    }

    std::span<float> data() { return data_; }
    std::span<const float> data() const { return data_; }

    /// Copies one channel out as a matrix.
    FloatMatrix channel(std::size_t ch) const {
        FloatMatrix m(height_, width_);
        for (std::size_t i = 0; i < height_ * width_; ++i) m.data[i] = data_[i * channels_ + ch];
        return m;
    }

    static ImageTensor from_channel(const FloatMatrix& m) {
        return ImageTensor(m.height, m.width, 1, m.data);
    }

    bool operator==(const ImageTensor&) const = default;

private:
    std::size_t height_ = 0;
    std::size_t width_ = 0;
    std::size_t channels_ = 0;
    std::vector<float> data_;
};

namespace detail {

inline std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
    std::error_code ec;
    if (!std::filesystem::is_regular_file(path, ec))
        throw Error(ErrorCode::FileNotFound, path.string());
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Netpbm header tokenizer: whitespace separated, '#' starts a comment to end of line.
class PnmHeader {
public:
    explicit PnmHeader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

    unsigned long next_number(const std::string& what) {
        skip_space_and_comments();
        unsigned long value = 0;
        std::size_t digits = 0;
        while (pos_ < bytes_.size() && bytes_[pos_] >= '0' && bytes_[pos_] <= '9') {
            value = value * 10 + (bytes_[pos_] - '0');
            if (value > 1u << 30) throw Error(ErrorCode::CorruptImage, what + " out of range");
            ++pos_;
            ++digits;
        }
        if (digits == 0) throw Error(ErrorCode::CorruptImage, "bad PNM header field: " + what);
        return value;
    }

    /// Exactly one whitespace byte separates maxval from the raster.
    std::size_t raster_offset() {
        if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_]))
            throw Error(ErrorCode::CorruptImage, "missing separator before raster");
        return pos_ + 1;
    }

    void seek(std::size_t p) { pos_ = p; }

private:
    void skip_space_and_comments() {
        while (pos_ < bytes_.size()) {
            if (std::isspace(bytes_[pos_])) {
                ++pos_;
            } else if (bytes_[pos_] == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
            } else {
                break;
            }
        }
    }

    const std::vector<std::uint8_t>& bytes_;
    std::size_t pos_ = 0;
};

inline ImageTensor decode_pnm(const std::vector<std::uint8_t>& bytes) {
    const std::size_t channels = bytes[1] == '5' ? 1 : 3;
    PnmHeader header(bytes);
    header.seek(2);
    const auto width = header.next_number("width");
    const auto height = header.next_number("height");
    const auto maxval = header.next_number("maxval");
    if (width == 0 || height == 0) throw Error(ErrorCode::CorruptImage, "zero image dimension");
    if (maxval == 0 || maxval > 65535) throw Error(ErrorCode::CorruptImage, "maxval out of range");
    const std::size_t offset = header.raster_offset();
    const std::size_t bytes_per_sample = maxval > 255 ? 2 : 1;
    const std::size_t samples = static_cast<std::size_t>(width) * height * channels;
    if (bytes.size() < offset + samples * bytes_per_sample)
        throw Error(ErrorCode::CorruptImage, "truncated PNM raster");

    std::vector<float> data(samples);
    const float scale = 1.0f / static_cast<float>(maxval);
    const std::uint8_t* raster = bytes.data() + offset;
    for (std::size_t i = 0; i < samples; ++i) {
        unsigned v = bytes_per_sample == 1
                         ? raster[i]
                         : (static_cast<unsigned>(raster[2 * i]) << 8) | raster[2 * i + 1];
        if (v > maxval) throw Error(ErrorCode::CorruptImage, "sample exceeds maxval");
        data[i] = static_cast<float>(v) * scale;
    }
    return ImageTensor(height, width, channels, std::move(data));
}

struct PngSource {
    const std::uint8_t* data;
    std::size_t size;
    std::size_t pos;
};

inline void png_read_from_memory(png_structp png, png_bytep out, png_size_t count) {
    auto* src = static_cast<PngSource*>(png_get_io_ptr(png));
    if (src->pos + count > src->size) png_error(png, "truncated PNG stream");
    std::memcpy(out, src->data + src->pos, count);
    src->pos += count;
}

inline void png_silent_warning(png_structp, png_const_charp) {}

struct PngDecoded {
    png_uint_32 width = 0;
    png_uint_32 height = 0;
    int color_type = 0;
    int bit_depth = 0;
};

// No C++ objects with destructors live between setjmp and a possible longjmp.
inline bool png_decode_rows(png_structp png, png_infop info, PngSource* src, PngDecoded* out) {
    if (setjmp(png_jmpbuf(png))) return false;
    png_set_read_fn(png, src, png_read_from_memory);
    png_read_png(png, info, PNG_TRANSFORM_EXPAND | PNG_TRANSFORM_STRIP_ALPHA, nullptr);
    out->width = png_get_image_width(png, info);
    out->height = png_get_image_height(png, info);
    out->color_type = png_get_color_type(png, info);
    out->bit_depth = png_get_bit_depth(png, info);
    return true;
}

inline ImageTensor decode_png(const std::vector<std::uint8_t>& bytes) {
    png_structp png =
        png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, png_silent_warning);
    if (png == nullptr) throw Error(ErrorCode::IoError, "libpng initialization failed");
    png_infop info = png_create_info_struct(png);
    if (info == nullptr) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw Error(ErrorCode::IoError, "libpng initialization failed");
    }
    PngSource src{bytes.data(), bytes.size(), 0};
    PngDecoded meta;
    if (!png_decode_rows(png, info, &src, &meta)) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw Error(ErrorCode::CorruptImage, "invalid PNG stream");
    }

    const std::size_t channels = (meta.color_type & PNG_COLOR_MASK_COLOR) ? 3 : 1;
    const std::size_t width = meta.width;
    const std::size_t height = meta.height;
    const bool wide = meta.bit_depth == 16;
    const float scale = wide ? 1.0f / 65535.0f : 1.0f / 255.0f;
    std::vector<float> data(width * height * channels);
    png_bytepp rows = png_get_rows(png, info);
    for (std::size_t r = 0; r < height; ++r) {
        const png_bytep row = rows[r];
        for (std::size_t i = 0; i < width * channels; ++i) {
            const unsigned v = wide ? (static_cast<unsigned>(row[2 * i]) << 8) | row[2 * i + 1]
                                    : row[i];
            data[r * width * channels + i] = static_cast<float>(v) * scale;
        }
    }
    png_destroy_read_struct(&png, &info, nullptr);
    return ImageTensor(height, width, channels, std::move(data));
}

} // namespace detail

/// Reads PNG, binary PGM (P5) or binary PPM (P6), detected by magic bytes.
inline ImageTensor load_image(const std::filesystem::path& path) {
    const auto bytes = detail::read_file_bytes(path);
    static constexpr std::array<std::uint8_t, 8> kPngMagic{0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
    if (bytes.size() >= kPngMagic.size() &&
        std::equal(kPngMagic.begin(), kPngMagic.end(), bytes.begin()))
        return detail::decode_png(bytes);
    if (bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '5' || bytes[1] == '6'))
        return detail::decode_pnm(bytes);
    throw Error(ErrorCode::UnsupportedFormat, path.string());
}

/// 8-bit quantization used on save: round half up, clamped to [0, 255].
inline std::uint8_t quantize8(float v) {
    const float q = std::floor(v * 255.0f + 0.5f);
    return static_cast<std::uint8_t>(std::clamp(q, 0.0f, 255.0f));
}

/// Writes PGM (1 channel) or PPM (3 channels), maxval 255.
inline void save_image(const ImageTensor& img, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
    out << (img.channels() == 1 ? "P5" : "P6") << '\n'
        << img.width() << ' ' << img.height() << '\n'
        << 255 << '\n';
    std::vector<char> raster(img.size());
    std::ranges::transform(img.data(), raster.begin(),
                           [](float v) { return static_cast<char>(quantize8(v)); });
    out.write(raster.data(), static_cast<std::streamsize>(raster.size()));
    if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

/// ITU-R BT.601 luma; identity for single-channel input.
inline ImageTensor to_grayscale(const ImageTensor& img) {
    if (img.channels() == 1) return img;
    std::vector<float> gray(img.height() * img.width());
    const auto src = img.data();
    for (std::size_t i = 0; i < gray.size(); ++i) {
        const float v = 0.299f * src[3 * i] + 0.587f * src[3 * i + 1] + 0.114f * src[3 * i + 2];
        gray[i] = std::clamp(v, 0.0f, 1.0f);
    }
    return ImageTensor(img.height(), img.width(), 1, std::move(gray));
}

namespace detail {

struct Tap {
    std::size_t lo;
    std::size_t hi;
    float t;
};

// Half-pixel-centre source coordinates, clamped to the valid range.
inline std::vector<Tap> bilinear_taps(std::size_t in, std::size_t out) {
    std::vector<Tap> taps(out);
    const double ratio = static_cast<double>(in) / static_cast<double>(out);
    for (std::size_t d = 0; d < out; ++d) {
        double s = (static_cast<double>(d) + 0.5) * ratio - 0.5;
        s = std::clamp(s, 0.0, static_cast<double>(in - 1));
        const auto lo = static_cast<std::size_t>(std::floor(s));
        taps[d] = {lo, std::min(lo + 1, in - 1), static_cast<float>(s - static_cast<double>(lo))};
    }
    return taps;
}

} // namespace detail

inline ImageTensor resize_bilinear(const ImageTensor& img, std::size_t out_h, std::size_t out_w) {
    if (out_h == 0 || out_w == 0)
        throw Error(ErrorCode::InvalidArgument, "resize target must be at least 1x1");
    if (out_h == img.height() && out_w == img.width()) return img;
    const auto rows = detail::bilinear_taps(img.height(), out_h);
    const auto cols = detail::bilinear_taps(img.width(), out_w);
    ImageTensor out(out_h, out_w, img.channels());
    for (std::size_t r = 0; r < out_h; ++r) {
        const auto& ty = rows[r];
        for (std::size_t c = 0; c < out_w; ++c) {
            const auto& tx = cols[c];
            for (std::size_t ch = 0; ch < img.channels(); ++ch) {
                const float top = img.at(ty.lo, tx.lo, ch) * (1 - tx.t) + img.at(ty.lo, tx.hi, ch) * tx.t;
                const float bot = img.at(ty.hi, tx.lo, ch) * (1 - tx.t) + img.at(ty.hi, tx.hi, ch) * tx.t;
                out.at(r, c, ch) = std::clamp(top * (1 - ty.t) + bot * ty.t, 0.0f, 1.0f);
            }
        }
    }
    return out;
}

} // namespace specfor
