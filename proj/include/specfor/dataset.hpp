#pragma once

// Labeled manifests, stratified splitting, and the synthetic corpus generator
// that plants the upsampling fingerprint.

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "specfor/error.hpp"
#include "specfor/image.hpp"
#include "specfor/rng.hpp"
#include "specfor/spectrum.hpp"

namespace specfor {

enum class Split { Train, Val, Test };

inline const char* to_string(Split s) {
    switch (s) {
    case Split::Train: return "train";
    case Split::Val: return "val";
    case Split::Test: return "test";
    }
    return "train";
}

inline Split parse_split(const std::string& s) {
    if (s == "train") return Split::Train;
    if (s == "val") return Split::Val;
    if (s == "test") return Split::Test;
    throw Error(ErrorCode::MalformedRow, "unknown split '" + s + "'");
}

struct ManifestEntry {
    std::string path;
    int label = 0; ///< 0 = real, 1 = fake
    Split split = Split::Train;

    bool operator==(const ManifestEntry&) const = default;
};

struct LabeledItem {
    std::string path;
    int label = 0;
};

struct DatasetManifest {
    std::vector<ManifestEntry> entries;
    std::uint64_t seed = 0;

    std::vector<ManifestEntry> subset(Split s) const {
        std::vector<ManifestEntry> out;
        for (const auto& e : entries)
            if (e.split == s) out.push_back(e);
        return out;
    }

    bool operator==(const DatasetManifest&) const = default;
};

struct SplitRatios {
    double train = 0.70;
    double val = 0.15;
    double test = 0.15;
};

/// Stratified by label: each label's items are shuffled with a seeded stream,
/// val and test take round(ratio * n) and train takes the remainder.
inline DatasetManifest split_manifest(const std::vector<LabeledItem>& items, SplitRatios ratios,
                                      std::uint64_t seed) {
    if (items.empty()) throw Error(ErrorCode::EmptyInput, "nothing to split");
    if (ratios.train < 0 || ratios.val < 0 || ratios.test < 0 ||
        std::abs(ratios.train + ratios.val + ratios.test - 1.0) > 1e-6)
        throw Error(ErrorCode::BadRatios, "split ratios must be non-negative and sum to 1");

    for (std::size_t i = 0; i < items.size(); ++i)
        if (items[i].label != 0 && items[i].label != 1)
            throw Error(ErrorCode::MalformedRow, "label must be 0 or 1: " + items[i].path);

    DatasetManifest m{std::vector<ManifestEntry>(items.size()), seed};
    for (int label = 0; label <= 1; ++label) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < items.size(); ++i)
            if (items[i].label == label) idx.push_back(i);
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(label)));
        rng.shuffle(idx.begin(), idx.end());
        const auto n = static_cast<double>(idx.size());
        const auto n_val = static_cast<std::size_t>(std::llround(ratios.val * n));
        const auto n_test = static_cast<std::size_t>(std::llround(ratios.test * n));
        const std::size_t n_train = idx.size() - std::min(idx.size(), n_val + n_test);
        for (std::size_t k = 0; k < idx.size(); ++k) {
            const Split s = k < n_train ? Split::Train : k < n_train + n_val ? Split::Val : Split::Test;
            m.entries[idx[k]] = {items[idx[k]].path, label, s};
        }
    }
    return m;
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

} // namespace detail

inline constexpr const char* kManifestHeader = "path,label,split";

/// Reads `path,label,split` rows; paths are returned exactly as written.
inline DatasetManifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open manifest " + path.string());
    DatasetManifest m;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (lineno == 1 && line == kManifestHeader) continue;
        const auto f = detail::split_csv_line(line);
        const std::string where = path.string() + ":" + std::to_string(lineno);
        if (f.size() != 3 || f[0].empty())
            throw Error(ErrorCode::MalformedRow, where + ": expected path,label,split");
        if (f[1] != "0" && f[1] != "1")
            throw Error(ErrorCode::MalformedRow, where + ": label must be 0 or 1");
        Split s;
        try {
            s = parse_split(f[2]);
        } catch (const Error&) {
            throw Error(ErrorCode::MalformedRow, where + ": split must be train, val or test");
        }
        m.entries.push_back({f[0], f[1] == "1" ? 1 : 0, s});
    }
    if (in.bad()) throw Error(ErrorCode::IoError, "read failed for " + path.string());
    return m;
}

inline void save_manifest(const DatasetManifest& m, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
    out << kManifestHeader << '\n';
    for (const auto& e : m.entries) out << e.path << ',' << e.label << ',' << to_string(e.split) << '\n';
    if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

/// Resolves a manifest path against the manifest's own directory.
inline std::filesystem::path resolve_entry(const std::filesystem::path& manifest_path,
                                           const std::string& entry_path) {
    const std::filesystem::path p(entry_path);
    return p.is_absolute() ? p : manifest_path.parent_path() / p;
}

namespace detail {

inline void require_synth_size(std::size_t size, std::size_t min_size) {
    if (size < min_size || !fft::is_pow2(size))
        throw Error(ErrorCode::InvalidArgument,
                    "synthetic image size must be a power of two >= " + std::to_string(min_size));
}

inline FloatMatrix min_max(const std::vector<double>& v, std::size_t size) {
    FloatMatrix m(size, size);
    const auto [lo, hi] = std::ranges::minmax(v);
    const double range = hi > lo ? hi - lo : 1.0;
    for (std::size_t i = 0; i < v.size(); ++i)
        m.data[i] = static_cast<float>(std::clamp((v[i] - lo) / range, 0.0, 1.0));
    return m;
}

inline ImageTensor replicate_rgb(const FloatMatrix& gray) {
    std::vector<float> rgb(gray.size() * 3);
    for (std::size_t i = 0; i < gray.size(); ++i) rgb[3 * i] = rgb[3 * i + 1] = rgb[3 * i + 2] = gray.data[i];
    return ImageTensor(gray.height, gray.width, 3, std::move(rgb));
}

/// Gaussian white noise shaped to amplitude r^-alpha, normalized to [0, 1].
inline FloatMatrix power_law_field(std::size_t size, float alpha, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<fft::cd> buf(size * size);
    for (auto& v : buf) v = rng.normal();
    fft::forward_2d(buf, size, size);
    for (std::size_t u = 0; u < size; ++u) {
        const double fu = static_cast<double>(std::min(u, size - u));
        for (std::size_t v = 0; v < size; ++v) {
            if (u == 0 && v == 0) continue;
            const double fv = static_cast<double>(std::min(v, size - v));
            buf[u * size + v] *= std::pow(std::sqrt(fu * fu + fv * fv), -static_cast<double>(alpha));
        }
    }
    fft::inverse_2d(buf, size, size);
    std::vector<double> field(buf.size());
    std::ranges::transform(buf, field.begin(), [](const fft::cd& c) { return c.real(); });
    return min_max(field, size);
}

inline constexpr std::uint64_t kFakeStreamSalt = 0x6a09e667f3bcc909ULL;
inline constexpr std::array<double, 3> kUpsampleKernel{0.25, 0.5, 0.25};

/// 2x zero-insertion followed by the separable [1/4, 1/2, 1/4] kernel with
/// wrap-around borders (the source field is periodic).
inline FloatMatrix upsample2x(const FloatMatrix& src) {
    const std::size_t n = src.height * 2;
    std::vector<double> up(n * n, 0.0);
    for (std::size_t r = 0; r < src.height; ++r)
        for (std::size_t c = 0; c < src.width; ++c) up[(2 * r) * n + 2 * c] = src(r, c);
    std::vector<double> tmp(n * n, 0.0), out(n * n, 0.0);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c)
            for (std::size_t k = 0; k < 3; ++k)
                tmp[r * n + c] += kUpsampleKernel[k] * up[r * n + (c + n + k - 1) % n];
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c)
            for (std::size_t k = 0; k < 3; ++k)
                out[r * n + c] += kUpsampleKernel[k] * tmp[((r + n + k - 1) % n) * n + c];
    return min_max(out, n);
}

} // namespace detail

/// Natural-image stand-in: 1/f^alpha amplitude spectrum, gray replicated to RGB.
inline ImageTensor synth_real_one(std::size_t size, float alpha, std::uint64_t seed, std::uint64_t index) {
    detail::require_synth_size(size, 1);
    return detail::replicate_rgb(detail::power_law_field(size, alpha, derive_seed(seed, index)));
}

/// GAN stand-in: a half-size real image upsampled by zero-insertion and smoothing.
inline ImageTensor synth_fake_one(std::size_t size, float alpha, std::uint64_t seed, std::uint64_t index) {
    detail::require_synth_size(size, 4);
    const FloatMatrix half =
        detail::power_law_field(size / 2, alpha, derive_seed(seed ^ detail::kFakeStreamSalt, index));
    return detail::replicate_rgb(detail::upsample2x(half));
}

inline std::vector<ImageTensor> synth_real(std::size_t n, std::size_t size, float alpha, std::uint64_t seed) {
    if (!(alpha >= 0.0f)) throw Error(ErrorCode::InvalidArgument, "alpha must be non-negative");
    std::vector<ImageTensor> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(synth_real_one(size, alpha, seed, i));
    return out;
}

inline std::vector<ImageTensor> synth_fake(std::size_t n, std::size_t size, float alpha, std::uint64_t seed) {
    if (!(alpha >= 0.0f)) throw Error(ErrorCode::InvalidArgument, "alpha must be non-negative");
    std::vector<ImageTensor> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(synth_fake_one(size, alpha, seed, i));
    return out;
}

} // namespace specfor
