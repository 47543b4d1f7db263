#pragma once

// Fixed-schema feature vectors. The frequency schema pools the spectrum and
// appends three radial-profile statistics that respond to the two GAN
// fingerprints: fast high-frequency decay and upsampling replicas.

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "specfor/error.hpp"
#include "specfor/image.hpp"
#include "specfor/matrix.hpp"
#include "specfor/spectrum.hpp"

namespace specfor {

inline constexpr const char* kFreqSchema = "freq-v1";
inline constexpr const char* kSpatialSchema = "spatial-v1";
inline constexpr std::size_t kPoolGrid = 16;
inline constexpr std::size_t kFreqFeatureLength = kPoolGrid * kPoolGrid + 3;
inline constexpr std::size_t kSpatialFeatureLength = kPoolGrid * kPoolGrid;
inline constexpr float kHighBandSplit = 0.75f;

struct FeatureVector {
    std::string schema_id;
    std::vector<float> values;

    bool operator==(const FeatureVector&) const = default;
};

inline std::size_t schema_length(const std::string& schema_id) {
    if (schema_id == kFreqSchema) return kFreqFeatureLength;
    if (schema_id == kSpatialSchema) return kSpatialFeatureLength;
    throw Error(ErrorCode::SchemaMismatch, "unknown schema '" + schema_id + "'");
}

struct RadialBin {
    std::size_t radius = 0;
    float mean_value = 0.0f;
    std::uint32_t count = 0;
};

/// Mean value per integer-distance ring around a centre; n_bins = floor(min(H, W) / 2).
struct RadialProfile {
    std::vector<RadialBin> bins;

    std::size_t size() const { return bins.size(); }
    float mean(std::size_t r) const { return bins[r].mean_value; }
};

namespace detail {

inline std::uint64_t isqrt(std::uint64_t n) {
    auto r = static_cast<std::uint64_t>(std::sqrt(static_cast<double>(n)));
    while (r * r > n) --r;
    while ((r + 1) * (r + 1) <= n) ++r;
    return r;
}

} // namespace detail

/// Bin r holds every element with floor(distance to centre) == r, for r < n_bins.
inline RadialProfile radial_profile(const FloatMatrix& m, std::pair<std::size_t, std::size_t> center) {
    if (m.height < 2 || m.width < 2)
        throw Error(ErrorCode::InvalidArgument, "radial profile needs at least a 2x2 matrix");
    if (center.first >= m.height || center.second >= m.width)
        throw Error(ErrorCode::InvalidArgument, "profile centre lies outside the matrix");
    const std::size_t n_bins = std::min(m.height, m.width) / 2;
    std::vector<double> sums(n_bins, 0.0);
    std::vector<std::uint32_t> counts(n_bins, 0);
    for (std::size_t i = 0; i < m.height; ++i) {
        const auto di = static_cast<std::int64_t>(i) - static_cast<std::int64_t>(center.first);
        for (std::size_t j = 0; j < m.width; ++j) {
            const auto dj = static_cast<std::int64_t>(j) - static_cast<std::int64_t>(center.second);
            const auto r = detail::isqrt(static_cast<std::uint64_t>(di * di + dj * dj));
            if (r >= n_bins) continue;
            sums[r] += m(i, j);
            ++counts[r];
        }
    }
    RadialProfile p;
    p.bins.resize(n_bins);
    for (std::size_t r = 0; r < n_bins; ++r)
        p.bins[r] = {r, static_cast<float>(sums[r] / counts[r]), counts[r]};
    return p;
}

/// Least-squares slope of ln(mean) against ln(r), DC bin and non-positive bins excluded.
inline float spectral_slope(const RadialProfile& p) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t n = 0;
    for (std::size_t r = 1; r < p.size(); ++r) {
        if (!(p.mean(r) > 0.0f)) continue;
        const double x = std::log(static_cast<double>(r));
        const double y = std::log(static_cast<double>(p.mean(r)));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    if (n < 3) throw Error(ErrorCode::DegenerateProfile, "fewer than 3 usable profile bins");
    const double dn = static_cast<double>(n);
    const double denom = dn * sxx - sx * sx;
    return static_cast<float>((dn * sxy - sx * sy) / denom);
}

/// Share of total ring energy at radii >= split * n_bins.
inline float band_energy_ratio(const RadialProfile& p, float split) {
    if (!(split > 0.0f && split < 1.0f))
        throw Error(ErrorCode::InvalidArgument, "band split must lie in (0, 1)");
    const double cut = static_cast<double>(split) * static_cast<double>(p.size());
    double high = 0, total = 0;
    for (const auto& b : p.bins) {
        const double e = static_cast<double>(b.mean_value) * b.count;
        total += e;
        if (static_cast<double>(b.radius) >= cut) high += e;
    }
    return total == 0.0 ? 0.0f : static_cast<float>(high / total);
}

/// Summed positive prominence of interior bins over the outer three quarters of radii.
inline float replica_peak_score(const RadialProfile& p) {
    if (p.size() < 5) throw Error(ErrorCode::InvalidArgument, "replica score needs >= 5 bins");
    const double start = static_cast<double>(p.size()) / 4.0;
    double score = 0.0;
    for (std::size_t r = 1; r + 1 < p.size(); ++r) {
        if (!(static_cast<double>(r) > start)) continue;
        const double local = (static_cast<double>(p.mean(r - 1)) + p.mean(r + 1)) / 2.0;
        score += std::max(0.0, static_cast<double>(p.mean(r)) - local);
    }
    return static_cast<float>(score);
}

/// Average pool over a g x g tiling with cell edges at floor(k * H / g), floor(k * W / g).
inline std::vector<float> pool_grid(const FloatMatrix& m, std::size_t g) {
    if (g == 0 || m.height < g || m.width < g)
        throw Error(ErrorCode::InvalidArgument, "pool grid larger than matrix");
    std::vector<float> out(g * g);
    for (std::size_t gr = 0; gr < g; ++gr) {
        const std::size_t r0 = gr * m.height / g, r1 = (gr + 1) * m.height / g;
        for (std::size_t gc = 0; gc < g; ++gc) {
            const std::size_t c0 = gc * m.width / g, c1 = (gc + 1) * m.width / g;
            double sum = 0.0;
            for (std::size_t r = r0; r < r1; ++r)
                for (std::size_t c = c0; c < c1; ++c) sum += m(r, c);
            out[gr * g + gc] = static_cast<float>(sum / static_cast<double>((r1 - r0) * (c1 - c0)));
        }
    }
    return out;
}

/// Channel mean of a spectrum, the matrix the frequency features are computed on.
inline FloatMatrix channel_mean(const Spectrum& s) {
    FloatMatrix m(s.height, s.width);
    for (std::size_t i = 0; i < m.size(); ++i) {
        double acc = 0.0;
        for (std::size_t ch = 0; ch < s.channels; ++ch) acc += s.data[i * s.channels + ch];
        m.data[i] = static_cast<float>(acc / static_cast<double>(s.channels));
    }
    return m;
}

inline std::pair<std::size_t, std::size_t> spectrum_center(const Spectrum& s) {
    return {s.height / 2, s.width / 2};
}

inline FeatureVector extract_freq_features(const Spectrum& s) {
    if (!s.shifted)
        throw Error(ErrorCode::InvalidArgument, "frequency features need a centred spectrum");
    const FloatMatrix m = channel_mean(s);
    FeatureVector fv{kFreqSchema, pool_grid(m, kPoolGrid)};
    const RadialProfile p = radial_profile(m, spectrum_center(s));
    fv.values.push_back(spectral_slope(p));
    fv.values.push_back(band_energy_ratio(p, kHighBandSplit));
    fv.values.push_back(replica_peak_score(p));
    return fv;
}

inline FeatureVector extract_spatial_features(const ImageTensor& img) {
    return {kSpatialSchema, pool_grid(to_grayscale(img).channel(0), kPoolGrid)};
}

} // namespace specfor
