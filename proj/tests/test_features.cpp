#include <gtest/gtest.h>

#include <cmath>

#include "specfor/dataset.hpp"
#include "specfor/features.hpp"
#include "specfor/spectrum.hpp"
#include "support.hpp"

namespace specfor {
namespace {

RadialProfile profile_from(const std::vector<float>& means) {
    RadialProfile p;
    for (std::size_t r = 0; r < means.size(); ++r) p.bins.push_back({r, means[r], 1});
    return p;
}

// Brute-force ring membership: floor of the Euclidean distance, computed in double.
std::size_t ring_of(std::size_t i, std::size_t j, std::size_t ci, std::size_t cj) {
    const double di = static_cast<double>(i) - static_cast<double>(ci);
    const double dj = static_cast<double>(j) - static_cast<double>(cj);
    return static_cast<std::size_t>(std::floor(std::sqrt(di * di + dj * dj)));
}

TEST(RadialProfile, AllOnes) {
    const RadialProfile p = radial_profile(FloatMatrix(8, 8, 1.0f), {4, 4});
    ASSERT_EQ(p.size(), 4u);
    for (const auto& b : p.bins) EXPECT_FLOAT_EQ(b.mean_value, 1.0f);
}

TEST(RadialProfile, CentreImpulse) {
    FloatMatrix m(8, 8, 0.0f);
    m(4, 4) = 1.0f;
    const RadialProfile p = radial_profile(m, {4, 4});
    EXPECT_FLOAT_EQ(p.mean(0), 1.0f);
    for (std::size_t r = 1; r < p.size(); ++r) EXPECT_FLOAT_EQ(p.mean(r), 0.0f);
}

TEST(RadialProfile, RoundedRingAgainstEnumeration) {
    // Ones where the rounded distance is 2; bin 2 groups by floored distance.
    FloatMatrix m(8, 8, 0.0f);
    for (std::size_t i = 0; i < 8; ++i)
        for (std::size_t j = 0; j < 8; ++j) {
            const double d = std::hypot(static_cast<double>(i) - 4.0, static_cast<double>(j) - 4.0);
            if (std::lround(d) == 2) m(i, j) = 1.0f;
        }
    double ring_in_bin2 = 0, bin2 = 0;
    for (std::size_t i = 0; i < 8; ++i)
        for (std::size_t j = 0; j < 8; ++j)
            if (ring_of(i, j, 4, 4) == 2) {
                ++bin2;
                ring_in_bin2 += m(i, j);
            }
    const RadialProfile p = radial_profile(m, {4, 4});
    EXPECT_EQ(p.bins[2].count, static_cast<std::uint32_t>(bin2));
    EXPECT_NEAR(p.mean(2), ring_in_bin2 / bin2, 1e-7);
}

TEST(RadialProfile, CountsAreGeometryOnly) {
    const auto reference = radial_profile(testing::random_matrix(32, 24, 0), {16, 12});
    std::size_t expected_total = 0;
    for (std::size_t i = 0; i < 32; ++i)
        for (std::size_t j = 0; j < 24; ++j) expected_total += ring_of(i, j, 16, 12) < 12;
    std::size_t total = 0;
    for (const auto& b : reference.bins) {
        EXPECT_GE(b.count, 1u);
        total += b.count;
    }
    EXPECT_EQ(total, expected_total);
    for (std::uint64_t seed = 1; seed < 10; ++seed) {
        const auto p = radial_profile(testing::random_matrix(32, 24, seed), {16, 12});
        for (std::size_t r = 0; r < p.size(); ++r) EXPECT_EQ(p.bins[r].count, reference.bins[r].count);
    }
}

TEST(RadialProfile, OffCentreCentreKeepsEveryBinPopulated) {
    const auto p = radial_profile(FloatMatrix(9, 12, 0.5f), {0, 0});
    ASSERT_EQ(p.size(), 4u);
    for (const auto& b : p.bins) EXPECT_GE(b.count, 1u);
}

TEST(SpectralSlope, ExactPowerLaws) {
    for (double alpha : {-0.5, -1.0, -2.0}) {
        std::vector<float> means(101);
        means[0] = 123.0f;
        for (std::size_t r = 1; r < means.size(); ++r)
            means[r] = static_cast<float>(std::pow(static_cast<double>(r), alpha));
        EXPECT_NEAR(spectral_slope(profile_from(means)), alpha, 1e-6) << alpha;
    }
    EXPECT_NEAR(spectral_slope(profile_from(std::vector<float>(20, 0.4f))), 0.0, 1e-6);
}

TEST(SpectralSlope, DegenerateProfile) {
    try {
        spectral_slope(profile_from({1.0f, 0.5f, 0.0f, 0.2f}));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::DegenerateProfile);
    }
}

TEST(BandEnergyRatio, Extremes) {
    FloatMatrix dc(16, 16, 0.0f);
    dc(8, 8) = 5.0f;
    EXPECT_FLOAT_EQ(band_energy_ratio(radial_profile(dc, {8, 8}), 0.5f), 0.0f);

    std::vector<float> outer(8, 0.0f);
    outer.back() = 2.0f;
    EXPECT_FLOAT_EQ(band_energy_ratio(profile_from(outer), 0.5f), 1.0f);
    EXPECT_FLOAT_EQ(band_energy_ratio(profile_from(std::vector<float>(8, 0.0f)), 0.5f), 0.0f);
}

TEST(BandEnergyRatio, UniformMatrixMatchesCellCount) {
    const std::size_t n = 64, c = 32, n_bins = 32;
    double outer = 0, binned = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const auto r = ring_of(i, j, c, c);
            if (r >= n_bins) continue;
            ++binned;
            if (static_cast<double>(r) >= 0.5 * n_bins) ++outer;
        }
    EXPECT_NEAR(band_energy_ratio(radial_profile(FloatMatrix(n, n, 0.7f), {c, c}), 0.5f), outer / binned, 1e-6);
}

TEST(BandEnergyRatio, RejectsBadSplit) {
    EXPECT_THROW(band_energy_ratio(profile_from({1, 1, 1}), 1.0f), Error);
    EXPECT_THROW(band_energy_ratio(profile_from({1, 1, 1}), 0.0f), Error);
}

TEST(ReplicaPeakScore, DecreasingProfileScoresZero) {
    std::vector<float> means(40);
    for (std::size_t r = 0; r < means.size(); ++r) means[r] = 1.0f / static_cast<float>(r + 1);
    EXPECT_FLOAT_EQ(replica_peak_score(profile_from(means)), 0.0f);
}

TEST(ReplicaPeakScore, SingleBump) {
    std::vector<float> means(40, 0.2f);
    means[25] += 0.15f;
    EXPECT_NEAR(replica_peak_score(profile_from(means)), 0.15f, 1e-6);
    // bumps inside the inner quarter are ignored
    std::vector<float> inner(40, 0.2f);
    inner[5] += 0.15f;
    EXPECT_FLOAT_EQ(replica_peak_score(profile_from(inner)), 0.0f);
}

TEST(ReplicaPeakScore, NonNegative) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto p = radial_profile(testing::random_matrix(24, 24, seed), {12, 12});
        EXPECT_GE(replica_peak_score(p), 0.0f);
    }
}

FloatMatrix mean_spectrum(const ImageTensor& img) { return channel_mean(transform_image(img)); }

TEST(ReplicaPeakScore, ZeroInsertionBeatsItsSource) {
    int wins = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const ImageTensor src = synth_real_one(128, 1.0f, seed, 0);
        ImageTensor up(256, 256, 3, 0.0f);
        for (std::size_t r = 0; r < 128; ++r)
            for (std::size_t c = 0; c < 128; ++c)
                for (std::size_t ch = 0; ch < 3; ++ch) up.at(2 * r, 2 * c, ch) = src.at(r, c, ch);
        const float s_src = replica_peak_score(radial_profile(mean_spectrum(src), {64, 64}));
        const float s_up = replica_peak_score(radial_profile(mean_spectrum(up), {128, 128}));
        wins += s_up > s_src;
    }
    EXPECT_GE(wins, 95);
}

TEST(PoolGrid, Definitions) {
    for (float v : pool_grid(FloatMatrix(10, 13, 0.25f), 4)) EXPECT_FLOAT_EQ(v, 0.25f);
    const FloatMatrix m = testing::random_matrix(5, 5, 1);
    EXPECT_EQ(pool_grid(m, 5), m.data);
    FloatMatrix q(4, 4);
    for (std::size_t r = 0; r < 4; ++r)
        for (std::size_t c = 0; c < 4; ++c) q(r, c) = static_cast<float>((r / 2) * 2 + c / 2 + 1);
    EXPECT_EQ(pool_grid(q, 2), (std::vector<float>{1, 2, 3, 4}));
    EXPECT_THROW(pool_grid(q, 5), Error);
}

TEST(FreqFeatures, ShapeAndDeterminism) {
    const Spectrum s = transform_image(synth_real_one(256, 1.0f, 3, 0));
    const FeatureVector a = extract_freq_features(s);
    EXPECT_EQ(a.schema_id, "freq-v1");
    ASSERT_EQ(a.values.size(), 259u);
    for (float v : a.values) EXPECT_TRUE(std::isfinite(v));
    const FeatureVector b = extract_freq_features(transform_image(synth_real_one(256, 1.0f, 3, 0)));
    EXPECT_EQ(a, b);
}

TEST(FreqFeatures, RequiresShiftedSpectrum) {
    Spectrum s = transform_image(testing::random_image(32, 32, 1, 0));
    s.shifted = false;
    EXPECT_THROW(extract_freq_features(s), Error);
}

TEST(FreqFeatures, ConstantImagePropagatesDegenerateProfile) {
    try {
        extract_freq_features(transform_image(ImageTensor(32, 32, 3, 0.5f)));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::DegenerateProfile);
    }
}

TEST(SpatialFeatures, ConstantGray) {
    const FeatureVector f = extract_spatial_features(ImageTensor(64, 48, 3, 0.5f));
    EXPECT_EQ(f.schema_id, "spatial-v1");
    ASSERT_EQ(f.values.size(), 256u);
    for (float v : f.values) EXPECT_FLOAT_EQ(v, 0.5f);
    EXPECT_EQ(extract_spatial_features(testing::random_image(17, 300, 1, 2)).values.size(), 256u);
}

TEST(SpatialFeatures, HorizontalFlipReversesGridRows) {
    const ImageTensor img = testing::random_image(64, 64, 3, 8);
    ImageTensor flipped(64, 64, 3);
    for (std::size_t r = 0; r < 64; ++r)
        for (std::size_t c = 0; c < 64; ++c)
            for (std::size_t ch = 0; ch < 3; ++ch) flipped.at(r, 63 - c, ch) = img.at(r, c, ch);
    const auto a = extract_spatial_features(img).values;
    const auto b = extract_spatial_features(flipped).values;
    for (std::size_t r = 0; r < 16; ++r)
        for (std::size_t c = 0; c < 16; ++c) EXPECT_NEAR(b[r * 16 + c], a[r * 16 + (15 - c)], 1e-6);
}

} // namespace
} // namespace specfor
