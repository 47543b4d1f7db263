#include <gtest/gtest.h>

#include <cmath>

#include "specfor/metrics.hpp"
#include "support.hpp"

namespace specfor {
namespace {

// Probability that a random positive outranks a random negative, ties counting half.
double pairwise_auc(const std::vector<double>& s, const std::vector<int>& y) {
    double wins = 0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < s.size(); ++i)
        for (std::size_t j = 0; j < s.size(); ++j)
            if (y[i] == 1 && y[j] == 0) {
                ++pairs;
                wins += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
            }
    return wins / static_cast<double>(pairs);
}

// Mean over positives of the precision at that positive's score.
double per_positive_ap(const std::vector<double>& s, const std::vector<int>& y) {
    double sum = 0;
    std::size_t pos = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (y[i] != 1) continue;
        ++pos;
        std::size_t hit = 0, tp = 0;
        for (std::size_t j = 0; j < s.size(); ++j)
            if (s[j] >= s[i]) {
                ++hit;
                tp += y[j] == 1;
            }
        sum += static_cast<double>(tp) / static_cast<double>(hit);
    }
    return sum / static_cast<double>(pos);
}

struct Scored {
    std::vector<double> s;
    std::vector<int> y;
};

// Coarsely quantized scores so that ties are common.
Scored random_scored(std::uint64_t seed) {
    Rng rng(seed);
    const std::size_t n = 2 + rng.below(60);
    Scored d;
    for (std::size_t i = 0; i < n; ++i) {
        d.y.push_back(static_cast<int>(rng.below(2)));
        d.s.push_back(std::floor(rng.uniform() * 10.0) / 10.0 + 0.05 * d.y.back());
    }
    d.y[0] = 0;
    d.y[1] = 1;
    return d;
}

TEST(Confusion, Examples) {
    const std::vector<double> s{0.9, 0.2, 0.6, 0.4};
    const std::vector<int> y{1, 0, 0, 1};
    EXPECT_EQ(confusion(s, y, 0.5), (Confusion{1, 1, 1, 1}));
    EXPECT_EQ(confusion(s, y, 0.0), (Confusion{2, 0, 2, 0}));
    EXPECT_EQ(confusion(s, y, 1.0), (Confusion{0, 2, 0, 2}));
}

TEST(Confusion, ThresholdIsInclusive) {
    const std::vector<double> s{0.5};
    const std::vector<int> neg{0}, pos{1};
    EXPECT_EQ(confusion(s, neg, 0.5).fp, 1u);
    EXPECT_EQ(confusion(s, pos, 0.5).tp, 1u);
}

TEST(AccuracyF1, Examples) {
    const auto a = accuracy_f1({1, 1, 1, 1});
    EXPECT_DOUBLE_EQ(a.accuracy, 0.5);
    EXPECT_DOUBLE_EQ(a.f1, 0.5);
    const auto b = accuracy_f1({3, 5, 1, 1});
    EXPECT_DOUBLE_EQ(b.accuracy, 0.8);
    EXPECT_DOUBLE_EQ(b.f1, 0.75);
    EXPECT_DOUBLE_EQ(accuracy_f1({0, 4, 0, 0}).f1, 0.0);
    EXPECT_THROW(accuracy_f1({}), Error);
}

TEST(RankingMetrics, WorkedExample) {
    const std::vector<double> s{0.1, 0.4, 0.35, 0.8};
    const std::vector<int> y{0, 0, 1, 1};
    EXPECT_NEAR(roc_auc(s, y), 0.75, 1e-12);
    EXPECT_NEAR(average_precision(s, y), 0.8333333333, 1e-9);
    const auto roc = roc_curve(s, y);
    ASSERT_EQ(roc.size(), 5u);
    EXPECT_DOUBLE_EQ(roc.front().fpr, 0.0);
    EXPECT_DOUBLE_EQ(roc.back().tpr, 1.0);
    EXPECT_DOUBLE_EQ(roc.back().fpr, 1.0);
}

TEST(RankingMetrics, AllTiedScores) {
    const std::vector<double> s(7, 0.3);
    const std::vector<int> y{1, 0, 0, 1, 0, 1, 0};
    EXPECT_DOUBLE_EQ(roc_auc(s, y), 0.5);
    EXPECT_NEAR(average_precision(s, y), 3.0 / 7.0, 1e-12);
}

TEST(RankingMetrics, PerfectAndReversed) {
    const std::vector<double> s{0.1, 0.2, 0.8, 0.9};
    const std::vector<int> y{0, 0, 1, 1}, r{1, 1, 0, 0};
    EXPECT_DOUBLE_EQ(roc_auc(s, y), 1.0);
    EXPECT_DOUBLE_EQ(average_precision(s, y), 1.0);
    EXPECT_DOUBLE_EQ(roc_auc(s, r), 0.0);
}

TEST(RankingMetrics, MatchOraclesOnRandomSetsWithTies) {
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const Scored d = random_scored(seed);
        EXPECT_NEAR(roc_auc(d.s, d.y), pairwise_auc(d.s, d.y), 1e-9) << seed;
        EXPECT_NEAR(average_precision(d.s, d.y), per_positive_ap(d.s, d.y), 1e-9) << seed;
    }
}

TEST(RankingMetrics, InvariantUnderMonotoneMapsAndPermutation) {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        Scored d = random_scored(seed);
        const double auc = roc_auc(d.s, d.y), ap = average_precision(d.s, d.y);
        Scored cubed = d;
        for (auto& v : cubed.s) v = v * v * v;
        EXPECT_DOUBLE_EQ(roc_auc(cubed.s, cubed.y), auc);
        EXPECT_DOUBLE_EQ(average_precision(cubed.s, cubed.y), ap);
        Rng rng(seed + 1000);
        std::vector<std::size_t> perm(d.s.size());
        std::iota(perm.begin(), perm.end(), 0);
        rng.shuffle(perm.begin(), perm.end());
        Scored p;
        for (auto i : perm) {
            p.s.push_back(d.s[i]);
            p.y.push_back(d.y[i]);
        }
        EXPECT_NEAR(roc_auc(p.s, p.y), auc, 1e-12);
        EXPECT_NEAR(average_precision(p.s, p.y), ap, 1e-12);
        EXPECT_GE(auc, 0.0);
        EXPECT_LE(auc, 1.0);
        EXPECT_GT(ap, 0.0);
        EXPECT_LE(ap, 1.0);
    }
}

TEST(RankingMetrics, Errors) {
    const std::vector<double> s{0.1, 0.2};
    const std::vector<int> one{1, 1}, zero{0, 0}, short_labels{1};
    auto code_of = [](auto&& fn) {
        try {
            fn();
        } catch (const Error& e) {
            return e.code();
        }
        return ErrorCode::InvalidArgument;
    };
    EXPECT_EQ(code_of([&] { roc_auc(s, one); }), ErrorCode::OneClassOnly);
    EXPECT_EQ(code_of([&] { roc_auc(s, zero); }), ErrorCode::OneClassOnly);
    EXPECT_EQ(code_of([&] { average_precision(s, zero); }), ErrorCode::NoPositives);
    EXPECT_EQ(code_of([&] { roc_auc(s, short_labels); }), ErrorCode::LengthMismatch);
    EXPECT_EQ(code_of([&] { confusion({}, {}, 0.5); }), ErrorCode::EmptyInput);
}

TEST(Evaluate, ReportInvariants) {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const Scored d = random_scored(seed);
        const EvalReport r = evaluate_scores(d.s, d.y);
        EXPECT_EQ(r.n, d.s.size());
        EXPECT_EQ(r.tp + r.tn + r.fp + r.fn, r.n);
        EXPECT_EQ(r.tp + r.fn, static_cast<std::size_t>(std::count(d.y.begin(), d.y.end(), 1)));
        EXPECT_NEAR(r.accuracy, static_cast<double>(r.tp + r.tn) / static_cast<double>(r.n), 1e-15);
        EXPECT_GE(r.f1, 0.0);
        EXPECT_LE(r.f1, 1.0);
        EXPECT_DOUBLE_EQ(r.threshold, 0.5);
        EXPECT_GT(r.mean_loss, 0.0);
    }
}

TEST(Evaluate, OneClassSetStillReports) {
    const std::vector<double> s{0.7, 0.2};
    const std::vector<int> y{0, 0};
    const EvalReport r = evaluate_scores(s, y);
    EXPECT_EQ(r.fp, 1u);
    EXPECT_EQ(r.auc, 0.0);
    EXPECT_EQ(r.ap, 0.0);
}

TEST(Evaluate, BiasOnlyModelOnPositives) {
    LinearModel m{"toy", {0.0f, 0.0f}, 10.0f, {0.0f, 0.0f}, {1.0f, 1.0f}, 1};
    std::vector<LabeledFeatures> test;
    for (int i = 0; i < 5; ++i) test.push_back({{"toy", {static_cast<float>(i), 1.0f}}, 1});
    const EvalReport r = evaluate(m, test);
    EXPECT_DOUBLE_EQ(r.accuracy, 1.0);
    EXPECT_DOUBLE_EQ(r.f1, 1.0);
    EXPECT_EQ(r.tp, 5u);
    EXPECT_THROW(evaluate(m, {}), Error);
}

} // namespace
} // namespace specfor
