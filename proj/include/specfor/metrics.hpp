#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

#include "specfor/error.hpp"
#include "specfor/model.hpp"

namespace specfor {

struct Confusion {
    std::size_t tp = 0, tn = 0, fp = 0, fn = 0;

    std::size_t n() const { return tp + tn + fp + fn; }
    bool operator==(const Confusion&) const = default;
};

struct EvalReport {
    std::size_t n = 0;
    std::size_t tp = 0, tn = 0, fp = 0, fn = 0;
    double accuracy = 0, f1 = 0, auc = 0, ap = 0, mean_loss = 0;
    double threshold = 0.5;
};

/// Test-set figures reported for the deep models this library's heads are
/// compared against (accuracy as a fraction).
struct ReferenceFigures {
    double accuracy, f1, auc, ap;
};
inline constexpr ReferenceFigures kReferenceFrequency{0.9282, 0.917, 0.95, 0.95};
inline constexpr ReferenceFigures kReferenceSpatial{0.815, 0.802, 0.85, 0.85};

namespace detail {

inline void check_scored(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size())
        throw Error(ErrorCode::LengthMismatch, "scores and labels differ in length");
    if (scores.empty()) throw Error(ErrorCode::EmptyInput, "no samples");
    for (int y : labels)
        if (y != 0 && y != 1) throw Error(ErrorCode::InvalidArgument, "labels must be 0 or 1");
}

// Indices sorted by descending score.
inline std::vector<std::size_t> rank_descending(std::span<const double> scores) {
    std::vector<std::size_t> idx(scores.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::ranges::stable_sort(idx, [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    return idx;
}

} // namespace detail

/// Predicts positive iff score >= threshold.
inline Confusion confusion(std::span<const double> scores, std::span<const int> labels, double threshold) {
    detail::check_scored(scores, labels);
    Confusion c;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const bool pred = scores[i] >= threshold;
        if (labels[i] == 1)
            ++(pred ? c.tp : c.fn);
        else
            ++(pred ? c.fp : c.tn);
    }
    return c;
}

struct AccuracyF1 {
    double accuracy;
    double f1;
};

inline AccuracyF1 accuracy_f1(const Confusion& c) {
    if (c.n() == 0) throw Error(ErrorCode::EmptyInput, "no samples");
    const double acc = static_cast<double>(c.tp + c.tn) / static_cast<double>(c.n());
    const std::size_t denom = 2 * c.tp + c.fp + c.fn;
    return {acc, denom == 0 ? 0.0 : 2.0 * static_cast<double>(c.tp) / static_cast<double>(denom)};
}

struct RocPoint {
    double fpr;
    double tpr;
};

/// ROC curve with one vertex per distinct score, starting at (0, 0).
inline std::vector<RocPoint> roc_curve(std::span<const double> scores, std::span<const int> labels) {
    detail::check_scored(scores, labels);
    const auto pos = static_cast<std::size_t>(std::ranges::count(labels, 1));
    const std::size_t neg = labels.size() - pos;
    if (pos == 0 || neg == 0) throw Error(ErrorCode::OneClassOnly, "ROC needs both classes");
    const auto idx = detail::rank_descending(scores);
    std::vector<RocPoint> pts{{0.0, 0.0}};
    std::size_t tp = 0, fp = 0;
    for (std::size_t k = 0; k < idx.size();) {
        const double s = scores[idx[k]];
        for (; k < idx.size() && scores[idx[k]] == s; ++k) ++(labels[idx[k]] == 1 ? tp : fp);
        pts.push_back({static_cast<double>(fp) / static_cast<double>(neg),
                       static_cast<double>(tp) / static_cast<double>(pos)});
    }
    return pts;
}

/// Trapezoidal area under the tie-grouped ROC curve; equals the pair-counting statistic.
inline double roc_auc(std::span<const double> scores, std::span<const int> labels) {
    const auto pts = roc_curve(scores, labels);
    double area = 0.0;
    for (std::size_t i = 1; i < pts.size(); ++i)
        area += (pts[i].fpr - pts[i - 1].fpr) * (pts[i].tpr + pts[i - 1].tpr) / 2.0;
    return area;
}

/// Step-wise AP: sum over descending distinct thresholds of (R_k - R_{k-1}) * P_k.
inline double average_precision(std::span<const double> scores, std::span<const int> labels) {
    detail::check_scored(scores, labels);
    const auto pos = static_cast<std::size_t>(std::ranges::count(labels, 1));
    if (pos == 0) throw Error(ErrorCode::NoPositives, "AP needs at least one positive");
    const auto idx = detail::rank_descending(scores);
    double ap = 0.0, prev_recall = 0.0;
    std::size_t tp = 0, seen = 0;
    for (std::size_t k = 0; k < idx.size();) {
        const double s = scores[idx[k]];
        for (; k < idx.size() && scores[idx[k]] == s; ++k, ++seen) tp += labels[idx[k]] == 1;
        const double recall = static_cast<double>(tp) / static_cast<double>(pos);
        const double precision = static_cast<double>(tp) / static_cast<double>(seen);
        ap += (recall - prev_recall) * precision;
        prev_recall = recall;
    }
    return ap;
}

/// Full report at the given threshold. AUC is 0 if the test set has a single class
/// and AP is 0 without positives, so the report is always complete.
inline EvalReport evaluate_scores(std::span<const double> scores, std::span<const int> labels,
                                  double threshold = 0.5) {
    const Confusion c = confusion(scores, labels, threshold);
    const AccuracyF1 af = accuracy_f1(c);
    EvalReport r{c.n(), c.tp, c.tn, c.fp, c.fn, af.accuracy, af.f1, 0.0, 0.0, 0.0, threshold};
    const bool has_pos = c.tp + c.fn > 0, has_neg = c.tn + c.fp > 0;
    if (has_pos && has_neg) r.auc = roc_auc(scores, labels);
    if (has_pos) r.ap = average_precision(scores, labels);
    double loss = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) loss += bce_loss(scores[i], labels[i]);
    r.mean_loss = loss / static_cast<double>(scores.size());
    return r;
}

inline EvalReport evaluate(const LinearModel& m, const std::vector<LabeledFeatures>& test) {
    if (test.empty()) throw Error(ErrorCode::EmptyInput, "empty test set");
    std::vector<double> scores;
    std::vector<int> labels;
    for (const auto& s : test) {
        scores.push_back(predict_proba(m, s.x));
        labels.push_back(s.label);
    }
    return evaluate_scores(scores, labels);
}

} // namespace specfor
