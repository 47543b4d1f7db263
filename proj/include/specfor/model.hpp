#pragma once

// Logistic-regression head over standardized feature vectors, trained with
// mini-batch Adam on binary cross-entropy plus epoch-level checkpoint,
// early-stopping and reduce-on-plateau control.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "specfor/error.hpp"
#include "specfor/features.hpp"
#include "specfor/rng.hpp"

namespace specfor {

struct LinearModel {
    std::string schema_id;
    std::vector<float> weights;
    float bias = 0.0f;
    std::vector<float> feat_mean;
    std::vector<float> feat_std;
    std::size_t trained_epochs = 0;

    bool operator==(const LinearModel&) const = default;
};

struct TrainConfig {
    float lr = 1e-4f;
    std::size_t batch_size = 32;
    std::size_t max_epochs = 100;
    std::size_t early_stop_patience = 10;
    float early_stop_min_delta = 1e-4f;
    std::size_t plateau_patience = 5;
    float plateau_factor = 0.5f;
    float min_lr = 1e-7f;
    std::uint64_t seed = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    void validate() const {
        if (!(lr > 0.0f)) throw Error(ErrorCode::InvalidArgument, "lr must be positive");
        if (!(plateau_factor > 0.0f && plateau_factor < 1.0f))
            throw Error(ErrorCode::InvalidArgument, "plateau factor must lie in (0, 1)");
        if (batch_size == 0) throw Error(ErrorCode::InvalidArgument, "batch size must be >= 1");
    }
};

struct EpochRecord {
    std::size_t epoch = 0; ///< 1-based
    double train_loss = 0;
    double val_loss = 0;
    double val_accuracy = 0;
    double lr = 0; ///< rate used during this epoch
};

struct TrainHistory {
    std::vector<EpochRecord> epochs;
    std::size_t best_epoch = 0;
};

struct LabeledFeatures {
    FeatureVector x;
    int label = 0;
};

inline constexpr double kProbClamp = 1e-7;

inline double sigmoid(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

inline double bce_loss(double p, int y) {
    const double q = std::clamp(p, kProbClamp, 1.0 - kProbClamp);
    return y == 1 ? -std::log(q) : -std::log(1.0 - q);
}

inline void check_schema(const LinearModel& m, const FeatureVector& x) {
    if (x.schema_id != m.schema_id || x.values.size() != m.weights.size())
        throw Error(ErrorCode::SchemaMismatch,
                    "model expects " + m.schema_id + ", got " + x.schema_id);
}

inline std::vector<double> standardize(const LinearModel& m, const FeatureVector& x) {
    check_schema(m, x);
    std::vector<double> z(x.values.size());
    for (std::size_t i = 0; i < z.size(); ++i)
        z[i] = (static_cast<double>(x.values[i]) - m.feat_mean[i]) / m.feat_std[i];
    return z;
}

namespace detail {

inline double logit(std::span<const float> w, float b, std::span<const double> z) {
    double acc = b;
    for (std::size_t i = 0; i < z.size(); ++i) acc += static_cast<double>(w[i]) * z[i];
    return acc;
}

} // namespace detail

inline double predict_proba(const LinearModel& m, const FeatureVector& x) {
    const auto z = standardize(m, x);
    return sigmoid(detail::logit(m.weights, m.bias, z));
}

struct Standardizer {
    std::vector<float> mean;
    std::vector<float> std;
};

inline constexpr double kStdFloor = 1e-6;

/// Per-dimension mean and population standard deviation, floored at 1e-6.
inline Standardizer fit_standardizer(const std::vector<FeatureVector>& train) {
    if (train.size() < 2) throw Error(ErrorCode::TooFewSamples, "standardizer needs >= 2 samples");
    const std::size_t dim = train.front().values.size();
    std::vector<double> mean(dim, 0.0), var(dim, 0.0);
    for (const auto& x : train) {
        if (x.values.size() != dim) throw Error(ErrorCode::SchemaMismatch, "ragged feature vectors");
        for (std::size_t i = 0; i < dim; ++i) mean[i] += x.values[i];
    }
    for (auto& v : mean) v /= static_cast<double>(train.size());
    for (const auto& x : train)
        for (std::size_t i = 0; i < dim; ++i) {
            const double d = x.values[i] - mean[i];
            var[i] += d * d;
        }
    Standardizer s{std::vector<float>(dim), std::vector<float>(dim)};
    for (std::size_t i = 0; i < dim; ++i) {
        s.mean[i] = static_cast<float>(mean[i]);
        s.std[i] = static_cast<float>(std::max(std::sqrt(var[i] / static_cast<double>(train.size())), kStdFloor));
    }
    return s;
}

struct Gradient {
    std::vector<double> weights;
    double bias = 0;
};

/// d BCE / d(w, b) for one standardized sample: (p - y) * (z, 1).
inline Gradient bce_gradient(const LinearModel& m, std::span<const double> z, int y) {
    const double p = sigmoid(detail::logit(m.weights, m.bias, z));
    Gradient g{std::vector<double>(z.size()), p - y};
    for (std::size_t i = 0; i < z.size(); ++i) g.weights[i] = (p - y) * z[i];
    return g;
}

/// Max relative error between the analytic gradient and central differences
/// (step 1e-4) over every weight and the bias, on one standardized sample.
inline double gradient_check(const LinearModel& m, std::span<const double> z, int y, double h = 1e-4) {
    const Gradient g = bce_gradient(m, z, y);
    std::vector<double> w(m.weights.begin(), m.weights.end());
    double b = m.bias;
    const auto loss = [&] {
        double acc = b;
        for (std::size_t i = 0; i < z.size(); ++i) acc += w[i] * z[i];
        return bce_loss(sigmoid(acc), y);
    };
    const auto rel = [](double a, double n) {
        return std::abs(a - n) / std::max({std::abs(a), std::abs(n), 1e-12});
    };
    double worst = 0.0;
    for (std::size_t i = 0; i <= w.size(); ++i) {
        double& param = i < w.size() ? w[i] : b;
        const double saved = param;
        param = saved + h;
        const double up = loss();
        param = saved - h;
        const double down = loss();
        param = saved;
        const double numeric = (up - down) / (2 * h);
        worst = std::max(worst, rel(i < w.size() ? g.weights[i] : g.bias, numeric));
    }
    return worst;
}

/// Epoch-end state machine shared by early stopping and reduce-on-plateau.
/// An epoch improves when val_loss < best - min_delta.
class EpochCallbacks {
public:
    explicit EpochCallbacks(const TrainConfig& cfg) : cfg_(cfg), lr_(cfg.lr) {}

    struct Decision {
        bool stop = false;
        bool lr_reduced = false;
    };

    Decision on_epoch_end(double val_loss) {
        Decision d;
        if (val_loss < stop_best_ - cfg_.early_stop_min_delta) {
            stop_best_ = val_loss;
            stop_wait_ = 0;
        } else if (++stop_wait_ >= cfg_.early_stop_patience) {
            d.stop = true;
            return d;
        }
        if (val_loss < plateau_best_ - cfg_.early_stop_min_delta) {
            plateau_best_ = val_loss;
            plateau_wait_ = 0;
        } else if (++plateau_wait_ >= cfg_.plateau_patience) {
            const double next = std::max(lr_ * cfg_.plateau_factor, static_cast<double>(cfg_.min_lr));
            d.lr_reduced = next < lr_;
            lr_ = next;
            plateau_wait_ = 0;
        }
        return d;
    }

    double lr() const { return lr_; }

private:
    TrainConfig cfg_;
    double lr_;
    double stop_best_ = std::numeric_limits<double>::infinity();
    double plateau_best_ = std::numeric_limits<double>::infinity();
    std::size_t stop_wait_ = 0;
    std::size_t plateau_wait_ = 0;
};

struct TrainResult {
    LinearModel model;
    TrainHistory history;
};

namespace detail {

inline void check_split(const std::vector<LabeledFeatures>& data, const std::string& schema,
                        const char* name) {
    if (data.empty()) throw Error(ErrorCode::EmptySplit, std::string(name) + " split is empty");
    for (const auto& s : data) {
        if (s.x.schema_id != schema || s.x.values.size() != data.front().x.values.size())
            throw Error(ErrorCode::SchemaMismatch, std::string(name) + " split mixes feature schemas");
        if (s.label != 0 && s.label != 1)
            throw Error(ErrorCode::InvalidArgument, "labels must be 0 or 1");
    }
}

inline double mean_loss(const LinearModel& m, const std::vector<std::vector<double>>& z,
                        const std::vector<int>& y, double* accuracy = nullptr) {
    double loss = 0.0;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        const double p = sigmoid(logit(m.weights, m.bias, z[i]));
        loss += bce_loss(p, y[i]);
        correct += (p >= 0.5 ? 1 : 0) == y[i];
    }
    if (accuracy != nullptr) *accuracy = static_cast<double>(correct) / static_cast<double>(z.size());
    return loss / static_cast<double>(z.size());
}

} // namespace detail

/// Deterministic in (train, val, cfg). Returns the lowest-val_loss snapshot.
inline TrainResult train(const std::vector<LabeledFeatures>& train_set,
                         const std::vector<LabeledFeatures>& val_set, const TrainConfig& cfg) {
    cfg.validate();
    if (train_set.empty()) throw Error(ErrorCode::EmptySplit, "train split is empty");
    const std::string schema = train_set.front().x.schema_id;
    detail::check_split(train_set, schema, "train");
    detail::check_split(val_set, schema, "val");
    if (val_set.front().x.values.size() != train_set.front().x.values.size())
        throw Error(ErrorCode::SchemaMismatch, "train and val feature lengths differ");

    std::vector<FeatureVector> xs;
    xs.reserve(train_set.size());
    for (const auto& s : train_set) xs.push_back(s.x);
    Standardizer st = fit_standardizer(xs);
    const std::size_t dim = st.mean.size();

    LinearModel model{schema, std::vector<float>(dim, 0.0f), 0.0f, st.mean, st.std, 0};
    const auto prep = [&](const std::vector<LabeledFeatures>& data, std::vector<std::vector<double>>& z,
                          std::vector<int>& y) {
        for (const auto& s : data) {
            z.push_back(standardize(model, s.x));
            y.push_back(s.label);
        }
    };
    std::vector<std::vector<double>> ztr, zva;
    std::vector<int> ytr, yva;
    prep(train_set, ztr, ytr);
    prep(val_set, zva, yva);

    std::vector<double> m1(dim + 1, 0.0), m2(dim + 1, 0.0), grad(dim + 1);
    std::vector<std::size_t> order(ztr.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(cfg.seed);
    EpochCallbacks callbacks(cfg);
    TrainResult best{model, {}};
    double best_val = std::numeric_limits<double>::infinity();
    std::uint64_t step = 0;

    for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        const double lr = callbacks.lr();
        rng.shuffle(order.begin(), order.end());
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t end = std::min(order.size(), start + cfg.batch_size);
            std::ranges::fill(grad, 0.0);
            for (std::size_t k = start; k < end; ++k) {
                const auto& z = ztr[order[k]];
                const double err = sigmoid(detail::logit(model.weights, model.bias, z)) - ytr[order[k]];
                for (std::size_t i = 0; i < dim; ++i) grad[i] += err * z[i];
                grad[dim] += err;
            }
            const double inv = 1.0 / static_cast<double>(end - start);
            ++step;
            const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
            const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
            for (std::size_t i = 0; i <= dim; ++i) {
                const double g = grad[i] * inv;
                m1[i] = cfg.beta1 * m1[i] + (1.0 - cfg.beta1) * g;
                m2[i] = cfg.beta2 * m2[i] + (1.0 - cfg.beta2) * g * g;
                const double update = lr * (m1[i] / c1) / (std::sqrt(m2[i] / c2) + cfg.eps);
                float& param = i < dim ? model.weights[i] : model.bias;
                param = static_cast<float>(static_cast<double>(param) - update);
            }
        }

        EpochRecord rec{epoch, detail::mean_loss(model, ztr, ytr), 0.0, 0.0, lr};
        rec.val_loss = detail::mean_loss(model, zva, yva, &rec.val_accuracy);
        best.history.epochs.push_back(rec);
        if (rec.val_loss < best_val) {
            best_val = rec.val_loss;
            best.model = model;
            best.history.best_epoch = epoch;
        }
        if (callbacks.on_epoch_end(rec.val_loss).stop) break;
    }
    best.model.trained_epochs = best.history.epochs.size();
    return best;
}

inline void save_model(const LinearModel& m, const std::filesystem::path& path) {
    const nlohmann::ordered_json doc{
        {"schema_id", m.schema_id},     {"weights", m.weights},   {"bias", m.bias},
        {"feat_mean", m.feat_mean},     {"feat_std", m.feat_std}, {"trained_epochs", m.trained_epochs},
    };
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
    out << doc.dump(1) << '\n';
    if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

inline LinearModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open model " + path.string());
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::MalformedModel, e.what());
    }
    static const std::vector<std::string> kFields{"schema_id", "weights",  "bias",
                                                  "feat_mean", "feat_std", "trained_epochs"};
    if (!doc.is_object() || doc.size() != kFields.size())
        throw Error(ErrorCode::MalformedModel, "expected exactly 6 fields");
    for (const auto& f : kFields)
        if (!doc.contains(f)) throw Error(ErrorCode::MalformedModel, "missing field " + f);
    LinearModel m;
    try {
        m.schema_id = doc.at("schema_id").get<std::string>();
        m.weights = doc.at("weights").get<std::vector<float>>();
        m.bias = doc.at("bias").get<float>();
        m.feat_mean = doc.at("feat_mean").get<std::vector<float>>();
        m.feat_std = doc.at("feat_std").get<std::vector<float>>();
        m.trained_epochs = doc.at("trained_epochs").get<std::size_t>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::MalformedModel, e.what());
    }
    const std::size_t dim = m.weights.size();
    if (dim == 0 || m.feat_mean.size() != dim || m.feat_std.size() != dim)
        throw Error(ErrorCode::MalformedModel, "weight and standardizer lengths differ");
    if (!std::ranges::all_of(m.feat_std, [](float s) { return s > 0.0f; }))
        throw Error(ErrorCode::MalformedModel, "feat_std entries must be positive");
    return m;
}

} // namespace specfor
