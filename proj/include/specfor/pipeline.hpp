#pragma once

// File-level stages shared by the command-line tool: synthesize, split,
// featurize, train, evaluate, infer. Every stage reads and writes plain files
// so each one can be run and inspected on its own.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "specfor/augment.hpp"
#include "specfor/dataset.hpp"
#include "specfor/error.hpp"
#include "specfor/features.hpp"
#include "specfor/image.hpp"
#include "specfor/metrics.hpp"
#include "specfor/model.hpp"
#include "specfor/spectrum.hpp"

namespace specfor {

enum class Domain { Freq, Spatial };

inline Domain parse_domain(const std::string& s) {
    if (s == "freq") return Domain::Freq;
    if (s == "spatial") return Domain::Spatial;
    throw Error(ErrorCode::InvalidArgument, "domain must be 'freq' or 'spatial', got '" + s + "'");
}

inline const char* to_string(Domain d) { return d == Domain::Freq ? "freq" : "spatial"; }

inline const char* schema_for(Domain d) { return d == Domain::Freq ? kFreqSchema : kSpatialSchema; }

inline constexpr std::size_t kCanonicalSize = 256;

/// Every image entering the classifier is brought to 256x256.
inline ImageTensor canonicalize(const ImageTensor& img) {
    return resize_bilinear(img, kCanonicalSize, kCanonicalSize);
}

inline FeatureVector featurize(const ImageTensor& img, Domain d) {
    const ImageTensor canon = canonicalize(img);
    return d == Domain::Freq ? extract_freq_features(transform_image(canon))
                             : extract_spatial_features(canon);
}

/// Writes through a sibling temporary file so a failed stage leaves no partial output.
inline void write_atomically(const std::filesystem::path& path,
                             const std::function<void(const std::filesystem::path&)>& writer) {
    std::filesystem::path tmp = path;
    tmp += ".partial";
    try {
        writer(tmp);
        std::filesystem::rename(tmp, path);
    } catch (...) {
        std::error_code ec;
        std::filesystem::remove(tmp, ec);
        throw;
    }
}

inline std::string format_double(double v) {
    std::ostringstream out;
    out << std::setprecision(17) << v;
    return out.str();
}

// ---------------------------------------------------------------- synth

struct SynthOptions {
    std::filesystem::path out_dir;
    std::size_t n_per_class = 500;
    std::size_t size = kCanonicalSize;
    float alpha = 1.0f;
    std::uint64_t seed = 0;
};

inline constexpr const char* kManifestName = "manifest.csv";

/// Writes real/real_NNNNN.ppm and fake/fake_NNNNN.ppm plus a 70:15:15 manifest.
inline DatasetManifest run_synth(const SynthOptions& opt) {
    if (opt.size < 4 || !fft::is_pow2(opt.size))
        throw Error(ErrorCode::InvalidArgument, "--size must be a power of two >= 4");
    if (opt.n_per_class == 0) throw Error(ErrorCode::InvalidArgument, "--n-per-class must be >= 1");
    namespace fs = std::filesystem;
    std::vector<fs::path> written;
    try {
        fs::create_directories(opt.out_dir / "real");
        fs::create_directories(opt.out_dir / "fake");
        std::vector<LabeledItem> items;
        for (int label = 0; label <= 1; ++label) {
            const char* kind = label == 0 ? "real" : "fake";
            for (std::size_t i = 0; i < opt.n_per_class; ++i) {
                const ImageTensor img = label == 0 ? synth_real_one(opt.size, opt.alpha, opt.seed, i)
                                                   : synth_fake_one(opt.size, opt.alpha, opt.seed, i);
                char name[32];
                std::snprintf(name, sizeof name, "%s_%05zu.ppm", kind, i);
                const std::string rel = std::string(kind) + "/" + name;
                written.push_back(opt.out_dir / rel);
                save_image(img, written.back());
                items.push_back({rel, label});
            }
        }
        const DatasetManifest m = split_manifest(items, SplitRatios{}, opt.seed);
        written.push_back(opt.out_dir / kManifestName);
        write_atomically(written.back(), [&](const fs::path& p) { save_manifest(m, p); });
        return m;
    } catch (...) {
        std::error_code ec;
        for (const auto& p : written) fs::remove(p, ec);
        throw;
    }
}

// ---------------------------------------------------------------- split

inline DatasetManifest run_split(const std::filesystem::path& in, const std::filesystem::path& out,
                                 SplitRatios ratios, std::uint64_t seed) {
    const DatasetManifest src = load_manifest(in);
    std::vector<LabeledItem> items;
    for (const auto& e : src.entries) {
        // keep paths valid relative to the new manifest's directory
        const auto abs = std::filesystem::absolute(resolve_entry(in, e.path));
        const auto out_dir = std::filesystem::absolute(out).parent_path();
        items.push_back({abs.lexically_relative(out_dir).generic_string(), e.label});
    }
    DatasetManifest m = split_manifest(items, ratios, seed);
    write_atomically(out, [&](const std::filesystem::path& p) { save_manifest(m, p); });
    return m;
}

// ------------------------------------------------------------ transform

/// Writes one 8-bit PGM per spectrum channel: <stem>_spectrum_c<k>.pgm.
inline std::vector<std::filesystem::path> run_transform(const std::filesystem::path& image,
                                                        const std::filesystem::path& out_dir) {
    const Spectrum s = transform_image(load_image(image));
    std::filesystem::create_directories(out_dir);
    std::vector<std::filesystem::path> out;
    for (std::size_t ch = 0; ch < s.channels; ++ch) {
        const auto path = out_dir / (image.stem().string() + "_spectrum_c" + std::to_string(ch) + ".pgm");
        write_atomically(path, [&](const std::filesystem::path& p) {
            save_image(ImageTensor::from_channel(s.channel(ch)), p);
        });
        out.push_back(path);
    }
    return out;
}

// ------------------------------------------------------------- features

/// Loads and featurizes every manifest entry of one split (all entries when split is null).
inline std::vector<LabeledFeatures> manifest_features(const std::filesystem::path& manifest_path,
                                                      const DatasetManifest& m, Domain d,
                                                      const Split* split = nullptr) {
    std::vector<LabeledFeatures> out;
    for (const auto& e : m.entries) {
        if (split != nullptr && e.split != *split) continue;
        out.push_back({featurize(load_image(resolve_entry(manifest_path, e.path)), d), e.label});
    }
    return out;
}

/// CSV rows: path,schema,v0,v1,...
inline void write_feature_csv(const std::vector<std::string>& paths, const std::vector<FeatureVector>& fvs,
                              const std::filesystem::path& out) {
    write_atomically(out, [&](const std::filesystem::path& p) {
        std::ofstream f(p, std::ios::trunc);
        if (!f) throw Error(ErrorCode::IoError, "cannot open " + p.string());
        f << std::setprecision(9);
        for (std::size_t i = 0; i < fvs.size(); ++i) {
            f << paths[i] << ',' << fvs[i].schema_id;
            for (float v : fvs[i].values) f << ',' << v;
            f << '\n';
        }
        if (!f) throw Error(ErrorCode::IoError, "write failed for " + p.string());
    });
}

// ---------------------------------------------------------------- train

struct TrainOptions {
    std::filesystem::path manifest;
    std::filesystem::path out_dir;
    Domain domain = Domain::Freq;
    AugmentConfig augment;
    std::size_t aug_copies = 1;
    TrainConfig train;
};

inline constexpr std::uint64_t kAugmentStreamSalt = 0x3c6ef372fe94f82bULL;

inline std::filesystem::path model_path(const std::filesystem::path& dir, Domain d) {
    return dir / (std::string("model_") + to_string(d) + ".json");
}

inline std::filesystem::path history_path(const std::filesystem::path& dir, Domain d) {
    return dir / (std::string("history_") + to_string(d) + ".csv");
}

inline void write_history(const TrainHistory& h, const std::filesystem::path& path) {
    write_atomically(path, [&](const std::filesystem::path& p) {
        std::ofstream f(p, std::ios::trunc);
        if (!f) throw Error(ErrorCode::IoError, "cannot open " + p.string());
        f << "epoch,train_loss,val_loss,val_accuracy,lr,best\n";
        for (const auto& r : h.epochs)
            f << r.epoch << ',' << format_double(r.train_loss) << ',' << format_double(r.val_loss) << ','
              << format_double(r.val_accuracy) << ',' << format_double(r.lr) << ','
              << (r.epoch == h.best_epoch ? 1 : 0) << '\n';
        if (!f) throw Error(ErrorCode::IoError, "write failed for " + p.string());
    });
}

/// Augments the train split only; validation images are featurized unperturbed.
inline TrainResult run_train(const TrainOptions& opt) {
    const DatasetManifest m = load_manifest(opt.manifest);
    std::vector<LabeledFeatures> train_set;
    std::size_t k = 0;
    for (const auto& e : m.entries) {
        if (e.split != Split::Train) continue;
        const ImageTensor img = canonicalize(load_image(resolve_entry(opt.manifest, e.path)));
        if (!opt.augment.enabled || opt.aug_copies == 0) {
            train_set.push_back({featurize(img, opt.domain), e.label});
        } else {
            for (std::size_t c = 0; c < opt.aug_copies; ++c) {
                Rng rng(derive_seed(opt.train.seed ^ kAugmentStreamSalt, k * opt.aug_copies + c));
                train_set.push_back({featurize(random_augment(img, opt.augment, rng), opt.domain), e.label});
            }
        }
        ++k;
    }
    const Split val = Split::Val;
    const auto val_set = manifest_features(opt.manifest, m, opt.domain, &val);
    TrainResult result = train(train_set, val_set, opt.train);
    std::filesystem::create_directories(opt.out_dir);
    write_atomically(model_path(opt.out_dir, opt.domain),
                     [&](const std::filesystem::path& p) { save_model(result.model, p); });
    write_history(result.history, history_path(opt.out_dir, opt.domain));
    return result;
}

// ------------------------------------------------------------- evaluate

inline Domain domain_of(const LinearModel& m) {
    if (m.schema_id == kFreqSchema) return Domain::Freq;
    if (m.schema_id == kSpatialSchema) return Domain::Spatial;
    throw Error(ErrorCode::SchemaMismatch, "unknown model schema '" + m.schema_id + "'");
}

/// key = value report; keys in a fixed order.
inline std::string format_report(const EvalReport& r, const LinearModel& m) {
    std::ostringstream out;
    out << "n = " << r.n << '\n'
        << "tp = " << r.tp << '\n'
        << "tn = " << r.tn << '\n'
        << "fp = " << r.fp << '\n'
        << "fn = " << r.fn << '\n'
        << "accuracy = " << format_double(r.accuracy) << '\n'
        << "f1 = " << format_double(r.f1) << '\n'
        << "auc = " << format_double(r.auc) << '\n'
        << "ap = " << format_double(r.ap) << '\n'
        << "mean_loss = " << format_double(r.mean_loss) << '\n'
        << "threshold = " << format_double(r.threshold) << '\n'
        << "domain = " << to_string(domain_of(m)) << '\n'
        << "schema = " << m.schema_id << '\n';
    return out.str();
}

inline std::string format_summary(const EvalReport& r, const LinearModel& m) {
    const ReferenceFigures& ref =
        domain_of(m) == Domain::Freq ? kReferenceFrequency : kReferenceSpatial;
    char buf[512];
    std::snprintf(buf, sizeof buf,
                  "%s model on %zu images: accuracy %.2f%%  F1 %.3f  AUC %.3f  AP %.3f  loss %.4f\n"
                  "confusion @%.2f: tp=%zu tn=%zu fp=%zu fn=%zu\n"
                  "reference deep %s model: accuracy %.2f%%  F1 %.3f  AUC %.2f  AP %.2f\n",
                  to_string(domain_of(m)), r.n, 100.0 * r.accuracy, r.f1, r.auc, r.ap, r.mean_loss,
                  r.threshold, r.tp, r.tn, r.fp, r.fn, to_string(domain_of(m)), 100.0 * ref.accuracy,
                  ref.f1, ref.auc, ref.ap);
    return buf;
}

struct EvaluateOptions {
    std::filesystem::path manifest;
    std::filesystem::path model;
    std::filesystem::path report;
    std::filesystem::path roc_csv; ///< optional
    Split split = Split::Test;
};

inline EvalReport run_evaluate(const EvaluateOptions& opt) {
    const LinearModel model = load_model(opt.model);
    const DatasetManifest m = load_manifest(opt.manifest);
    const auto test = manifest_features(opt.manifest, m, domain_of(model), &opt.split);
    const EvalReport r = evaluate(model, test);
    write_atomically(opt.report, [&](const std::filesystem::path& p) {
        std::ofstream f(p, std::ios::trunc);
        if (!f) throw Error(ErrorCode::IoError, "cannot open " + p.string());
        f << format_report(r, model);
        if (!f) throw Error(ErrorCode::IoError, "write failed for " + p.string());
    });
    if (!opt.roc_csv.empty()) {
        std::vector<double> scores;
        std::vector<int> labels;
        for (const auto& s : test) {
            scores.push_back(predict_proba(model, s.x));
            labels.push_back(s.label);
        }
        const auto pts = roc_curve(scores, labels);
        write_atomically(opt.roc_csv, [&](const std::filesystem::path& p) {
            std::ofstream f(p, std::ios::trunc);
            f << "fpr,tpr\n";
            for (const auto& pt : pts) f << format_double(pt.fpr) << ',' << format_double(pt.tpr) << '\n';
            if (!f) throw Error(ErrorCode::IoError, "write failed for " + p.string());
        });
    }
    return r;
}

inline double run_infer(const std::filesystem::path& model_file, const std::filesystem::path& image) {
    const LinearModel model = load_model(model_file);
    return predict_proba(model, featurize(load_image(image), domain_of(model)));
}

} // namespace specfor
