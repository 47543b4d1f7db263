// Command-line front end: synth, split, transform, features, train, evaluate, infer.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "specfor/specfor.hpp"

namespace {

using specfor::Error;
using specfor::ErrorCode;

// key=value lines; '#' and ';' start comments. Values are handed to CLI11 as
// if they preceded the command-line flags, so flags win.
std::map<std::string, std::string> read_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open config " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        const auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
        };
        line = trim(line);
        if (line.empty() || line[0] == '#' || line[0] == ';' || line[0] == '[') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw Error(ErrorCode::InvalidArgument, "config line without '=': " + line);
        std::string key = trim(line.substr(0, eq));
        std::ranges::replace(key, '_', '-');
        kv[key] = trim(line.substr(eq + 1));
    }
    return kv;
}

const CLI::Validator kPowerOfTwo(
    [](std::string& s) -> std::string {
        try {
            const auto v = std::stoull(s);
            if (v >= 4 && specfor::fft::is_pow2(v)) return {};
        } catch (const std::exception&) {
        }
        return "size must be a power of two >= 4, got " + s;
    },
    "POW2");

struct Seed {
    std::uint64_t value = 0;
    CLI::Option* opt = nullptr;

    void add_to(CLI::App* app) {
        opt = app->add_option("--seed", value, "Random seed (env SPECFOR_SEED is the fallback)");
    }

    // flag > config file > SPECFOR_SEED > 0
    void resolve() {
        if (opt->count() > 0) return;
        if (const char* env = std::getenv("SPECFOR_SEED")) {
            try {
                value = std::stoull(env);
            } catch (const std::exception&) {
                throw Error(ErrorCode::InvalidArgument, std::string("bad SPECFOR_SEED: ") + env);
            }
        }
    }
};

} // namespace

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    std::optional<std::string> config_path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            config_path = args[i + 1];
            args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
            break;
        }
        if (args[i].rfind("--config=", 0) == 0) {
            config_path = args[i].substr(9);
            args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
            break;
        }
    }

    CLI::App app{"GAN-image detection from Fourier spectral fingerprints", "specfor"};
    app.require_subcommand(1);
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    std::string config_help;
    app.add_option("--config", config_help, "key=value file supplying defaults for any subcommand flag");

    // synth
    specfor::SynthOptions synth;
    Seed synth_seed;
    auto* cmd_synth = app.add_subcommand("synth", "Generate a synthetic real/fake corpus and its manifest");
    cmd_synth->add_option("--out", synth.out_dir, "Output directory")->required();
    cmd_synth->add_option("--n-per-class", synth.n_per_class, "Images per class")->capture_default_str();
    cmd_synth->add_option("--size", synth.size, "Image side, power of two")->check(kPowerOfTwo)->capture_default_str();
    cmd_synth->add_option("--alpha", synth.alpha, "Spectral decay exponent")->capture_default_str();
    synth_seed.add_to(cmd_synth);

    // split
    std::string split_in, split_out;
    std::vector<double> ratios{0.70, 0.15, 0.15};
    Seed split_seed;
    auto* cmd_split = app.add_subcommand("split", "Stratified train/val/test split of a manifest");
    cmd_split->add_option("--manifest", split_in, "Input manifest CSV")->required();
    cmd_split->add_option("--out", split_out, "Output manifest CSV")->required();
    cmd_split->add_option("--ratios", ratios, "train,val,test fractions")->delimiter(',')->expected(3)->capture_default_str();
    split_seed.add_to(cmd_split);

    // transform
    std::vector<std::string> transform_images;
    std::string transform_out;
    auto* cmd_transform = app.add_subcommand("transform", "Write normalized log-magnitude spectra as PGM");
    cmd_transform->add_option("images", transform_images, "Input images")->required();
    cmd_transform->add_option("--out-dir", transform_out, "Output directory")->required();

    // features
    std::string feat_manifest, feat_out, feat_domain = "freq";
    std::vector<std::string> feat_images;
    auto* cmd_features = app.add_subcommand("features", "Emit one feature CSV row per image");
    cmd_features->add_option("images", feat_images, "Input images");
    cmd_features->add_option("--manifest", feat_manifest, "Featurize every manifest entry instead");
    cmd_features->add_option("--domain", feat_domain, "freq or spatial")->check(CLI::IsMember({"freq", "spatial"}))->capture_default_str();
    cmd_features->add_option("--out", feat_out, "Output CSV")->required();

    // train
    specfor::TrainOptions train;
    std::string train_domain = "freq";
    bool no_augment = false;
    Seed train_seed;
    auto* cmd_train = app.add_subcommand("train", "Train a classifier on one domain");
    cmd_train->add_option("--manifest", train.manifest, "Split manifest CSV")->required();
    cmd_train->add_option("--domain", train_domain, "freq or spatial")->check(CLI::IsMember({"freq", "spatial"}))->capture_default_str();
    cmd_train->add_option("--out-dir", train.out_dir, "Directory for model and history files")->required();
    cmd_train->add_option("--lr", train.train.lr)->capture_default_str();
    cmd_train->add_option("--batch-size", train.train.batch_size)->capture_default_str();
    cmd_train->add_option("--max-epochs", train.train.max_epochs)->capture_default_str();
    cmd_train->add_option("--early-stop-patience", train.train.early_stop_patience)->capture_default_str();
    cmd_train->add_option("--early-stop-min-delta", train.train.early_stop_min_delta)->capture_default_str();
    cmd_train->add_option("--plateau-patience", train.train.plateau_patience)->capture_default_str();
    cmd_train->add_option("--plateau-factor", train.train.plateau_factor)->capture_default_str();
    cmd_train->add_option("--min-lr", train.train.min_lr)->capture_default_str();
    cmd_train->add_flag("--no-augment", no_augment, "Disable train-split augmentation");
    cmd_train->add_option("--max-rotation", train.augment.max_rotation_deg, "Degrees")->capture_default_str();
    cmd_train->add_option("--max-shift", train.augment.max_shift_frac, "Fraction of width/height")->capture_default_str();
    cmd_train->add_option("--max-zoom", train.augment.max_zoom_frac, "Zoom fraction")->capture_default_str();
    cmd_train->add_option("--hflip-prob", train.augment.hflip_prob)->capture_default_str();
    cmd_train->add_option("--aug-copies", train.aug_copies, "Augmented views per training image")->capture_default_str();
    train_seed.add_to(cmd_train);

    // evaluate
    specfor::EvaluateOptions eval;
    std::string eval_split = "test";
    auto* cmd_eval = app.add_subcommand("evaluate", "Score a split and write the metric report");
    cmd_eval->add_option("--manifest", eval.manifest, "Split manifest CSV")->required();
    cmd_eval->add_option("--model", eval.model, "Model file")->required();
    cmd_eval->add_option("--out", eval.report, "Report file")->required();
    cmd_eval->add_option("--roc", eval.roc_csv, "Optional ROC curve CSV (fpr,tpr)");
    cmd_eval->add_option("--split", eval_split, "Split to evaluate")->check(CLI::IsMember({"train", "val", "test"}))->capture_default_str();

    // infer
    std::string infer_model, infer_image;
    auto* cmd_infer = app.add_subcommand("infer", "Probability that one image is GAN-generated");
    cmd_infer->add_option("--model", infer_model, "Model file")->required();
    cmd_infer->add_option("image", infer_image, "Input image")->required();

    std::string stage = "config";
    try {
        if (config_path) {
            const auto kv = read_config(*config_path);
            auto sub_pos = std::ranges::find_if(args, [&](const std::string& a) {
                return app.get_subcommand_ptr(a) != nullptr;
            });
            if (sub_pos != args.end()) {
                CLI::App* sub = app.get_subcommand(*sub_pos);
                std::vector<std::string> injected;
                for (const auto& [key, value] : kv) {
                    const CLI::Option* opt = sub->get_option_no_throw("--" + key);
                    if (opt == nullptr) continue;
                    if (opt->get_type_size() == 0) {
                        if (value == "true" || value == "1") injected.push_back("--" + key);
                    } else {
                        injected.push_back("--" + key + "=" + value);
                    }
                }
                args.insert(sub_pos + 1, injected.begin(), injected.end());
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "specfor config: " << e.what() << '\n';
        return 1;
    }

    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*cmd_synth) {
            stage = "synth";
            synth_seed.resolve();
            synth.seed = synth_seed.value;
            const auto m = specfor::run_synth(synth);
            std::cout << "wrote " << m.entries.size() << " images and "
                      << (synth.out_dir / specfor::kManifestName).string() << '\n';
        } else if (*cmd_split) {
            stage = "split";
            split_seed.resolve();
            const auto m = specfor::run_split(split_in, split_out, {ratios[0], ratios[1], ratios[2]}, split_seed.value);
            std::cout << "train " << m.subset(specfor::Split::Train).size() << ", val "
                      << m.subset(specfor::Split::Val).size() << ", test "
                      << m.subset(specfor::Split::Test).size() << '\n';
        } else if (*cmd_transform) {
            stage = "transform";
            for (const auto& img : transform_images)
                for (const auto& p : specfor::run_transform(img, transform_out)) std::cout << p.string() << '\n';
        } else if (*cmd_features) {
            stage = "features";
            const auto domain = specfor::parse_domain(feat_domain);
            std::vector<std::string> paths;
            std::vector<specfor::FeatureVector> fvs;
            if (!feat_manifest.empty()) {
                const auto m = specfor::load_manifest(feat_manifest);
                for (const auto& e : m.entries) {
                    paths.push_back(e.path);
                    fvs.push_back(specfor::featurize(
                        specfor::load_image(specfor::resolve_entry(feat_manifest, e.path)), domain));
                }
            }
            for (const auto& img : feat_images) {
                paths.push_back(img);
                fvs.push_back(specfor::featurize(specfor::load_image(img), domain));
            }
            if (paths.empty()) throw Error(ErrorCode::EmptyInput, "no images or manifest given");
            specfor::write_feature_csv(paths, fvs, feat_out);
        } else if (*cmd_train) {
            stage = "train";
            train_seed.resolve();
            train.train.seed = train_seed.value;
            train.domain = specfor::parse_domain(train_domain);
            train.augment.enabled = !no_augment;
            const auto r = specfor::run_train(train);
            const auto& best = r.history.epochs.at(r.history.best_epoch - 1);
            std::cout << "trained " << r.history.epochs.size() << " epochs, best epoch "
                      << r.history.best_epoch << " val_loss " << best.val_loss << " val_accuracy "
                      << best.val_accuracy << "\nwrote "
                      << specfor::model_path(train.out_dir, train.domain).string() << '\n';
        } else if (*cmd_eval) {
            stage = "evaluate";
            eval.split = specfor::parse_split(eval_split);
            const auto r = specfor::run_evaluate(eval);
            std::cout << specfor::format_summary(r, specfor::load_model(eval.model));
        } else if (*cmd_infer) {
            stage = "infer";
            const double p = specfor::run_infer(infer_model, infer_image);
            std::cout << specfor::format_double(p) << ' ' << (p >= 0.5 ? "FAKE" : "REAL") << '\n';
        }
    } catch (const std::exception& e) {
        std::cerr << "specfor " << stage << ": " << e.what() << '\n';
        return 1;
    }
    return 0;
}
