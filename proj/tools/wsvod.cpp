#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "wsvod/errors.hpp"
#include "wsvod/evaluation.hpp"
#include "wsvod/experiment.hpp"
#include "wsvod/io.hpp"
#include "wsvod/options_json.hpp"
#include "wsvod/plot.hpp"
#include "wsvod/synthetic.hpp"
#include "wsvod/training.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace wsvod;

namespace {

// Exit codes: 0 success, 2 usage error, 3 data error, 4 numeric failure.
constexpr int kUsageError = 2;
constexpr int kDataError = 3;
constexpr int kNumericError = 4;

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open config file " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw DataError(path + ": " + e.what());
    }
}

// Hyperparameter flags shared by the training subcommands. Flags override
// the config file, which overrides built-in defaults.
struct TrainFlags {
    std::string config_file;
    CLI::App* sub = nullptr;

    double beta = 0, beta_l = 0, alpha_e = 0, alpha_i = 0;
    double alpha_e_min = 0, alpha_e_max = 0, alpha_inv_min = 0;
    double tau0 = 0, tau1 = 0, tau2 = 0;
    int n_fpv = 0, batch_size = 0, epochs_burn_in = 0, epochs_mutual = 0;
    double lr = 0, alpha_e_burn_in = 0;
    double lambda_coord = 0, lambda_conf = 0, lambda_f_sup = 0, lambda_f_semi = 0,
           lambda_v_weak = 0;
    std::uint64_t seed = 0;

    void attach(CLI::App* s) {
        sub = s;
        s->add_option("--config", config_file, "JSON config file layered over defaults");
        s->add_option("--beta", beta, "pseudo-label confidence threshold");
        s->add_option("--beta-l", beta_l, "lower fallback threshold");
        s->add_option("--alpha-e", alpha_e, "fixed epoch EMA keep rate");
        s->add_option("--alpha-i", alpha_i, "iteration EMA keep rate");
        s->add_option("--alpha-e-min", alpha_e_min, "adaptive keep rate lower bound");
        s->add_option("--alpha-e-max", alpha_e_max, "adaptive keep rate upper bound");
        s->add_option("--alpha-inv-min", alpha_inv_min, "inverse transfer keep rate floor");
        s->add_option("--tau0", tau0, "adaptive keep rate slope");
        s->add_option("--tau1", tau1, "adaptive keep rate offset");
        s->add_option("--tau2", tau2, "inverse transfer slope");
        s->add_option("--n-fpv", n_fpv, "frames sampled per weak video");
        s->add_option("--batch-size", batch_size, "labeled frames per iteration");
        s->add_option("--epochs-burn-in", epochs_burn_in, "burn-in epochs");
        s->add_option("--epochs-mutual", epochs_mutual, "mutual learning epochs");
        s->add_option("--lr", lr, "SGD learning rate");
        s->add_option("--alpha-e-burn-in", alpha_e_burn_in, "burn-in epoch EMA keep rate");
        s->add_option("--lambda-coord", lambda_coord, "box regression weight");
        s->add_option("--lambda-conf", lambda_conf, "objectness weight");
        s->add_option("--lambda-f-sup", lambda_f_sup, "supervised frame loss weight");
        s->add_option("--lambda-f-semi", lambda_f_semi, "pseudo-label frame loss weight");
        s->add_option("--lambda-v-weak", lambda_v_weak, "video-level loss weight");
        s->add_option("--seed", seed, "training seed");
    }

    // Defaults, then the config file, then every flag the user passed.
    TrainOptions resolve() const {
        TrainOptions opt;
        if (!config_file.empty()) load_json_file(config_file).get_to(opt);
        auto set = [&](const char* name, auto& field, auto value) {
            if (sub->count(name)) field = value;
        };
        set("--beta", opt.pseudo.beta, beta);
        set("--beta-l", opt.pseudo.beta_l, beta_l);
        set("--alpha-e", opt.tsmr.alpha_e_fixed, alpha_e);
        set("--alpha-i", opt.tsmr.alpha_i, alpha_i);
        set("--alpha-e-min", opt.tsmr.alpha_e_min, alpha_e_min);
        set("--alpha-e-max", opt.tsmr.alpha_e_max, alpha_e_max);
        set("--alpha-inv-min", opt.tsmr.alpha_inv_min, alpha_inv_min);
        set("--tau0", opt.tsmr.tau0, tau0);
        set("--tau1", opt.tsmr.tau1, tau1);
        set("--tau2", opt.tsmr.tau2, tau2);
        set("--n-fpv", opt.train.frames_per_video, n_fpv);
        set("--batch-size", opt.train.batch_size, batch_size);
        set("--epochs-burn-in", opt.train.epochs_burn_in, epochs_burn_in);
        set("--epochs-mutual", opt.train.epochs_mutual, epochs_mutual);
        set("--lr", opt.train.learning_rate, lr);
        set("--alpha-e-burn-in", opt.train.alpha_e_burn_in, alpha_e_burn_in);
        set("--lambda-coord", opt.weights.lambda_coord, lambda_coord);
        set("--lambda-conf", opt.weights.lambda_conf, lambda_conf);
        set("--lambda-f-sup", opt.weights.lambda_f_sup, lambda_f_sup);
        set("--lambda-f-semi", opt.weights.lambda_f_semi, lambda_f_semi);
        set("--lambda-v-weak", opt.weights.lambda_v_weak, lambda_v_weak);
        set("--seed", opt.train.seed, seed);
        return opt;
    }
};

ParameterVector load_model(const std::string& path) {
    fs::path p = path;
    if (fs::is_directory(p)) {
        const fs::path final_ckpt = p / "checkpoints" / "final.theta";
        if (!fs::exists(final_ckpt))
            throw DataError("no checkpoints/final.theta under " + path);
        p = final_ckpt;
    }
    return load_params(p.string());
}

void print_outcome(const char* tag, double val_map, double test_map) {
    std::printf("%s: val mAP@0.5 %.4f, test mAP@0.5 %.4f\n", tag, val_map, test_map);
}

int cmd_generate(const std::string& out_dir, const std::string& config_file,
                 CLI::App* sub, std::uint64_t seed, bool force) {
    GeneratorConfig cfg;
    if (!config_file.empty()) load_json_file(config_file).get_to(cfg);
    if (sub->count("--seed")) cfg.seed = seed;
    if (fs::exists(fs::path(out_dir) / "manifest.json") && !force)
        throw std::invalid_argument(out_dir + " already holds a dataset (use --force)");
    const DatasetSplit split = generate_splits(cfg);
    const auto problems = validate_split(split);
    if (!problems.empty()) throw DataError("generated split invalid: " + problems.front());
    save_dataset(out_dir, split);
    std::ofstream cfg_out(fs::path(out_dir) / "generator.json");
    cfg_out << json(cfg).dump(2) << "\n";
    std::printf("wrote %zu videos to %s\n",
                split.fully_labeled.size() + split.weakly_labeled.size() +
                    split.validation.size() + split.test.size(),
                out_dir.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"teacher-student detector training on weakly labeled synthetic video"};
    app.require_subcommand(1);

    // generate
    auto* gen = app.add_subcommand("generate", "write the four synthetic splits");
    std::string gen_out, gen_config;
    std::uint64_t gen_seed = 0;
    bool gen_force = false;
    gen->add_option("--out", gen_out, "dataset directory")->required();
    gen->add_option("--config", gen_config, "generator JSON config");
    gen->add_option("--seed", gen_seed, "generator seed");
    gen->add_flag("--force", gen_force, "overwrite an existing dataset");

    // shared training-ish options
    std::string data_dir, out_dir;

    // burn-in
    auto* burn = app.add_subcommand("burn-in", "supervised stage on the labeled split");
    std::string burn_data, burn_out;
    TrainFlags burn_flags;
    burn->add_option("--data", burn_data, "dataset directory")->required();
    burn->add_option("--out", burn_out, "run directory")->required();
    burn_flags.attach(burn);

    // mutual-learn
    auto* mutual = app.add_subcommand("mutual-learn", "teacher-student stage from a burn-in model");
    std::string mut_data, mut_out, mut_init;
    TrainFlags mut_flags;
    bool mut_weak = false, mut_filter = false, mut_soft = false, mut_tsmr = false;
    double mut_fraction = 1.0;
    int mut_offset = 0;
    mutual->add_option("--data", mut_data, "dataset directory")->required();
    mutual->add_option("--out", mut_out, "run directory")->required();
    mutual->add_option("--init", mut_init, "burn-in run directory or .theta file")->required();
    mutual->add_flag("--weak-loss", mut_weak, "video-level BCE on labeled weak videos");
    mutual->add_flag("--weak-filter", mut_filter, "label-guided pseudo-label filtering");
    mutual->add_flag("--soft-weights", mut_soft, "confidence^2 pseudo-label weights");
    mutual->add_flag("--tsmr", mut_tsmr, "adaptive bidirectional EMA");
    mutual->add_option("--fraction", mut_fraction, "share of weak videos with usable labels")
        ->check(CLI::Range(0.0, 1.0));
    mutual->add_option("--epoch-offset", mut_offset, "epoch numbering offset");
    mut_flags.attach(mutual);

    // train
    auto* train = app.add_subcommand("train", "burn-in plus mutual learning for a variant");
    std::string train_variant = "+weak+pseudo+tsmr", train_cache;
    std::vector<std::uint64_t> train_seeds = {1, 2, 3, 4, 5};
    double train_fraction = 1.0;
    TrainFlags train_flags;
    train->add_option("--data", data_dir, "dataset directory")->required();
    train->add_option("--out", out_dir, "output directory for runs")->required();
    train->add_option("--variant", train_variant, "ablation variant name");
    train->add_option("--seeds", train_seeds, "seeds, one run each")->delimiter(',');
    train->add_option("--fraction", train_fraction, "share of weak videos with usable labels")
        ->check(CLI::Range(0.0, 1.0));
    train->add_option("--burnin-cache", train_cache, "directory of shared burn-in results");
    train_flags.attach(train);

    // evaluate
    auto* eval = app.add_subcommand("evaluate", "score a model on a split");
    std::string eval_data, eval_model, eval_split = "test", eval_out;
    eval->add_option("--data", eval_data, "dataset directory")->required();
    eval->add_option("--model", eval_model, "params file or run directory")->required();
    eval->add_option("--split", eval_split, "val or test")
        ->check(CLI::IsMember({"val", "test"}));
    eval->add_option("--out", eval_out, "directory for eval.json and pr_curve.csv");

    // ablate
    auto* ablate = app.add_subcommand("ablate", "threshold, keep-rate, and fraction grids");
    std::string abl_data, abl_out, abl_cache;
    std::vector<std::uint64_t> abl_seeds = {1, 2, 3};
    TrainFlags abl_flags;
    ablate->add_option("--data", abl_data, "dataset directory")->required();
    ablate->add_option("--out", abl_out, "report directory")->required();
    ablate->add_option("--seeds", abl_seeds, "seeds, one run each")->delimiter(',');
    ablate->add_option("--burnin-cache", abl_cache, "directory of shared burn-in results");
    abl_flags.attach(ablate);

    // plot
    auto* plot = app.add_subcommand("plot", "SVG curves from run directories");
    std::vector<std::string> plot_runs;
    std::string plot_out = ".", plot_ablations;
    plot->add_option("runs", plot_runs, "run directories holding curves.csv");
    plot->add_option("--out", plot_out, "output directory");
    plot->add_option("--ablations", plot_ablations, "ablations.csv for the fraction plot");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsageError;
    }

    try {
        if (gen->parsed())
            return cmd_generate(gen_out, gen_config, gen, gen_seed, gen_force);

        if (burn->parsed()) {
            const TrainOptions opt = burn_flags.resolve();
            const DatasetSplit data = load_dataset(burn_data);
            const BurnInOutcome out = run_burn_in(opt, data, burn_out);
            write_curves_csv((fs::path(burn_out) / "curves.csv").string(), out.log);
            const ParameterVector& deployed =
                opt.use_hierarchical_ema ? out.state.theta_epoch : out.state.theta;
            save_params((fs::path(burn_out) / "checkpoints" / "final.theta").string(),
                        deployed);
            print_outcome("burn-in", evaluate_model(opt.det, deployed, data.validation).map50,
                          evaluate_model(opt.det, deployed, data.test).map50);
            return 0;
        }

        if (mutual->parsed()) {
            TrainOptions opt = mut_flags.resolve();
            opt.use_unlabeled = true;
            opt.use_weak_loss = mut_weak;
            opt.pseudo.use_weak_filtering = mut_filter;
            opt.pseudo.use_soft_weights = mut_soft;
            opt.use_tsmr = mut_tsmr;
            opt.tsmr.adaptive = mut_tsmr;
            opt.label_fraction = mut_fraction;
            const DatasetSplit data = load_dataset(mut_data);
            const ParameterVector init = load_model(mut_init);
            const MutualOutcome out =
                run_mutual_learning(opt, data, init, mut_out, mut_offset);
            write_curves_csv((fs::path(mut_out) / "curves.csv").string(), out.log);
            write_schedule_csv((fs::path(mut_out) / "schedule.csv").string(), out.schedule);
            save_params((fs::path(mut_out) / "checkpoints" / "final.theta").string(),
                        out.state.theta_epoch);
            print_outcome("mutual-learn",
                          evaluate_model(opt.det, out.state.theta_epoch, data.validation).map50,
                          evaluate_model(opt.det, out.state.theta_epoch, data.test).map50);
            return 0;
        }

        if (train->parsed()) {
            const TrainOptions base = train_flags.resolve();
            variant_flags(train_variant);  // unknown names are usage errors
            const DatasetSplit data = load_dataset(data_dir);
            ExperimentPlan plan;
            plan.variant = train_variant;
            plan.seeds = train_seeds;
            plan.fraction = train_fraction;
            TrainOptions cache_base = base;
            apply_variant(cache_base, plan.variant);
            BurnInCache cache(cache_base, &data, train_cache);
            const TrainSummary summary = run_plan(plan, base, data, out_dir, &cache);
            std::printf("%s over %zu seeds:\n", train_variant.c_str(), plan.seeds.size());
            print_outcome("  mean", summary.val_map.mean, summary.test_map.mean);
            std::printf("  std : val %.4f, test %.4f\n", summary.val_map.stddev,
                        summary.test_map.stddev);
            return 0;
        }

        if (eval->parsed()) {
            const DatasetSplit data = load_dataset(eval_data);
            const ParameterVector params = load_model(eval_model);
            DetectorConfig det;
            if (params.size() != static_cast<std::size_t>(param_count(det)))
                throw DataError("model has " + std::to_string(params.size()) +
                                " parameters, detector expects " +
                                std::to_string(param_count(det)));
            const auto& videos = eval_split == "val" ? data.validation : data.test;
            const EvalResult r = evaluate_model(det, params, videos);
            std::printf("%s mAP@0.5 %.6f (%zu detections, %zu TP, %zu GT)\n",
                        eval_split.c_str(), r.map50, r.n_det, r.n_tp, r.n_gt);
            if (!eval_out.empty()) {
                fs::create_directories(eval_out);
                write_eval_json((fs::path(eval_out) / "eval.json").string(), r);
                write_pr_curve_csv((fs::path(eval_out) / "pr_curve.csv").string(), r);
            }
            return 0;
        }

        if (ablate->parsed()) {
            const TrainOptions base = abl_flags.resolve();
            const DatasetSplit data = load_dataset(abl_data);
            TrainOptions cache_base = base;
            apply_variant(cache_base, "+weak");
            BurnInCache cache(cache_base, &data, abl_cache);
            const auto rows = run_ablations(base, data, abl_seeds, abl_out, &cache);
            std::printf("wrote %zu ablation rows to %s\n", rows.size(), abl_out.c_str());
            return 0;
        }

        if (plot->parsed()) {
            fs::create_directories(plot_out);
            bool wrote = false;
            if (!plot_runs.empty()) {
                std::vector<std::vector<EpochLog>> runs;
                for (const auto& dir : plot_runs)
                    runs.push_back(read_curves_csv((fs::path(dir) / "curves.csv").string()));
                std::vector<std::string> warnings;
                const std::string svg = (fs::path(plot_out) / "learning_curves.svg").string();
                plot_learning_curves(runs, svg, &warnings);
                for (const auto& w : warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
                std::printf("wrote %s\n", svg.c_str());
                wrote = true;
            }
            if (!plot_ablations.empty()) {
                std::ifstream in(plot_ablations);
                if (!in) throw DataError("cannot open " + plot_ablations);
                std::string line;
                std::getline(in, line);  // header
                std::vector<FractionPoint> points;
                while (std::getline(in, line)) {
                    std::stringstream ss(line);
                    std::string group, setting, v0, v1, t0, t1, n;
                    std::getline(ss, group, ',');
                    std::getline(ss, setting, ',');
                    std::getline(ss, v0, ',');
                    std::getline(ss, v1, ',');
                    std::getline(ss, t0, ',');
                    std::getline(ss, t1, ',');
                    std::getline(ss, n, ',');
                    if (group != "fraction") continue;
                    FractionPoint p;
                    p.fraction = std::stod(setting);
                    p.test_map.mean = std::stod(t0);
                    p.test_map.stddev = std::stod(t1);
                    p.test_map.n = std::stoi(n);
                    points.push_back(p);
                }
                const std::string svg = (fs::path(plot_out) / "fraction_map.svg").string();
                plot_fraction_sweep(points, svg);
                std::printf("wrote %s\n", svg.c_str());
                wrote = true;
            }
            if (!wrote)
                throw std::invalid_argument("plot: need run directories or --ablations");
            return 0;
        }
    } catch (const NumericError& e) {
        std::fprintf(stderr, "numeric failure: %s\n", e.what());
        return kNumericError;
    } catch (const DataError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return kDataError;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return kUsageError;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
