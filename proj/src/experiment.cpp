#include "wsvod/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "wsvod/errors.hpp"
#include "wsvod/io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace wsvod {

const std::vector<std::string> kVariantNames = {
    "full",  "full+he",      "+unlabeled",
    "+weak", "+weak+pseudo", "+weak+tsmr",
    "+weak+pseudo+tsmr"};

VariantFlags variant_flags(const std::string& name) {
    VariantFlags f;
    if (name == "full") return f;
    f.hierarchical_ema = true;
    if (name == "full+he") return f;
    f.unlabeled = true;
    if (name == "+unlabeled") return f;
    f.weak_loss = true;
    if (name == "+weak") return f;
    if (name == "+weak+pseudo") {
        f.weak_filtering = f.soft_weights = true;
        return f;
    }
    if (name == "+weak+tsmr") {
        f.tsmr = true;
        return f;
    }
    if (name == "+weak+pseudo+tsmr") {
        f.weak_filtering = f.soft_weights = f.tsmr = true;
        return f;
    }
    throw std::invalid_argument("unknown variant: " + name);
}

void apply_variant(TrainOptions& opt, const std::string& name) {
    const VariantFlags f = variant_flags(name);
    opt.use_hierarchical_ema = f.hierarchical_ema;
    opt.use_unlabeled = f.unlabeled;
    opt.use_weak_loss = f.weak_loss;
    opt.use_tsmr = f.tsmr;
    opt.pseudo.use_weak_filtering = f.weak_filtering;
    opt.pseudo.use_soft_weights = f.soft_weights;
    opt.tsmr.adaptive = f.tsmr;
    if (f.soft_weights && opt.pseudo.beta == 0.5 && opt.pseudo.beta_l == 0.1) {
        // Weighted pseudo-labels run with both thresholds lowered to 0.1.
        opt.pseudo.beta = 0.1;
        opt.pseudo.beta_l = 0.1;
    }
}

SummaryStat summarize(const std::vector<double>& xs) {
    SummaryStat s;
    s.n = static_cast<int>(xs.size());
    if (xs.empty()) return s;
    s.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - s.mean) * (x - s.mean);
        s.stddev = std::sqrt(ss / (xs.size() - 1));
    }
    return s;
}

double paired_permutation_p(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.empty())
        throw std::invalid_argument("paired_permutation_p: need equal nonempty samples");
    if (a.size() > 20)
        throw std::invalid_argument("paired_permutation_p: too many pairs for exact test");
    const std::size_t n = a.size();
    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = a[i] - b[i];
    const double observed = std::accumulate(d.begin(), d.end(), 0.0);
    const std::uint64_t total = std::uint64_t{1} << n;
    std::uint64_t at_least = 0;
    for (std::uint64_t mask = 0; mask < total; ++mask) {
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            sum += (mask >> i) & 1 ? -d[i] : d[i];
        if (sum >= observed - 1e-15) ++at_least;
    }
    return static_cast<double>(at_least) / static_cast<double>(total);
}

namespace {

std::vector<double> average_ranks(const std::vector<double>& x) {
    const std::size_t n = x.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && x[order[j + 1]] == x[order[i]]) ++j;
        const double r = 0.5 * (i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
        i = j + 1;
    }
    return ranks;
}

}  // namespace

double spearman_rho(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("spearman_rho: need two samples of equal size >= 2");
    const auto rx = average_ranks(x), ry = average_ranks(y);
    const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / rx.size();
    const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / ry.size();
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0)
        throw std::invalid_argument("spearman_rho: constant input has no rank correlation");
    return sxy / std::sqrt(sxx * syy);
}

namespace {

json log_to_json(const std::vector<EpochLog>& log) {
    json arr = json::array();
    for (const auto& e : log) {
        arr.push_back({{"phase", e.phase},
                       {"epoch", e.epoch},
                       {"loss_sup", e.loss_sup},
                       {"loss_semi", e.loss_semi},
                       {"loss_weak", e.loss_weak},
                       {"loss_total", e.loss_total},
                       {"map_theta", e.map_theta},
                       {"map_iter", e.map_iter},
                       {"map_epoch", e.map_epoch},
                       {"alpha_e", e.alpha_e},
                       {"alpha_inv", e.alpha_inv}});
    }
    return arr;
}

std::vector<EpochLog> log_from_json(const json& arr) {
    std::vector<EpochLog> log;
    for (const auto& j : arr) {
        EpochLog e;
        e.phase = j.at("phase").get<std::string>();
        e.epoch = j.at("epoch").get<int>();
        e.loss_sup = j.at("loss_sup").get<double>();
        e.loss_semi = j.at("loss_semi").get<double>();
        e.loss_weak = j.at("loss_weak").get<double>();
        e.loss_total = j.at("loss_total").get<double>();
        e.map_theta = j.at("map_theta").get<double>();
        e.map_iter = j.at("map_iter").get<double>();
        e.map_epoch = j.at("map_epoch").get<double>();
        e.alpha_e = j.at("alpha_e").get<double>();
        e.alpha_inv = j.at("alpha_inv").get<double>();
        log.push_back(std::move(e));
    }
    return log;
}

}  // namespace

BurnInCache::BurnInCache(TrainOptions base, const DatasetSplit* data, std::string dir)
    : base_(std::move(base)), data_(data), dir_(std::move(dir)) {}

const BurnInOutcome& BurnInCache::get(std::uint64_t seed) {
    for (const auto& [s, outcome] : cache_)
        if (s == seed) return outcome;

    TrainOptions opt = base_;
    opt.train.seed = seed;

    BurnInOutcome outcome;
    bool loaded = false;
    if (!dir_.empty()) {
        const fs::path d = fs::path(dir_) / ("burnin_seed" + std::to_string(seed));
        if (fs::exists(d / "log.json")) {
            try {
                outcome.state.theta = load_params((d / "theta.ckpt").string());
                outcome.state.theta_iter = load_params((d / "theta_iter.ckpt").string());
                outcome.state.theta_epoch = load_params((d / "theta_epoch.ckpt").string());
                outcome.log = log_from_json(json::parse(std::ifstream(d / "log.json")));
                loaded = true;
            } catch (const std::exception&) {
                loaded = false;  // stale or partial cache entry, recompute
            }
        }
    }
    if (!loaded) {
        outcome = run_burn_in(opt, *data_);
        if (!dir_.empty()) {
            const fs::path d = fs::path(dir_) / ("burnin_seed" + std::to_string(seed));
            fs::create_directories(d);
            save_params((d / "theta.ckpt").string(), outcome.state.theta);
            save_params((d / "theta_iter.ckpt").string(), outcome.state.theta_iter);
            save_params((d / "theta_epoch.ckpt").string(), outcome.state.theta_epoch);
            std::ofstream out(d / "log.json");
            out << log_to_json(outcome.log).dump() << "\n";
        }
    }
    cache_.emplace_back(seed, std::move(outcome));
    return cache_.back().second;
}

TrainSummary run_plan(const ExperimentPlan& plan, const TrainOptions& base,
                      const DatasetSplit& data, const std::string& out_dir,
                      BurnInCache* cache) {
    TrainSummary summary;
    std::vector<double> vals, tests;
    for (const std::uint64_t seed : plan.seeds) {
        TrainOptions opt = base;
        apply_variant(opt, plan.variant);
        opt.label_fraction = plan.fraction;
        opt.train.seed = seed;

        std::string run_dir;
        if (!out_dir.empty()) {
            std::string tag = plan.variant;
            std::replace(tag.begin(), tag.end(), '+', '_');
            char name[128];
            std::snprintf(name, sizeof(name), "%s_f%03d_seed%llu",
                          tag.empty() ? "run" : tag.c_str(),
                          static_cast<int>(std::lround(plan.fraction * 100)),
                          static_cast<unsigned long long>(seed));
            run_dir = (fs::path(out_dir) / name).string();
        }

        TrainOutcome outcome;
        if (cache) {
            outcome = run_training(opt, data, run_dir, &cache->get(seed));
        } else {
            outcome = run_training(opt, data, run_dir);
        }

        RunRecord rec;
        rec.variant = plan.variant;
        rec.seed = seed;
        rec.fraction = plan.fraction;
        rec.val_map = outcome.val_map;
        rec.test_map = outcome.test_map;
        rec.run_dir = run_dir;
        summary.runs.push_back(rec);
        vals.push_back(outcome.val_map);
        tests.push_back(outcome.test_map);
    }
    summary.val_map = summarize(vals);
    summary.test_map = summarize(tests);
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        write_summary_json((fs::path(out_dir) / "summary.json").string(), plan, summary);
    }
    return summary;
}

std::vector<AblateRow> run_ablations(const TrainOptions& base, const DatasetSplit& data,
                                     const std::vector<std::uint64_t>& seeds,
                                     const std::string& out_dir, BurnInCache* cache) {
    std::vector<AblateRow> rows;
    auto run_group = [&](const std::string& group, const std::string& setting,
                         const std::string& variant, double fraction,
                         const TrainOptions& opt) {
        ExperimentPlan plan;
        plan.variant = variant;
        plan.seeds = seeds;
        plan.fraction = fraction;
        std::string sub;
        if (!out_dir.empty())
            sub = (fs::path(out_dir) / (group + "_" + setting)).string();
        const TrainSummary s = run_plan(plan, opt, data, sub, cache);
        AblateRow row;
        row.group = group;
        row.setting = setting;
        row.val_map = s.val_map;
        row.test_map = s.test_map;
        row.runs = s.runs;
        rows.push_back(std::move(row));
    };

    for (const double beta : {0.1, 0.3, 0.5, 0.7}) {
        TrainOptions opt = base;
        opt.pseudo.beta = beta;
        char setting[16];
        std::snprintf(setting, sizeof(setting), "%.1f", beta);
        run_group("beta", setting, "+weak", 1.0, opt);
    }
    for (const double alpha_e : {0.9, 0.95, 0.99}) {
        TrainOptions opt = base;
        opt.tsmr.alpha_e_fixed = alpha_e;
        char setting[16];
        std::snprintf(setting, sizeof(setting), "%.2f", alpha_e);
        run_group("alpha_e", setting, "+weak+pseudo", 1.0, opt);
    }
    run_group("alpha_e", "adaptive", "+weak+pseudo+tsmr", 1.0, base);
    for (const double f : {0.0, 0.25, 0.5, 0.75, 1.0}) {
        char setting[16];
        std::snprintf(setting, sizeof(setting), "%.2f", f);
        run_group("fraction", setting, "+weak", f, base);
    }

    if (!out_dir.empty()) {
        write_ablation_csv((fs::path(out_dir) / "ablations.csv").string(), rows);
        write_ablation_markdown((fs::path(out_dir) / "ablations.md").string(), rows);
    }
    return rows;
}

void write_summary_json(const std::string& path, const ExperimentPlan& plan,
                        const TrainSummary& summary) {
    json j;
    j["variant"] = plan.variant;
    j["fraction"] = plan.fraction;
    j["seeds"] = plan.seeds;
    j["runs"] = json::array();
    for (const auto& r : summary.runs) {
        j["runs"].push_back({{"seed", r.seed},
                             {"val_map", r.val_map},
                             {"test_map", r.test_map},
                             {"run_dir", r.run_dir}});
    }
    j["val_map"] = {{"mean", summary.val_map.mean}, {"std", summary.val_map.stddev}};
    j["test_map"] = {{"mean", summary.test_map.mean}, {"std", summary.test_map.stddev}};
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    out << j.dump(2) << "\n";
}

void write_ablation_csv(const std::string& path, const std::vector<AblateRow>& rows) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    out << "group,setting,val_map_mean,val_map_std,test_map_mean,test_map_std,n\n";
    char line[256];
    for (const auto& r : rows) {
        std::snprintf(line, sizeof(line), "%s,%s,%.9g,%.9g,%.9g,%.9g,%d\n",
                      r.group.c_str(), r.setting.c_str(), r.val_map.mean, r.val_map.stddev,
                      r.test_map.mean, r.test_map.stddev, r.test_map.n);
        out << line;
    }
}

void write_ablation_markdown(const std::string& path, const std::vector<AblateRow>& rows) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    out << "| group | setting | val mAP | test mAP |\n";
    out << "|---|---|---|---|\n";
    char line[256];
    for (const auto& r : rows) {
        std::snprintf(line, sizeof(line), "| %s | %s | %.3f ± %.3f | %.3f ± %.3f |\n",
                      r.group.c_str(), r.setting.c_str(), r.val_map.mean, r.val_map.stddev,
                      r.test_map.mean, r.test_map.stddev);
        out << line;
    }
}

}  // namespace wsvod
