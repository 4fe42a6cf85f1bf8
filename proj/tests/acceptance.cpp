// Acceptance gate: nine numbered checks, one verdict line each. Heavy
// checks cache finished training runs under the work directory (env
// WSVOD_ACCEPT_DIR, default ./accept_work) so a re-run only recomputes
// what is missing. The cached artifacts are invalidated as a group when
// the default generator config changes.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "wsvod/config_json.hpp"
#include "wsvod/detector.hpp"
#include "wsvod/ema.hpp"
#include "wsvod/errors.hpp"
#include "wsvod/evaluation.hpp"
#include "wsvod/experiment.hpp"
#include "wsvod/io.hpp"
#include "wsvod/losses.hpp"
#include "wsvod/pseudo_labels.hpp"
#include "wsvod/rng.hpp"
#include "wsvod/synthetic.hpp"
#include "wsvod/training.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace wsvod;

namespace {

constexpr double kTolSchedule = 1e-9;
constexpr double kTolLoss = 1e-9;
constexpr double kTolAp = 1e-9;
constexpr double kTolGrad = 1e-4;

std::string g_work;

double now_s() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

bool check(bool ok, const char* what, std::string& detail) {
    if (!ok && detail.empty()) detail = what;
    return ok;
}

// ---------------------------------------------------------------- dataset

// The default dataset, generated once and then reloaded from disk so every
// consumer sees the same quantized pixels the CLI path produces. A changed
// default generator config wipes every cached run with the stale data.
const DatasetSplit& shared_dataset() {
    static DatasetSplit data;
    static bool ready = false;
    if (ready) return data;

    const fs::path data_dir = fs::path(g_work) / "data";
    const GeneratorConfig cfg;
    const std::string want = json(cfg).dump(2) + "\n";
    std::string have;
    {
        std::ifstream in(data_dir / "generator.json");
        std::stringstream ss;
        ss << in.rdbuf();
        have = ss.str();
    }
    if (have != want) {
        std::error_code ec;
        for (const char* sub : {"data", "determinism", "ladder", "sweep", "burnin"})
            fs::remove_all(fs::path(g_work) / sub, ec);
        save_dataset(data_dir.string(), generate_splits(cfg));
        std::ofstream out(data_dir / "generator.json");
        out << want;
    }
    data = load_dataset(data_dir.string());
    ready = true;
    return data;
}

BurnInCache& shared_burnin_cache() {
    static TrainOptions base = [] {
        TrainOptions o;
        apply_variant(o, "+weak+pseudo+tsmr");
        return o;
    }();
    static BurnInCache cache(base, &shared_dataset(),
                             (fs::path(g_work) / "burnin").string());
    return cache;
}

// Per-seed test mAPs for one training plan, reloaded from a finished
// summary.json when present.
std::vector<double> plan_test_maps(const std::string& variant, double fraction,
                                   const fs::path& dir, bool* fresh = nullptr) {
    const std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
    std::vector<std::pair<std::uint64_t, double>> by_seed;
    if (fs::exists(dir / "summary.json")) {
        try {
            std::ifstream in(dir / "summary.json");
            const json j = json::parse(in);
            if (j.at("variant").get<std::string>() == variant &&
                std::abs(j.at("fraction").get<double>() - fraction) < 1e-12)
                for (const auto& r : j.at("runs"))
                    by_seed.emplace_back(r.at("seed").get<std::uint64_t>(),
                                         r.at("test_map").get<double>());
        } catch (const std::exception&) {
            by_seed.clear();
        }
        if (by_seed.size() != seeds.size()) by_seed.clear();
    }
    if (by_seed.empty()) {
        ExperimentPlan plan;
        plan.variant = variant;
        plan.seeds = seeds;
        plan.fraction = fraction;
        const TrainSummary s = run_plan(plan, TrainOptions{}, shared_dataset(),
                                        dir.string(), &shared_burnin_cache());
        for (const auto& r : s.runs) by_seed.emplace_back(r.seed, r.test_map);
        if (fresh) *fresh = true;
    }
    std::sort(by_seed.begin(), by_seed.end());
    std::vector<double> out;
    for (const auto& [seed, test] : by_seed) out.push_back(test);
    return out;
}

// --------------------------------------------------------------- helpers

double rel_l2(const ParameterVector& a, const ParameterVector& b) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += (a[i] - b[i]) * (a[i] - b[i]);
        den += a[i] * a[i] + b[i] * b[i];
    }
    return std::sqrt(num) / std::max(std::sqrt(den), 1e-300);
}

bool file_bytes_equal(const fs::path& a, const fs::path& b) {
    std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
    if (!fa || !fb) return false;
    std::stringstream sa, sb;
    sa << fa.rdbuf();
    sb << fb.rdbuf();
    return sa.str() == sb.str();
}

DetectorConfig small_detector() {
    DetectorConfig cfg;
    cfg.image_size = 16;
    cfg.conv1_channels = 3;
    cfg.conv2_channels = 4;
    return cfg;
}

Frame blob_frame(int size, Rng& rng) {
    Frame f(size, size);
    const double cx = rng.uniform(3.0, size - 3.0), cy = rng.uniform(3.0, size - 3.0);
    const double sx = rng.uniform(1.5, 3.0), sy = rng.uniform(1.5, 3.0);
    const double peak = rng.uniform(0.6, 0.9);
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x) {
            const double dx = (x - cx) / sx, dy = (y - cy) / sy;
            const double v =
                0.1 + peak * std::exp(-0.5 * (dx * dx + dy * dy)) + rng.uniform(-0.02, 0.02);
            f.at(y, x) = std::clamp(v, 0.0, 1.0);
        }
    return f;
}

BoundingBox random_box(Rng& rng) {
    BoundingBox b;
    b.cx = rng.uniform(0.2, 0.8);
    b.cy = rng.uniform(0.2, 0.8);
    b.w = rng.uniform(0.12, 0.4);
    b.h = rng.uniform(0.12, 0.4);
    return b;
}

// ------------------------------------------------------------ criterion 1

struct ScheduleRowOracle {
    double m_t, m_s, alpha_e, alpha_inv;
};

// Frozen against an independent reimplementation of the closed forms.
constexpr ScheduleRowOracle kScheduleOracle[] = {
    {0, 0, 0.97861779043738406, 1},
    {1, 1, 0.97861779043738406, 1},
    {0.5, 0.5, 0.97861779043738406, 1},
    {0.52000000000000002, 0.5, 0.98967395521189705, 0.85797909807305972},
    {0.5, 0.52000000000000002, 0.83504248650580892, 1},
    {0.59999999999999998, 0.5, 0.98999999981801856, 0.85000000456899383},
    {0.5, 0.59999999999999998, 0.75000007341653441, 1},
    {1, 0, 0.98999999999999999, 0.84999999999999998},
    {0, 1, 0.75, 1},
    {0.505, 0.5, 0.98523832662382138, 0.93671514921249877},
    {0.5, 0.505, 0.96381676291305285, 1},
    {0.51000000000000001, 0.51000000000000001, 0.97861779043738406, 1},
    {0.69999999999999996, 0.68999999999999995, 0.98804098292324161, 0.89255531947014621},
    {0.68999999999999995, 0.69999999999999996, 0.93444594803976422, 1},
    {0.90000000000000002, 0.84999999999999998, 0.98999852539809541, 0.85003701837279588},
    {0.84999999999999998, 0.90000000000000002, 0.75059342955759234, 1},
    {0.29999999999999999, 0.25, 0.98999852539809541, 0.85003701837279588},
    {0.25, 0.29999999999999999, 0.75059342955759234, 1},
    {0.62, 0.60999999999999999, 0.98804098292324161, 0.89255531947014621},
    {0.33000000000000002, 0.40999999999999998, 0.75000268688628124, 1},
};

bool criterion1(std::string& detail) {
    const TSMRConfig cfg;
    bool ok = true;
    for (const auto& row : kScheduleOracle) {
        ok &= check(std::abs(adaptive_alpha_e(row.m_t, row.m_s, cfg) - row.alpha_e) <=
                        kTolSchedule,
                    "adaptive_alpha_e oracle mismatch", detail);
        ok &= check(std::abs(inverse_alpha(row.m_t, row.m_s, cfg) - row.alpha_inv) <=
                        kTolSchedule,
                    "inverse_alpha oracle mismatch", detail);
    }

    const int n = 1000;
    const double lips_e = (cfg.alpha_e_max - cfg.alpha_e_min) * cfg.tau0 / 4.0;
    double prev = 0.0;
    for (int i = 0; i < n; ++i) {
        const double gap = -0.5 + static_cast<double>(i) / (n - 1);  // m_t - m_s
        const double a = adaptive_alpha_e(0.5 + gap, 0.5, cfg);
        ok &= check(a >= cfg.alpha_e_min && a <= cfg.alpha_e_max,
                    "adaptive_alpha_e out of bounds", detail);
        if (i > 0) {
            ok &= check(a >= prev, "adaptive_alpha_e not monotone", detail);
            ok &= check(a - prev <= lips_e / (n - 1) + 1e-12,
                        "adaptive_alpha_e continuity bound violated", detail);
        }
        prev = a;
    }

    const double lips_inv = (2.0 - 2.0 * cfg.alpha_inv_min) * cfg.tau2 / 4.0;
    prev = 0.0;
    for (int i = 0; i < n; ++i) {
        const double gap = 0.5 * static_cast<double>(i) / (n - 1);  // m_t - m_s >= 0
        const double a = inverse_alpha(0.5 + gap, 0.5, cfg);
        ok &= check(a >= cfg.alpha_inv_min && a <= 1.0, "inverse_alpha out of bounds",
                    detail);
        if (i > 0) {
            ok &= check(a <= prev, "inverse_alpha not monotone", detail);
            ok &= check(prev - a <= lips_inv * 0.5 / (n - 1) + 1e-12,
                        "inverse_alpha continuity bound violated", detail);
        }
        prev = a;
    }
    ok &= check(inverse_alpha(0.5, 0.5, cfg) == 1.0, "inverse_alpha at zero gap", detail);
    ok &= check(std::abs(inverse_alpha(0.5 + 1e-12, 0.5, cfg) - 1.0) <= kTolSchedule,
                "inverse_alpha crossover discontinuity", detail);
    return ok;
}

// ------------------------------------------------------------ criterion 2

bool criterion2(std::string& detail) {
    bool ok = true;
    ok &= check(std::abs(binary_cross_entropy(0.5, 1.0) - std::log(2.0)) <= kTolLoss,
                "BCE(0.5, 1) != ln 2", detail);
    ok &= check(std::abs(binary_cross_entropy(0.25, 1.0) + std::log(0.25)) <= kTolLoss,
                "BCE(0.25, 1) != -ln 0.25", detail);

    const LossWeights w;
    ok &= check(std::abs(loss_combined(2.0, 3.0, 10.0, w) - 5.5) <= kTolLoss,
                "combined loss arithmetic", detail);

    const VideoPseudoLabels soft =
        apply_soft_weights({{PseudoLabel{{0.5, 0.5, 0.2, 0.2}, 0.5, 1.0}}});
    ok &= check(std::abs(soft[0][0].weight - 0.25) <= kTolLoss,
                "soft weight at c=0.5 is not 0.25", detail);

    std::vector<std::vector<Detection>> per_frame(3);
    per_frame[0] = {{{0.2, 0.2, 0.1, 0.1}, 0.9}, {{0.6, 0.6, 0.1, 0.1}, 0.2}};
    per_frame[1] = {{{0.4, 0.4, 0.1, 0.1}, 0.4}};
    ok &= check(std::abs(aggregate_video_confidence(per_frame) - 13.0 / 30.0) <= kTolLoss,
                "aggregation example != 13/30", detail);
    return ok;
}

// ------------------------------------------------------------ criterion 3

FramePseudoLabels pl_frame(std::initializer_list<double> confs) {
    FramePseudoLabels out;
    double cx = 0.2;
    for (double c : confs) {
        out.push_back({{cx, 0.5, 0.1, 0.1}, c, 1.0});
        cx += 0.2;
    }
    return out;
}

std::vector<std::vector<double>> confs_of(const VideoPseudoLabels& v) {
    std::vector<std::vector<double>> out;
    for (const auto& f : v) {
        out.emplace_back();
        for (const auto& pl : f) out.back().push_back(pl.confidence);
    }
    return out;
}

bool criterion3(std::string& detail) {
    PseudoLabelConfig std_plc;  // beta 0.5, beta_l 0.1
    PseudoLabelConfig low_plc;
    low_plc.beta = 0.3;
    low_plc.beta_l = 0.2;
    using Table = std::vector<std::vector<double>>;

    struct Case {
        VideoPseudoLabels in;
        int z;
        const PseudoLabelConfig* plc;
        Table want;
    };
    const std::vector<Case> cases = {
        {{pl_frame({})}, 0, &std_plc, {{}}},
        {{pl_frame({0.9})}, 0, &std_plc, {{}}},
        {{pl_frame({0.6, 0.3}), pl_frame({0.95})}, 0, &std_plc, {{}, {}}},
        {{pl_frame({0.4})}, 0, &low_plc, {{}}},
        {{pl_frame({})}, 1, &std_plc, {{}}},
        {{pl_frame({0.9, 0.6})}, 1, &std_plc, {{0.9, 0.6}}},
        {{pl_frame({0.9, 0.3})}, 1, &std_plc, {{0.9}}},
        {{pl_frame({0.4, 0.3})}, 1, &std_plc, {{0.4}}},
        {{pl_frame({0.08, 0.05})}, 1, &std_plc, {{}}},
        {{pl_frame({0.5})}, 1, &std_plc, {{0.5}}},
        {{pl_frame({0.1})}, 1, &std_plc, {{}}},
        {{pl_frame({0.4, 0.35, 0.25}), pl_frame({0.22}), pl_frame({0.1})},
         1,
         &low_plc,
         {{0.4, 0.35}, {0.22}, {}}},
    };

    bool ok = true;
    for (std::size_t i = 0; i < cases.size(); ++i) {
        const auto& c = cases[i];
        if (confs_of(weak_filter(c.in, c.z, *c.plc)) != c.want) {
            ok = false;
            if (detail.empty()) detail = "truth table case " + std::to_string(i + 1);
        }
    }
    return ok;
}

// ------------------------------------------------------------ criterion 4

bool criterion4(std::string& detail) {
    const DetectorConfig cfg = small_detector();
    const LossWeights weights;
    const int kInstances = 20;
    bool ok = true;
    double worst = 0.0;

    for (int i = 0; i < kInstances; ++i) {
        Rng rng(1000 + i);
        ParameterVector params = init_params(cfg, 500 + i);
        for (double& p : params) p += rng.normal(0.0, 0.05);

        std::vector<Frame> frames;
        for (int f = 0; f < 2; ++f) frames.push_back(blob_frame(cfg.image_size, rng));

        // supervised
        std::vector<FrameAnnotation> anns(2);
        anns[0].frame_index = 0;
        anns[0].boxes = {random_box(rng)};
        anns[1].frame_index = 1;
        if (rng.bernoulli(0.5)) anns[1].boxes = {random_box(rng), random_box(rng)};
        const ValueGrad sup = loss_f_sup_grad(cfg, params, frames, anns, weights);
        const ParameterVector fd_sup = finite_difference_gradient(
            params,
            [&](const ParameterVector& p) { return loss_f_sup(cfg, p, frames, anns, weights); });
        worst = std::max(worst, rel_l2(sup.grad, fd_sup));

        // pseudo-labels, hard and soft
        VideoPseudoLabels labels(2);
        labels[0] = {{random_box(rng), rng.uniform(0.3, 0.95), 1.0}};
        if (rng.bernoulli(0.7))
            labels[1] = {{random_box(rng), rng.uniform(0.3, 0.95), 1.0},
                         {random_box(rng), rng.uniform(0.2, 0.5), 1.0}};
        for (const bool soft : {false, true}) {
            const ValueGrad semi = loss_f_semi_grad(cfg, params, frames, labels, weights, soft);
            const ParameterVector fd_semi = finite_difference_gradient(
                params, [&](const ParameterVector& p) {
                    return loss_f_semi(cfg, p, frames, labels, weights, soft);
                });
            worst = std::max(worst, rel_l2(semi.grad, fd_semi));
        }

        // video-level weak term
        const int label = i % 2;
        const VideoWeakResult weak = loss_v_weak_grad(cfg, params, frames, label);
        const ParameterVector fd_weak = finite_difference_gradient(
            params, [&](const ParameterVector& p) {
                return loss_v_weak_grad(cfg, p, frames, label).value;
            });
        worst = std::max(worst, rel_l2(weak.grad, fd_weak));
    }

    ok &= check(worst < kTolGrad, "finite-difference mismatch", detail);
    char buf[96];
    std::snprintf(buf, sizeof(buf), "worst relative L2 error %.3g over %d instances",
                  worst, kInstances);
    if (ok) detail = buf;
    return ok;
}

// ------------------------------------------------------------ criterion 5

double ap_reference(std::vector<ScoredHit> hits, std::size_t n_gt) {
    if (n_gt == 0) return 0.0;
    std::stable_sort(hits.begin(), hits.end(), [](const ScoredHit& a, const ScoredHit& b) {
        return a.confidence > b.confidence;
    });
    struct Point {
        double recall, precision;
    };
    std::vector<Point> pts;
    std::size_t tp = 0;
    for (std::size_t k = 0; k < hits.size(); ++k) {
        if (hits[k].tp) ++tp;
        pts.push_back({static_cast<double>(tp) / n_gt, static_cast<double>(tp) / (k + 1)});
    }
    double ap = 0.0;
    for (std::size_t k = 0; k < pts.size(); ++k) {
        const double prev = k == 0 ? 0.0 : pts[k - 1].recall;
        if (pts[k].recall == prev) continue;
        double env = 0.0;
        for (std::size_t j = k; j < pts.size(); ++j) env = std::max(env, pts[j].precision);
        ap += (pts[k].recall - prev) * env;
    }
    return ap;
}

bool criterion5(std::string& detail) {
    bool ok = true;
    const double worked =
        average_precision({{0.9, true}, {0.8, false}, {0.7, true}}, 2);
    ok &= check(std::abs(worked - 5.0 / 6.0) <= kTolAp, "worked AP example != 5/6", detail);

    Rng rng(424242);
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
        const std::size_t n_gt = static_cast<std::size_t>(rng.uniform_int(1, 6));
        const int n_det = static_cast<int>(rng.uniform_int(0, 10));
        std::vector<ScoredHit> hits;
        std::size_t tps = 0;
        for (int k = 0; k < n_det; ++k) {
            ScoredHit h;
            h.confidence = rng.uniform();
            h.tp = tps < n_gt && rng.bernoulli(0.5);
            if (h.tp) ++tps;
            hits.push_back(h);
        }
        worst = std::max(worst,
                         std::abs(average_precision(hits, n_gt) - ap_reference(hits, n_gt)));
    }
    ok &= check(worst <= kTolAp, "random-instance AP disagreement", detail);
    char buf[96];
    std::snprintf(buf, sizeof(buf), "worst |AP - reference| %.3g over 200 instances", worst);
    if (ok) detail = buf;
    return ok;
}

// ------------------------------------------------------------ criterion 6

bool criterion6(std::string& detail) {
    TrainOptions opt;
    apply_variant(opt, "+weak+pseudo+tsmr");
    const fs::path dir = fs::path(g_work) / "determinism";
    double run_seconds = 0.0;
    bool fresh = false;
    for (const char* name : {"run1", "run2"}) {
        const fs::path r = dir / name;
        if (fs::exists(r / "checkpoints" / "final.theta")) continue;
        std::error_code ec;
        fs::remove_all(r, ec);
        const double t0 = now_s();
        run_training(opt, shared_dataset(), r.string());
        run_seconds = std::max(run_seconds, now_s() - t0);
        fresh = true;
    }

    bool ok = true;
    const fs::path c1 = dir / "run1" / "checkpoints", c2 = dir / "run2" / "checkpoints";
    std::vector<std::string> names1, names2;
    for (const auto& e : fs::directory_iterator(c1)) names1.push_back(e.path().filename());
    for (const auto& e : fs::directory_iterator(c2)) names2.push_back(e.path().filename());
    std::sort(names1.begin(), names1.end());
    std::sort(names2.begin(), names2.end());
    ok &= check(names1 == names2 && !names1.empty(), "checkpoint listings differ", detail);
    if (ok)
        for (const auto& n : names1)
            ok &= check(file_bytes_equal(c1 / n, c2 / n), ("checkpoint differs: " + n).c_str(),
                        detail);
    for (const char* f : {"curves.csv", "schedule.csv"})
        ok &= check(file_bytes_equal(dir / "run1" / f, dir / "run2" / f),
                    (std::string(f) + " differs").c_str(), detail);
    if (ok) {
        char buf[128];
        if (fresh)
            std::snprintf(buf, sizeof(buf),
                          "%zu checkpoints plus curves bit-identical, %.0f s per run",
                          names1.size(), run_seconds);
        else
            std::snprintf(buf, sizeof(buf), "%zu checkpoints plus curves bit-identical (cached)",
                          names1.size());
        detail = buf;
    }
    return ok;
}

// ------------------------------------------------------------ criterion 7

const std::vector<std::string> kLadder = {"full", "full+he", "+unlabeled", "+weak",
                                          "+weak+pseudo+tsmr"};

std::vector<double> ladder_test_maps(const std::string& variant, bool* fresh = nullptr) {
    return plan_test_maps(variant, 1.0, fs::path(g_work) / "ladder" / variant, fresh);
}

bool criterion7(std::string& detail) {
    std::vector<std::vector<double>> per_variant;
    std::vector<double> means;
    bool fresh = false;
    const double t0 = now_s();
    for (const auto& v : kLadder) {
        per_variant.push_back(ladder_test_maps(v, &fresh));
        means.push_back(summarize(per_variant.back()).mean);
    }
    const double total = now_s() - t0;

    bool ok = true;
    for (std::size_t i = 0; i + 1 < means.size(); ++i)
        ok &= check(means[i] <= means[i + 1],
                    ("mean ordering breaks at " + kLadder[i] + " -> " + kLadder[i + 1]).c_str(),
                    detail);
    const double p = paired_permutation_p(per_variant[3], per_variant[2]);
    ok &= check(p < 0.1, "+weak vs +unlabeled paired p >= 0.1", detail);

    std::ostringstream info;
    info.precision(4);
    info << "means";
    for (std::size_t i = 0; i < kLadder.size(); ++i)
        info << " " << kLadder[i] << "=" << means[i];
    info.precision(4);
    info << ", paired p=" << p;
    if (fresh) {
        info.precision(3);
        info << ", " << total / 25.0 << " s mean per run";
    }
    if (ok)
        detail = info.str();
    else
        detail += "; " + info.str();
    return ok;
}

// ------------------------------------------------------------ criterion 8

bool criterion8(std::string& detail) {
    // f=0 reuses the +unlabeled runs and f=1 the +weak runs: with no usable
    // labels the weak variant computes the identical schedule, checked below.
    const std::vector<double> fractions = {0.0, 0.25, 0.5, 0.75, 1.0};
    std::vector<std::vector<double>> per_f;
    per_f.push_back(ladder_test_maps("+unlabeled"));
    for (const double f : {0.25, 0.5, 0.75}) {
        char name[32];
        std::snprintf(name, sizeof(name), "f%03d", static_cast<int>(std::lround(f * 100)));
        per_f.push_back(plan_test_maps("+weak", f, fs::path(g_work) / "sweep" / name));
    }
    per_f.push_back(ladder_test_maps("+weak"));

    bool ok = true;

    TrainOptions zero;
    apply_variant(zero, "+weak");
    zero.label_fraction = 0.0;
    zero.train.seed = 1;
    const TrainOutcome spot = run_training(zero, shared_dataset(), "",
                                           &shared_burnin_cache().get(1));
    ok &= check(spot.test_map == per_f[0][0],
                "+weak at fraction 0 does not reproduce +unlabeled", detail);

    std::vector<double> means, stds;
    for (const auto& xs : per_f) {
        const SummaryStat s = summarize(xs);
        means.push_back(s.mean);
        stds.push_back(s.stddev);
    }

    int inversions = 0;
    bool inversion_small = true;
    for (std::size_t i = 0; i + 1 < means.size(); ++i)
        if (means[i + 1] < means[i]) {
            ++inversions;
            if (means[i] - means[i + 1] > std::max(stds[i], stds[i + 1]))
                inversion_small = false;
        }
    ok &= check(inversions == 0 || (inversions == 1 && inversion_small),
                "more than one inversion or inversion beyond one std", detail);

    double rho = 0.0;
    try {
        rho = spearman_rho(fractions, means);
    } catch (const std::invalid_argument&) {
        ok = check(false, "constant means, rank correlation undefined", detail);
    }
    ok &= check(rho >= 0.8, "Spearman rho < 0.8", detail);

    std::ostringstream info;
    info.precision(4);
    info << "means";
    for (std::size_t i = 0; i < fractions.size(); ++i)
        info << " f=" << fractions[i] << ":" << means[i];
    info << ", rho=" << rho << ", inversions=" << inversions;
    if (ok)
        detail = info.str();
    else
        detail += "; " + info.str();
    return ok;
}

// ------------------------------------------------------------ criterion 9

double sample_variance(const std::vector<double>& xs) {
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= xs.size();
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return ss / (xs.size() - 1);
}

bool criterion9(std::string& detail) {
    const BurnInOutcome& burn = shared_burnin_cache().get(1);
    std::vector<double> d_theta, d_epoch;
    for (std::size_t i = 1; i < burn.log.size(); ++i) {
        d_theta.push_back(burn.log[i].map_theta - burn.log[i - 1].map_theta);
        d_epoch.push_back(burn.log[i].map_epoch - burn.log[i - 1].map_epoch);
    }
    const double var_theta = sample_variance(d_theta);
    const double var_epoch = sample_variance(d_epoch);
    const bool ok = var_epoch < var_theta;
    char buf[128];
    std::snprintf(buf, sizeof(buf),
                  "step variance: epoch EMA %.3g vs raw %.3g over %zu epochs", var_epoch,
                  var_theta, burn.log.size());
    detail = buf;
    return ok;
}

}  // namespace

int main(int argc, char** argv) {
    const char* env = std::getenv("WSVOD_ACCEPT_DIR");
    g_work = env && *env ? env : "accept_work";
    fs::create_directories(g_work);

    std::set<int> only;
    for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

    struct Row {
        int id;
        const char* label;
        double budget_s;  // 0 = untimed
        bool (*fn)(std::string&);
    };
    const Row rows[] = {
        {1, "adaptive keep-rate schedules match the closed forms", 1.0, criterion1},
        {2, "loss building blocks match hand arithmetic", 1.0, criterion2},
        {3, "weak filtering truth table", 1.0, criterion3},
        {4, "analytic gradients agree with finite differences", 60.0, criterion4},
        {5, "average precision matches brute-force enumeration", 10.0, criterion5},
        {6, "seeded end-to-end runs are bit-identical", 0.0, criterion6},
        {7, "ablation ladder ordering with significant weak-label gain", 0.0, criterion7},
        {8, "test mAP rises with the video-label fraction", 0.0, criterion8},
        {9, "epoch EMA stabilizes validation mAP during burn-in", 0.0, criterion9},
    };

    int failures = 0, ran = 0;
    for (const Row& row : rows) {
        if (!only.empty() && !only.count(row.id)) continue;
        ++ran;
        std::string detail;
        const double t0 = now_s();
        bool ok = false;
        try {
            ok = row.fn(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        const double dt = now_s() - t0;
        if (ok && row.budget_s > 0.0 && dt > row.budget_s) {
            ok = false;
            detail += detail.empty() ? "" : "; ";
            detail += "exceeded the runtime budget";
        }
        if (!ok) ++failures;
        std::printf("%s  criterion %d: %s (%.2f s)%s%s\n", ok ? "PASS" : "FAIL", row.id,
                    row.label, dt, detail.empty() ? "" : " -- ", detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d/%d acceptance criteria passed\n", ran - failures, ran);
    return failures == 0 ? 0 : 1;
}
