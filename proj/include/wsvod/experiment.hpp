#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wsvod/training.hpp"

namespace wsvod {

// Ablation rows, in cumulative order.
extern const std::vector<std::string> kVariantNames;

struct VariantFlags {
    bool hierarchical_ema = false;
    bool unlabeled = false;
    bool weak_loss = false;
    bool weak_filtering = false;
    bool soft_weights = false;
    bool tsmr = false;
};

// Throws std::invalid_argument for an unknown name.
VariantFlags variant_flags(const std::string& name);

// Stamps a variant's flags onto the options. Turning the weighted
// pseudo-labels on also drops beta and beta_l to 0.1 unless the caller
// already moved them off the plain-threshold default.
void apply_variant(TrainOptions& opt, const std::string& name);

struct SummaryStat {
    double mean = 0.0;
    double stddev = 0.0;  // sample standard deviation, 0 for n < 2
    int n = 0;
};
SummaryStat summarize(const std::vector<double>& xs);

// Exact one-sided paired sign-flip permutation test of mean(a - b) > 0.
// Enumerates all 2^n sign assignments; the smallest reachable p is 1/2^n.
double paired_permutation_p(const std::vector<double>& a, const std::vector<double>& b);

// Spearman rank correlation, average ranks on ties.
double spearman_rho(const std::vector<double>& x, const std::vector<double>& y);

struct RunRecord {
    std::string variant;
    std::uint64_t seed = 0;
    double fraction = 1.0;
    double val_map = 0.0;
    double test_map = 0.0;
    std::string run_dir;
};

struct ExperimentPlan {
    std::string variant = "+weak+pseudo+tsmr";
    std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
    double fraction = 1.0;
};

// Burn-in results shared across variants of the same seed (every variant
// starts from the same supervised checkpoint). With a cache directory set,
// results persist on disk and later processes reload them.
class BurnInCache {
  public:
    BurnInCache(TrainOptions base, const DatasetSplit* data, std::string dir = "");
    const BurnInOutcome& get(std::uint64_t seed);

  private:
    TrainOptions base_;
    const DatasetSplit* data_;
    std::string dir_;
    std::vector<std::pair<std::uint64_t, BurnInOutcome>> cache_;
};

struct TrainSummary {
    std::vector<RunRecord> runs;
    SummaryStat val_map;
    SummaryStat test_map;
};

// Runs the plan's variant for every seed, writing run directories and
// summary.json under out_dir (kept in memory only when out_dir is empty).
TrainSummary run_plan(const ExperimentPlan& plan, const TrainOptions& base,
                      const DatasetSplit& data, const std::string& out_dir,
                      BurnInCache* cache = nullptr);

struct AblateRow {
    std::string group;  // "beta", "alpha_e", "fraction"
    std::string setting;
    SummaryStat val_map;
    SummaryStat test_map;
    std::vector<RunRecord> runs;
};

// The ablation grids: beta in {0.1,0.3,0.5,0.7} on +weak (plain
// thresholds), fixed alpha_e in {0.9,0.95,0.99} plus the adaptive schedule
// on +weak+pseudo, and the video-label fraction sweep {0,...,1} on +weak.
std::vector<AblateRow> run_ablations(const TrainOptions& base, const DatasetSplit& data,
                                     const std::vector<std::uint64_t>& seeds,
                                     const std::string& out_dir,
                                     BurnInCache* cache = nullptr);

void write_summary_json(const std::string& path, const ExperimentPlan& plan,
                        const TrainSummary& summary);
void write_ablation_csv(const std::string& path, const std::vector<AblateRow>& rows);
void write_ablation_markdown(const std::string& path, const std::vector<AblateRow>& rows);

}  // namespace wsvod
