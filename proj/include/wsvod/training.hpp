#pragma once

#include <string>
#include <vector>

#include "wsvod/config.hpp"
#include "wsvod/ema.hpp"
#include "wsvod/types.hpp"

namespace wsvod {

// Everything one training run needs. The use_* switches plus the pseudo
// config's filtering/soft flags select the ablation variant.
struct TrainOptions {
    DetectorConfig det;
    TrainingConfig train;
    LossWeights weights;
    PseudoLabelConfig pseudo;
    TSMRConfig tsmr;

    bool use_hierarchical_ema = true;  // deploy theta_epoch after burn-in
    bool use_unlabeled = false;        // mutual learning with pseudo-labels
    bool use_weak_loss = false;        // video-level BCE term
    bool use_tsmr = false;             // adaptive alpha_e + inverse transfer
    // Share of weak videos whose video label may be used; the rest still
    // train as unlabeled data. 0 reduces +weak to +unlabeled.
    double label_fraction = 1.0;
};

struct EpochLog {
    std::string phase;  // "burn_in" or "mutual"
    int epoch = 0;      // global across both stages
    double loss_sup = 0.0;
    double loss_semi = 0.0;
    double loss_weak = 0.0;
    double loss_total = 0.0;
    double map_theta = 0.0;  // raw model on validation
    double map_iter = 0.0;   // iteration EMA (student) on validation
    double map_epoch = 0.0;  // epoch EMA (teacher) on validation
    double alpha_e = 0.0;
    double alpha_inv = 1.0;
};

struct ScheduleRow {
    int epoch = 0;
    double m_t = 0.0;
    double m_s = 0.0;
    double alpha_e = 0.0;
    double alpha_inv = 1.0;
};

struct BurnInOutcome {
    ModelState state;
    std::vector<EpochLog> log;
};

struct MutualOutcome {
    ModelState state;
    std::vector<EpochLog> log;
    std::vector<ScheduleRow> schedule;
};

struct TrainOutcome {
    ParameterVector deployed;  // the model the run keeps
    double val_map = 0.0;
    double test_map = 0.0;
    std::vector<EpochLog> log;
    std::vector<ScheduleRow> schedule;
};

// Supervised stage over every frame of the fully labeled split. Iterations
// per epoch = ceil(labeled frames / batch_size). Writes config.json and
// per-epoch checkpoints under run_dir when given. Throws NumericError if
// the loss or parameters leave the finite range; completed epochs stay on
// disk.
BurnInOutcome run_burn_in(const TrainOptions& opt, const DatasetSplit& data,
                          const std::string& run_dir = "");

// Teacher-student stage from a burn-in model. Each iteration pairs one
// labeled batch with one weak sub-clip (weak videos cycled independently).
// epoch_offset shifts epoch numbers so a combined run counts globally.
MutualOutcome run_mutual_learning(const TrainOptions& opt, const DatasetSplit& data,
                                  const ParameterVector& init,
                                  const std::string& run_dir = "",
                                  int epoch_offset = 0);

// Burn-in plus (per the switches) mutual learning; evaluates the deployed
// model on validation and test. An existing burn-in outcome can be supplied
// to reuse that stage.
TrainOutcome run_training(const TrainOptions& opt, const DatasetSplit& data,
                          const std::string& run_dir = "",
                          const BurnInOutcome* burn_in = nullptr);

// Weak videos whose labels a run may use: the leading round(f*n) of a
// seed-fixed permutation, so smaller fractions nest inside larger ones.
std::vector<std::size_t> labeled_weak_subset(std::size_t n_weak, double fraction,
                                             std::uint64_t seed);

void write_curves_csv(const std::string& path, const std::vector<EpochLog>& log);
void write_schedule_csv(const std::string& path, const std::vector<ScheduleRow>& rows);

}  // namespace wsvod
