#pragma once

#include <string>
#include <vector>

#include "wsvod/experiment.hpp"
#include "wsvod/training.hpp"

namespace wsvod {

// Parses a curves.csv produced by write_curves_csv. Throws DataError when
// the file is unreadable or malformed and std::invalid_argument when it
// holds a header but no data rows.
std::vector<EpochLog> read_curves_csv(const std::string& path);

struct BandPoint {
    int epoch = 0;
    double mean = 0.0;
    double half = 0.0;  // 1.96 * stddev / sqrt(n), 0 when n < 2
    int n = 0;
};

// Per-epoch mean and 95% CI half-width of one EpochLog field across runs.
std::vector<BandPoint> curve_band(const std::vector<std::vector<EpochLog>>& runs,
                                  double EpochLog::*field);

// Validation-mAP learning curves averaged across runs: CI band plus mean
// line for the epoch-EMA weights, mean lines for the iteration-EMA and raw
// weights. With fewer than two runs the band is dropped and a warning is
// appended to `warnings` when given.
void plot_learning_curves(const std::vector<std::vector<EpochLog>>& runs,
                          const std::string& svg_path,
                          std::vector<std::string>* warnings = nullptr);

struct FractionPoint {
    double fraction = 0.0;
    SummaryStat test_map;
};

// Fraction-of-video-labels sweep: mean test mAP with 95% CI error bars.
void plot_fraction_sweep(const std::vector<FractionPoint>& points,
                         const std::string& svg_path);

}  // namespace wsvod
