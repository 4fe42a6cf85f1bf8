#pragma once

#include <vector>

#include "wsvod/config.hpp"
#include "wsvod/detector.hpp"
#include "wsvod/geometry.hpp"
#include "wsvod/types.hpp"

namespace wsvod {

// Probabilities are clamped to [kProbEps, 1-kProbEps] before any log.
inline constexpr double kProbEps = 1e-7;

double binary_cross_entropy(double p, double y);

// Complete-IoU loss 1 - CIoU(a, b) where
//   CIoU = IoU - rho^2/c^2 - alpha*v
//   rho^2 = squared center distance, c^2 = squared enclosing-box diagonal
//   v = (4/pi^2) * (atan(wa/ha) - atan(wb/hb))^2
//   alpha = v / ((1 - IoU) + v + 1e-12)
double ciou_loss(const BoundingBox& a, const BoundingBox& b);

// A target box with a per-label loss weight (1 for ground truth).
struct WeightedTarget {
    BoundingBox box;
    double weight = 1.0;
};

// Center-cell assignment: each target claims the cell containing its
// center; if two targets collide, the first in list order keeps the cell.
// Returned pairs are (cell index, target index), in target order.
std::vector<std::pair<int, std::size_t>> assign_targets(
    int grid, const std::vector<WeightedTarget>& targets);

struct FrameLossTerms {
    double coord = 0.0;  // mean weighted CIoU loss over assigned cells
    double conf = 0.0;   // mean weighted BCE over all cells
};

// Per-frame loss pieces against raw outputs. When d_pred is non-null the
// gradient of (lambda_coord*coord + lambda_conf*conf) w.r.t. the raw
// outputs is accumulated into it.
FrameLossTerms detection_terms(const DetectorConfig& cfg, const RawPrediction& pred,
                               const std::vector<WeightedTarget>& targets,
                               double lambda_coord, double lambda_conf,
                               RawPrediction* d_pred);

// Unweighted single-frame terms against ground truth.
double loss_coord(const DetectorConfig& cfg, const RawPrediction& pred,
                  const std::vector<BoundingBox>& targets);
double loss_conf(const DetectorConfig& cfg, const RawPrediction& pred,
                 const std::vector<BoundingBox>& targets);

struct ValueGrad {
    double value = 0.0;
    ParameterVector grad;
};

// Supervised detection loss: sum over frames of
// lambda_coord*coord + lambda_conf*conf.
double loss_f_sup(const DetectorConfig& cfg, const ParameterVector& params,
                  const std::vector<Frame>& frames,
                  const std::vector<FrameAnnotation>& anns,
                  const LossWeights& weights);
ValueGrad loss_f_sup_grad(const DetectorConfig& cfg, const ParameterVector& params,
                          const std::vector<Frame>& frames,
                          const std::vector<FrameAnnotation>& anns,
                          const LossWeights& weights);

// Same structure against pseudo-labels. With soft set, each label's coord
// and conf terms are scaled by confidence^2; background cells keep weight 1.
double loss_f_semi(const DetectorConfig& cfg, const ParameterVector& params,
                   const std::vector<Frame>& frames,
                   const VideoPseudoLabels& labels, const LossWeights& weights,
                   bool soft);
ValueGrad loss_f_semi_grad(const DetectorConfig& cfg, const ParameterVector& params,
                           const std::vector<Frame>& frames,
                           const VideoPseudoLabels& labels,
                           const LossWeights& weights, bool soft);

// Mean over frames of the max detection confidence (0 for an empty frame).
// Throws std::invalid_argument on an empty video.
double aggregate_video_confidence(const std::vector<std::vector<Detection>>& per_frame);

// Sum of BCE(score, label) over videos.
double loss_v_weak(const std::vector<double>& video_scores,
                   const std::vector<int>& video_labels);

// Full weak pipeline for one video: forward every frame, decode with no
// confidence floor, NMS, aggregate, BCE against the video label. Gradient
// flows through the aggregated max-confidence cells only; the selection
// itself is treated as fixed.
struct VideoWeakResult {
    double value = 0.0;
    double score = 0.0;
    ParameterVector grad;
};
VideoWeakResult loss_v_weak_grad(const DetectorConfig& cfg,
                                 const ParameterVector& params,
                                 const std::vector<Frame>& frames, int label);

double loss_combined(double l_sup, double l_semi, double l_weak,
                     const LossWeights& weights);

}  // namespace wsvod
