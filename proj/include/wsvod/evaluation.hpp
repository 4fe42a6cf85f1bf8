#pragma once

#include <cstddef>
#include <vector>

#include "wsvod/config.hpp"
#include "wsvod/detector.hpp"
#include "wsvod/types.hpp"

namespace wsvod {

struct ScoredHit {
    double confidence = 0.0;
    bool tp = false;
};

// Greedy matching, detections in confidence-descending order. A detection
// is a true positive when its best-IoU unmatched ground truth reaches
// iou_threshold; equal IoUs resolve to the lower ground-truth index. Each
// ground truth matches at most once.
std::vector<ScoredHit> match_detections(const std::vector<Detection>& dets,
                                        const std::vector<BoundingBox>& gts,
                                        double iou_threshold);

// All-point interpolated AP over the pooled hits: area under the precision
// envelope as a function of recall. Zero ground truths give 0.
double average_precision(std::vector<ScoredHit> hits, std::size_t n_gt);

struct PrPoint {
    double confidence = 0.0;
    double precision = 0.0;
    double recall = 0.0;
};

struct EvalResult {
    double map50 = 0.0;
    std::size_t n_gt = 0;
    std::size_t n_det = 0;
    std::size_t n_tp = 0;
    std::vector<PrPoint> curve;  // one point per pooled detection
};

// Runs the detector over every frame of every video (decode at the eval
// confidence floor, then NMS), pools hits across frames, and scores a
// single-class mAP at cfg.match_iou. Videos must carry annotations; frames
// without an annotation entry count as empty ground truth.
EvalResult evaluate_model(const DetectorConfig& cfg, const ParameterVector& params,
                          const std::vector<VideoRecord>& videos);

void write_eval_json(const std::string& path, const EvalResult& result);
void write_pr_curve_csv(const std::string& path, const EvalResult& result);

}  // namespace wsvod
