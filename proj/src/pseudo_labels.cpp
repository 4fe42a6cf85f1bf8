#include "wsvod/pseudo_labels.hpp"

#include <stdexcept>

namespace wsvod {

VideoPseudoLabels generate_pseudo_labels(const DetectorConfig& cfg,
                                         const ParameterVector& teacher_params,
                                         const std::vector<Frame>& frames,
                                         const PseudoLabelConfig& plc) {
    const double floor = plc.use_weak_filtering ? plc.beta_l : plc.beta;
    VideoPseudoLabels out(frames.size());
    for (std::size_t f = 0; f < frames.size(); ++f) {
        const RawPrediction pred = forward(cfg, teacher_params, frames[f]);
        for (const auto& cd : nms_cells(decode_cells(cfg, pred, floor), cfg.nms_iou))
            out[f].push_back({cd.det.box, cd.det.confidence, 1.0});
    }
    return out;
}

VideoPseudoLabels weak_filter(const VideoPseudoLabels& labels, int video_label,
                              const PseudoLabelConfig& plc) {
    if (video_label != 0 && video_label != 1)
        throw std::invalid_argument("weak_filter: video label must be 0 or 1");
    VideoPseudoLabels out(labels.size());
    if (video_label == 0) return out;
    for (std::size_t f = 0; f < labels.size(); ++f) {
        for (const auto& pl : labels[f])
            if (pl.confidence > plc.beta) out[f].push_back(pl);
        if (out[f].empty() && !labels[f].empty()) {
            // Labels arrive confidence-descending, so front() is the best.
            const PseudoLabel& best = labels[f].front();
            if (best.confidence > plc.beta_l) out[f].push_back(best);
        }
    }
    return out;
}

VideoPseudoLabels apply_soft_weights(const VideoPseudoLabels& labels) {
    VideoPseudoLabels out = labels;
    for (auto& frame : out)
        for (auto& pl : frame) pl.weight = pl.confidence * pl.confidence;
    return out;
}

}  // namespace wsvod
