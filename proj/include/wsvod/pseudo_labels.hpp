#pragma once

#include <vector>

#include "wsvod/config.hpp"
#include "wsvod/detector.hpp"
#include "wsvod/types.hpp"

namespace wsvod {

// Teacher inference over one video. Frames are decoded at the keep
// threshold (beta), or at the retain floor (beta_l) when weak filtering is
// on so the filter still sees fallback candidates. NMS runs per frame;
// labels stay in confidence-descending order, ties by lower cell index.
VideoPseudoLabels generate_pseudo_labels(const DetectorConfig& cfg,
                                         const ParameterVector& teacher_params,
                                         const std::vector<Frame>& frames,
                                         const PseudoLabelConfig& plc);

// Video-label gate. Negative video: every frame comes back empty. Positive
// video: a frame keeps its labels above beta; a frame with none above beta
// keeps its single most confident candidate if that one clears beta_l.
VideoPseudoLabels weak_filter(const VideoPseudoLabels& labels, int video_label,
                              const PseudoLabelConfig& plc);

// Stamps weight = confidence^2 on every label.
VideoPseudoLabels apply_soft_weights(const VideoPseudoLabels& labels);

}  // namespace wsvod
