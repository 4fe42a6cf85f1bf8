#pragma once

#include <optional>
#include <string>
#include <vector>

#include "wsvod/geometry.hpp"

namespace wsvod {

// Single-channel frame, row-major, values in [0,1].
struct Frame {
    int width = 0;
    int height = 0;
    std::vector<double> px;

    Frame() = default;
    Frame(int w, int h, double fill = 0.0) : width(w), height(h), px(static_cast<size_t>(w) * h, fill) {}

    double& at(int y, int x) { return px[static_cast<size_t>(y) * width + x]; }
    double at(int y, int x) const { return px[static_cast<size_t>(y) * width + x]; }
};

struct Detection {
    BoundingBox box;
    double confidence = 0.0;
};

struct FrameAnnotation {
    int frame_index = 0;
    std::vector<BoundingBox> boxes;
};

// A video plus either frame-level boxes (fully labeled role) or a single
// binary video label (weak role). Generated data may carry both; split
// assembly strips the field that does not belong to the role.
struct VideoRecord {
    std::string video_id;
    std::vector<Frame> frames;
    std::optional<std::vector<FrameAnnotation>> annotations;
    std::optional<int> video_label;
};

// Teacher output used as a training target. weight stays 1 unless soft
// weighting stamps confidence^2 onto it.
struct PseudoLabel {
    BoundingBox box;
    double confidence = 0.0;
    double weight = 1.0;
};

// One entry per frame of a video; a frame with no confident teacher
// detection holds an empty list.
using FramePseudoLabels = std::vector<PseudoLabel>;
using VideoPseudoLabels = std::vector<FramePseudoLabels>;

struct DatasetSplit {
    std::vector<VideoRecord> fully_labeled;
    std::vector<VideoRecord> weakly_labeled;
    std::vector<VideoRecord> validation;
    std::vector<VideoRecord> test;
};

// Returns human-readable violations; empty means the split is well formed.
std::vector<std::string> validate_split(const DatasetSplit& split);

}  // namespace wsvod
