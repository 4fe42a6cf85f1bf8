#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "wsvod/config.hpp"
#include "wsvod/types.hpp"

namespace wsvod {

using ParameterVector = std::vector<double>;

// Numerically stable logistic.
double sigmoid(double x);

std::size_t param_count(const DetectorConfig& cfg);

// He-style gaussian fan-in init for weights, zero biases, objectness bias
// slightly negative so untrained confidences start below 0.5.
ParameterVector init_params(const DetectorConfig& cfg, std::uint64_t seed);

// Raw head outputs, channel-major: [tx, ty, tw, th, obj] x grid x grid.
struct RawPrediction {
    int grid = 0;
    std::vector<double> data;

    double& at(int ch, int gy, int gx) { return data[(ch * grid + gy) * grid + gx]; }
    double at(int ch, int gy, int gx) const { return data[(ch * grid + gy) * grid + gx]; }
};

// Intermediate activations kept for the backward pass. Reusable across
// frames; forward() resizes as needed.
struct Workspace {
    std::vector<double> input;  // copy of the frame the pass consumed
    std::vector<double> a1, z1; // conv1 pre/post activation
    std::vector<double> a2, z2; // conv2 pre/post activation
};

RawPrediction forward(const DetectorConfig& cfg, const ParameterVector& params,
                      const Frame& frame, Workspace* ws = nullptr);

// Accumulates d(loss)/d(params) into grad given d(loss)/d(raw outputs).
// The workspace must come from a forward() over the same params and frame.
void backward(const DetectorConfig& cfg, const ParameterVector& params,
              const Workspace& ws, const RawPrediction& d_pred,
              ParameterVector& grad);

struct CellDetection {
    int cell = 0;  // gy * grid + gx
    Detection det;
};

// Raw outputs -> boxes. Keeps cells with sigmoid(obj) > conf_threshold
// strictly; threshold 0 keeps every cell. Width/height capped at 1.
std::vector<Detection> decode(const DetectorConfig& cfg, const RawPrediction& pred,
                              double conf_threshold);
std::vector<CellDetection> decode_cells(const DetectorConfig& cfg,
                                        const RawPrediction& pred,
                                        double conf_threshold);

// Greedy NMS: order by confidence descending (ties keep input order), drop
// any box with IoU > iou_threshold against an already kept box. Returns
// indices into the input, in kept order.
std::vector<std::size_t> nms_keep_indices(const std::vector<Detection>& dets,
                                          double iou_threshold);
std::vector<Detection> nms(const std::vector<Detection>& dets, double iou_threshold);
std::vector<CellDetection> nms_cells(const std::vector<CellDetection>& dets,
                                     double iou_threshold);

// Central finite differences of an arbitrary scalar function of the
// parameters. Reference implementation for gradient checks.
ParameterVector finite_difference_gradient(
    const ParameterVector& params,
    const std::function<double(const ParameterVector&)>& loss_fn,
    double step = 1e-5);

}  // namespace wsvod
