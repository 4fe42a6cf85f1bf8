#pragma once

#include <vector>

#include "wsvod/config.hpp"
#include "wsvod/rng.hpp"
#include "wsvod/types.hpp"

namespace wsvod {

// Evenly spaced frame indices: round(t*(T-1)/(n-1)) for t in [0, n).
// Requires 1 <= n <= total; n == 1 picks frame 0.
std::vector<int> sample_subclip(int total_frames, int n);

struct AugmentedFrame {
    Frame frame;
    std::vector<BoundingBox> boxes;
};

// Photometric + flip augmentation. Draw order is fixed (flip, brightness,
// contrast, then per-pixel noise) so a shared Rng stays aligned. An
// identity spec returns the inputs untouched without consuming draws.
AugmentedFrame apply_augmentation(const Frame& frame,
                                  const std::vector<BoundingBox>& boxes,
                                  const AugmentationSpec& spec, Rng& rng);

}  // namespace wsvod
