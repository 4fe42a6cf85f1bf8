#pragma once

#include <string>

#include "wsvod/config.hpp"
#include "wsvod/rng.hpp"
#include "wsvod/types.hpp"

namespace wsvod {

// One video: speckled background plus dim drifting distractor blobs; a
// positive video also carries one bright elliptical target that drifts and
// is visible for a contiguous window of at least visibility_min * frames.
// The record comes back fully annotated (boxes on every frame, video label
// set); callers strip whichever side their split hides.
VideoRecord generate_video(const GeneratorConfig& cfg, const std::string& video_id,
                           bool positive, Rng& rng);

// Deterministic four-way split from cfg.seed. Positive counts are exact:
// round(fraction * count) per split, order shuffled.
DatasetSplit generate_splits(const GeneratorConfig& cfg);

}  // namespace wsvod
