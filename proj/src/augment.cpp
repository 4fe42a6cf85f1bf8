#include "wsvod/augment.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace wsvod {

std::vector<int> sample_subclip(int total_frames, int n) {
    if (n < 1 || n > total_frames)
        throw std::invalid_argument("sample_subclip: need 1 <= n <= total_frames");
    if (n == 1) return {0};
    std::vector<int> idx(n);
    for (int t = 0; t < n; ++t)
        idx[t] = static_cast<int>(
            std::lround(static_cast<double>(t) * (total_frames - 1) / (n - 1)));
    return idx;
}

AugmentedFrame apply_augmentation(const Frame& frame,
                                  const std::vector<BoundingBox>& boxes,
                                  const AugmentationSpec& spec, Rng& rng) {
    AugmentedFrame out{frame, boxes};
    if (spec.is_identity()) return out;

    const bool flip = rng.uniform() < spec.flip_prob;
    const double bright = rng.uniform(-spec.brightness_delta, spec.brightness_delta);
    const double contrast = rng.uniform(1.0 - spec.contrast_delta, 1.0 + spec.contrast_delta);

    if (flip) {
        for (int y = 0; y < frame.height; ++y)
            for (int x = 0; x < frame.width; ++x)
                out.frame.px[y * frame.width + x] =
                    frame.px[y * frame.width + (frame.width - 1 - x)];
        for (auto& b : out.boxes) b.cx = 1.0 - b.cx;
    }
    for (double& p : out.frame.px) {
        p = 0.5 + (p + bright - 0.5) * contrast;
        if (spec.noise_sigma > 0.0) p += rng.normal(0.0, spec.noise_sigma);
        p = std::clamp(p, 0.0, 1.0);
    }
    return out;
}

}  // namespace wsvod
