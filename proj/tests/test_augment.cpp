#include <doctest.h>

#include <cmath>

#include "wsvod/augment.hpp"

using namespace wsvod;

namespace {

Frame ramp_frame(int w, int h) {
    Frame f(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) f.at(y, x) = (y * w + x) / double(w * h);
    return f;
}

}  // namespace

TEST_CASE("subclip sampling is evenly spaced and inclusive of both ends") {
    CHECK(sample_subclip(60, 4) == std::vector<int>{0, 20, 39, 59});
    CHECK(sample_subclip(30, 1) == std::vector<int>{0});
    CHECK(sample_subclip(5, 5) == std::vector<int>{0, 1, 2, 3, 4});
    CHECK(sample_subclip(2, 2) == std::vector<int>{0, 1});

    for (int total : {7, 19, 30, 61}) {
        for (int n = 2; n <= std::min(total, 9); ++n) {
            const auto idx = sample_subclip(total, n);
            REQUIRE(idx.size() == static_cast<size_t>(n));
            CHECK(idx.front() == 0);
            CHECK(idx.back() == total - 1);
            for (size_t i = 1; i < idx.size(); ++i) CHECK(idx[i] > idx[i - 1]);
        }
    }
    CHECK_THROWS_AS(sample_subclip(3, 4), std::invalid_argument);
    CHECK_THROWS_AS(sample_subclip(3, 0), std::invalid_argument);
}

TEST_CASE("identity augmentation returns inputs untouched without consuming draws") {
    const Frame f = ramp_frame(8, 6);
    const std::vector<BoundingBox> boxes = {{0.3, 0.4, 0.2, 0.2}};
    Rng used(101), untouched(101);
    const AugmentedFrame out = apply_augmentation(f, boxes, AugmentationSpec{}, used);
    CHECK(out.frame.px == f.px);
    CHECK(out.boxes == boxes);
    CHECK(used.uniform() == untouched.uniform());
}

TEST_CASE("guaranteed flip mirrors pixels and box centers") {
    AugmentationSpec spec;
    spec.flip_prob = 1.0;
    const Frame f = ramp_frame(8, 6);
    const std::vector<BoundingBox> boxes = {{0.3, 0.4, 0.2, 0.25}};
    Rng rng(102);
    const AugmentedFrame out = apply_augmentation(f, boxes, spec, rng);
    // The photometric pass is an identity transform here up to rounding.
    for (int y = 0; y < f.height; ++y)
        for (int x = 0; x < f.width; ++x)
            CHECK(out.frame.at(y, x) ==
                  doctest::Approx(f.at(y, f.width - 1 - x)).epsilon(1e-12));
    REQUIRE(out.boxes.size() == 1);
    CHECK(out.boxes[0].cx == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(out.boxes[0].cy == 0.4);
    CHECK(out.boxes[0].w == 0.2);
    CHECK(out.boxes[0].h == 0.25);
}

TEST_CASE("photometric jitter stays in range and leaves boxes alone") {
    AugmentationSpec spec;
    spec.brightness_delta = 0.2;
    spec.contrast_delta = 0.2;
    spec.noise_sigma = 0.05;
    const Frame f = ramp_frame(12, 12);
    const std::vector<BoundingBox> boxes = {{0.5, 0.5, 0.4, 0.3}};
    Rng rng(103);
    for (int rep = 0; rep < 10; ++rep) {
        const AugmentedFrame out = apply_augmentation(f, boxes, spec, rng);
        CHECK(out.boxes == boxes);
        for (double v : out.frame.px) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
    }
}

TEST_CASE("a shared rng replays the same augmentation stream") {
    AugmentationSpec spec;
    spec.flip_prob = 0.5;
    spec.brightness_delta = 0.1;
    spec.contrast_delta = 0.1;
    spec.noise_sigma = 0.02;
    const Frame f = ramp_frame(10, 10);
    Rng a(104), b(104);
    for (int rep = 0; rep < 5; ++rep) {
        const AugmentedFrame fa = apply_augmentation(f, {}, spec, a);
        const AugmentedFrame fb = apply_augmentation(f, {}, spec, b);
        CHECK(fa.frame.px == fb.frame.px);
    }
}
