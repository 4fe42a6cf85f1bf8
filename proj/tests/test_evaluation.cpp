#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "wsvod/evaluation.hpp"
#include "wsvod/rng.hpp"
#include "wsvod/synthetic.hpp"

using namespace wsvod;

namespace {

// Reference AP: sort, enumerate the PR staircase, integrate the running
// max of precision over each recall step.
double ap_reference(std::vector<ScoredHit> hits, size_t n_gt) {
    if (n_gt == 0) return 0.0;
    std::stable_sort(hits.begin(), hits.end(), [](const ScoredHit& a, const ScoredHit& b) {
        return a.confidence > b.confidence;
    });
    struct Point {
        double recall, precision;
    };
    std::vector<Point> pts;
    size_t tp = 0;
    for (size_t k = 0; k < hits.size(); ++k) {
        if (hits[k].tp) ++tp;
        pts.push_back({static_cast<double>(tp) / n_gt, static_cast<double>(tp) / (k + 1)});
    }
    double ap = 0.0;
    for (size_t k = 0; k < pts.size(); ++k) {
        const double prev = k == 0 ? 0.0 : pts[k - 1].recall;
        if (pts[k].recall == prev) continue;
        double env = 0.0;
        for (size_t j = k; j < pts.size(); ++j) env = std::max(env, pts[j].precision);
        ap += (pts[k].recall - prev) * env;
    }
    return ap;
}

}  // namespace

TEST_CASE("average precision worked example") {
    const std::vector<ScoredHit> hits = {{0.9, true}, {0.8, false}, {0.7, true}};
    CHECK(average_precision(hits, 2) == doctest::Approx(5.0 / 6.0).epsilon(1e-12));
}

TEST_CASE("average precision edge cases") {
    CHECK(average_precision({}, 0) == 0.0);
    CHECK(average_precision({{0.5, false}}, 0) == 0.0);
    CHECK(average_precision({}, 3) == 0.0);
    CHECK(average_precision({{0.5, true}}, 1) == doctest::Approx(1.0).epsilon(1e-12));
    // Input order must not matter.
    CHECK(average_precision({{0.7, true}, {0.9, true}, {0.8, false}}, 2) ==
          doctest::Approx(5.0 / 6.0).epsilon(1e-12));
}

TEST_CASE("average precision agrees with the reference on random instances") {
    Rng rng(61);
    for (int inst = 0; inst < 40; ++inst) {
        const size_t n = 1 + rng.uniform_int(0, 14);
        const size_t n_gt = 1 + rng.uniform_int(0, 9);
        std::vector<ScoredHit> hits;
        size_t tps = 0;
        for (size_t k = 0; k < n; ++k) {
            const bool tp = tps < n_gt && rng.bernoulli(0.5);
            if (tp) ++tps;
            hits.push_back({rng.uniform(), tp});
        }
        CHECK(std::abs(average_precision(hits, n_gt) - ap_reference(hits, n_gt)) <= 1e-12);
    }
}

TEST_CASE("matching is greedy by confidence with one match per ground truth") {
    const std::vector<BoundingBox> gts = {{0.3, 0.3, 0.2, 0.2}, {0.7, 0.7, 0.2, 0.2}};
    const std::vector<Detection> dets = {
        {{0.31, 0.3, 0.2, 0.2}, 0.9},   // matches gt 0
        {{0.3, 0.31, 0.2, 0.2}, 0.8},   // gt 0 already taken -> FP
        {{0.7, 0.7, 0.2, 0.2}, 0.6},    // matches gt 1
        {{0.05, 0.9, 0.05, 0.05}, 0.5}, // overlaps nothing -> FP
    };
    const auto hits = match_detections(dets, gts, 0.5);
    REQUIRE(hits.size() == 4);
    CHECK(hits[0].confidence == 0.9);
    CHECK(hits[0].tp);
    CHECK_FALSE(hits[1].tp);
    CHECK(hits[2].tp);
    CHECK_FALSE(hits[3].tp);
}

TEST_CASE("matching processes detections in confidence order regardless of input order") {
    const std::vector<BoundingBox> gts = {{0.5, 0.5, 0.2, 0.2}};
    // The lower-confidence detection overlaps better but loses the single
    // ground truth to the higher-confidence one.
    const std::vector<Detection> dets = {
        {{0.5, 0.5, 0.2, 0.2}, 0.4},
        {{0.53, 0.5, 0.2, 0.2}, 0.9},
    };
    const auto hits = match_detections(dets, gts, 0.5);
    REQUIRE(hits.size() == 2);
    CHECK(hits[0].confidence == 0.9);
    CHECK(hits[0].tp);
    CHECK(hits[1].confidence == 0.4);
    CHECK_FALSE(hits[1].tp);
}

TEST_CASE("equal-iou ties resolve to the lower ground-truth index") {
    // Dyadic coordinates make both IoUs exactly 1/3 for the first
    // detection; the tie must claim gt 0, so the second detection
    // (exactly on gt 0) has nothing left and the third still finds gt 1.
    const std::vector<BoundingBox> gts = {{0.25, 0.5, 0.5, 0.5}, {0.75, 0.5, 0.5, 0.5}};
    const std::vector<Detection> dets = {
        {{0.5, 0.5, 0.5, 0.5}, 0.9},
        {{0.25, 0.5, 0.5, 0.5}, 0.8},
        {{0.75, 0.5, 0.5, 0.5}, 0.6},
    };
    const auto hits = match_detections(dets, gts, 0.1);
    REQUIRE(hits.size() == 3);
    CHECK(hits[0].tp);
    CHECK_FALSE(hits[1].tp);
    CHECK(hits[2].tp);
}

TEST_CASE("evaluate_model pools detections across videos and bounds the score") {
    GeneratorConfig gen;
    gen.image_size = 32;
    gen.frames_per_video = 4;
    gen.num_fully_labeled = 0;
    gen.num_weak = 0;
    gen.num_validation = 0;
    gen.num_test = 3;
    gen.seed = 5;
    const DatasetSplit split = generate_splits(gen);

    DetectorConfig det;
    det.image_size = 32;
    det.conv1_channels = 3;
    det.conv2_channels = 4;
    const ParameterVector params = init_params(det, 2);

    const EvalResult r = evaluate_model(det, params, split.test);
    size_t gt = 0;
    for (const auto& v : split.test)
        for (const auto& a : *v.annotations) gt += a.boxes.size();
    CHECK(r.n_gt == gt);
    CHECK(r.curve.size() == r.n_det);
    CHECK(r.map50 >= 0.0);
    CHECK(r.map50 <= 1.0);
    CHECK(r.n_tp <= r.n_det);
    CHECK(r.n_tp <= r.n_gt);
}
