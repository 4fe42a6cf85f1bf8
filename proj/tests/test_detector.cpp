#include <doctest.h>

#include <cmath>

#include "wsvod/detector.hpp"
#include "wsvod/rng.hpp"

using namespace wsvod;

namespace {

DetectorConfig small_cfg() {
    DetectorConfig cfg;
    cfg.image_size = 16;
    cfg.conv1_channels = 3;
    cfg.conv2_channels = 4;
    return cfg;
}

Frame random_frame(int size, uint64_t seed) {
    Frame f(size, size);
    Rng rng(seed);
    for (auto& p : f.px) p = rng.uniform();
    return f;
}

}  // namespace

TEST_CASE("parameter count matches the layer arithmetic") {
    // conv1: c1*(3*3)+c1, conv2: c2*(c1*3*3)+c2, head: 5*(c2*4)+5.
    DetectorConfig cfg;
    CHECK(param_count(cfg) == 2317);
    CHECK(param_count(small_cfg()) == 227);
}

TEST_CASE("init is deterministic per seed and sized to the config") {
    const DetectorConfig cfg = small_cfg();
    const ParameterVector a = init_params(cfg, 5);
    const ParameterVector b = init_params(cfg, 5);
    const ParameterVector c = init_params(cfg, 6);
    CHECK(a == b);
    CHECK(a != c);
    CHECK(a.size() == param_count(cfg));
}

TEST_CASE("forward emits a full finite grid and is deterministic") {
    const DetectorConfig cfg = small_cfg();
    const ParameterVector p = init_params(cfg, 1);
    const Frame f = random_frame(cfg.image_size, 2);
    const RawPrediction a = forward(cfg, p, f);
    const RawPrediction b = forward(cfg, p, f);
    CHECK(a.grid == cfg.grid());
    CHECK(a.data.size() == static_cast<size_t>(5 * a.grid * a.grid));
    CHECK(a.data == b.data);
    for (double v : a.data) CHECK(std::isfinite(v));
}

TEST_CASE("decode thresholding and box geometry") {
    const DetectorConfig cfg = small_cfg();
    const ParameterVector p = init_params(cfg, 3);
    const Frame f = random_frame(cfg.image_size, 4);
    const RawPrediction pred = forward(cfg, p, f);
    const int g = pred.grid;

    CHECK(decode(cfg, pred, 0.0).size() == static_cast<size_t>(g * g));
    CHECK(decode(cfg, pred, 1.0).empty());

    for (const auto& cd : decode_cells(cfg, pred, 0.0)) {
        const int gy = cd.cell / g, gx = cd.cell % g;
        CHECK(cd.det.confidence == doctest::Approx(sigmoid(pred.at(4, gy, gx))).epsilon(1e-12));
        // Center offsets are sigmoids, so each box centers inside its cell.
        CHECK(cd.det.box.cx >= static_cast<double>(gx) / g);
        CHECK(cd.det.box.cx <= static_cast<double>(gx + 1) / g);
        CHECK(cd.det.box.cy >= static_cast<double>(gy) / g);
        CHECK(cd.det.box.cy <= static_cast<double>(gy + 1) / g);
        CHECK(cd.det.box.w > 0.0);
        CHECK(cd.det.box.w <= 1.0);
        CHECK(cd.det.box.h > 0.0);
        CHECK(cd.det.box.h <= 1.0);
    }

    // Strict threshold: a detection at confidence c is dropped at c.
    const auto all = decode(cfg, pred, 0.0);
    double cmax = 0.0;
    for (const auto& d : all) cmax = std::max(cmax, d.confidence);
    for (const auto& d : decode(cfg, pred, cmax)) CHECK(d.confidence > cmax);
}

TEST_CASE("nms keeps the best of overlapping boxes and all disjoint ones") {
    std::vector<Detection> dets = {
        {{0.3, 0.3, 0.2, 0.2}, 0.7},
        {{0.31, 0.3, 0.2, 0.2}, 0.9},
        {{0.8, 0.8, 0.1, 0.1}, 0.2},
    };
    const auto kept = nms(dets, 0.45);
    REQUIRE(kept.size() == 2);
    CHECK(kept[0].confidence == 0.9);
    CHECK(kept[1].confidence == 0.2);

    const auto idx = nms_keep_indices(dets, 0.45);
    REQUIRE(idx.size() == 2);
    CHECK(idx[0] == 1);
    CHECK(idx[1] == 2);

    CHECK(nms({}, 0.45).empty());
}

TEST_CASE("nms output is confidence-descending and mutually non-overlapping") {
    Rng rng(9);
    std::vector<Detection> dets;
    for (int i = 0; i < 60; ++i)
        dets.push_back({{rng.uniform(), rng.uniform(), rng.uniform(0.05, 0.5),
                         rng.uniform(0.05, 0.5)},
                        rng.uniform()});
    const auto kept = nms(dets, 0.45);
    for (size_t i = 1; i < kept.size(); ++i)
        CHECK(kept[i - 1].confidence >= kept[i].confidence);
    for (size_t i = 0; i < kept.size(); ++i)
        for (size_t j = i + 1; j < kept.size(); ++j)
            CHECK(iou(kept[i].box, kept[j].box) <= 0.45);
}

TEST_CASE("backward matches finite differences through a weighted output sum") {
    const DetectorConfig cfg = small_cfg();
    Rng rng(21);
    for (int inst = 0; inst < 3; ++inst) {
        const ParameterVector p = init_params(cfg, 100 + inst);
        const Frame f = random_frame(cfg.image_size, 200 + inst);

        Workspace ws;
        const RawPrediction pred = forward(cfg, p, f, &ws);
        RawPrediction d_pred = pred;
        for (auto& v : d_pred.data) v = rng.uniform(-1.0, 1.0);

        ParameterVector grad(p.size(), 0.0);
        backward(cfg, p, ws, d_pred, grad);

        const ParameterVector fd = finite_difference_gradient(p, [&](const ParameterVector& q) {
            const RawPrediction out = forward(cfg, q, f);
            double s = 0.0;
            for (size_t i = 0; i < out.data.size(); ++i) s += d_pred.data[i] * out.data[i];
            return s;
        });

        double num = 0.0, den = 0.0;
        for (size_t i = 0; i < grad.size(); ++i) {
            num += (grad[i] - fd[i]) * (grad[i] - fd[i]);
            den += fd[i] * fd[i];
        }
        CHECK(std::sqrt(num) <= 1e-4 * std::sqrt(den));
    }
}
