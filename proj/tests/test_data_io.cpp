#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "wsvod/io.hpp"
#include "wsvod/synthetic.hpp"

using namespace wsvod;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("wsvod_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    static int& counter() {
        static int c = 0;
        return c;
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

GeneratorConfig tiny_gen() {
    GeneratorConfig cfg;
    cfg.image_size = 32;
    cfg.frames_per_video = 5;
    cfg.num_fully_labeled = 3;
    cfg.num_weak = 6;
    cfg.num_validation = 2;
    cfg.num_test = 4;
    cfg.seed = 12;
    return cfg;
}

size_t boxes_in(const VideoRecord& v) {
    size_t n = 0;
    if (v.annotations)
        for (const auto& a : *v.annotations) n += a.boxes.size();
    return n;
}

}  // namespace

TEST_CASE("pgm round-trip is exact up to 8-bit quantization") {
    TempDir tmp;
    Frame f(9, 7);
    Rng rng(71);
    for (auto& p : f.px) p = rng.uniform();
    f.at(0, 0) = 0.0;
    f.at(6, 8) = 1.0;
    write_pgm(tmp.file("f.pgm"), f);
    const Frame back = read_pgm(tmp.file("f.pgm"));
    REQUIRE(back.width == f.width);
    REQUIRE(back.height == f.height);
    for (size_t i = 0; i < f.px.size(); ++i)
        CHECK(std::abs(back.px[i] - f.px[i]) <= 0.5 / 255.0 + 1e-12);
    // A second trip through bytes is lossless.
    write_pgm(tmp.file("g.pgm"), back);
    CHECK(read_pgm(tmp.file("g.pgm")).px == back.px);
}

TEST_CASE("annotations jsonl round-trips exactly") {
    TempDir tmp;
    std::vector<FrameAnnotation> anns = {
        {0, {{0.123456789012345, 0.5, 0.25, 0.3}, {0.9, 0.9, 0.05, 0.07}}},
        {2, {}},
        {5, {{1.0 / 3.0, 2.0 / 3.0, 0.111, 0.222}}},
    };
    write_annotations_jsonl(tmp.file("a.jsonl"), anns);
    const auto back = read_annotations_jsonl(tmp.file("a.jsonl"));
    REQUIRE(back.size() == anns.size());
    for (size_t i = 0; i < anns.size(); ++i) {
        CHECK(back[i].frame_index == anns[i].frame_index);
        CHECK(back[i].boxes == anns[i].boxes);
    }
}

TEST_CASE("parameter checkpoints are bit-exact and validated on load") {
    TempDir tmp;
    Rng rng(72);
    ParameterVector p(257);
    for (auto& v : p) v = rng.normal(0.0, 3.0);
    save_params(tmp.file("m.theta"), p);
    CHECK(load_params(tmp.file("m.theta")) == p);
    CHECK(load_params(tmp.file("m.theta"), p.size()) == p);
    CHECK_THROWS_AS(load_params(tmp.file("m.theta"), p.size() + 1), DataError);
    CHECK_THROWS_AS(load_params(tmp.file("missing.theta")), DataError);

    // Truncated payload is rejected.
    {
        std::ifstream in(tmp.file("m.theta"), std::ios::binary);
        std::vector<char> bytes((std::istreambuf_iterator<char>(in)),
                                std::istreambuf_iterator<char>());
        bytes.resize(bytes.size() - 5);
        std::ofstream out(tmp.file("cut.theta"), std::ios::binary);
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    }
    CHECK_THROWS_AS(load_params(tmp.file("cut.theta")), DataError);
}

TEST_CASE("generator is deterministic and respects split counts") {
    const GeneratorConfig cfg = tiny_gen();
    const DatasetSplit a = generate_splits(cfg);
    const DatasetSplit b = generate_splits(cfg);

    CHECK(a.fully_labeled.size() == 3);
    CHECK(a.weakly_labeled.size() == 6);
    CHECK(a.validation.size() == 2);
    CHECK(a.test.size() == 4);

    for (size_t i = 0; i < a.test.size(); ++i) {
        CHECK(a.test[i].video_id == b.test[i].video_id);
        REQUIRE(a.test[i].frames.size() == b.test[i].frames.size());
        for (size_t f = 0; f < a.test[i].frames.size(); ++f)
            CHECK(a.test[i].frames[f].px == b.test[i].frames[f].px);
    }

    // Exact positive counts per split: round(fraction * count).
    int weak_pos = 0;
    for (const auto& v : a.weakly_labeled) {
        REQUIRE(v.video_label.has_value());
        CHECK_FALSE(v.annotations.has_value());
        weak_pos += *v.video_label;
    }
    CHECK(weak_pos == 3);  // 0.5 * 6

    int labeled_pos = 0;
    for (const auto& v : a.fully_labeled) {
        REQUIRE(v.annotations.has_value());
        labeled_pos += boxes_in(v) > 0 ? 1 : 0;
    }
    CHECK(labeled_pos == 3);  // labeled_positive_fraction 1.0

    int test_pos = 0;
    for (const auto& v : a.test) test_pos += boxes_in(v) > 0 ? 1 : 0;
    CHECK(test_pos == 2);  // round(0.6 * 4)

    CHECK(validate_split(a).empty());
}

TEST_CASE("positive videos keep a visible annotated target, negatives stay empty") {
    GeneratorConfig cfg = tiny_gen();
    cfg.distractors_min = 0;
    cfg.distractors_max = 0;
    cfg.noise_sigma = 0.01;
    Rng rng(cfg.seed);

    const VideoRecord neg = generate_video(cfg, "neg", false, rng);
    CHECK(*neg.video_label == 0);
    CHECK(boxes_in(neg) == 0);

    const VideoRecord pos = generate_video(cfg, "pos", true, rng);
    CHECK(*pos.video_label == 1);
    REQUIRE(pos.annotations.has_value());

    size_t annotated = 0, argmax_inside = 0;
    for (const auto& ann : *pos.annotations) {
        if (ann.boxes.empty()) continue;
        REQUIRE(ann.boxes.size() == 1);
        ++annotated;
        const Frame& f = pos.frames[ann.frame_index];
        int best = 0;
        for (size_t i = 1; i < f.px.size(); ++i)
            if (f.px[i] > f.px[best]) best = static_cast<int>(i);
        const double bx = (best % f.width + 0.5) / f.width;
        const double by = (best / f.width + 0.5) / f.height;
        const Corners c = clipped_corners(ann.boxes[0]);
        if (bx >= c.x0 && bx <= c.x1 && by >= c.y0 && by <= c.y1) ++argmax_inside;
    }
    // Visibility window: the target is annotated on most frames.
    CHECK(annotated >= static_cast<size_t>(cfg.visibility_min * cfg.frames_per_video));
    // With no distractors the brightest pixel sits in the target box.
    CHECK(argmax_inside == annotated);
}

TEST_CASE("dataset round-trips through the manifest layout") {
    TempDir tmp;
    const DatasetSplit a = generate_splits(tiny_gen());
    save_dataset(tmp.file("data"), a);
    const DatasetSplit b = load_dataset(tmp.file("data"));

    REQUIRE(b.fully_labeled.size() == a.fully_labeled.size());
    REQUIRE(b.weakly_labeled.size() == a.weakly_labeled.size());
    REQUIRE(b.validation.size() == a.validation.size());
    REQUIRE(b.test.size() == a.test.size());

    for (size_t i = 0; i < a.fully_labeled.size(); ++i) {
        const auto& va = a.fully_labeled[i];
        const auto& vb = b.fully_labeled[i];
        CHECK(va.video_id == vb.video_id);
        REQUIRE(vb.annotations.has_value());
        CHECK(boxes_in(va) == boxes_in(vb));
        REQUIRE(va.frames.size() == vb.frames.size());
        for (size_t f = 0; f < va.frames.size(); ++f)
            for (size_t px = 0; px < va.frames[f].px.size(); ++px)
                CHECK(std::abs(va.frames[f].px[px] - vb.frames[f].px[px]) <=
                      0.5 / 255.0 + 1e-12);
    }
    for (size_t i = 0; i < a.weakly_labeled.size(); ++i) {
        CHECK(b.weakly_labeled[i].video_label == a.weakly_labeled[i].video_label);
        CHECK_FALSE(b.weakly_labeled[i].annotations.has_value());
    }
    CHECK(validate_split(b).empty());

    CHECK_THROWS_AS(load_dataset(tmp.file("nowhere")), DataError);
}

TEST_CASE("validate_split reports role violations") {
    DatasetSplit s = generate_splits(tiny_gen());
    CHECK(validate_split(s).empty());

    DatasetSplit broken = s;
    broken.weakly_labeled[0].video_label.reset();
    CHECK_FALSE(validate_split(broken).empty());

    broken = s;
    broken.fully_labeled[0].annotations.reset();
    CHECK_FALSE(validate_split(broken).empty());

    broken = s;
    broken.test[1].annotations.reset();
    CHECK_FALSE(validate_split(broken).empty());
}
