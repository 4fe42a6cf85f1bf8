#include "wsvod/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace wsvod {

namespace {

constexpr double kTwoPi = 6.283185307179586476925287;

struct Blob {
    double cx, cy;  // px, pixel-center coordinates
    double vx, vy;  // px per frame
    double sx, sy;  // gaussian sigmas, px
    double peak;
};

void render_blob(Frame& f, const Blob& b) {
    const int x0 = std::max(0, static_cast<int>(std::floor(b.cx - 3.5 * b.sx)));
    const int x1 = std::min(f.width - 1, static_cast<int>(std::ceil(b.cx + 3.5 * b.sx)));
    const int y0 = std::max(0, static_cast<int>(std::floor(b.cy - 3.5 * b.sy)));
    const int y1 = std::min(f.height - 1, static_cast<int>(std::ceil(b.cy + 3.5 * b.sy)));
    for (int y = y0; y <= y1; ++y) {
        const double dy = (y + 0.5 - b.cy) / b.sy;
        for (int x = x0; x <= x1; ++x) {
            const double dx = (x + 0.5 - b.cx) / b.sx;
            f.px[y * f.width + x] += b.peak * std::exp(-0.5 * (dx * dx + dy * dy));
        }
    }
}

// Advance one frame, reflecting off the walls so the blob (and its box)
// stays inside the image.
void step_blob(Blob& b, double margin_x, double margin_y, int size) {
    b.cx += b.vx;
    b.cy += b.vy;
    const double hi_x = size - margin_x, hi_y = size - margin_y;
    if (b.cx < margin_x) {
        b.cx = 2.0 * margin_x - b.cx;
        b.vx = -b.vx;
    } else if (b.cx > hi_x) {
        b.cx = 2.0 * hi_x - b.cx;
        b.vx = -b.vx;
    }
    if (b.cy < margin_y) {
        b.cy = 2.0 * margin_y - b.cy;
        b.vy = -b.vy;
    } else if (b.cy > hi_y) {
        b.cy = 2.0 * hi_y - b.cy;
        b.vy = -b.vy;
    }
    b.cx = std::clamp(b.cx, margin_x, hi_x);
    b.cy = std::clamp(b.cy, margin_y, hi_y);
}

Blob random_blob(const GeneratorConfig& cfg, Rng& rng, bool distractor) {
    Blob b{};
    double s = rng.uniform(cfg.target_sigma_min, cfg.target_sigma_max);
    double aspect, speed;
    if (distractor) {
        // Hard distractors borrow the target's brightness and sit close to
        // its shape range; easy ones are dimmer and clearly oversized.
        const bool hard = rng.bernoulli(cfg.distractor_hard_fraction);
        if (hard) {
            s *= rng.uniform(1.0, 1.35);
            aspect = rng.uniform(1.0, 1.7);
            b.peak = rng.uniform(std::max(0.60, cfg.target_peak_min),
                                 cfg.target_peak_max);
        } else {
            s *= rng.uniform(1.2, 2.0);
            aspect = rng.uniform(1.2, 2.4);
            b.peak = rng.uniform(cfg.distractor_peak_min, cfg.distractor_peak_max);
        }
        speed = cfg.drift_speed * 0.6 * rng.uniform(0.5, 1.5);
    } else {
        aspect = rng.uniform(1.0, cfg.target_aspect_max);
        b.peak = rng.uniform(cfg.target_peak_min, cfg.target_peak_max);
        speed = cfg.drift_speed * rng.uniform(0.7, 1.3);
    }
    const bool wide = rng.bernoulli(0.5);
    b.sx = wide ? s * aspect : s;
    b.sy = wide ? s : s * aspect;
    const double mx = 2.0 * b.sx + 1.0, my = 2.0 * b.sy + 1.0;
    b.cx = rng.uniform(mx, cfg.image_size - mx);
    b.cy = rng.uniform(my, cfg.image_size - my);
    const double angle = rng.uniform(0.0, kTwoPi);
    b.vx = speed * std::cos(angle);
    b.vy = speed * std::sin(angle);
    return b;
}

}  // namespace

VideoRecord generate_video(const GeneratorConfig& cfg, const std::string& video_id,
                           bool positive, Rng& rng) {
    const int S = cfg.image_size;
    const int T = cfg.frames_per_video;

    VideoRecord rec;
    rec.video_id = video_id;
    rec.video_label = positive ? 1 : 0;

    const int nd = rng.uniform_int(cfg.distractors_min, cfg.distractors_max);
    std::vector<Blob> distractors;
    for (int i = 0; i < nd; ++i) distractors.push_back(random_blob(cfg, rng, true));

    Blob target{};
    int vis_start = 0, vis_len = 0;
    if (positive) {
        target = random_blob(cfg, rng, false);
        const int min_len = static_cast<int>(std::ceil(cfg.visibility_min * T));
        vis_len = rng.uniform_int(min_len, T);
        vis_start = rng.uniform_int(0, T - vis_len);
    }

    std::vector<FrameAnnotation> anns(T);
    rec.frames.reserve(T);
    for (int t = 0; t < T; ++t) {
        Frame f;
        f.width = S;
        f.height = S;
        f.px.assign(static_cast<std::size_t>(S) * S, 0.0);
        for (double& p : f.px) p = cfg.background + rng.normal(0.0, cfg.noise_sigma);

        for (auto& d : distractors) {
            render_blob(f, d);
            step_blob(d, 2.0 * d.sx + 1.0, 2.0 * d.sy + 1.0, S);
        }

        anns[t].frame_index = t;
        if (positive) {
            if (t >= vis_start && t < vis_start + vis_len) {
                Blob lit = target;
                lit.peak *= rng.uniform(0.92, 1.08);
                render_blob(f, lit);
                BoundingBox box;
                box.cx = target.cx / S;
                box.cy = target.cy / S;
                box.w = 4.0 * target.sx / S;
                box.h = 4.0 * target.sy / S;
                anns[t].boxes.push_back(box);
            }
            step_blob(target, 2.0 * target.sx + 1.0, 2.0 * target.sy + 1.0, S);
        }

        for (double& p : f.px) p = std::clamp(p, 0.0, 1.0);
        rec.frames.push_back(std::move(f));
    }
    rec.annotations = std::move(anns);
    return rec;
}

namespace {

enum class Role { Full, Weak, Eval };

std::vector<VideoRecord> make_split(const GeneratorConfig& cfg, Rng& master,
                                    int count, double positive_fraction,
                                    const char* prefix, int ordinal_base, Role role) {
    const int n_pos = static_cast<int>(std::lround(positive_fraction * count));
    std::vector<int> labels(count, 0);
    std::fill(labels.begin(), labels.begin() + std::min(n_pos, count), 1);
    Rng shuffler = master.fork(static_cast<uint64_t>(ordinal_base) + 999983);
    shuffle(labels, shuffler);

    std::vector<VideoRecord> out;
    out.reserve(count);
    for (int i = 0; i < count; ++i) {
        char id[64];
        std::snprintf(id, sizeof(id), "%s%04d", prefix, i);
        Rng vrng = master.fork(static_cast<uint64_t>(ordinal_base) + i);
        VideoRecord rec = generate_video(cfg, id, labels[i] == 1, vrng);
        if (role == Role::Weak) {
            rec.annotations.reset();
        } else {
            rec.video_label.reset();
        }
        out.push_back(std::move(rec));
    }
    return out;
}

}  // namespace

DatasetSplit generate_splits(const GeneratorConfig& cfg) {
    Rng master(cfg.seed);
    DatasetSplit ds;
    ds.fully_labeled = make_split(cfg, master, cfg.num_fully_labeled,
                                  cfg.labeled_positive_fraction, "full_", 0, Role::Full);
    ds.weakly_labeled = make_split(cfg, master, cfg.num_weak, cfg.weak_positive_fraction,
                                   "weak_", 10000, Role::Weak);
    ds.validation = make_split(cfg, master, cfg.num_validation, cfg.eval_positive_fraction,
                               "val_", 20000, Role::Eval);
    ds.test = make_split(cfg, master, cfg.num_test, cfg.eval_positive_fraction, "test_",
                         30000, Role::Eval);
    return ds;
}

}  // namespace wsvod
