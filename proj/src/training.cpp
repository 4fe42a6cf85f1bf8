#include "wsvod/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "wsvod/augment.hpp"
#include "wsvod/detector.hpp"
#include "wsvod/errors.hpp"
#include "wsvod/evaluation.hpp"
#include "wsvod/io.hpp"
#include "wsvod/losses.hpp"
#include "wsvod/options_json.hpp"
#include "wsvod/pseudo_labels.hpp"
#include "wsvod/rng.hpp"

namespace fs = std::filesystem;

namespace wsvod {

namespace {

// Plain SGD, fixed learning rate. No momentum: the inverse transfer blends
// raw theta, and hidden optimizer state would fight it.
struct Sgd {
    double lr;
    void step(ParameterVector& p, const ParameterVector& g) const {
        for (std::size_t i = 0; i < p.size(); ++i) p[i] -= lr * g[i];
    }
};

void check_finite(double loss) {
    if (!std::isfinite(loss)) throw NumericError("loss is not finite");
}

void check_finite(const ParameterVector& p) {
    for (double v : p)
        if (!std::isfinite(v)) throw NumericError("parameters are not finite");
}

struct RunWriter {
    fs::path dir;
    bool on = false;

    RunWriter(const std::string& run_dir, const TrainOptions& opt) {
        if (run_dir.empty()) return;
        on = true;
        dir = run_dir;
        fs::create_directories(dir / "checkpoints");
        std::ofstream out(dir / "config.json");
        if (!out) throw DataError("cannot write " + (dir / "config.json").string());
        out << nlohmann::json(opt).dump(2) << "\n";
    }

    void checkpoint(int epoch, const ModelState& s) const {
        if (!on) return;
        char name[64];
        std::snprintf(name, sizeof(name), "epoch_%04d.theta", epoch);
        save_params((dir / "checkpoints" / name).string(), s.theta);
        std::snprintf(name, sizeof(name), "epoch_%04d.theta_iter", epoch);
        save_params((dir / "checkpoints" / name).string(), s.theta_iter);
        std::snprintf(name, sizeof(name), "epoch_%04d.theta_epoch", epoch);
        save_params((dir / "checkpoints" / name).string(), s.theta_epoch);
    }

    void final_model(const ParameterVector& p) const {
        if (on) save_params((dir / "checkpoints" / "final.theta").string(), p);
    }
};

// Ground-truth boxes per frame of an annotated video; frames without an
// entry read as empty.
std::vector<std::vector<BoundingBox>> boxes_by_frame(const VideoRecord& v) {
    std::vector<std::vector<BoundingBox>> out(v.frames.size());
    if (!v.annotations) throw DataError("video lacks annotations: " + v.video_id);
    for (const auto& ann : *v.annotations) {
        if (ann.frame_index < 0 || ann.frame_index >= static_cast<int>(v.frames.size()))
            throw DataError("annotation index out of range: " + v.video_id);
        out[ann.frame_index] = ann.boxes;
    }
    return out;
}

// Every labeled frame, reshuffled each time the cursor wraps.
struct LabeledPool {
    struct Item {
        const Frame* frame;
        const std::vector<BoundingBox>* boxes;
    };
    std::vector<Item> items;
    std::vector<std::size_t> order;
    std::size_t cursor = 0;

    LabeledPool(const std::vector<VideoRecord>& videos,
                const std::vector<std::vector<std::vector<BoundingBox>>>& gts) {
        for (std::size_t vi = 0; vi < videos.size(); ++vi)
            for (std::size_t t = 0; t < videos[vi].frames.size(); ++t)
                items.push_back({&videos[vi].frames[t], &gts[vi][t]});
        order.resize(items.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    }

    const Item& next(Rng& rng) {
        if (cursor == 0) shuffle(order, rng);
        const Item& it = items[order[cursor]];
        cursor = (cursor + 1) % order.size();
        return it;
    }
};

struct EvalTriple {
    double map_theta, map_iter, map_epoch;
};

EvalTriple eval_state(const DetectorConfig& det, const ModelState& s,
                      const std::vector<VideoRecord>& val) {
    EvalTriple e;
    e.map_theta = evaluate_model(det, s.theta, val).map50;
    e.map_iter = evaluate_model(det, s.theta_iter, val).map50;
    e.map_epoch = evaluate_model(det, s.theta_epoch, val).map50;
    return e;
}

// One supervised frame: forward, loss terms, backward. Returns the frame's
// contribution to L_f_sup (lambda-weighted).
double supervised_frame(const TrainOptions& opt, const ParameterVector& theta,
                        const Frame& frame, const std::vector<BoundingBox>& boxes,
                        Rng& rng, Workspace& ws, ParameterVector& grad) {
    const AugmentedFrame af =
        apply_augmentation(frame, boxes, opt.train.strong_aug, rng);
    const RawPrediction pred = forward(opt.det, theta, af.frame, &ws);
    RawPrediction d_pred;
    d_pred.grid = pred.grid;
    d_pred.data.assign(pred.data.size(), 0.0);
    std::vector<WeightedTarget> targets(af.boxes.size());
    for (std::size_t k = 0; k < af.boxes.size(); ++k) targets[k] = {af.boxes[k], 1.0};
    const FrameLossTerms t = detection_terms(
        opt.det, pred, targets, opt.weights.lambda_coord * opt.weights.lambda_f_sup,
        opt.weights.lambda_conf * opt.weights.lambda_f_sup, &d_pred);
    backward(opt.det, theta, ws, d_pred, grad);
    return opt.weights.lambda_coord * t.coord + opt.weights.lambda_conf * t.conf;
}

}  // namespace

std::vector<std::size_t> labeled_weak_subset(std::size_t n_weak, double fraction,
                                             std::uint64_t seed) {
    std::vector<std::size_t> perm(n_weak);
    for (std::size_t i = 0; i < n_weak; ++i) perm[i] = i;
    Rng rng = Rng(seed).fork(77);
    shuffle(perm, rng);
    const auto keep = static_cast<std::size_t>(
        std::lround(fraction * static_cast<double>(n_weak)));
    perm.resize(std::min(keep, n_weak));
    return perm;
}

BurnInOutcome run_burn_in(const TrainOptions& opt, const DatasetSplit& data,
                          const std::string& run_dir) {
    if (data.fully_labeled.empty())
        throw std::invalid_argument("run_burn_in: no fully labeled videos");
    const RunWriter writer(run_dir, opt);
    const auto& det = opt.det;
    const auto& tc = opt.train;

    std::vector<std::vector<std::vector<BoundingBox>>> gts;
    for (const auto& v : data.fully_labeled) gts.push_back(boxes_by_frame(v));
    LabeledPool pool(data.fully_labeled, gts);

    BurnInOutcome out;
    out.state.theta = init_params(det, tc.seed);
    out.state.theta_iter = out.state.theta;
    out.state.theta_epoch = out.state.theta;

    const Sgd sgd{tc.learning_rate};
    Rng rng = Rng(tc.seed).fork(1);
    Workspace ws;

    const int iters = static_cast<int>(
        (pool.items.size() + tc.batch_size - 1) / std::max(1, tc.batch_size));
    for (int epoch = 1; epoch <= tc.epochs_burn_in; ++epoch) {
        double epoch_loss = 0.0;
        for (int it = 0; it < iters; ++it) {
            ParameterVector grad(out.state.theta.size(), 0.0);
            double batch_loss = 0.0;
            for (int b = 0; b < tc.batch_size; ++b) {
                const auto& item = pool.next(rng);
                batch_loss += supervised_frame(opt, out.state.theta, *item.frame,
                                               *item.boxes, rng, ws, grad);
            }
            check_finite(batch_loss);
            sgd.step(out.state.theta, grad);
            check_finite(out.state.theta);
            ema_iteration(out.state, opt.tsmr.alpha_i);
            epoch_loss += batch_loss;
        }
        ema_epoch(out.state, tc.alpha_e_burn_in);

        const EvalTriple ev = eval_state(det, out.state, data.validation);
        EpochLog log;
        log.phase = "burn_in";
        log.epoch = epoch;
        log.loss_sup = epoch_loss / iters;
        log.loss_total = log.loss_sup;
        log.map_theta = ev.map_theta;
        log.map_iter = ev.map_iter;
        log.map_epoch = ev.map_epoch;
        log.alpha_e = tc.alpha_e_burn_in;
        out.log.push_back(log);
        writer.checkpoint(epoch, out.state);
    }
    return out;
}

MutualOutcome run_mutual_learning(const TrainOptions& opt, const DatasetSplit& data,
                                  const ParameterVector& init,
                                  const std::string& run_dir, int epoch_offset) {
    if (data.fully_labeled.empty())
        throw std::invalid_argument("run_mutual_learning: no fully labeled videos");
    const RunWriter writer(run_dir, opt);
    const auto& det = opt.det;
    const auto& tc = opt.train;

    std::vector<std::vector<std::vector<BoundingBox>>> gts;
    for (const auto& v : data.fully_labeled) gts.push_back(boxes_by_frame(v));
    LabeledPool pool(data.fully_labeled, gts);

    // Videos whose weak label this run may consult.
    std::vector<char> label_ok(data.weakly_labeled.size(), 0);
    for (std::size_t wi :
         labeled_weak_subset(data.weakly_labeled.size(), opt.label_fraction, tc.seed))
        label_ok[wi] = 1;
    const bool labels_needed = opt.use_weak_loss || opt.pseudo.use_weak_filtering;
    if (labels_needed)
        for (std::size_t wi = 0; wi < data.weakly_labeled.size(); ++wi)
            if (label_ok[wi] && !data.weakly_labeled[wi].video_label)
                throw DataError("weak video lacks a label: " +
                                data.weakly_labeled[wi].video_id);

    MutualOutcome out;
    out.state.theta = init;
    out.state.theta_iter = init;
    out.state.theta_epoch = init;

    const Sgd sgd{tc.learning_rate};
    Rng rng = Rng(tc.seed).fork(2);
    Workspace ws;

    TSMRConfig tsmr = opt.tsmr;
    tsmr.adaptive = opt.use_tsmr;

    const int iters = static_cast<int>(
        (pool.items.size() + tc.batch_size - 1) / std::max(1, tc.batch_size));
    std::vector<std::size_t> weak_order(data.weakly_labeled.size());
    for (std::size_t i = 0; i < weak_order.size(); ++i) weak_order[i] = i;
    std::size_t weak_cursor = 0;

    for (int epoch = 1; epoch <= tc.epochs_mutual; ++epoch) {
        double e_sup = 0.0, e_semi = 0.0, e_weak = 0.0;
        for (int it = 0; it < iters; ++it) {
            ParameterVector grad(init.size(), 0.0);
            double l_sup = 0.0, l_semi = 0.0, l_weak = 0.0;

            for (int b = 0; b < tc.batch_size; ++b) {
                const auto& item = pool.next(rng);
                l_sup += supervised_frame(opt, out.state.theta, *item.frame, *item.boxes,
                                          rng, ws, grad);
            }

            if (!data.weakly_labeled.empty()) {
                if (weak_cursor == 0) shuffle(weak_order, rng);
                const std::size_t wi = weak_order[weak_cursor];
                weak_cursor = (weak_cursor + 1) % weak_order.size();
                const VideoRecord& video = data.weakly_labeled[wi];
                const bool use_label = label_ok[wi] && video.video_label.has_value();
                const int total = static_cast<int>(video.frames.size());
                const auto clip = sample_subclip(total, std::min(tc.frames_per_video, total));

                // Teacher sees the frames as-is (reduced augmentation).
                std::vector<Frame> teacher_frames;
                teacher_frames.reserve(clip.size());
                for (int t : clip) teacher_frames.push_back(video.frames[t]);
                VideoPseudoLabels labels = generate_pseudo_labels(
                    det, out.state.theta_epoch, teacher_frames, opt.pseudo);
                if (opt.pseudo.use_weak_filtering && use_label) {
                    labels = weak_filter(labels, *video.video_label, opt.pseudo);
                } else if (opt.pseudo.use_weak_filtering) {
                    // No label to consult: plain thresholding at beta, as
                    // if filtering were off for this video.
                    for (auto& frame_labels : labels) {
                        FramePseudoLabels kept;
                        for (const auto& pl : frame_labels)
                            if (pl.confidence > opt.pseudo.beta) kept.push_back(pl);
                        frame_labels = std::move(kept);
                    }
                }
                if (opt.pseudo.use_soft_weights) labels = apply_soft_weights(labels);

                // Student pass: one forward per frame feeds both the
                // pseudo-label loss and the video-level term.
                const std::size_t nf = clip.size();
                std::vector<Workspace> wss(nf);
                std::vector<RawPrediction> preds(nf), d_preds(nf);
                std::vector<int> best_cell(nf, -1);
                std::vector<double> best_conf(nf, 0.0);
                const bool weak_term = opt.use_weak_loss && use_label;
                for (std::size_t f = 0; f < nf; ++f) {
                    std::vector<BoundingBox> boxes(labels[f].size());
                    for (std::size_t k = 0; k < labels[f].size(); ++k)
                        boxes[k] = labels[f][k].box;
                    const AugmentedFrame af = apply_augmentation(
                        video.frames[clip[f]], boxes, tc.strong_aug, rng);
                    preds[f] = forward(det, out.state.theta, af.frame, &wss[f]);
                    d_preds[f].grid = preds[f].grid;
                    d_preds[f].data.assign(preds[f].data.size(), 0.0);

                    std::vector<WeightedTarget> targets(labels[f].size());
                    for (std::size_t k = 0; k < labels[f].size(); ++k) {
                        const double w = opt.pseudo.use_soft_weights
                                             ? labels[f][k].confidence * labels[f][k].confidence
                                             : 1.0;
                        targets[k] = {af.boxes[k], w};
                    }
                    const FrameLossTerms t = detection_terms(
                        det, preds[f], targets,
                        opt.weights.lambda_coord * opt.weights.lambda_f_semi,
                        opt.weights.lambda_conf * opt.weights.lambda_f_semi, &d_preds[f]);
                    l_semi +=
                        opt.weights.lambda_coord * t.coord + opt.weights.lambda_conf * t.conf;

                    if (weak_term) {
                        for (const auto& cd :
                             nms_cells(decode_cells(det, preds[f], 0.0), det.nms_iou)) {
                            if (cd.det.confidence > best_conf[f]) {
                                best_conf[f] = cd.det.confidence;
                                best_cell[f] = cd.cell;
                            }
                        }
                    }
                }

                if (weak_term) {
                    const int label = *video.video_label;
                    double score = 0.0;
                    for (double c : best_conf) score += c;
                    score /= static_cast<double>(nf);
                    l_weak = binary_cross_entropy(score, static_cast<double>(label));
                    double dscore = 0.0;
                    if (score > kProbEps && score < 1.0 - kProbEps)
                        dscore = (score - label) / (score * (1.0 - score));
                    if (dscore != 0.0) {
                        const int g = preds[0].grid;
                        for (std::size_t f = 0; f < nf; ++f) {
                            if (best_cell[f] < 0) continue;
                            const double c = best_conf[f];
                            d_preds[f].at(4, best_cell[f] / g, best_cell[f] % g) +=
                                opt.weights.lambda_v_weak * dscore /
                                static_cast<double>(nf) * c * (1.0 - c);
                        }
                    }
                }
                for (std::size_t f = 0; f < nf; ++f)
                    backward(det, out.state.theta, wss[f], d_preds[f], grad);
            }

            const double total_loss = opt.weights.lambda_f_sup * l_sup +
                                      opt.weights.lambda_f_semi * l_semi +
                                      opt.weights.lambda_v_weak * l_weak;
            check_finite(total_loss);
            sgd.step(out.state.theta, grad);
            check_finite(out.state.theta);
            ema_iteration(out.state, opt.tsmr.alpha_i);
            e_sup += l_sup;
            e_semi += l_semi;
            e_weak += l_weak;
        }

        const double m_s = evaluate_model(det, out.state.theta_iter, data.validation).map50;
        const double m_t = evaluate_model(det, out.state.theta_epoch, data.validation).map50;
        const TSMRRates rates = tsmr_step(out.state, m_t, m_s, tsmr);
        const double map_theta = evaluate_model(det, out.state.theta, data.validation).map50;

        EpochLog log;
        log.phase = "mutual";
        log.epoch = epoch_offset + epoch;
        log.loss_sup = e_sup / iters;
        log.loss_semi = e_semi / iters;
        log.loss_weak = e_weak / iters;
        log.loss_total = opt.weights.lambda_f_sup * log.loss_sup +
                         opt.weights.lambda_f_semi * log.loss_semi +
                         opt.weights.lambda_v_weak * log.loss_weak;
        log.map_theta = map_theta;
        log.map_iter = m_s;
        log.map_epoch = m_t;
        log.alpha_e = rates.alpha_e;
        log.alpha_inv = rates.alpha_inv;
        out.log.push_back(log);
        out.schedule.push_back({epoch_offset + epoch, m_t, m_s, rates.alpha_e, rates.alpha_inv});
        writer.checkpoint(epoch_offset + epoch, out.state);
    }
    return out;
}

TrainOutcome run_training(const TrainOptions& opt, const DatasetSplit& data,
                          const std::string& run_dir, const BurnInOutcome* burn_in) {
    TrainOutcome out;
    BurnInOutcome local;
    if (!burn_in) {
        local = run_burn_in(opt, data, run_dir);
        burn_in = &local;
    }
    out.log = burn_in->log;

    const ParameterVector base = opt.use_hierarchical_ema ? burn_in->state.theta_epoch
                                                          : burn_in->state.theta;
    if (opt.use_unlabeled) {
        MutualOutcome mo =
            run_mutual_learning(opt, data, base, run_dir, opt.train.epochs_burn_in);
        out.log.insert(out.log.end(), mo.log.begin(), mo.log.end());
        out.schedule = std::move(mo.schedule);
        out.deployed = std::move(mo.state.theta_epoch);
    } else {
        out.deployed = base;
    }

    out.val_map = evaluate_model(opt.det, out.deployed, data.validation).map50;
    out.test_map = evaluate_model(opt.det, out.deployed, data.test).map50;
    if (!run_dir.empty()) {
        const RunWriter writer(run_dir, opt);
        writer.final_model(out.deployed);
        write_curves_csv((fs::path(run_dir) / "curves.csv").string(), out.log);
        write_schedule_csv((fs::path(run_dir) / "schedule.csv").string(), out.schedule);
    }
    return out;
}

void write_curves_csv(const std::string& path, const std::vector<EpochLog>& log) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    out << "phase,epoch,loss_sup,loss_semi,loss_weak,loss_total,"
           "map_theta,map_iter,map_epoch,alpha_e,alpha_inv\n";
    char line[320];
    for (const auto& e : log) {
        std::snprintf(line, sizeof(line),
                      "%s,%d,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n",
                      e.phase.c_str(), e.epoch, e.loss_sup, e.loss_semi, e.loss_weak,
                      e.loss_total, e.map_theta, e.map_iter, e.map_epoch, e.alpha_e,
                      e.alpha_inv);
        out << line;
    }
}

void write_schedule_csv(const std::string& path, const std::vector<ScheduleRow>& rows) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    out << "epoch,map_teacher,map_student,alpha_e,alpha_inv\n";
    char line[160];
    for (const auto& r : rows) {
        std::snprintf(line, sizeof(line), "%d,%.9g,%.9g,%.17g,%.17g\n", r.epoch, r.m_t,
                      r.m_s, r.alpha_e, r.alpha_inv);
        out << line;
    }
}

}  // namespace wsvod
