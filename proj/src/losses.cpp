#include "wsvod/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "wsvod/dual.hpp"

namespace wsvod {

namespace {

double clamp_prob(double p) { return std::clamp(p, kProbEps, 1.0 - kProbEps); }

// Derivative of BCE(clamp(p), y) w.r.t. p; zero inside the clamp zones.
double bce_deriv(double p, double y) {
    if (p <= kProbEps || p >= 1.0 - kProbEps) return 0.0;
    return (p - y) / (p * (1.0 - p));
}

constexpr double kAspectScale = 4.0 / (3.14159265358979323846 * 3.14159265358979323846);

// Shared CIoU formula; T is double or Dual<4>. The b box is constant.
template <typename T>
T ciou_loss_t(const T& cx, const T& cy, const T& w, const T& h,
              double bcx, double bcy, double bw, double bh) {
    using std::atan;
    using std::max;
    using std::min;

    const double bx0 = bcx - bw * 0.5, bx1 = bcx + bw * 0.5;
    const double by0 = bcy - bh * 0.5, by1 = bcy + bh * 0.5;
    T x0 = cx - w * 0.5, x1 = cx + w * 0.5;
    T y0 = cy - h * 0.5, y1 = cy + h * 0.5;

    T iw = max(min(x1, bx1) - max(x0, bx0), 0.0);
    T ih = max(min(y1, by1) - max(y0, by0), 0.0);
    T inter = iw * ih;
    T uni = w * h + bw * bh - inter;
    T iou_v = inter / uni;

    T rho2 = (cx - bcx) * (cx - bcx) + (cy - bcy) * (cy - bcy);
    T ex = max(x1, bx1) - min(x0, bx0);
    T ey = max(y1, by1) - min(y0, by0);
    T c2 = ex * ex + ey * ey;

    T v = (atan(T(bw) / T(bh)) - atan(w / h)) * (atan(T(bw) / T(bh)) - atan(w / h)) * kAspectScale;
    T alpha = v / ((1.0 - iou_v) + v + 1e-12);

    return 1.0 - (iou_v - rho2 / c2 - alpha * v);
}

}  // namespace

double binary_cross_entropy(double p, double y) {
    const double q = clamp_prob(p);
    return -y * std::log(q) - (1.0 - y) * std::log(1.0 - q);
}

double ciou_loss(const BoundingBox& a, const BoundingBox& b) {
    return ciou_loss_t<double>(a.cx, a.cy, a.w, a.h, b.cx, b.cy, b.w, b.h);
}

std::vector<std::pair<int, std::size_t>> assign_targets(
    int grid, const std::vector<WeightedTarget>& targets) {
    std::vector<char> claimed(static_cast<std::size_t>(grid) * grid, 0);
    std::vector<std::pair<int, std::size_t>> out;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        int gx = std::min(static_cast<int>(targets[i].box.cx * grid), grid - 1);
        int gy = std::min(static_cast<int>(targets[i].box.cy * grid), grid - 1);
        gx = std::max(gx, 0);
        gy = std::max(gy, 0);
        const int cell = gy * grid + gx;
        if (claimed[cell]) continue;
        claimed[cell] = 1;
        out.emplace_back(cell, i);
    }
    return out;
}

FrameLossTerms detection_terms(const DetectorConfig& cfg, const RawPrediction& pred,
                               const std::vector<WeightedTarget>& targets,
                               double lambda_coord, double lambda_conf,
                               RawPrediction* d_pred) {
    const int g = pred.grid;
    if (d_pred && d_pred->grid != g)
        throw std::invalid_argument("detection_terms: gradient grid mismatch");
    const auto assigned = assign_targets(g, targets);

    FrameLossTerms terms;
    const double n = static_cast<double>(assigned.size());
    for (const auto& [cell, ti] : assigned) {
        const int gy = cell / g, gx = cell % g;
        const double wgt = targets[ti].weight;
        const BoundingBox& t = targets[ti].box;

        using D = Dual<4>;
        D tx = D::var(pred.at(0, gy, gx), 0);
        D ty = D::var(pred.at(1, gy, gx), 1);
        D tw = D::var(pred.at(2, gy, gx), 2);
        D th = D::var(pred.at(3, gy, gx), 3);
        D cx = (logistic(tx) + static_cast<double>(gx)) / static_cast<double>(g);
        D cy = (logistic(ty) + static_cast<double>(gy)) / static_cast<double>(g);
        D w = min(exp(tw) * cfg.box_prior, 1.0);
        D h = min(exp(th) * cfg.box_prior, 1.0);

        const D lk = ciou_loss_t<D>(cx, cy, w, h, t.cx, t.cy, t.w, t.h);
        terms.coord += wgt * lk.v;
        if (d_pred) {
            const double scale = lambda_coord * wgt / n;
            for (int ch = 0; ch < 4; ++ch) d_pred->at(ch, gy, gx) += scale * lk.d[ch];
        }
    }
    if (!assigned.empty()) terms.coord /= n;

    std::vector<double> cell_y(static_cast<std::size_t>(g) * g, 0.0);
    std::vector<double> cell_w(static_cast<std::size_t>(g) * g, 1.0);
    for (const auto& [cell, ti] : assigned) {
        cell_y[cell] = 1.0;
        cell_w[cell] = targets[ti].weight;
    }
    const double cells = static_cast<double>(g) * g;
    for (int cell = 0; cell < g * g; ++cell) {
        const int gy = cell / g, gx = cell % g;
        const double p = sigmoid(pred.at(4, gy, gx));
        terms.conf += cell_w[cell] * binary_cross_entropy(p, cell_y[cell]);
        if (d_pred) {
            // d/dlogit of BCE(clamp(sigmoid(l)), y)
            const double dl = bce_deriv(p, cell_y[cell]) * p * (1.0 - p);
            d_pred->at(4, gy, gx) += lambda_conf * cell_w[cell] * dl / cells;
        }
    }
    terms.conf /= cells;
    return terms;
}

namespace {

std::vector<WeightedTarget> plain_targets(const std::vector<BoundingBox>& boxes) {
    std::vector<WeightedTarget> t(boxes.size());
    for (std::size_t i = 0; i < boxes.size(); ++i) t[i] = {boxes[i], 1.0};
    return t;
}

std::vector<WeightedTarget> pseudo_targets(const FramePseudoLabels& labels, bool soft) {
    std::vector<WeightedTarget> t(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const double w = soft ? labels[i].confidence * labels[i].confidence : 1.0;
        t[i] = {labels[i].box, w};
    }
    return t;
}

}  // namespace

double loss_coord(const DetectorConfig& cfg, const RawPrediction& pred,
                  const std::vector<BoundingBox>& targets) {
    return detection_terms(cfg, pred, plain_targets(targets), 0, 0, nullptr).coord;
}

double loss_conf(const DetectorConfig& cfg, const RawPrediction& pred,
                 const std::vector<BoundingBox>& targets) {
    return detection_terms(cfg, pred, plain_targets(targets), 0, 0, nullptr).conf;
}

namespace {

// Shared body for the supervised and semi-supervised batch losses.
template <typename TargetFn>
ValueGrad batch_detection_loss(const DetectorConfig& cfg, const ParameterVector& params,
                               const std::vector<Frame>& frames, TargetFn&& targets_for,
                               const LossWeights& lw, bool want_grad) {
    ValueGrad out;
    if (want_grad) out.grad.assign(params.size(), 0.0);
    Workspace ws;
    for (std::size_t i = 0; i < frames.size(); ++i) {
        const RawPrediction pred = forward(cfg, params, frames[i], want_grad ? &ws : nullptr);
        RawPrediction d_pred;
        if (want_grad) {
            d_pred.grid = pred.grid;
            d_pred.data.assign(pred.data.size(), 0.0);
        }
        const FrameLossTerms t =
            detection_terms(cfg, pred, targets_for(i), lw.lambda_coord, lw.lambda_conf,
                            want_grad ? &d_pred : nullptr);
        out.value += lw.lambda_coord * t.coord + lw.lambda_conf * t.conf;
        if (want_grad) backward(cfg, params, ws, d_pred, out.grad);
    }
    return out;
}

}  // namespace

double loss_f_sup(const DetectorConfig& cfg, const ParameterVector& params,
                  const std::vector<Frame>& frames,
                  const std::vector<FrameAnnotation>& anns,
                  const LossWeights& weights) {
    if (frames.size() != anns.size())
        throw std::invalid_argument("loss_f_sup: frames/annotations size mismatch");
    return batch_detection_loss(
               cfg, params, frames,
               [&](std::size_t i) { return plain_targets(anns[i].boxes); }, weights, false)
        .value;
}

ValueGrad loss_f_sup_grad(const DetectorConfig& cfg, const ParameterVector& params,
                          const std::vector<Frame>& frames,
                          const std::vector<FrameAnnotation>& anns,
                          const LossWeights& weights) {
    if (frames.size() != anns.size())
        throw std::invalid_argument("loss_f_sup: frames/annotations size mismatch");
    return batch_detection_loss(
        cfg, params, frames, [&](std::size_t i) { return plain_targets(anns[i].boxes); },
        weights, true);
}

double loss_f_semi(const DetectorConfig& cfg, const ParameterVector& params,
                   const std::vector<Frame>& frames,
                   const VideoPseudoLabels& labels, const LossWeights& weights,
                   bool soft) {
    if (frames.size() != labels.size())
        throw std::invalid_argument("loss_f_semi: frames/labels size mismatch");
    return batch_detection_loss(
               cfg, params, frames,
               [&](std::size_t i) { return pseudo_targets(labels[i], soft); }, weights, false)
        .value;
}

ValueGrad loss_f_semi_grad(const DetectorConfig& cfg, const ParameterVector& params,
                           const std::vector<Frame>& frames,
                           const VideoPseudoLabels& labels,
                           const LossWeights& weights, bool soft) {
    if (frames.size() != labels.size())
        throw std::invalid_argument("loss_f_semi: frames/labels size mismatch");
    return batch_detection_loss(
        cfg, params, frames, [&](std::size_t i) { return pseudo_targets(labels[i], soft); },
        weights, true);
}

double aggregate_video_confidence(const std::vector<std::vector<Detection>>& per_frame) {
    if (per_frame.empty())
        throw std::invalid_argument("aggregate_video_confidence: no frames");
    double sum = 0.0;
    for (const auto& dets : per_frame) {
        double best = 0.0;
        for (const auto& d : dets) best = std::max(best, d.confidence);
        sum += best;
    }
    return sum / static_cast<double>(per_frame.size());
}

double loss_v_weak(const std::vector<double>& video_scores,
                   const std::vector<int>& video_labels) {
    if (video_scores.size() != video_labels.size())
        throw std::invalid_argument("loss_v_weak: scores/labels size mismatch");
    double total = 0.0;
    for (std::size_t i = 0; i < video_scores.size(); ++i)
        total += binary_cross_entropy(video_scores[i], static_cast<double>(video_labels[i]));
    return total;
}

VideoWeakResult loss_v_weak_grad(const DetectorConfig& cfg,
                                 const ParameterVector& params,
                                 const std::vector<Frame>& frames, int label) {
    if (frames.empty()) throw std::invalid_argument("loss_v_weak_grad: no frames");
    const std::size_t nf = frames.size();
    std::vector<Workspace> ws(nf);
    std::vector<RawPrediction> preds(nf);
    std::vector<int> best_cell(nf, -1);
    std::vector<double> best_conf(nf, 0.0);

    for (std::size_t f = 0; f < nf; ++f) {
        preds[f] = forward(cfg, params, frames[f], &ws[f]);
        const auto kept = nms_cells(decode_cells(cfg, preds[f], 0.0), cfg.nms_iou);
        for (const auto& cd : kept) {
            if (cd.det.confidence > best_conf[f]) {
                best_conf[f] = cd.det.confidence;
                best_cell[f] = cd.cell;
            }
        }
    }

    VideoWeakResult r;
    r.grad.assign(params.size(), 0.0);
    double sum = 0.0;
    for (double c : best_conf) sum += c;
    r.score = sum / static_cast<double>(nf);
    r.value = binary_cross_entropy(r.score, static_cast<double>(label));

    const double dscore = bce_deriv(r.score, static_cast<double>(label));
    if (dscore != 0.0) {
        const int g = preds[0].grid;
        for (std::size_t f = 0; f < nf; ++f) {
            if (best_cell[f] < 0) continue;
            RawPrediction d_pred;
            d_pred.grid = g;
            d_pred.data.assign(preds[f].data.size(), 0.0);
            const double c = best_conf[f];
            d_pred.at(4, best_cell[f] / g, best_cell[f] % g) =
                dscore / static_cast<double>(nf) * c * (1.0 - c);
            backward(cfg, params, ws[f], d_pred, r.grad);
        }
    }
    return r;
}

double loss_combined(double l_sup, double l_semi, double l_weak,
                     const LossWeights& weights) {
    return weights.lambda_f_sup * l_sup + weights.lambda_f_semi * l_semi +
           weights.lambda_v_weak * l_weak;
}

}  // namespace wsvod
