#include "wsvod/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "wsvod/errors.hpp"
#include "wsvod/geometry.hpp"

namespace wsvod {

std::vector<ScoredHit> match_detections(const std::vector<Detection>& dets,
                                        const std::vector<BoundingBox>& gts,
                                        double iou_threshold) {
    std::vector<std::size_t> order(dets.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return dets[a].confidence > dets[b].confidence;
    });

    std::vector<char> matched(gts.size(), 0);
    std::vector<ScoredHit> hits(dets.size());
    for (std::size_t k = 0; k < order.size(); ++k) {
        const std::size_t i = order[k];
        double best = 0.0;
        int best_gt = -1;
        for (std::size_t j = 0; j < gts.size(); ++j) {
            if (matched[j]) continue;
            const double v = iou(dets[i].box, gts[j]);
            if (v > best) {
                best = v;
                best_gt = static_cast<int>(j);
            }
        }
        hits[k].confidence = dets[i].confidence;
        if (best_gt >= 0 && best >= iou_threshold) {
            hits[k].tp = true;
            matched[best_gt] = 1;
        }
    }
    return hits;
}

double average_precision(std::vector<ScoredHit> hits, std::size_t n_gt) {
    if (n_gt == 0) return 0.0;
    std::stable_sort(hits.begin(), hits.end(), [](const ScoredHit& a, const ScoredHit& b) {
        return a.confidence > b.confidence;
    });

    const std::size_t n = hits.size();
    std::vector<double> prec(n), rec(n);
    std::size_t tp = 0;
    for (std::size_t k = 0; k < n; ++k) {
        if (hits[k].tp) ++tp;
        prec[k] = static_cast<double>(tp) / static_cast<double>(k + 1);
        rec[k] = static_cast<double>(tp) / static_cast<double>(n_gt);
    }
    // Precision envelope: max precision at any recall >= r.
    for (std::size_t k = n; k-- > 1;) prec[k - 1] = std::max(prec[k - 1], prec[k]);

    double ap = 0.0;
    double prev_rec = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        ap += (rec[k] - prev_rec) * prec[k];
        prev_rec = rec[k];
    }
    return ap;
}

EvalResult evaluate_model(const DetectorConfig& cfg, const ParameterVector& params,
                          const std::vector<VideoRecord>& videos) {
    EvalResult r;
    std::vector<ScoredHit> pooled;
    for (const auto& video : videos) {
        if (!video.annotations)
            throw std::invalid_argument("evaluate_model: video lacks annotations: " +
                                        video.video_id);
        std::vector<const std::vector<BoundingBox>*> gt_of(video.frames.size(), nullptr);
        for (const auto& ann : *video.annotations) {
            if (ann.frame_index < 0 ||
                ann.frame_index >= static_cast<int>(video.frames.size()))
                throw std::invalid_argument("evaluate_model: annotation index out of range");
            gt_of[ann.frame_index] = &ann.boxes;
        }
        static const std::vector<BoundingBox> kNoBoxes;
        for (std::size_t f = 0; f < video.frames.size(); ++f) {
            const auto& gts = gt_of[f] ? *gt_of[f] : kNoBoxes;
            const RawPrediction pred = forward(cfg, params, video.frames[f]);
            const auto dets =
                nms(decode(cfg, pred, cfg.eval_conf_floor), cfg.nms_iou);
            const auto hits = match_detections(dets, gts, cfg.match_iou);
            pooled.insert(pooled.end(), hits.begin(), hits.end());
            r.n_gt += gts.size();
            r.n_det += dets.size();
        }
    }
    for (const auto& h : pooled)
        if (h.tp) ++r.n_tp;
    r.map50 = average_precision(pooled, r.n_gt);

    std::stable_sort(pooled.begin(), pooled.end(), [](const ScoredHit& a, const ScoredHit& b) {
        return a.confidence > b.confidence;
    });
    std::size_t tp = 0;
    for (std::size_t k = 0; k < pooled.size(); ++k) {
        if (pooled[k].tp) ++tp;
        PrPoint pt;
        pt.confidence = pooled[k].confidence;
        pt.precision = static_cast<double>(tp) / static_cast<double>(k + 1);
        pt.recall = r.n_gt ? static_cast<double>(tp) / static_cast<double>(r.n_gt) : 0.0;
        r.curve.push_back(pt);
    }
    return r;
}

void write_eval_json(const std::string& path, const EvalResult& result) {
    nlohmann::json j;
    j["map50"] = result.map50;
    j["n_gt"] = result.n_gt;
    j["n_det"] = result.n_det;
    j["n_tp"] = result.n_tp;
    j["pr_curve"] = nlohmann::json::array();
    for (const auto& p : result.curve)
        j["pr_curve"].push_back(
            {{"confidence", p.confidence}, {"precision", p.precision}, {"recall", p.recall}});
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    out << j.dump(2) << "\n";
}

void write_pr_curve_csv(const std::string& path, const EvalResult& result) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    out << "confidence,precision,recall\n";
    char line[128];
    for (const auto& p : result.curve) {
        std::snprintf(line, sizeof(line), "%.9g,%.9g,%.9g\n", p.confidence, p.precision,
                      p.recall);
        out << line;
    }
}

}  // namespace wsvod
