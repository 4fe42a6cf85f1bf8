#include "wsvod/detector.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "wsvod/geometry.hpp"
#include "wsvod/rng.hpp"

namespace wsvod {

namespace {

// Smooth leaky activation: behaves like a leaky ReLU (slope kLeak for
// x << 0, slope 1 for x >> 0) but is differentiable everywhere, so finite
// difference checks hold tightly. act(x) = ((1+a)x + (1-a)sqrt(x^2+e^2))/2.
constexpr double kLeak = 0.1;
constexpr double kActEps = 0.05;

double act(double x) {
    return 0.5 * ((1.0 + kLeak) * x + (1.0 - kLeak) * std::sqrt(x * x + kActEps * kActEps));
}

double act_deriv(double x) {
    return 0.5 * ((1.0 + kLeak) + (1.0 - kLeak) * x / std::sqrt(x * x + kActEps * kActEps));
}

struct Layout {
    int c1, c2, s, s2, s4, g;
    std::size_t w1, b1, w2, b2, wh, bh, total;
};

Layout layout_of(const DetectorConfig& cfg) {
    Layout L{};
    L.c1 = cfg.conv1_channels;
    L.c2 = cfg.conv2_channels;
    L.s = cfg.image_size;
    L.s2 = L.s / 2;
    L.s4 = L.s / 4;
    L.g = L.s / 8;
    L.w1 = 0;
    L.b1 = L.w1 + static_cast<std::size_t>(L.c1) * 9;
    L.w2 = L.b1 + L.c1;
    L.b2 = L.w2 + static_cast<std::size_t>(L.c2) * L.c1 * 9;
    L.wh = L.b2 + L.c2;
    L.bh = L.wh + static_cast<std::size_t>(5) * L.c2 * 4;
    L.total = L.bh + 5;
    return L;
}

}  // namespace

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    double e = std::exp(x);
    return e / (1.0 + e);
}

std::size_t param_count(const DetectorConfig& cfg) { return layout_of(cfg).total; }

ParameterVector init_params(const DetectorConfig& cfg, std::uint64_t seed) {
    const Layout L = layout_of(cfg);
    ParameterVector p(L.total, 0.0);
    Rng rng(seed);
    const double sd1 = std::sqrt(2.0 / 9.0);
    const double sd2 = std::sqrt(2.0 / (9.0 * L.c1));
    const double sdh = std::sqrt(2.0 / (4.0 * L.c2));
    for (std::size_t i = L.w1; i < L.b1; ++i) p[i] = rng.normal(0.0, sd1);
    for (std::size_t i = L.w2; i < L.b2; ++i) p[i] = rng.normal(0.0, sd2);
    for (std::size_t i = L.wh; i < L.bh; ++i) p[i] = rng.normal(0.0, sdh);
    // Bias the objectness channel down so a fresh model is quiet.
    p[L.bh + 4] = -2.0;
    return p;
}

RawPrediction forward(const DetectorConfig& cfg, const ParameterVector& params,
                      const Frame& frame, Workspace* ws) {
    const Layout L = layout_of(cfg);
    if (params.size() != L.total) throw std::invalid_argument("forward: parameter count mismatch");
    if (frame.width != L.s || frame.height != L.s)
        throw std::invalid_argument("forward: frame size mismatch");

    Workspace local;
    Workspace& w = ws ? *ws : local;
    w.input = frame.px;
    w.a1.assign(static_cast<std::size_t>(L.c1) * L.s2 * L.s2, 0.0);
    w.z1.assign(w.a1.size(), 0.0);
    w.a2.assign(static_cast<std::size_t>(L.c2) * L.s4 * L.s4, 0.0);
    w.z2.assign(w.a2.size(), 0.0);

    const double* w1 = params.data() + L.w1;
    const double* b1 = params.data() + L.b1;
    const double* w2 = params.data() + L.w2;
    const double* b2 = params.data() + L.b2;
    const double* wh = params.data() + L.wh;
    const double* bh = params.data() + L.bh;

    // conv1: 1 -> c1, 3x3 stride 2 pad 1
    for (int oc = 0; oc < L.c1; ++oc) {
        for (int y = 0; y < L.s2; ++y) {
            for (int x = 0; x < L.s2; ++x) {
                double s = b1[oc];
                for (int ky = 0; ky < 3; ++ky) {
                    const int iy = 2 * y + ky - 1;
                    if (iy < 0 || iy >= L.s) continue;
                    for (int kx = 0; kx < 3; ++kx) {
                        const int ix = 2 * x + kx - 1;
                        if (ix < 0 || ix >= L.s) continue;
                        s += w1[(oc * 3 + ky) * 3 + kx] * w.input[iy * L.s + ix];
                    }
                }
                const std::size_t o = (static_cast<std::size_t>(oc) * L.s2 + y) * L.s2 + x;
                w.a1[o] = s;
                w.z1[o] = act(s);
            }
        }
    }

    // conv2: c1 -> c2, 3x3 stride 2 pad 1
    for (int oc = 0; oc < L.c2; ++oc) {
        for (int y = 0; y < L.s4; ++y) {
            for (int x = 0; x < L.s4; ++x) {
                double s = b2[oc];
                for (int ic = 0; ic < L.c1; ++ic) {
                    for (int ky = 0; ky < 3; ++ky) {
                        const int iy = 2 * y + ky - 1;
                        if (iy < 0 || iy >= L.s2) continue;
                        for (int kx = 0; kx < 3; ++kx) {
                            const int ix = 2 * x + kx - 1;
                            if (ix < 0 || ix >= L.s2) continue;
                            s += w2[((oc * L.c1 + ic) * 3 + ky) * 3 + kx] *
                                 w.z1[(static_cast<std::size_t>(ic) * L.s2 + iy) * L.s2 + ix];
                        }
                    }
                }
                const std::size_t o = (static_cast<std::size_t>(oc) * L.s4 + y) * L.s4 + x;
                w.a2[o] = s;
                w.z2[o] = act(s);
            }
        }
    }

    // head: c2 -> 5, 2x2 stride 2, no pad
    RawPrediction pred;
    pred.grid = L.g;
    pred.data.assign(static_cast<std::size_t>(5) * L.g * L.g, 0.0);
    for (int oc = 0; oc < 5; ++oc) {
        for (int y = 0; y < L.g; ++y) {
            for (int x = 0; x < L.g; ++x) {
                double s = bh[oc];
                for (int ic = 0; ic < L.c2; ++ic) {
                    for (int ky = 0; ky < 2; ++ky) {
                        for (int kx = 0; kx < 2; ++kx) {
                            s += wh[((oc * L.c2 + ic) * 2 + ky) * 2 + kx] *
                                 w.z2[(static_cast<std::size_t>(ic) * L.s4 + 2 * y + ky) * L.s4 +
                                      2 * x + kx];
                        }
                    }
                }
                pred.at(oc, y, x) = s;
            }
        }
    }
    return pred;
}

void backward(const DetectorConfig& cfg, const ParameterVector& params,
              const Workspace& ws, const RawPrediction& d_pred,
              ParameterVector& grad) {
    const Layout L = layout_of(cfg);
    if (params.size() != L.total || grad.size() != L.total)
        throw std::invalid_argument("backward: parameter count mismatch");
    if (d_pred.grid != L.g) throw std::invalid_argument("backward: grid mismatch");

    const double* w2 = params.data() + L.w2;
    const double* wh = params.data() + L.wh;
    double* gw1 = grad.data() + L.w1;
    double* gb1 = grad.data() + L.b1;
    double* gw2 = grad.data() + L.w2;
    double* gb2 = grad.data() + L.b2;
    double* gwh = grad.data() + L.wh;
    double* gbh = grad.data() + L.bh;

    std::vector<double> dz2(ws.z2.size(), 0.0);
    std::vector<double> dz1(ws.z1.size(), 0.0);

    // head
    for (int oc = 0; oc < 5; ++oc) {
        for (int y = 0; y < L.g; ++y) {
            for (int x = 0; x < L.g; ++x) {
                const double d = d_pred.at(oc, y, x);
                if (d == 0.0) continue;
                gbh[oc] += d;
                for (int ic = 0; ic < L.c2; ++ic) {
                    for (int ky = 0; ky < 2; ++ky) {
                        for (int kx = 0; kx < 2; ++kx) {
                            const std::size_t zi =
                                (static_cast<std::size_t>(ic) * L.s4 + 2 * y + ky) * L.s4 + 2 * x +
                                kx;
                            const std::size_t wi = ((oc * L.c2 + ic) * 2 + ky) * 2 + kx;
                            gwh[wi] += d * ws.z2[zi];
                            dz2[zi] += d * wh[wi];
                        }
                    }
                }
            }
        }
    }

    // conv2
    for (int oc = 0; oc < L.c2; ++oc) {
        for (int y = 0; y < L.s4; ++y) {
            for (int x = 0; x < L.s4; ++x) {
                const std::size_t o = (static_cast<std::size_t>(oc) * L.s4 + y) * L.s4 + x;
                const double da = dz2[o] * act_deriv(ws.a2[o]);
                if (da == 0.0) continue;
                gb2[oc] += da;
                for (int ic = 0; ic < L.c1; ++ic) {
                    for (int ky = 0; ky < 3; ++ky) {
                        const int iy = 2 * y + ky - 1;
                        if (iy < 0 || iy >= L.s2) continue;
                        for (int kx = 0; kx < 3; ++kx) {
                            const int ix = 2 * x + kx - 1;
                            if (ix < 0 || ix >= L.s2) continue;
                            const std::size_t zi =
                                (static_cast<std::size_t>(ic) * L.s2 + iy) * L.s2 + ix;
                            const std::size_t wi = ((oc * L.c1 + ic) * 3 + ky) * 3 + kx;
                            gw2[wi] += da * ws.z1[zi];
                            dz1[zi] += da * w2[wi];
                        }
                    }
                }
            }
        }
    }

    // conv1
    for (int oc = 0; oc < L.c1; ++oc) {
        for (int y = 0; y < L.s2; ++y) {
            for (int x = 0; x < L.s2; ++x) {
                const std::size_t o = (static_cast<std::size_t>(oc) * L.s2 + y) * L.s2 + x;
                const double da = dz1[o] * act_deriv(ws.a1[o]);
                if (da == 0.0) continue;
                gb1[oc] += da;
                for (int ky = 0; ky < 3; ++ky) {
                    const int iy = 2 * y + ky - 1;
                    if (iy < 0 || iy >= L.s) continue;
                    for (int kx = 0; kx < 3; ++kx) {
                        const int ix = 2 * x + kx - 1;
                        if (ix < 0 || ix >= L.s) continue;
                        gw1[(oc * 3 + ky) * 3 + kx] += da * ws.input[iy * L.s + ix];
                    }
                }
            }
        }
    }
}

std::vector<CellDetection> decode_cells(const DetectorConfig& cfg,
                                        const RawPrediction& pred,
                                        double conf_threshold) {
    const int g = pred.grid;
    std::vector<CellDetection> out;
    for (int gy = 0; gy < g; ++gy) {
        for (int gx = 0; gx < g; ++gx) {
            const double conf = sigmoid(pred.at(4, gy, gx));
            if (!(conf > conf_threshold)) continue;
            Detection d;
            d.confidence = conf;
            d.box.cx = (gx + sigmoid(pred.at(0, gy, gx))) / g;
            d.box.cy = (gy + sigmoid(pred.at(1, gy, gx))) / g;
            d.box.w = std::min(std::exp(pred.at(2, gy, gx)) * cfg.box_prior, 1.0);
            d.box.h = std::min(std::exp(pred.at(3, gy, gx)) * cfg.box_prior, 1.0);
            out.push_back({gy * g + gx, d});
        }
    }
    return out;
}

std::vector<Detection> decode(const DetectorConfig& cfg, const RawPrediction& pred,
                              double conf_threshold) {
    std::vector<Detection> out;
    for (auto& cd : decode_cells(cfg, pred, conf_threshold)) out.push_back(cd.det);
    return out;
}

std::vector<std::size_t> nms_keep_indices(const std::vector<Detection>& dets,
                                          double iou_threshold) {
    std::vector<std::size_t> order(dets.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return dets[a].confidence > dets[b].confidence;
    });
    std::vector<std::size_t> kept;
    for (std::size_t i : order) {
        bool suppressed = false;
        for (std::size_t k : kept) {
            if (iou(dets[i].box, dets[k].box) > iou_threshold) {
                suppressed = true;
                break;
            }
        }
        if (!suppressed) kept.push_back(i);
    }
    return kept;
}

std::vector<Detection> nms(const std::vector<Detection>& dets, double iou_threshold) {
    std::vector<Detection> out;
    for (std::size_t i : nms_keep_indices(dets, iou_threshold)) out.push_back(dets[i]);
    return out;
}

std::vector<CellDetection> nms_cells(const std::vector<CellDetection>& dets,
                                     double iou_threshold) {
    std::vector<Detection> flat(dets.size());
    for (std::size_t i = 0; i < dets.size(); ++i) flat[i] = dets[i].det;
    std::vector<CellDetection> out;
    for (std::size_t i : nms_keep_indices(flat, iou_threshold)) out.push_back(dets[i]);
    return out;
}

ParameterVector finite_difference_gradient(
    const ParameterVector& params,
    const std::function<double(const ParameterVector&)>& loss_fn,
    double step) {
    ParameterVector p = params;
    ParameterVector g(params.size(), 0.0);
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double saved = p[i];
        p[i] = saved + step;
        const double hi = loss_fn(p);
        p[i] = saved - step;
        const double lo = loss_fn(p);
        p[i] = saved;
        g[i] = (hi - lo) / (2.0 * step);
    }
    return g;
}

}  // namespace wsvod
