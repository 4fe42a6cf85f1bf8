#include "wsvod/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "wsvod/errors.hpp"

namespace wsvod {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    return fields;
}

}  // namespace

std::vector<EpochLog> read_curves_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("phase,epoch,", 0) != 0)
        throw DataError("not a curves csv: " + path);
    std::vector<EpochLog> log;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto f = split_csv(line);
        if (f.size() != 11)
            throw DataError(path + ":" + std::to_string(lineno) + ": expected 11 fields");
        try {
            EpochLog e;
            e.phase = f[0];
            e.epoch = std::stoi(f[1]);
            e.loss_sup = std::stod(f[2]);
            e.loss_semi = std::stod(f[3]);
            e.loss_weak = std::stod(f[4]);
            e.loss_total = std::stod(f[5]);
            e.map_theta = std::stod(f[6]);
            e.map_iter = std::stod(f[7]);
            e.map_epoch = std::stod(f[8]);
            e.alpha_e = std::stod(f[9]);
            e.alpha_inv = std::stod(f[10]);
            log.push_back(std::move(e));
        } catch (const std::logic_error&) {
            throw DataError(path + ":" + std::to_string(lineno) + ": bad number");
        }
    }
    if (log.empty()) throw std::invalid_argument("empty curves csv: " + path);
    return log;
}

std::vector<BandPoint> curve_band(const std::vector<std::vector<EpochLog>>& runs,
                                  double EpochLog::*field) {
    std::map<int, std::vector<double>> by_epoch;
    for (const auto& run : runs)
        for (const auto& e : run) by_epoch[e.epoch].push_back(e.*field);
    std::vector<BandPoint> band;
    for (const auto& [epoch, xs] : by_epoch) {
        const SummaryStat s = summarize(xs);
        BandPoint p;
        p.epoch = epoch;
        p.mean = s.mean;
        p.n = s.n;
        if (s.n >= 2) p.half = 1.96 * s.stddev / std::sqrt(static_cast<double>(s.n));
        band.push_back(p);
    }
    return band;
}

namespace {

constexpr double kWidth = 720.0, kHeight = 440.0;
constexpr double kLeft = 64.0, kRight = 24.0, kTop = 28.0, kBottom = 48.0;

struct Scale {
    double x0, x1, y0, y1;
    double px(double x) const {
        return kLeft + (x - x0) / (x1 - x0) * (kWidth - kLeft - kRight);
    }
    double py(double y) const {
        return kHeight - kBottom - (y - y0) / (y1 - y0) * (kHeight - kTop - kBottom);
    }
};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

void svg_open(std::ostream& out, const std::string& title) {
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
        << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight
        << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << kWidth / 2 << "\" y=\"18\" text-anchor=\"middle\" "
           "font-family=\"sans-serif\" font-size=\"14\">"
        << title << "</text>\n";
}

void svg_axes(std::ostream& out, const Scale& s, const std::string& xlabel,
              const std::string& ylabel, int xticks, int yticks) {
    out << "<g stroke=\"#444\" stroke-width=\"1\" font-family=\"sans-serif\" "
           "font-size=\"11\" fill=\"#222\">\n";
    out << "<line x1=\"" << s.px(s.x0) << "\" y1=\"" << s.py(s.y0) << "\" x2=\""
        << s.px(s.x1) << "\" y2=\"" << s.py(s.y0) << "\"/>\n";
    out << "<line x1=\"" << s.px(s.x0) << "\" y1=\"" << s.py(s.y0) << "\" x2=\""
        << s.px(s.x0) << "\" y2=\"" << s.py(s.y1) << "\"/>\n";
    for (int i = 0; i <= xticks; ++i) {
        const double x = s.x0 + (s.x1 - s.x0) * i / xticks;
        out << "<line x1=\"" << s.px(x) << "\" y1=\"" << s.py(s.y0) << "\" x2=\"" << s.px(x)
            << "\" y2=\"" << s.py(s.y0) + 4 << "\"/>\n";
        out << "<text x=\"" << s.px(x) << "\" y=\"" << s.py(s.y0) + 17
            << "\" text-anchor=\"middle\" stroke=\"none\">" << fmt(x) << "</text>\n";
    }
    for (int i = 0; i <= yticks; ++i) {
        const double y = s.y0 + (s.y1 - s.y0) * i / yticks;
        out << "<line x1=\"" << s.px(s.x0) - 4 << "\" y1=\"" << s.py(y) << "\" x2=\""
            << s.px(s.x0) << "\" y2=\"" << s.py(y) << "\"/>\n";
        out << "<text x=\"" << s.px(s.x0) - 8 << "\" y=\"" << s.py(y) + 4
            << "\" text-anchor=\"end\" stroke=\"none\">" << fmt(y) << "</text>\n";
    }
    out << "<text x=\"" << (kLeft + kWidth - kRight) / 2 << "\" y=\"" << kHeight - 10
        << "\" text-anchor=\"middle\" stroke=\"none\">" << xlabel << "</text>\n";
    out << "<text x=\"16\" y=\"" << (kTop + kHeight - kBottom) / 2
        << "\" text-anchor=\"middle\" stroke=\"none\" transform=\"rotate(-90 16 "
        << (kTop + kHeight - kBottom) / 2 << ")\">" << ylabel << "</text>\n";
    out << "</g>\n";
}

void svg_polyline(std::ostream& out, const Scale& s, const std::vector<double>& xs,
                  const std::vector<double>& ys, const std::string& color) {
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.6\" points=\"";
    for (std::size_t i = 0; i < xs.size(); ++i)
        out << s.px(xs[i]) << "," << s.py(ys[i]) << " ";
    out << "\"/>\n";
}

void svg_legend(std::ostream& out, const std::vector<std::pair<std::string, std::string>>& items) {
    double y = kTop + 10;
    out << "<g font-family=\"sans-serif\" font-size=\"11\">\n";
    for (const auto& [label, color] : items) {
        out << "<line x1=\"" << kLeft + 12 << "\" y1=\"" << y << "\" x2=\"" << kLeft + 36
            << "\" y2=\"" << y << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        out << "<text x=\"" << kLeft + 42 << "\" y=\"" << y + 4 << "\">" << label
            << "</text>\n";
        y += 16;
    }
    out << "</g>\n";
}

}  // namespace

void plot_learning_curves(const std::vector<std::vector<EpochLog>>& runs,
                          const std::string& svg_path,
                          std::vector<std::string>* warnings) {
    if (runs.empty()) throw std::invalid_argument("plot_learning_curves: no runs");
    const auto teacher = curve_band(runs, &EpochLog::map_epoch);
    const auto student = curve_band(runs, &EpochLog::map_iter);
    const auto raw = curve_band(runs, &EpochLog::map_theta);
    if (teacher.empty()) throw std::invalid_argument("plot_learning_curves: no epochs");
    const bool with_band =
        std::all_of(teacher.begin(), teacher.end(), [](const BandPoint& p) { return p.n >= 2; });
    if (!with_band && warnings)
        warnings->push_back("fewer than 2 runs per epoch, plotting without bands");

    Scale s;
    s.x0 = teacher.front().epoch;
    s.x1 = std::max(teacher.back().epoch, teacher.front().epoch + 1);
    double lo = 1.0, hi = 0.0;
    for (const auto* band : {&teacher, &student, &raw}) {
        for (const auto& p : *band) {
            lo = std::min(lo, p.mean - p.half);
            hi = std::max(hi, p.mean + p.half);
        }
    }
    const double pad = std::max(0.02, (hi - lo) * 0.08);
    s.y0 = std::max(0.0, lo - pad);
    s.y1 = std::min(1.0, hi + pad);
    if (s.y1 <= s.y0) s.y1 = s.y0 + 0.1;

    std::ofstream out(svg_path);
    if (!out) throw DataError("cannot write " + svg_path);
    svg_open(out, "validation mAP@0.5 over epochs (" + std::to_string(runs.size()) + " runs)");
    svg_axes(out, s, "epoch", "val mAP@0.5", 8, 5);

    if (with_band) {
        out << "<polygon fill=\"#2c6fbb\" fill-opacity=\"0.18\" stroke=\"none\" points=\"";
        for (const auto& p : teacher) out << s.px(p.epoch) << "," << s.py(p.mean + p.half) << " ";
        for (auto it = teacher.rbegin(); it != teacher.rend(); ++it)
            out << s.px(it->epoch) << "," << s.py(it->mean - it->half) << " ";
        out << "\"/>\n";
    }
    auto line_of = [&](const std::vector<BandPoint>& band, const std::string& color) {
        std::vector<double> xs, ys;
        for (const auto& p : band) {
            xs.push_back(p.epoch);
            ys.push_back(p.mean);
        }
        svg_polyline(out, s, xs, ys, color);
    };
    line_of(raw, "#c0c0c0");
    line_of(student, "#d17f2a");
    line_of(teacher, "#2c6fbb");
    svg_legend(out, {{"epoch EMA (teacher)", "#2c6fbb"},
                     {"iteration EMA (student)", "#d17f2a"},
                     {"raw weights", "#c0c0c0"}});
    out << "</svg>\n";
}

void plot_fraction_sweep(const std::vector<FractionPoint>& points,
                         const std::string& svg_path) {
    if (points.empty()) throw std::invalid_argument("plot_fraction_sweep: no points");
    auto sorted = points;
    std::sort(sorted.begin(), sorted.end(),
              [](const FractionPoint& a, const FractionPoint& b) {
                  return a.fraction < b.fraction;
              });
    Scale s;
    s.x0 = 0.0;
    s.x1 = 1.0;
    double lo = 1.0, hi = 0.0;
    std::vector<double> halves;
    for (const auto& p : sorted) {
        const double half =
            p.test_map.n >= 2 ? 1.96 * p.test_map.stddev / std::sqrt(double(p.test_map.n)) : 0.0;
        halves.push_back(half);
        lo = std::min(lo, p.test_map.mean - half);
        hi = std::max(hi, p.test_map.mean + half);
    }
    const double pad = std::max(0.02, (hi - lo) * 0.1);
    s.y0 = std::max(0.0, lo - pad);
    s.y1 = std::min(1.0, hi + pad);
    if (s.y1 <= s.y0) s.y1 = s.y0 + 0.1;

    std::ofstream out(svg_path);
    if (!out) throw DataError("cannot write " + svg_path);
    svg_open(out, "test mAP@0.5 vs fraction of video labels");
    svg_axes(out, s, "fraction of weak videos with labels", "test mAP@0.5", 4, 5);

    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const auto& p = sorted[i];
        xs.push_back(p.fraction);
        ys.push_back(p.test_map.mean);
        if (halves[i] > 0.0) {
            out << "<line x1=\"" << s.px(p.fraction) << "\" y1=\""
                << s.py(p.test_map.mean - halves[i]) << "\" x2=\"" << s.px(p.fraction)
                << "\" y2=\"" << s.py(p.test_map.mean + halves[i])
                << "\" stroke=\"#2c6fbb\" stroke-width=\"1.4\"/>\n";
        }
    }
    svg_polyline(out, s, xs, ys, "#2c6fbb");
    for (std::size_t i = 0; i < xs.size(); ++i)
        out << "<circle cx=\"" << s.px(xs[i]) << "\" cy=\"" << s.py(ys[i])
            << "\" r=\"3\" fill=\"#2c6fbb\"/>\n";
    out << "</svg>\n";
}

}  // namespace wsvod
