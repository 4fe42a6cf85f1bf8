#include "wsvod/io.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "wsvod/errors.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace wsvod {

namespace {

std::ofstream open_out(const std::string& path, std::ios::openmode mode = {}) {
    std::ofstream out(path, mode | std::ios::out);
    if (!out) throw DataError("cannot open for writing: " + path);
    return out;
}

std::ifstream open_in(const std::string& path, std::ios::openmode mode = {}) {
    std::ifstream in(path, mode | std::ios::in);
    if (!in) throw DataError("cannot open: " + path);
    return in;
}

void put_u64(std::ostream& out, std::uint64_t v) {
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    out.write(b, 8);
}

std::uint64_t get_u64(std::istream& in) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    if (!in) throw DataError("checkpoint truncated");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

json box_to_json(const BoundingBox& b) {
    return json{{"cx", b.cx}, {"cy", b.cy}, {"w", b.w}, {"h", b.h}};
}

BoundingBox box_from_json(const json& j) {
    BoundingBox b;
    b.cx = j.at("cx").get<double>();
    b.cy = j.at("cy").get<double>();
    b.w = j.at("w").get<double>();
    b.h = j.at("h").get<double>();
    return b;
}

}  // namespace

void write_pgm(const std::string& path, const Frame& frame) {
    if (frame.width <= 0 || frame.height <= 0 ||
        frame.px.size() != static_cast<std::size_t>(frame.width) * frame.height)
        throw DataError("write_pgm: malformed frame");
    auto out = open_out(path, std::ios::binary);
    out << "P5\n" << frame.width << " " << frame.height << "\n255\n";
    std::vector<unsigned char> row(frame.px.size());
    for (std::size_t i = 0; i < frame.px.size(); ++i) {
        const double p = std::clamp(frame.px[i], 0.0, 1.0);
        row[i] = static_cast<unsigned char>(std::lround(p * 255.0));
    }
    out.write(reinterpret_cast<const char*>(row.data()), row.size());
    if (!out) throw DataError("write_pgm: write failed: " + path);
}

namespace {

// Next whitespace-delimited token, skipping '#' comment lines.
std::string pgm_token(std::istream& in) {
    std::string tok;
    int c;
    while ((c = in.get()) != EOF) {
        if (c == '#') {
            while ((c = in.get()) != EOF && c != '\n') {
            }
            continue;
        }
        if (std::isspace(c)) {
            if (!tok.empty()) return tok;
            continue;
        }
        tok.push_back(static_cast<char>(c));
    }
    return tok;
}

}  // namespace

Frame read_pgm(const std::string& path) {
    auto in = open_in(path, std::ios::binary);
    if (pgm_token(in) != "P5") throw DataError("read_pgm: not a P5 file: " + path);
    int w = 0, h = 0, maxval = 0;
    try {
        w = std::stoi(pgm_token(in));
        h = std::stoi(pgm_token(in));
        maxval = std::stoi(pgm_token(in));
    } catch (const std::exception&) {
        throw DataError("read_pgm: bad header: " + path);
    }
    if (w <= 0 || h <= 0 || maxval != 255)
        throw DataError("read_pgm: unsupported header: " + path);
    std::vector<unsigned char> raw(static_cast<std::size_t>(w) * h);
    in.read(reinterpret_cast<char*>(raw.data()), raw.size());
    if (in.gcount() != static_cast<std::streamsize>(raw.size()))
        throw DataError("read_pgm: truncated pixel data: " + path);
    Frame f;
    f.width = w;
    f.height = h;
    f.px.resize(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) f.px[i] = raw[i] / 255.0;
    return f;
}

void write_annotations_jsonl(const std::string& path,
                             const std::vector<FrameAnnotation>& anns) {
    auto out = open_out(path);
    for (const auto& ann : anns) {
        json j;
        j["frame_index"] = ann.frame_index;
        j["boxes"] = json::array();
        for (const auto& b : ann.boxes) j["boxes"].push_back(box_to_json(b));
        out << j.dump() << "\n";
    }
    if (!out) throw DataError("write failed: " + path);
}

std::vector<FrameAnnotation> read_annotations_jsonl(const std::string& path) {
    auto in = open_in(path);
    std::vector<FrameAnnotation> anns;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            const json j = json::parse(line);
            FrameAnnotation ann;
            ann.frame_index = j.at("frame_index").get<int>();
            for (const auto& jb : j.at("boxes")) ann.boxes.push_back(box_from_json(jb));
            anns.push_back(std::move(ann));
        } catch (const json::exception& e) {
            throw DataError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return anns;
}

namespace {

const char* kSplitNames[] = {"fully_labeled", "weakly_labeled", "validation", "test"};

std::vector<VideoRecord>& split_of(DatasetSplit& ds, const std::string& name) {
    if (name == "fully_labeled") return ds.fully_labeled;
    if (name == "weakly_labeled") return ds.weakly_labeled;
    if (name == "validation") return ds.validation;
    if (name == "test") return ds.test;
    throw DataError("unknown split: " + name);
}

const std::vector<VideoRecord>& split_of(const DatasetSplit& ds, const std::string& name) {
    return split_of(const_cast<DatasetSplit&>(ds), name);
}

}  // namespace

void save_dataset(const std::string& dir, const DatasetSplit& ds) {
    json manifest;
    manifest["splits"] = json::object();
    int image_w = 0, image_h = 0;
    for (const char* split : kSplitNames) {
        json entries = json::array();
        for (const auto& video : split_of(ds, split)) {
            const fs::path vdir = fs::path(dir) / split / video.video_id;
            fs::create_directories(vdir);
            for (std::size_t t = 0; t < video.frames.size(); ++t) {
                char name[32];
                std::snprintf(name, sizeof(name), "frame_%04zu.pgm", t);
                write_pgm((vdir / name).string(), video.frames[t]);
                image_w = video.frames[t].width;
                image_h = video.frames[t].height;
            }
            json e;
            e["video_id"] = video.video_id;
            e["num_frames"] = video.frames.size();
            e["has_annotations"] = video.annotations.has_value();
            if (video.annotations)
                write_annotations_jsonl((vdir / "annotations.jsonl").string(),
                                        *video.annotations);
            if (video.video_label) e["video_label"] = *video.video_label;
            entries.push_back(std::move(e));
        }
        manifest["splits"][split] = std::move(entries);
    }
    manifest["image_width"] = image_w;
    manifest["image_height"] = image_h;
    auto out = open_out((fs::path(dir) / "manifest.json").string());
    out << manifest.dump(2) << "\n";
    if (!out) throw DataError("write failed: " + dir + "/manifest.json");
}

DatasetSplit load_dataset(const std::string& dir) {
    json manifest;
    try {
        manifest = json::parse(open_in((fs::path(dir) / "manifest.json").string()));
    } catch (const json::exception& e) {
        throw DataError(dir + "/manifest.json: " + e.what());
    }
    DatasetSplit ds;
    for (const char* split : kSplitNames) {
        if (!manifest.at("splits").contains(split))
            throw DataError("manifest missing split: " + std::string(split));
        for (const auto& e : manifest["splits"][split]) {
            VideoRecord video;
            video.video_id = e.at("video_id").get<std::string>();
            const fs::path vdir = fs::path(dir) / split / video.video_id;
            const std::size_t n = e.at("num_frames").get<std::size_t>();
            video.frames.reserve(n);
            for (std::size_t t = 0; t < n; ++t) {
                char name[32];
                std::snprintf(name, sizeof(name), "frame_%04zu.pgm", t);
                video.frames.push_back(read_pgm((vdir / name).string()));
            }
            if (e.at("has_annotations").get<bool>())
                video.annotations = read_annotations_jsonl((vdir / "annotations.jsonl").string());
            if (e.contains("video_label")) video.video_label = e["video_label"].get<int>();
            split_of(ds, split).push_back(std::move(video));
        }
    }
    return ds;
}

void save_params(const std::string& path, const ParameterVector& params) {
    auto out = open_out(path, std::ios::binary);
    put_u64(out, params.size());
    for (double v : params) put_u64(out, std::bit_cast<std::uint64_t>(v));
    if (!out) throw DataError("write failed: " + path);
}

ParameterVector load_params(const std::string& path) {
    auto in = open_in(path, std::ios::binary);
    in.seekg(0, std::ios::end);
    const auto bytes = static_cast<std::uint64_t>(in.tellg());
    in.seekg(0);
    const std::uint64_t count = get_u64(in);
    if (bytes != 8 + 8 * count)
        throw DataError("checkpoint size does not match its header: " + path);
    ParameterVector params(count);
    for (auto& v : params) v = std::bit_cast<double>(get_u64(in));
    return params;
}

ParameterVector load_params(const std::string& path, std::size_t expected_count) {
    ParameterVector p = load_params(path);
    if (p.size() != expected_count)
        throw DataError("checkpoint holds " + std::to_string(p.size()) +
                        " parameters, expected " + std::to_string(expected_count) + ": " +
                        path);
    return p;
}

}  // namespace wsvod
