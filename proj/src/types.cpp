#include "wsvod/types.hpp"

#include <set>

namespace wsvod {

namespace {

void check_video_common(const VideoRecord& v, const std::string& where,
                        std::vector<std::string>& out) {
    if (v.frames.empty()) {
        out.push_back(where + ": video '" + v.video_id + "' has no frames");
        return;
    }
    const int w = v.frames.front().width;
    const int h = v.frames.front().height;
    for (const Frame& f : v.frames) {
        if (f.width != w || f.height != h) {
            out.push_back(where + ": video '" + v.video_id + "' has frames of mixed size");
            break;
        }
    }
    if (v.annotations) {
        std::set<int> seen;
        for (const FrameAnnotation& ann : *v.annotations) {
            if (ann.frame_index < 0 || ann.frame_index >= static_cast<int>(v.frames.size()))
                out.push_back(where + ": video '" + v.video_id + "' annotates frame " +
                              std::to_string(ann.frame_index) + " outside [0," +
                              std::to_string(v.frames.size()) + ")");
            if (!seen.insert(ann.frame_index).second)
                out.push_back(where + ": video '" + v.video_id + "' annotates frame " +
                              std::to_string(ann.frame_index) + " twice");
            for (size_t i = 0; i < ann.boxes.size(); ++i) {
                if (!box_is_valid(ann.boxes[i]))
                    out.push_back(where + ": video '" + v.video_id + "' frame " +
                                  std::to_string(ann.frame_index) + " box " + std::to_string(i) +
                                  " out of range");
                for (size_t j = i + 1; j < ann.boxes.size(); ++j)
                    if (ann.boxes[i] == ann.boxes[j])
                        out.push_back(where + ": video '" + v.video_id + "' frame " +
                                      std::to_string(ann.frame_index) + " has duplicate boxes");
            }
        }
    }
    if (v.video_label && *v.video_label != 0 && *v.video_label != 1)
        out.push_back(where + ": video '" + v.video_id + "' label must be 0 or 1");
}

void check_role(const std::vector<VideoRecord>& vids, const std::string& where, bool want_boxes,
                std::vector<std::string>& out) {
    for (const VideoRecord& v : vids) {
        check_video_common(v, where, out);
        if (want_boxes) {
            if (!v.annotations)
                out.push_back(where + ": video '" + v.video_id + "' lacks frame annotations");
            if (v.video_label)
                out.push_back(where + ": video '" + v.video_id + "' carries a video label");
        } else {
            if (!v.video_label)
                out.push_back(where + ": video '" + v.video_id + "' lacks a video label");
            if (v.annotations)
                out.push_back(where + ": video '" + v.video_id + "' carries frame annotations");
        }
    }
}

}  // namespace

std::vector<std::string> validate_split(const DatasetSplit& split) {
    std::vector<std::string> out;
    check_role(split.fully_labeled, "fully_labeled", true, out);
    check_role(split.weakly_labeled, "weakly_labeled", false, out);
    check_role(split.validation, "validation", true, out);
    check_role(split.test, "test", true, out);

    std::set<std::string> ids;
    auto check_ids = [&](const std::vector<VideoRecord>& vids, const std::string& where) {
        for (const VideoRecord& v : vids)
            if (!ids.insert(v.video_id).second)
                out.push_back(where + ": duplicate video_id '" + v.video_id + "' across splits");
    };
    check_ids(split.fully_labeled, "fully_labeled");
    check_ids(split.weakly_labeled, "weakly_labeled");
    check_ids(split.validation, "validation");
    check_ids(split.test, "test");
    return out;
}

}  // namespace wsvod
