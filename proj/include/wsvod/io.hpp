#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "wsvod/detector.hpp"
#include "wsvod/types.hpp"

namespace wsvod {

// 8-bit binary PGM (P5, maxval 255). Pixels map linearly between [0,1]
// doubles and bytes; writing rounds to nearest.
void write_pgm(const std::string& path, const Frame& frame);
Frame read_pgm(const std::string& path);

// One JSON object per line: {"frame_index": n, "boxes": [{cx,cy,w,h}...]}.
void write_annotations_jsonl(const std::string& path,
                             const std::vector<FrameAnnotation>& anns);
std::vector<FrameAnnotation> read_annotations_jsonl(const std::string& path);

// Dataset directory:
//   <dir>/manifest.json
//   <dir>/<split>/<video_id>/frame_NNNN.pgm
//   <dir>/<split>/<video_id>/annotations.jsonl   (annotated videos)
// Weak videos keep their 0/1 label in the manifest instead of boxes.
void save_dataset(const std::string& dir, const DatasetSplit& ds);
DatasetSplit load_dataset(const std::string& dir);

// Flat binary checkpoint: uint64 little-endian count, then count float64
// little-endian values. Loading rejects truncated or oversized files; the
// expected-count overload also rejects a count mismatch.
void save_params(const std::string& path, const ParameterVector& params);
ParameterVector load_params(const std::string& path);
ParameterVector load_params(const std::string& path, std::size_t expected_count);

}  // namespace wsvod
