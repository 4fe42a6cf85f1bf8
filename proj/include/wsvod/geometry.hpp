#pragma once

#include <algorithm>
#include <vector>

namespace wsvod {

// Axis-aligned box in normalized image coordinates, center-size form.
struct BoundingBox {
    double cx = 0.0;
    double cy = 0.0;
    double w = 0.0;
    double h = 0.0;

    bool operator==(const BoundingBox&) const = default;
};

struct Corners {
    double x0 = 0.0;
    double y0 = 0.0;
    double x1 = 0.0;
    double y1 = 0.0;
};

inline Corners to_corners(const BoundingBox& b) {
    return {b.cx - 0.5 * b.w, b.cy - 0.5 * b.h, b.cx + 0.5 * b.w, b.cy + 0.5 * b.h};
}

inline BoundingBox from_corners(const Corners& c) {
    return {0.5 * (c.x0 + c.x1), 0.5 * (c.y0 + c.y1), c.x1 - c.x0, c.y1 - c.y0};
}

// Corner form clipped to the unit image, for rasterization and export.
inline Corners clipped_corners(const BoundingBox& b) {
    Corners c = to_corners(b);
    c.x0 = std::clamp(c.x0, 0.0, 1.0);
    c.y0 = std::clamp(c.y0, 0.0, 1.0);
    c.x1 = std::clamp(c.x1, 0.0, 1.0);
    c.y1 = std::clamp(c.y1, 0.0, 1.0);
    return c;
}

// cx,cy in [0,1], w,h in (0,1]
bool box_is_valid(const BoundingBox& b);

// Intersection over union of the raw (unclipped) extents. Pure geometry;
// works for any coordinates, not just normalized ones.
double iou(const BoundingBox& a, const BoundingBox& b);

}  // namespace wsvod
