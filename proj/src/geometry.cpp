#include "wsvod/geometry.hpp"

namespace wsvod {

bool box_is_valid(const BoundingBox& b) {
    return b.cx >= 0.0 && b.cx <= 1.0 && b.cy >= 0.0 && b.cy <= 1.0 &&
           b.w > 0.0 && b.w <= 1.0 && b.h > 0.0 && b.h <= 1.0;
}

double iou(const BoundingBox& a, const BoundingBox& b) {
    const Corners ca = to_corners(a);
    const Corners cb = to_corners(b);
    const double ix = std::max(0.0, std::min(ca.x1, cb.x1) - std::max(ca.x0, cb.x0));
    const double iy = std::max(0.0, std::min(ca.y1, cb.y1) - std::max(ca.y0, cb.y0));
    const double inter = ix * iy;
    const double area_a = (ca.x1 - ca.x0) * (ca.y1 - ca.y0);
    const double area_b = (cb.x1 - cb.x0) * (cb.y1 - cb.y0);
    const double uni = area_a + area_b - inter;
    if (uni <= 0.0) return 0.0;
    return inter / uni;
}

}  // namespace wsvod
