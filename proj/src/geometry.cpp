#include "busod/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "busod/errors.hpp"

namespace busod::geom {

namespace {

constexpr double kEdgeEps = 1e-9;

double cross(const Point2& o, const Point2& a, const Point2& b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

bool on_segment(const Point2& a, const Point2& b, const Point2& p) {
    double c = cross(a, b, p);
    double len = std::hypot(b.x - a.x, b.y - a.y);
    if (len == 0.0) return std::hypot(p.x - a.x, p.y - a.y) < kEdgeEps;
    if (std::abs(c) / len > kEdgeEps) return false;
    double dot = (p.x - a.x) * (b.x - a.x) + (p.y - a.y) * (b.y - a.y);
    return dot >= -kEdgeEps * len && dot <= len * len + kEdgeEps * len;
}

bool segments_intersect(const Point2& p1, const Point2& p2, const Point2& q1,
                        const Point2& q2) {
    double d1 = cross(q1, q2, p1);
    double d2 = cross(q1, q2, p2);
    double d3 = cross(p1, p2, q1);
    double d4 = cross(p1, p2, q2);
    if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) &&
        ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)))
        return true;
    if (d1 == 0 && on_segment(q1, q2, p1)) return true;
    if (d2 == 0 && on_segment(q1, q2, p2)) return true;
    if (d3 == 0 && on_segment(p1, p2, q1)) return true;
    if (d4 == 0 && on_segment(p1, p2, q2)) return true;
    return false;
}

}  // namespace

double signed_distance(const Point2& p, const DoorLine& line) {
    double dx = line.b.x - line.a.x;
    double dy = line.b.y - line.a.y;
    double len = std::hypot(dx, dy);
    double c = dx * (p.y - line.a.y) - dy * (p.x - line.a.x);
    double d = c / len;
    return line.interior_side == HalfPlane::Positive ? d : -d;
}

bool contains(std::span<const Point2> polygon, const Point2& p) {
    if (polygon.size() < 3)
        throw busod::ConfigError("polygon needs at least 3 vertices");
    size_t n = polygon.size();
    for (size_t i = 0; i < n; ++i) {
        if (on_segment(polygon[i], polygon[(i + 1) % n], p)) return true;
    }
    // Ray casting, half-open edge rule.
    bool inside = false;
    for (size_t i = 0, j = n - 1; i < n; j = i++) {
        const Point2& a = polygon[i];
        const Point2& b = polygon[j];
        if ((a.y > p.y) != (b.y > p.y)) {
            double xint = (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x;
            if (p.x < xint) inside = !inside;
        }
    }
    return inside;
}

Point2 box_center(const BoundingBox& b) {
    return {b.left + b.width / 2.0, b.top + b.height / 2.0};
}

double iou(const BoundingBox& b1, const BoundingBox& b2) {
    double ix = std::min(b1.right(), b2.right()) - std::max(b1.left, b2.left);
    double iy = std::min(b1.bottom(), b2.bottom()) - std::max(b1.top, b2.top);
    if (ix <= 0.0 || iy <= 0.0) return 0.0;
    double inter = ix * iy;
    double uni = b1.area() + b2.area() - inter;
    return uni > 0.0 ? inter / uni : 0.0;
}

bool is_simple_polygon(std::span<const Point2> polygon) {
    size_t n = polygon.size();
    if (n < 3) return false;
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = i + 1; j < n; ++j) {
            // Skip adjacent edges (they share a vertex).
            if (j == i || (j + 1) % n == i || (i + 1) % n == j) continue;
            if (segments_intersect(polygon[i], polygon[(i + 1) % n], polygon[j],
                                   polygon[(j + 1) % n]))
                return false;
        }
    }
    return true;
}

void validate_roi(const Roi& roi) {
    if (!is_simple_polygon(roi.polygon))
        throw busod::ConfigError("ROI polygon is degenerate or self-intersecting");
    const DoorLine& l = roi.door_line;
    if (l.a.x == l.b.x && l.a.y == l.b.y)
        throw busod::ConfigError("door line endpoints coincide");
    if (roi.queue_region && !is_simple_polygon(*roi.queue_region))
        throw busod::ConfigError("queue region polygon is degenerate");
    if (roi.queue_region) {
        // The queue region must live on the exterior side of the door line.
        for (const Point2& v : *roi.queue_region) {
            if (signed_distance(v, l) > 0.0)
                throw busod::ConfigError(
                    "queue region reaches the interior side of the door line");
        }
    }
}

bool box_touches_roi(const BoundingBox& b, const Roi& roi) {
    if (contains(roi.polygon, box_center(b))) return true;
    for (const Point2& v : roi.polygon) {
        if (v.x >= b.left && v.x <= b.right() && v.y >= b.top && v.y <= b.bottom())
            return true;
    }
    const Point2 corners[4] = {{b.left, b.top},
                               {b.right(), b.top},
                               {b.right(), b.bottom()},
                               {b.left, b.bottom()}};
    bool pos = false, neg = false;
    for (const Point2& c : corners) {
        double d = signed_distance(c, roi.door_line);
        pos |= d > 0.0;
        neg |= d < 0.0;
    }
    return pos && neg;
}

}  // namespace busod::geom
