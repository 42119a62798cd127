#pragma once

#include <optional>
#include <span>
#include <vector>

namespace busod::geom {

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

struct BoundingBox {
    double left = 0.0;
    double top = 0.0;
    double width = 0.0;
    double height = 0.0;

    double right() const { return left + width; }
    double bottom() const { return top + height; }
    double area() const { return width * height; }
};

enum class HalfPlane { Positive, Negative };

// Directed door line; interior_side says which half-plane is "inside the bus".
struct DoorLine {
    Point2 a;
    Point2 b;
    HalfPlane interior_side = HalfPlane::Positive;
};

struct Roi {
    std::vector<Point2> polygon;
    DoorLine door_line;
    std::optional<std::vector<Point2>> queue_region;
};

// Positive iff p lies on the interior side; |result| is the perpendicular
// distance in pixels.
double signed_distance(const Point2& p, const DoorLine& line);

// Boundary points count as inside. Throws ConfigError on <3 vertices.
bool contains(std::span<const Point2> polygon, const Point2& p);

Point2 box_center(const BoundingBox& b);

double iou(const BoundingBox& b1, const BoundingBox& b2);

// Validation run once at configuration load.
bool is_simple_polygon(std::span<const Point2> polygon);
void validate_roi(const Roi& roi);

// True when the box plausibly touches the door region: its center lies in the
// polygon, a polygon vertex lies in the box, or the box corners straddle the
// door line.
bool box_touches_roi(const BoundingBox& b, const Roi& roi);

}  // namespace busod::geom
