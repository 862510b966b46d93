#ifndef AGRISUIT_GEOMETRY_HPP
#define AGRISUIT_GEOMETRY_HPP

#include <vector>

namespace agrisuit::geometry {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

// Vertex ring of a simple polygon; the closing edge from back() to front()
// is implicit.
using Ring = std::vector<Point>;

struct Rect {
    double x_min = 0.0, y_min = 0.0, x_max = 0.0, y_max = 0.0;

    double area() const { return (x_max - x_min) * (y_max - y_min); }
};

double signed_area(const Ring& ring);
double polygon_area(const Ring& ring);

// True when no two non-adjacent edges intersect and no adjacent edges
// overlap beyond their shared vertex. O(n^2), fine at parcel size.
bool is_simple(const Ring& ring);

// Sutherland-Hodgman clip of a convex ring against an axis-aligned
// rectangle; exact for convex input.
Ring clip_convex_to_rect(const Ring& ring, const Rect& rect);

// Area of (simple polygon) ∩ (rectangle), by horizontal-slab trapezoid
// decomposition of the polygon and per-trapezoid rectangle clipping.
// Handles concave polygons.
double rect_intersection_area(const Ring& ring, const Rect& rect);

} // namespace agrisuit::geometry

#endif
