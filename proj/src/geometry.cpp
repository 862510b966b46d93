#include "agrisuit/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace agrisuit::geometry {

double signed_area(const Ring& ring) {
    double twice = 0.0;
    std::size_t n = ring.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Point& a = ring[i];
        const Point& b = ring[(i + 1) % n];
        twice += a.x * b.y - b.x * a.y;
    }
    return 0.5 * twice;
}

double polygon_area(const Ring& ring) { return std::abs(signed_area(ring)); }

namespace {

double cross(const Point& o, const Point& a, const Point& b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

bool on_segment(const Point& p, const Point& q, const Point& r) {
    return std::min(p.x, r.x) <= q.x && q.x <= std::max(p.x, r.x) &&
           std::min(p.y, r.y) <= q.y && q.y <= std::max(p.y, r.y);
}

// proper or collinear-overlapping intersection of segments pq and rs
bool segments_intersect(const Point& p, const Point& q, const Point& r,
                        const Point& s) {
    double d1 = cross(p, q, r);
    double d2 = cross(p, q, s);
    double d3 = cross(r, s, p);
    double d4 = cross(r, s, q);
    if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) &&
        ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) {
        return true;
    }
    if (d1 == 0 && on_segment(p, r, q)) return true;
    if (d2 == 0 && on_segment(p, s, q)) return true;
    if (d3 == 0 && on_segment(r, p, s)) return true;
    if (d4 == 0 && on_segment(r, q, s)) return true;
    return false;
}

} // namespace

bool is_simple(const Ring& ring) {
    std::size_t n = ring.size();
    if (n < 3) {
        return false;
    }
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t i_next = (i + 1) % n;
        for (std::size_t j = i + 1; j < n; ++j) {
            std::size_t j_next = (j + 1) % n;
            bool adjacent = i_next == j || j_next == i;
            if (adjacent) {
                continue;
            }
            if (segments_intersect(ring[i], ring[i_next], ring[j], ring[j_next])) {
                return false;
            }
        }
    }
    return true;
}

Ring clip_convex_to_rect(const Ring& ring, const Rect& rect) {
    // clip against the four half-planes in turn
    auto clip_half = [](const Ring& input, auto inside, auto intersect) {
        Ring output;
        std::size_t n = input.size();
        for (std::size_t i = 0; i < n; ++i) {
            const Point& current = input[i];
            const Point& previous = input[(i + n - 1) % n];
            bool current_in = inside(current);
            bool previous_in = inside(previous);
            if (current_in) {
                if (!previous_in) {
                    output.push_back(intersect(previous, current));
                }
                output.push_back(current);
            } else if (previous_in) {
                output.push_back(intersect(previous, current));
            }
        }
        return output;
    };

    auto lerp_x = [](const Point& a, const Point& b, double x) {
        double t = (x - a.x) / (b.x - a.x);
        return Point{x, a.y + t * (b.y - a.y)};
    };
    auto lerp_y = [](const Point& a, const Point& b, double y) {
        double t = (y - a.y) / (b.y - a.y);
        return Point{a.x + t * (b.x - a.x), y};
    };

    Ring out = ring;
    out = clip_half(
        out, [&](const Point& p) { return p.x >= rect.x_min; },
        [&](const Point& a, const Point& b) { return lerp_x(a, b, rect.x_min); });
    if (out.empty()) return out;
    out = clip_half(
        out, [&](const Point& p) { return p.x <= rect.x_max; },
        [&](const Point& a, const Point& b) { return lerp_x(a, b, rect.x_max); });
    if (out.empty()) return out;
    out = clip_half(
        out, [&](const Point& p) { return p.y >= rect.y_min; },
        [&](const Point& a, const Point& b) { return lerp_y(a, b, rect.y_min); });
    if (out.empty()) return out;
    out = clip_half(
        out, [&](const Point& p) { return p.y <= rect.y_max; },
        [&](const Point& a, const Point& b) { return lerp_y(a, b, rect.y_max); });
    return out;
}

double rect_intersection_area(const Ring& ring, const Rect& rect) {
    // quick reject on bounding boxes
    double bx_min = ring[0].x, bx_max = ring[0].x;
    double by_min = ring[0].y, by_max = ring[0].y;
    for (const Point& p : ring) {
        bx_min = std::min(bx_min, p.x);
        bx_max = std::max(bx_max, p.x);
        by_min = std::min(by_min, p.y);
        by_max = std::max(by_max, p.y);
    }
    if (bx_max <= rect.x_min || bx_min >= rect.x_max || by_max <= rect.y_min ||
        by_min >= rect.y_max) {
        return 0.0;
    }

    // horizontal slabs at every distinct vertex y; each edge either spans a
    // slab entirely or misses its interior, so slab crossings pair up
    // left-to-right into interior trapezoids
    std::vector<double> ys;
    ys.reserve(ring.size());
    for (const Point& p : ring) {
        ys.push_back(p.y);
    }
    std::sort(ys.begin(), ys.end());
    ys.erase(std::unique(ys.begin(), ys.end()), ys.end());

    std::size_t n = ring.size();
    double total = 0.0;
    struct Crossing {
        double x_low, x_high; // edge x at slab bottom / top
    };
    std::vector<Crossing> crossings;
    for (std::size_t s = 0; s + 1 < ys.size(); ++s) {
        double y0 = ys[s];
        double y1 = ys[s + 1];
        if (y1 <= rect.y_min || y0 >= rect.y_max) {
            continue;
        }
        crossings.clear();
        for (std::size_t i = 0; i < n; ++i) {
            const Point& a = ring[i];
            const Point& b = ring[(i + 1) % n];
            double lo = std::min(a.y, b.y);
            double hi = std::max(a.y, b.y);
            if (lo > y0 || hi < y1 || lo == hi) {
                continue;
            }
            double t0 = (y0 - a.y) / (b.y - a.y);
            double t1 = (y1 - a.y) / (b.y - a.y);
            crossings.push_back({a.x + t0 * (b.x - a.x), a.x + t1 * (b.x - a.x)});
        }
        std::sort(crossings.begin(), crossings.end(),
                  [](const Crossing& lhs, const Crossing& rhs) {
                      double lm = lhs.x_low + lhs.x_high;
                      double rm = rhs.x_low + rhs.x_high;
                      return lm < rm;
                  });
        for (std::size_t k = 0; k + 1 < crossings.size(); k += 2) {
            const Crossing& left = crossings[k];
            const Crossing& right = crossings[k + 1];
            Ring trapezoid{{left.x_low, y0},
                           {right.x_low, y0},
                           {right.x_high, y1},
                           {left.x_high, y1}};
            Ring clipped = clip_convex_to_rect(trapezoid, rect);
            if (clipped.size() >= 3) {
                total += polygon_area(clipped);
            }
        }
    }
    return total;
}

} // namespace agrisuit::geometry
