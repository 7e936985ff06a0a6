#pragma once

// 2D primitives for the factory-floor world: points, segments, convex
// polygon obstacles, and the clearance queries the motion code relies on.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

namespace intentsim {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2() = default;
    Vec2(double x_, double y_) : x(x_), y(y_) {}

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2 operator/(double s) const { return {x / s, y / s}; }
    Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }

    double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    double cross(const Vec2& o) const { return x * o.y - y * o.x; }
    double norm() const { return std::hypot(x, y); }
    double squared_norm() const { return x * x + y * y; }

    Vec2 normalized() const {
        double n = norm();
        return n > 0.0 ? Vec2{x / n, y / n} : Vec2{0.0, 0.0};
    }

    bool operator==(const Vec2& o) const { return x == o.x && y == o.y; }
};

inline Vec2 from_heading(double heading) {
    return {std::cos(heading), std::sin(heading)};
}

inline double distance(const Vec2& a, const Vec2& b) { return (a - b).norm(); }

// Wrap to (-pi, pi].
inline double wrap_angle(double a) {
    while (a > M_PI) a -= 2.0 * M_PI;
    while (a <= -M_PI) a += 2.0 * M_PI;
    return a;
}

inline double dist_point_segment(const Vec2& p, const Vec2& a, const Vec2& b) {
    Vec2 ab = b - a;
    double len2 = ab.squared_norm();
    if (len2 <= 0.0) return distance(p, a);
    double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
    return distance(p, a + ab * t);
}

inline bool segments_intersect(const Vec2& p1, const Vec2& p2,
                               const Vec2& q1, const Vec2& q2) {
    auto orient = [](const Vec2& a, const Vec2& b, const Vec2& c) {
        return (b - a).cross(c - a);
    };
    const double eps = 1e-12;
    double o1 = orient(p1, p2, q1);
    double o2 = orient(p1, p2, q2);
    double o3 = orient(q1, q2, p1);
    double o4 = orient(q1, q2, p2);
    if (((o1 > eps && o2 < -eps) || (o1 < -eps && o2 > eps)) &&
        ((o3 > eps && o4 < -eps) || (o3 < -eps && o4 > eps)))
        return true;
    auto on_seg = [eps](const Vec2& a, const Vec2& b, const Vec2& p) {
        return std::min(a.x, b.x) - eps <= p.x && p.x <= std::max(a.x, b.x) + eps &&
               std::min(a.y, b.y) - eps <= p.y && p.y <= std::max(a.y, b.y) + eps;
    };
    if (std::abs(o1) <= eps && on_seg(p1, p2, q1)) return true;
    if (std::abs(o2) <= eps && on_seg(p1, p2, q2)) return true;
    if (std::abs(o3) <= eps && on_seg(q1, q2, p1)) return true;
    if (std::abs(o4) <= eps && on_seg(q1, q2, p2)) return true;
    return false;
}

// Convex polygon, vertices in counter-clockwise order.
struct ConvexPolygon {
    std::vector<Vec2> vertices;

    ConvexPolygon() = default;
    explicit ConvexPolygon(std::vector<Vec2> v) : vertices(std::move(v)) {
        if (vertices.size() < 3)
            throw std::invalid_argument("polygon needs at least 3 vertices");
        // normalize winding to CCW
        double area2 = 0.0;
        for (std::size_t i = 0; i < vertices.size(); ++i) {
            const Vec2& a = vertices[i];
            const Vec2& b = vertices[(i + 1) % vertices.size()];
            area2 += a.cross(b);
        }
        if (area2 < 0.0) std::reverse(vertices.begin(), vertices.end());
    }

    static ConvexPolygon rectangle(const Vec2& center, double width, double height) {
        double hw = width / 2.0, hh = height / 2.0;
        return ConvexPolygon({{center.x - hw, center.y - hh},
                              {center.x + hw, center.y - hh},
                              {center.x + hw, center.y + hh},
                              {center.x - hw, center.y + hh}});
    }

    bool contains(const Vec2& p) const {
        for (std::size_t i = 0; i < vertices.size(); ++i) {
            const Vec2& a = vertices[i];
            const Vec2& b = vertices[(i + 1) % vertices.size()];
            if ((b - a).cross(p - a) < 0.0) return false;
        }
        return true;
    }

    // 0 when inside, else distance to the boundary.
    double distance_to(const Vec2& p) const {
        if (contains(p)) return 0.0;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < vertices.size(); ++i) {
            best = std::min(best, dist_point_segment(p, vertices[i],
                                                     vertices[(i + 1) % vertices.size()]));
        }
        return best;
    }

    bool intersects_segment(const Vec2& a, const Vec2& b) const {
        if (contains(a) || contains(b)) return true;
        for (std::size_t i = 0; i < vertices.size(); ++i) {
            if (segments_intersect(a, b, vertices[i],
                                   vertices[(i + 1) % vertices.size()]))
                return true;
        }
        return false;
    }

    Vec2 centroid() const {
        Vec2 c;
        for (const Vec2& v : vertices) c += v;
        return c / static_cast<double>(vertices.size());
    }
};

inline double clearance(const Vec2& p, const std::vector<ConvexPolygon>& obstacles) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& poly : obstacles) best = std::min(best, poly.distance_to(p));
    return best;
}

inline bool segment_hits_any(const Vec2& a, const Vec2& b,
                             const std::vector<ConvexPolygon>& obstacles) {
    for (const auto& poly : obstacles)
        if (poly.intersects_segment(a, b)) return true;
    return false;
}

}  // namespace intentsim
