#pragma once

// Exact planar regions over Q[sqrt 3]: boolean operations, areas, rigid
// motions and segment containment.

#include "kakeya/exact_scalar.hpp"

#include "json.hpp"

#include <string>
#include <vector>

namespace kakeya {

struct Point2 {
    ExactScalar x;
    ExactScalar y;

    friend bool operator==(const Point2&, const Point2&) = default;
    friend Point2 operator+(const Point2& a, const Point2& b) { return {a.x + b.x, a.y + b.y}; }
    friend Point2 operator-(const Point2& a, const Point2& b) { return {a.x - b.x, a.y - b.y}; }
    friend Point2 operator*(const ExactScalar& s, const Point2& p) { return {s * p.x, s * p.y}; }
};

inline ExactScalar cross(const Point2& a, const Point2& b) { return a.x * b.y - a.y * b.x; }
inline ExactScalar dot(const Point2& a, const Point2& b) { return a.x * b.x + a.y * b.y; }

/// Closed segment p -> q with p != q.
class Segment2 {
public:
    Segment2(Point2 p, Point2 q);
    const Point2& p() const noexcept { return p_; }
    const Point2& q() const noexcept { return q_; }
    ExactScalar length_squared() const { return dot(q_ - p_, q_ - p_); }
    Point2 at(const ExactScalar& t) const { return p_ + t * (q_ - p_); }

private:
    Point2 p_;
    Point2 q_;
};

using Polygon = std::vector<Point2>;

/// Signed shoelace area (positive for counter-clockwise polygons).
ExactScalar signed_area(const Polygon& poly);

/// Rotation by a multiple of 30 degrees about `center`, followed by a translation.
struct RigidMotion {
    int angle_degrees = 0;
    Point2 center{};
    Point2 translation{};

    Point2 apply(const Point2& p) const;
};

/// Union of simple counter-clockwise polygons with pairwise disjoint interiors.
///
/// Every boolean operation returns a normalized region: its pieces are the
/// maximal trapezoids of a vertical-slab sweep, so areas add without overlap.
class Region2 {
public:
    Region2() = default;

    /// Validates each polygon (at least three vertices, simple, nonzero area),
    /// orients it counter-clockwise and normalizes the union.  Throws
    /// std::invalid_argument on degenerate input.
    static Region2 from_polygons(const std::vector<Polygon>& polygons);
    /// Wraps pieces already known to be normalized (no validation).
    static Region2 from_normalized(std::vector<Polygon> pieces);

    const std::vector<Polygon>& polygons() const noexcept { return pieces_; }
    bool empty() const noexcept { return pieces_.empty(); }
    std::size_t vertex_count() const;

    nlohmann::json to_json() const;
    static Region2 from_json(const nlohmann::json& j);

private:
    std::vector<Polygon> pieces_;
};

Region2 region_union(const Region2& a, const Region2& b);
Region2 region_intersect(const Region2& a, const Region2& b);
Region2 region_difference(const Region2& a, const Region2& b);
/// Union of many regions in a single sweep.
Region2 region_union_all(const std::vector<Region2>& parts);
ExactScalar region_area(const Region2& a);
/// Throws std::invalid_argument when the angle is not a multiple of 30 degrees.
Region2 transform(const Region2& a, const RigidMotion& motion);
bool contains_point(const Region2& a, const Point2& p);
bool contains_segment(const Region2& a, const Segment2& s);

nlohmann::json scalar_to_json(const ExactScalar& v);
ExactScalar scalar_from_json(const nlohmann::json& j);
nlohmann::json point_to_json(const Point2& p);
Point2 point_from_json(const nlohmann::json& j);

}  // namespace kakeya
