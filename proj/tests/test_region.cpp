#include "kakeya/region.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace kakeya;

namespace {

const ExactScalar kInvSqrt3(mpq_class(0), mpq_class(1, 3));

Region2 square(long x0, long y0, long side = 1) {
    return Region2::from_polygons(
        {{{x0, y0}, {x0 + side, y0}, {x0 + side, y0 + side}, {x0, y0 + side}}});
}

Region2 unit_triangle() {
    return Region2::from_polygons({{{-kInvSqrt3, 0}, {kInvSqrt3, 0}, {0, 1}}});
}

ExactScalar random_coord(std::mt19937_64& rng) {
    std::uniform_int_distribution<long> num(-12, 12);
    std::uniform_int_distribution<long> den(1, 4);
    return {mpq_class(num(rng), den(rng)), mpq_class(num(rng), 3 * den(rng))};
}

Polygon random_triangle(std::mt19937_64& rng) {
    while (true) {
        Polygon t{{random_coord(rng), random_coord(rng)},
                  {random_coord(rng), random_coord(rng)},
                  {random_coord(rng), random_coord(rng)}};
        if (!signed_area(t).is_zero()) return t;
    }
}

struct TriD {
    double x[3], y[3];
};

TriD to_double(const Polygon& t) {
    TriD d{};
    for (int i = 0; i < 3; ++i) {
        d.x[i] = t[i].x.to_double();
        d.y[i] = t[i].y.to_double();
    }
    return d;
}

bool inside(const TriD& t, double x, double y) {
    int pos = 0, neg = 0;
    for (int i = 0; i < 3; ++i) {
        const int j = (i + 1) % 3;
        const double c = (t.x[j] - t.x[i]) * (y - t.y[i]) - (t.y[j] - t.y[i]) * (x - t.x[i]);
        if (c > 0) ++pos;
        if (c < 0) ++neg;
    }
    return pos == 0 || neg == 0;
}

// Independent raster estimate of |A u B| and |A n B| for two triangles.
std::pair<double, double> raster_union_intersection(const TriD& a, const TriD& b) {
    double lo_x = 1e9, hi_x = -1e9, lo_y = 1e9, hi_y = -1e9;
    for (const TriD* t : {&a, &b})
        for (int i = 0; i < 3; ++i) {
            lo_x = std::min(lo_x, t->x[i]);
            hi_x = std::max(hi_x, t->x[i]);
            lo_y = std::min(lo_y, t->y[i]);
            hi_y = std::max(hi_y, t->y[i]);
        }
    const int n = 800;
    const double hx = (hi_x - lo_x) / n, hy = (hi_y - lo_y) / n;
    long uni = 0, both = 0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double x = lo_x + (i + 0.5) * hx, y = lo_y + (j + 0.5) * hy;
            const bool ia = inside(a, x, y), ib = inside(b, x, y);
            uni += ia || ib;
            both += ia && ib;
        }
    return {uni * hx * hy, both * hx * hy};
}

}  // namespace

TEST(RegionArea, EquilateralTriangleOfHeightOne) {
    EXPECT_EQ(region_area(unit_triangle()), kInvSqrt3);
}

TEST(RegionArea, EmptyAndUnitSquare) {
    EXPECT_EQ(region_area(Region2{}), ExactScalar(0));
    EXPECT_EQ(region_area(square(0, 0)), ExactScalar(1));
}

TEST(RegionUnion, Idempotent) {
    const Region2 u = region_union(square(0, 0), square(0, 0));
    EXPECT_EQ(region_area(u), ExactScalar(1));
}

TEST(RegionUnion, DisjointAdditivity) {
    EXPECT_EQ(region_area(region_union(square(0, 0), square(1, 0))), ExactScalar(2));
}

TEST(RegionUnion, TwoShiftedSubtrianglesLoseArea) {
    // m = 1 cut-and-shift: halves slide together by a quarter of the base.
    const ExactScalar d = kInvSqrt3 / ExactScalar(4);
    const Region2 left =
        Region2::from_polygons({{{-kInvSqrt3 + d, 0}, {d, 0}, {d, 1}}});
    const Region2 right =
        Region2::from_polygons({{{-d, 0}, {kInvSqrt3 - d, 0}, {-d, 1}}});
    const ExactScalar area = region_area(region_union(left, right));
    EXPECT_LT(area, kInvSqrt3);
    // Horizontal-slice oracle: overlap(y) = d for a(1-y) >= 2d ... see perron tests.
    const ExactScalar shift = ExactScalar(2) * d;
    const ExactScalar overlap = shift - ExactScalar(3) * shift * shift / (ExactScalar(4) * kInvSqrt3);
    EXPECT_EQ(area, kInvSqrt3 - overlap);
}

TEST(RegionIntersect, DisjointIsEmpty) {
    const Region2 r = region_intersect(square(0, 0), square(5, 5));
    EXPECT_TRUE(r.empty());
    EXPECT_EQ(region_area(r), ExactScalar(0));
}

TEST(RegionIntersect, Idempotent) {
    const Region2 t = unit_triangle();
    const Region2 r = region_intersect(t, t);
    EXPECT_EQ(region_area(r), region_area(t));
    EXPECT_TRUE(region_difference(t, r).empty());
}

TEST(RegionProperties, InclusionExclusionExactAndAgainstRaster) {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 40; ++trial) {
        const Polygon ta = random_triangle(rng);
        const Polygon tb = random_triangle(rng);
        const Region2 a = Region2::from_polygons({ta});
        const Region2 b = Region2::from_polygons({tb});
        const ExactScalar u = region_area(region_union(a, b));
        const ExactScalar i = region_area(region_intersect(a, b));
        EXPECT_EQ(u + i, region_area(a) + region_area(b));
        EXPECT_GE(u, max(region_area(a), region_area(b)));
        const auto [ru, ri] = raster_union_intersection(to_double(ta), to_double(tb));
        const double tol = 0.01 * (u.to_double() + 1.0);
        EXPECT_NEAR(u.to_double(), ru, tol);
        EXPECT_NEAR(i.to_double(), ri, tol);
    }
}

TEST(RegionProperties, UnionContainsOperandsBySampling) {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 10; ++trial) {
        const Region2 a = Region2::from_polygons({random_triangle(rng)});
        const Region2 b = Region2::from_polygons({random_triangle(rng)});
        const Region2 u = region_union(a, b);
        for (const auto& poly : a.polygons()) {
            // centroid of each normalized piece of A
            Point2 c{0, 0};
            for (const auto& p : poly) c = c + p;
            c = (ExactScalar(1) / ExactScalar(static_cast<long>(poly.size()))) * c;
            EXPECT_TRUE(contains_point(u, c));
        }
    }
}

TEST(RegionProperties, NormalizedPiecesAreDisjoint) {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 10; ++trial) {
        const Region2 u = region_union(Region2::from_polygons({random_triangle(rng)}),
                                       Region2::from_polygons({random_triangle(rng)}));
        ExactScalar sum;
        for (const auto& p : u.polygons()) {
            EXPECT_GT(signed_area(p).sign(), 0);
            sum += signed_area(p);
        }
        // Renormalizing the pieces as independent polygons must not lose area.
        EXPECT_EQ(region_area(Region2::from_polygons(u.polygons())), sum);
    }
}

TEST(Transform, IdentityRotation) {
    const Region2 s = square(0, 0);
    const Region2 r = transform(s, {0, {0, 0}, {0, 0}});
    EXPECT_EQ(r.polygons(), s.polygons());
}

TEST(Transform, ThreeRotationsBy120AreIdentity) {
    const Region2 t = unit_triangle();
    Region2 r = t;
    for (int i = 0; i < 3; ++i) r = transform(r, {120, {0, 1}, {0, 0}});
    EXPECT_EQ(r.polygons(), t.polygons());
}

TEST(Transform, RejectsOffLatticeAngle) {
    EXPECT_THROW(transform(square(0, 0), {45, {0, 0}, {0, 0}}), std::invalid_argument);
}

TEST(Transform, AreaInvariantAndCommutesWithBooleans) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 10; ++trial) {
        const Region2 a = Region2::from_polygons({random_triangle(rng)});
        const Region2 b = Region2::from_polygons({random_triangle(rng)});
        const RigidMotion m{30 * (trial % 12), {random_coord(rng), random_coord(rng)},
                            {random_coord(rng), random_coord(rng)}};
        EXPECT_EQ(region_area(transform(a, m)), region_area(a));
        const Region2 lhs = transform(region_union(a, b), m);
        const Region2 rhs = region_union(transform(a, m), transform(b, m));
        EXPECT_TRUE(region_difference(lhs, rhs).empty());
        EXPECT_TRUE(region_difference(rhs, lhs).empty());
        const Region2 li = transform(region_intersect(a, b), m);
        const Region2 ri = region_intersect(transform(a, m), transform(b, m));
        EXPECT_EQ(region_area(li), region_area(ri));
    }
}

TEST(ContainsSegment, MedianOfTriangle) {
    const Segment2 s({0, 1}, {0, 0});
    EXPECT_TRUE(contains_segment(unit_triangle(), s));
    EXPECT_FALSE(contains_segment(unit_triangle(), Segment2({10, 1}, {10, 0})));
}

TEST(ContainsSegment, AcrossPieceBoundaries) {
    // Two squares sharing an edge: a segment crossing the seam is contained,
    // one poking out of the union is not.
    const Region2 u = region_union(square(0, 0), square(1, 0));
    EXPECT_TRUE(contains_segment(u, Segment2({0, 0}, {2, 1})));
    EXPECT_FALSE(contains_segment(u, Segment2({0, 0}, {3, 1})));
    // gap between two separated squares
    const Region2 g = region_union(square(0, 0), square(2, 0));
    EXPECT_FALSE(contains_segment(g, Segment2({0, 0}, {3, 1})));
}

TEST(ContainsSegment, SubSegmentsOfContainedSegments) {
    std::mt19937_64 rng(17);
    const Region2 t = unit_triangle();
    std::uniform_int_distribution<long> k(0, 64);
    const Segment2 s({0, 1}, {kInvSqrt3 / ExactScalar(2), 0});
    ASSERT_TRUE(contains_segment(t, s));
    for (int i = 0; i < 30; ++i) {
        long a = k(rng), b = k(rng);
        if (a == b) continue;
        const ExactScalar ta(mpq_class(std::min(a, b), 64)), tb(mpq_class(std::max(a, b), 64));
        EXPECT_TRUE(contains_segment(t, Segment2(s.at(ta), s.at(tb))));
    }
}

TEST(Region2Validation, RejectsDegeneratePolygons) {
    EXPECT_THROW(Region2::from_polygons({{{0, 0}, {1, 1}, {2, 2}}}), std::invalid_argument);
    EXPECT_THROW(Region2::from_polygons({{{0, 0}, {1, 0}}}), std::invalid_argument);
    // bow tie
    EXPECT_THROW(Region2::from_polygons({{{0, 0}, {1, 1}, {1, 0}, {0, 1}}}),
                 std::invalid_argument);
    EXPECT_THROW(Segment2({0, 0}, {0, 0}), std::invalid_argument);
}

TEST(Region2Validation, ClockwiseInputIsReoriented) {
    const Region2 r = Region2::from_polygons({{{0, 0}, {0, 1}, {1, 1}, {1, 0}}});
    EXPECT_EQ(region_area(r), ExactScalar(1));
}

TEST(Region2Json, RoundTripPreservesPiecesAndBytes) {
    const Region2 u = region_union(unit_triangle(), square(0, 0));
    const auto j = u.to_json();
    const Region2 back = Region2::from_json(j);
    EXPECT_EQ(back.to_json().dump(), j.dump());
    EXPECT_EQ(region_area(back), region_area(u));
}

TEST(Region2Json, DocumentedLayout) {
    const Region2 t = unit_triangle();
    const auto j = t.to_json();
    ASSERT_TRUE(j["polygons"].is_array());
    // Each vertex: x = (a_num, a_den, b_num, b_den), then y likewise.
    const auto& v = j["polygons"][0][0];
    ASSERT_EQ(v.size(), 8u);
    EXPECT_EQ(point_from_json(v), t.polygons()[0][0]);
    EXPECT_EQ(scalar_to_json(kInvSqrt3).dump(), "[0,1,1,3]");
}
