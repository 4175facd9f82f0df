#pragma once

// Perron trees: cut the height-1 equilateral triangle into 2^m slivers that
// share its apex, slide them together in pairs, pairs of pairs, ..., and
// keep track of where every sliver went.

#include "kakeya/region.hpp"

#include <vector>

namespace kakeya {

struct PerronSpec {
    int m = 1;
    /// Shift fraction per pairing level, each in [0, 1).
    std::vector<ExactScalar> schedule;

    /// sigma_i = i / (i + 2), i = 1..m.
    static PerronSpec with_default_schedule(int m);
    void validate() const;
};

struct PerronTree {
    PerronSpec spec;
    Region2 region;
    /// Horizontal translation applied to each sliver, left to right.
    std::vector<Point2> piece_shifts;

    nlohmann::json to_json() const;
    /// Rebuilds the region from the stored PerronSpec and checks it against the stored one.
    static PerronTree from_json(const nlohmann::json& j);
};

/// Apex (0,1), base endpoints (-1/sqrt3, 0) and (1/sqrt3, 0); area 1/sqrt3.
Polygon base_triangle();
Point2 apex();

/// 2^m slivers with equal base widths, ordered left to right.
std::vector<Polygon> bisect(const PerronSpec& spec);
PerronTree build_perron_tree(const PerronSpec& spec);

/// Base point reached from the apex at `alpha_degrees` from the downward
/// vertical (positive alpha leans right).  The endpoints +-30 are exact; other
/// angles use tan(alpha) rounded to a dyadic rational with 2^-40 resolution.
/// Throws std::invalid_argument outside [-30, 30].
ExactScalar base_point_for_angle(double alpha_degrees);
/// Apex-to-base segment through base point x, moved with the sliver owning x.
Segment2 tracked_segment(const PerronTree& tree, const ExactScalar& base_x);

struct CoverageReport {
    int sampled = 0;
    int covered = 0;
    std::vector<double> missed_degrees;
    double fraction() const { return sampled == 0 ? 0.0 : static_cast<double>(covered) / sampled; }
};

/// Checks exact containment of the tracked segment for `n_dirs` angles evenly
/// spread over the apex sector [-30, 30] degrees.
CoverageReport direction_coverage(const PerronTree& tree, int n_dirs);
/// Single-direction form; throws for angles outside the sector.
bool covers_direction(const PerronTree& tree, double alpha_degrees);

/// Union of the tree rotated by 0, 120 and 240 degrees about the apex.
Region2 assemble_kakeya(const PerronTree& tree);
/// Tracked segment of the assembled set whose line makes angle
/// `theta_degrees` with the positive x axis (any real angle, mod 180).
Segment2 kakeya_segment(const PerronTree& tree, double theta_degrees);
/// Checks `n_dirs` equispaced directions over the full circle against the
/// assembled set, using the rotated tracked segments.
CoverageReport kakeya_coverage(const PerronTree& tree, const Region2& assembled, int n_dirs);

}  // namespace kakeya
