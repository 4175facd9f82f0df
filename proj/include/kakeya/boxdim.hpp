#pragma once

// Box-counting: volumes of delta-neighbourhoods on an occupancy grid, the
// Minkowski dimension fit, and the discretized Kakeya bound |N_delta K| >=
// c delta^eps.

#include <array>
#include <string>
#include <vector>

namespace kakeya {

class Region2;
struct TubeFamily;

using Pt3 = std::array<double, 3>;

/// A compact set given by primitives: points, segments and (2D only) convex
/// polygons.  Planar sets keep z = 0.
struct GeometricSet {
    int dim = 2;
    std::vector<Pt3> points;
    std::vector<std::array<Pt3, 2>> segments;
    std::vector<std::vector<Pt3>> convex_polygons;

    bool empty() const { return points.empty() && segments.empty() && convex_polygons.empty(); }
    void validate() const;

    /// Pieces of a normalized region (each one convex).
    static GeometricSet from_region(const Region2& region);
    /// Union of the tube cores: the line-segment set the tubes thicken.
    static GeometricSet from_tubes(const TubeFamily& fam);
    static GeometricSet from_points(int dim, std::vector<Pt3> pts);

    static GeometricSet unit_square();
    static GeometricSet unit_segment();
    static GeometricSet disc(double radius, int sides = 720);
    /// Level-`level` middle-thirds Cantor iterate, as 2^level segments on the x axis.
    static GeometricSet cantor(int level);
    /// Cantor iterate times [0, 1], as 2^level rectangles.
    static GeometricSet cantor_product(int level);
};

struct BoxCountCurve {
    /// (delta, |N_delta K|) with strictly decreasing delta.
    std::vector<std::pair<double, double>> entries;
    void validate() const;
};

/// Marks grid cells of side delta / cells_per_delta whose centre lies within
/// delta of the set and returns their total volume, for each delta.
BoxCountCurve neighborhood_volume_curve(const GeometricSet& set, const std::vector<double>& deltas,
                                        int cells_per_delta = 4);

struct MinkowskiOptions {
    /// Ignore the largest and smallest delta when the curve has six or more points.
    bool drop_endpoints = true;
    /// Fit log V = a + s log delta + b delta; the b term absorbs the leading
    /// boundary (Steiner) correction that biases a plain slope at desk scales.
    bool boundary_term = true;
};

struct DimensionEstimate {
    double dimension = 0;        // ambient - s, clamped to [0, ambient]
    double plain_dimension = 0;  // from the plain two-parameter fit
    double residual = 0;         // RMS residual of the fit used, in log units
    double delta_max = 0;
    double delta_min = 0;
    int points_used = 0;
};

/// Throws std::invalid_argument with fewer than four curve points.
DimensionEstimate minkowski_estimate(const BoxCountCurve& curve, int ambient, const MinkowskiOptions& opt = {});

struct KakeyaBoundReport {
    double epsilon = 0;
    std::vector<double> c_values;  // |N_delta K| / delta^eps, per curve entry
    double c_epsilon = 0;          // infimum over the curve
    /// Least-squares slope of log c against log delta.  Positive means c
    /// shrinks as delta shrinks.
    double trend = 0;
    bool consistent = false;
};

/// Consistent when the infimum is positive and c does not vanish with delta:
/// trend <= kTrendTolerance.
inline constexpr double kTrendTolerance = 0.1;
KakeyaBoundReport kakeya_bound_check(const BoxCountCurve& curve, double epsilon);

/// "2^-3..2^-9" (dyadic range, both ends included) or a comma list.
std::vector<double> parse_deltas(const std::string& s);

}  // namespace kakeya
