#pragma once

// delta-tubes in the plane and in space: families, union volumes, and the
// structural checks (essentially distinct, Wolff axiom, stickiness).

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace kakeya {

using Vec3 = Eigen::Vector3d;

/// {a + t omega + v : 0 <= t <= length, v perpendicular to omega, |v| <= delta}.
/// Planar tubes keep z = 0 in both vectors.
struct Tube {
    int dim = 3;
    Vec3 a = Vec3::Zero();
    Vec3 omega = Vec3::UnitX();
    double delta = 0.1;
    double length = 1.0;

    Vec3 end() const { return a + length * omega; }
    Vec3 midpoint() const { return a + 0.5 * length * omega; }
    bool contains(const Vec3& p) const;
    void validate() const;
};

struct TubeFamily {
    int dim = 3;
    double delta = 0.1;
    std::vector<Tube> tubes;
    std::string placement_tag;

    void validate() const;
    nlohmann::json to_json() const;
    static TubeFamily from_json(const nlohmann::json& j);
};

struct Prism {
    Vec3 center = Vec3::Zero();
    Vec3 half = Vec3::Ones();
    /// Columns are the prism axes.
    Eigen::Matrix3d frame = Eigen::Matrix3d::Identity();

    double volume() const { return 8.0 * half.prod(); }
    /// Sufficient test: both core endpoints plus the cross-section radius fit
    /// inside every face pair.
    bool contains(const Tube& t) const;
};

struct VolumeEstimate {
    double value = 0;
    /// Binomial standard error for monte-carlo; half-width of the
    /// discretization band for grid.
    double std_error = 0;
    std::string method;
    /// Cells per unit length (grid) or sample count (monte-carlo).
    std::int64_t resolution = 0;
};

enum class Placement { Bush, Random, PerronBase };
Placement parse_placement(const std::string& s);
std::string placement_name(Placement p);

double tube_volume(const Tube& t);
double total_tube_volume(const TubeFamily& fam);

/// min(|u - v|, |u + v|): chord distance with antipodes identified.
double direction_distance(const Vec3& u, const Vec3& v);
/// Greedy maximal delta-separated set on the half circle (dim 2) or the
/// upper hemisphere (dim 3).
std::vector<Vec3> generate_directions(double delta, int dim);

/// perron_m only matters for Placement::PerronBase.
TubeFamily generate_family(double delta, int dim, Placement placement, std::uint64_t seed,
                           int perron_m = 6);
/// delta^-2 tubes joining (delta j, 0, 0) to (delta k, 1, 0), 1 <= j, k <= 1/delta.
TubeFamily parallel_lines_family(double delta);
/// Parallel vertical unit tubes on the delta-grid of [0,1)^2, listed in
/// Morton order so that every dyadic block of side rho is contiguous.
TubeFamily hierarchical_dyadic_family(double delta);

VolumeEstimate union_volume_grid(const TubeFamily& fam, int cells_per_unit);
VolumeEstimate union_volume_mc(const TubeFamily& fam, std::int64_t samples, std::uint64_t seed);
double kakeya_ratio(const TubeFamily& fam, const VolumeEstimate& vol);

struct PairFlag {
    int i = 0;
    int j = 0;
    double overlap = 0;  // |T_i cap T_j| / |T_i|
    double std_error = 0;
};

struct DistinctReport {
    std::int64_t pairs = 0;
    /// Pairs settled by a deterministic overlap bound <= 1/2.
    std::int64_t certified = 0;
    std::int64_t sampled = 0;
    std::vector<PairFlag> flagged;
    bool passed() const { return flagged.empty(); }
};

DistinctReport essentially_distinct_check(const TubeFamily& fam, int samples_per_pair,
                                          std::uint64_t seed);

struct WolffViolation {
    Prism prism;
    std::string source;  // "random", "principal-plane", "slab"
    int count = 0;
    double bound = 0;  // delta^-2 |R|
};

struct WolffReport {
    int prisms_checked = 0;
    double worst_ratio = 0;  // max count / bound over all checked prisms
    std::vector<WolffViolation> violations;
};

/// Checks the slab N_delta([0,1]^2 x {0}), a principal-plane slab fitted to
/// the family, and `random_prisms` random prisms.  Only finds violations;
/// an empty list is not a proof.
WolffReport wolff_axiom_check(const TubeFamily& fam, int random_prisms, std::uint64_t seed);
int count_contained(const TubeFamily& fam, const Prism& prism);

struct FattenResult {
    TubeFamily kept;
    /// assignment[i] = index into kept.tubes covering input tube i.
    std::vector<int> assignment;
};

/// Two cores are close when their midpoints are within rho in the sup norm
/// and their directions are within rho in direction_distance (both strict).
bool cores_close(const Tube& s, const Tube& t, double rho);
FattenResult fatten(const TubeFamily& fam, double rho);

struct StickyScale {
    double rho = 0;
    int kept = 0;
    double min_normalized = 0;  // min over kept of count * (delta/rho)^dim_factor
    double max_normalized = 0;
    bool sticky = false;
};

struct StickyReport {
    std::vector<StickyScale> scales;
    bool sticky() const;
};

StickyReport sticky_check(const TubeFamily& fam, const std::vector<double>& rhos, double C = 4.0);

}  // namespace kakeya
