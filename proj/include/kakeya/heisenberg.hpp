#pragma once

// The complex counterexample: a piece of the Heisenberg surface in C^3, the
// 4-parameter family of complex lines inside it, and Monte Carlo volumes.
//
// Convention: H = {Im z3 = Im(z1 conj(z2))}.  This is the form that contains
// the lines (z, w + a z, z conj(w) + b) for real a, b and complex w:
// Im(z conj(w) + b) = Im(z (conj(w) + a conj(z))).  The other ordering,
// Im z1 = Im(z2 conj(z3)), does not contain them (see verbatim_defect).

#include "kakeya/tubes.hpp"

#include <complex>
#include <cstdint>
#include <vector>

namespace kakeya {

using cplx = std::complex<double>;

struct CPoint3 {
    cplx z1, z2, z3;
};

struct ComplexLineParams {
    double a = 0;
    double b = 0;
    cplx w = 0;
    /// |a|, |b|, |w| <= 1.
    void validate() const;
};

/// Points with defect <= kHeisenbergCalibration * delta count as inside
/// N_delta(H).  Along a line of the family |grad F| <= sqrt(3.5) with
/// F = Im z3 - Im(z1 conj z2), and the quadratic term adds at most delta^2/2,
/// so every point of every tube passes for delta <= 1/4.
inline constexpr double kHeisenbergCalibration = 2.0;

double membership_defect(const CPoint3& p);
/// |Im z1 - Im(z2 conj z3)|, the ordering that fails on the line family.
double verbatim_defect(const CPoint3& p);

CPoint3 complex_line_point(const ComplexLineParams& l, cplx z);
/// n sunflower-spiral samples of the disc |z| <= 1/2 pushed through the line.
std::vector<CPoint3> complex_segment_points(const ComplexLineParams& l, int n);

/// Lattice (a, b, Re w, Im w) in (delta Z)^4 cap [-1,1]^4 restricted to
/// |w| <= 1.  Stored implicitly: the finest scales have ~10^9 members.
struct ComplexTubeFamily {
    double delta = 0.25;
    int steps = 4;                // 1/delta
    std::vector<cplx> w_values;   // admissible w lattice points

    std::int64_t lattice_count() const;  // (2/delta + 1)^4
    std::int64_t count() const;          // admissible members
    ComplexLineParams at(std::int64_t index) const;
};

ComplexTubeFamily build_complex_family(double delta);

/// Euclidean delta-neighbourhood in R^6 of the disc piece of the line:
/// area (pi/4)(1 + a^2 + |w|^2) times the 4-ball volume (pi^2/2) delta^4.
double complex_tube_volume(const ComplexLineParams& l, double delta);
double total_complex_tube_volume(const ComplexTubeFamily& fam);

/// Monte Carlo over {|z_i| <= 2} (volume 64 pi^3): fraction of points with
/// defect <= kHeisenbergCalibration * delta, times the box volume.
VolumeEstimate heisenberg_neighborhood_volume(double delta, std::int64_t samples, std::uint64_t seed);

struct ContainmentReport {
    std::int64_t sampled = 0;
    std::int64_t inside = 0;
    double fraction() const { return sampled == 0 ? 0.0 : static_cast<double>(inside) / sampled; }
};

/// Samples random members, random disc points and random offsets in the
/// 6-ball of radius delta, and tests the calibrated defect.
ContainmentReport tube_containment(const ComplexTubeFamily& fam, std::int64_t samples, std::uint64_t seed,
                                   double calibration = kHeisenbergCalibration);

}  // namespace kakeya
