#include "kakeya/heisenberg.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace kakeya;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST(MembershipDefect, DirectEvaluation) {
    EXPECT_EQ(membership_defect({cplx(0, 1), 1.0, 1.0}), 1.0);
    EXPECT_EQ(membership_defect({0.0, 0.0, 0.0}), 0.0);
}

TEST(MembershipDefect, MatchesExpandedFormula) {
    // Im z3 - (y1 x2 - x1 y2) written out in real coordinates.
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-2, 2);
    for (int k = 0; k < 1000; ++k) {
        const double x1 = u(rng), y1 = u(rng), x2 = u(rng), y2 = u(rng), x3 = u(rng), y3 = u(rng);
        const double expected = std::abs(y3 - (y1 * x2 - x1 * y2));
        EXPECT_NEAR(membership_defect({cplx(x1, y1), cplx(x2, y2), cplx(x3, y3)}), expected, 1e-14);
    }
}

TEST(MembershipDefect, VanishesOnEveryLineOfTheFamily) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int k = 0; k < 200; ++k) {
        ComplexLineParams l{u(rng), u(rng), cplx(u(rng), u(rng)) * 0.7};
        for (const auto& p : complex_segment_points(l, 50)) EXPECT_LT(membership_defect(p), 1e-12);
    }
    // real w with ab = 1 + w^2; inside |a|, |b| <= 1 that forces w = 0, a = b = +-1
    for (const auto& p : complex_segment_points({1.0, 1.0, 0.0}, 50)) EXPECT_LT(membership_defect(p), 1e-12);
}

TEST(MembershipDefect, VerbatimOrderingMissesTheLines) {
    // The ordering Im z1 = Im(z2 conj z3) does not contain generic lines.
    const ComplexLineParams l{0.5, 0.3, cplx(0.2, 0.4)};
    double worst = 0;
    for (const auto& p : complex_segment_points(l, 50)) worst = std::max(worst, verbatim_defect(p));
    EXPECT_GT(worst, 0.05);
    // except when w is real and ab = 1 + w^2
    for (const auto& p : complex_segment_points({1.0, 1.0, 0.0}, 50)) EXPECT_LT(verbatim_defect(p), 1e-12);
}

TEST(ComplexSegment, Parametrization) {
    const CPoint3 o = complex_line_point({0.3, -0.2, cplx(0.1, 0.5)}, 0.0);
    EXPECT_EQ(o.z1, cplx(0));
    EXPECT_EQ(o.z2, cplx(0.1, 0.5));
    EXPECT_EQ(o.z3, cplx(-0.2));
    const CPoint3 h = complex_line_point({0.0, 0.0, 1.0}, 0.5);
    EXPECT_EQ(h.z1, cplx(0.5));
    EXPECT_EQ(h.z2, cplx(1.0));
    EXPECT_EQ(h.z3, cplx(0.5));
    for (const auto& p : complex_segment_points({0.1, 0.1, 0.1}, 500)) EXPECT_LE(std::abs(p.z1), 0.5);
    EXPECT_THROW(complex_segment_points({}, 0), std::invalid_argument);
}

TEST(ComplexFamily, LatticeCounts) {
    const ComplexTubeFamily f = build_complex_family(0.25);
    EXPECT_EQ(f.lattice_count(), 6561);  // 9^4
    // |w| <= 1 on the 9 x 9 grid of step 1/4: 49 lattice points with x^2 + y^2 <= 16
    int disc = 0;
    for (int x = -4; x <= 4; ++x)
        for (int y = -4; y <= 4; ++y) disc += x * x + y * y <= 16;
    EXPECT_EQ(f.count(), 81 * disc);
    EXPECT_LE(f.count(), 6561);
    const ComplexTubeFamily g = build_complex_family(0.125);
    EXPECT_NEAR(static_cast<double>(g.lattice_count()) / f.lattice_count(), std::pow(17.0 / 9.0, 4), 1e-12);
    EXPECT_THROW(build_complex_family(0.3), std::invalid_argument);
}

TEST(ComplexFamily, MembersAreDeltaSeparatedAndInRange) {
    const ComplexTubeFamily f = build_complex_family(0.25);
    for (std::int64_t i = 0; i < f.count(); i += 7) {
        const ComplexLineParams a = f.at(i);
        EXPECT_NO_THROW(a.validate());
        const ComplexLineParams b = f.at((i * 31 + 5) % f.count());
        if (i == (i * 31 + 5) % f.count()) continue;
        const double sup = std::max({std::abs(a.a - b.a), std::abs(a.b - b.b), std::abs(a.w.real() - b.w.real()),
                                     std::abs(a.w.imag() - b.w.imag())});
        EXPECT_GE(sup, 0.25 - 1e-12);
    }
}

TEST(ComplexFamily, TotalVolumeMatchesDirectSumAndStaysOrderOne) {
    const ComplexTubeFamily f = build_complex_family(0.25);
    double direct = 0;
    for (std::int64_t i = 0; i < f.count(); ++i) direct += complex_tube_volume(f.at(i), f.delta);
    EXPECT_NEAR(total_complex_tube_volume(f), direct, 1e-9 * direct);
    // single tube: disc area pi/4 at a = w = 0 times 4-ball pi^2/2 delta^4
    EXPECT_NEAR(complex_tube_volume({}, 0.1), kPi / 4 * kPi * kPi / 2 * 1e-4, 1e-16);
    // Sum |T| ~ 1: bounded above and below across scales
    for (double d : {1.0 / 8, 1.0 / 16, 1.0 / 32}) {
        const double s = total_complex_tube_volume(build_complex_family(d));
        EXPECT_GT(s, 50.0);
        EXPECT_LT(s, 150.0);
    }
}

TEST(Calibration, ConstantTwoContainsTubesAtOneEighth) {
    // The calibration experiment: at delta = 1/8 the tubes sit inside the
    // defect-2 delta band, and the plain defect-delta band is too thin.
    const ComplexTubeFamily f = build_complex_family(0.125);
    EXPECT_EQ(tube_containment(f, 200000, 1).fraction(), 1.0);
    EXPECT_LT(tube_containment(f, 200000, 1, 1.0).fraction(), 0.99);
}

TEST(NeighbourhoodVolume, LinearInDelta) {
    const VolumeEstimate a = heisenberg_neighborhood_volume(1.0 / 16, 2000000, 3);
    const VolumeEstimate b = heisenberg_neighborhood_volume(1.0 / 32, 2000000, 3);
    const double ratio = a.value / b.value;
    const double err = ratio * std::hypot(a.std_error / a.value, b.std_error / b.value);
    EXPECT_NEAR(ratio, 2.0, 4 * err + 0.02);
}

TEST(NeighbourhoodVolume, SaturatesForHugeDelta) {
    const VolumeEstimate v = heisenberg_neighborhood_volume(4.0, 100000, 1);
    EXPECT_EQ(v.value, std::pow(4 * kPi, 3));
}

TEST(NeighbourhoodVolume, DeterministicAndValidated) {
    EXPECT_EQ(heisenberg_neighborhood_volume(0.1, 100000, 9).value,
              heisenberg_neighborhood_volume(0.1, 100000, 9).value);
    EXPECT_THROW(heisenberg_neighborhood_volume(0.1, 100, 9), std::invalid_argument);
}
