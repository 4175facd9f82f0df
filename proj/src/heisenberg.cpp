#include "kakeya/heisenberg.hpp"

#include "kakeya/parallel.hpp"
#include "kakeya/rng.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace kakeya {

namespace {

constexpr double kPi = std::numbers::pi;

cplx uniform_disc(CounterRng& rng, double radius) {
    const double r = radius * std::sqrt(rng.uniform());
    const double t = 2 * kPi * rng.uniform();
    return std::polar(r, t);
}

int lattice_steps(double delta) {
    if (!(delta > 0 && delta <= 1)) throw std::invalid_argument("heisenberg: delta must lie in (0, 1]");
    const double inv = 1.0 / delta;
    const long n = std::lround(inv);
    if (std::abs(inv - static_cast<double>(n)) > 1e-9 * inv)
        throw std::invalid_argument("heisenberg: 1/delta must be an integer");
    return static_cast<int>(n);
}

}  // namespace

void ComplexLineParams::validate() const {
    if (std::abs(a) > 1 || std::abs(b) > 1 || std::abs(w) > 1 + 1e-12)
        throw std::invalid_argument("complex line: need |a|, |b|, |w| <= 1");
}

double membership_defect(const CPoint3& p) {
    return std::abs(p.z3.imag() - (p.z1 * std::conj(p.z2)).imag());
}

double verbatim_defect(const CPoint3& p) {
    return std::abs(p.z1.imag() - (p.z2 * std::conj(p.z3)).imag());
}

CPoint3 complex_line_point(const ComplexLineParams& l, cplx z) {
    return {z, l.w + l.a * z, z * std::conj(l.w) + l.b};
}

std::vector<CPoint3> complex_segment_points(const ComplexLineParams& l, int n) {
    if (n < 1) throw std::invalid_argument("complex_segment_points: n must be positive");
    std::vector<CPoint3> out;
    out.reserve(n);
    const double golden = kPi * (3.0 - std::sqrt(5.0));
    for (int k = 0; k < n; ++k) {
        const double r = 0.5 * std::sqrt((k + 0.5) / n);
        out.push_back(complex_line_point(l, std::polar(r, golden * k)));
    }
    return out;
}

std::int64_t ComplexTubeFamily::lattice_count() const {
    const std::int64_t side = 2 * static_cast<std::int64_t>(steps) + 1;
    return side * side * side * side;
}

std::int64_t ComplexTubeFamily::count() const {
    const std::int64_t side = 2 * static_cast<std::int64_t>(steps) + 1;
    return side * side * static_cast<std::int64_t>(w_values.size());
}

ComplexLineParams ComplexTubeFamily::at(std::int64_t index) const {
    if (index < 0 || index >= count()) throw std::out_of_range("complex family index");
    const std::int64_t side = 2 * static_cast<std::int64_t>(steps) + 1;
    const std::int64_t wi = index % static_cast<std::int64_t>(w_values.size());
    const std::int64_t rest = index / static_cast<std::int64_t>(w_values.size());
    ComplexLineParams l;
    l.a = static_cast<double>(rest % side - steps) * delta;
    l.b = static_cast<double>(rest / side - steps) * delta;
    l.w = w_values[wi];
    return l;
}

ComplexTubeFamily build_complex_family(double delta) {
    ComplexTubeFamily fam;
    fam.steps = lattice_steps(delta);
    fam.delta = delta;
    for (int x = -fam.steps; x <= fam.steps; ++x)
        for (int y = -fam.steps; y <= fam.steps; ++y)
            if (x * x + y * y <= fam.steps * fam.steps) fam.w_values.emplace_back(x * delta, y * delta);
    return fam;
}

double complex_tube_volume(const ComplexLineParams& l, double delta) {
    const double area = 0.25 * kPi * (1 + l.a * l.a + std::norm(l.w));
    return area * 0.5 * kPi * kPi * std::pow(delta, 4);
}

double total_complex_tube_volume(const ComplexTubeFamily& fam) {
    // Sum of (1 + a^2 + |w|^2) over the product lattice, done axis by axis.
    const double side = 2.0 * fam.steps + 1;
    double sum_a2 = 0;
    for (int k = -fam.steps; k <= fam.steps; ++k) sum_a2 += (k * fam.delta) * (k * fam.delta);
    double sum_w2 = 0;
    for (const auto& w : fam.w_values) sum_w2 += std::norm(w);
    const double nw = static_cast<double>(fam.w_values.size());
    const double total = side * side * nw + side * sum_a2 * nw + side * side * sum_w2;
    return total * 0.25 * kPi * 0.5 * kPi * kPi * std::pow(fam.delta, 4);
}

VolumeEstimate heisenberg_neighborhood_volume(double delta, std::int64_t samples, std::uint64_t seed) {
    if (!(delta > 0)) throw std::invalid_argument("heisenberg_neighborhood_volume: delta must be positive");
    if (samples < 10000) throw std::invalid_argument("heisenberg_neighborhood_volume: need at least 1e4 samples");
    const double threshold = kHeisenbergCalibration * delta;
    constexpr std::int64_t kBlock = 1 << 16;
    const std::int64_t blocks = (samples + kBlock - 1) / kBlock;
    std::vector<std::int64_t> hits(blocks, 0);
    parallel_for(static_cast<std::size_t>(blocks), [&](std::size_t b) {
        CounterRng rng(seed, b);
        const std::int64_t count = std::min(kBlock, samples - static_cast<std::int64_t>(b) * kBlock);
        std::int64_t h = 0;
        for (std::int64_t i = 0; i < count; ++i) {
            CPoint3 p;
            p.z1 = uniform_disc(rng, 2);
            p.z2 = uniform_disc(rng, 2);
            p.z3 = uniform_disc(rng, 2);
            h += membership_defect(p) <= threshold;
        }
        hits[b] = h;
    });
    const std::int64_t total = std::accumulate(hits.begin(), hits.end(), std::int64_t{0});
    const double box = std::pow(4 * kPi, 3);
    const double p = static_cast<double>(total) / static_cast<double>(samples);
    VolumeEstimate v;
    v.method = "monte-carlo";
    v.resolution = samples;
    v.value = p * box;
    v.std_error = box * std::sqrt(p * (1 - p) / static_cast<double>(samples));
    return v;
}

ContainmentReport tube_containment(const ComplexTubeFamily& fam, std::int64_t samples, std::uint64_t seed,
                                   double calibration) {
    if (samples < 1) throw std::invalid_argument("tube_containment: samples must be positive");
    const double threshold = calibration * fam.delta;
    constexpr std::int64_t kBlock = 1 << 14;
    const std::int64_t blocks = (samples + kBlock - 1) / kBlock;
    std::vector<std::int64_t> inside(blocks, 0);
    parallel_for(static_cast<std::size_t>(blocks), [&](std::size_t b) {
        CounterRng rng(seed, b);
        const std::int64_t count = std::min(kBlock, samples - static_cast<std::int64_t>(b) * kBlock);
        std::int64_t in = 0;
        for (std::int64_t i = 0; i < count; ++i) {
            const ComplexLineParams l = fam.at(static_cast<std::int64_t>(rng.next() % static_cast<std::uint64_t>(fam.count())));
            CPoint3 p = complex_line_point(l, uniform_disc(rng, 0.5));
            // uniform offset in the 6-ball of radius delta
            double v[6], norm = 0;
            for (double& c : v) {
                c = rng.normal();
                norm += c * c;
            }
            const double scale = fam.delta * std::pow(rng.uniform(), 1.0 / 6) / std::sqrt(norm);
            p.z1 += cplx(v[0], v[1]) * scale;
            p.z2 += cplx(v[2], v[3]) * scale;
            p.z3 += cplx(v[4], v[5]) * scale;
            in += membership_defect(p) <= threshold;
        }
        inside[b] = in;
    });
    ContainmentReport r;
    r.sampled = samples;
    r.inside = std::accumulate(inside.begin(), inside.end(), std::int64_t{0});
    return r;
}

}  // namespace kakeya
