#include "kakeya/tubes.hpp"

#include "kakeya/parallel.hpp"
#include "kakeya/perron.hpp"
#include "kakeya/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <unordered_map>

namespace kakeya {

namespace {

constexpr double kPi = std::numbers::pi;

Vec3 any_perpendicular(const Vec3& w) {
    const Vec3 helper = std::abs(w.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
    return w.cross(helper).normalized();
}

// Planar normal for dim 2; some perpendicular for dim 3.
Vec3 normal_of(const Tube& t) {
    if (t.dim == 2) return Vec3(-t.omega.y(), t.omega.x(), 0.0);
    return any_perpendicular(t.omega);
}

double cross_section(const Tube& t) {
    return t.dim == 2 ? 2.0 * t.delta : kPi * t.delta * t.delta;
}

struct Box {
    Vec3 lo, hi;
};

Box family_box(const TubeFamily& fam, double margin) {
    Box b{Vec3::Constant(1e300), Vec3::Constant(-1e300)};
    for (const auto& t : fam.tubes) {
        b.lo = b.lo.cwiseMin(t.a.cwiseMin(t.end()));
        b.hi = b.hi.cwiseMax(t.a.cwiseMax(t.end()));
    }
    const double r = fam.delta + margin;
    b.lo.array() -= r;
    b.hi.array() += r;
    if (fam.dim == 2) {
        b.lo.z() = 0;
        b.hi.z() = 0;
    }
    return b;
}

// Uniform bucket grid over the family bounding box.  A tube is listed in every
// cell that could hold a point within delta + margin of its core.
class TubeIndex {
public:
    TubeIndex(const TubeFamily& fam, double margin, int max_cells_per_axis) : fam_(fam) {
        const Box box = family_box(fam, margin);
        lo_ = box.lo;
        const Vec3 ext = box.hi - box.lo;
        cell_ = std::max(2.0 * fam.delta, ext.maxCoeff() / max_cells_per_axis);
        for (int k = 0; k < 3; ++k)
            n_[k] = (k == 2 && fam.dim == 2) ? 1 : static_cast<int>(std::floor(ext[k] / cell_)) + 1;
        const double reach = fam.delta + margin + 0.25 * cell_;
        std::vector<std::pair<std::int64_t, int>> entries;
        std::vector<std::int64_t> mine;
        for (int ti = 0; ti < static_cast<int>(fam.tubes.size()); ++ti) {
            const Tube& t = fam.tubes[ti];
            mine.clear();
            const int steps = static_cast<int>(std::ceil(t.length / (0.5 * cell_)));
            for (int s = 0; s <= steps; ++s) {
                const Vec3 c = t.a + (t.length * s / steps) * t.omega;
                int lo[3], hi[3];
                for (int k = 0; k < 3; ++k) {
                    lo[k] = clamp_axis(k, std::floor((c[k] - reach - lo_[k]) / cell_));
                    hi[k] = clamp_axis(k, std::floor((c[k] + reach - lo_[k]) / cell_));
                }
                for (int x = lo[0]; x <= hi[0]; ++x)
                    for (int y = lo[1]; y <= hi[1]; ++y)
                        for (int z = lo[2]; z <= hi[2]; ++z) mine.push_back(flat(x, y, z));
            }
            std::sort(mine.begin(), mine.end());
            mine.erase(std::unique(mine.begin(), mine.end()), mine.end());
            for (auto c : mine) entries.emplace_back(c, ti);
        }
        std::sort(entries.begin(), entries.end());
        const std::int64_t total = static_cast<std::int64_t>(n_[0]) * n_[1] * n_[2];
        offsets_.assign(total + 1, 0);
        for (const auto& e : entries) ++offsets_[e.first + 1];
        std::partial_sum(offsets_.begin(), offsets_.end(), offsets_.begin());
        items_.reserve(entries.size());
        for (const auto& e : entries) items_.push_back(e.second);
    }

    /// Tubes listed in the cell containing p (empty outside the box).
    std::pair<const int*, const int*> candidates(const Vec3& p) const {
        int idx[3];
        for (int k = 0; k < 3; ++k) {
            const double f = std::floor((p[k] - lo_[k]) / cell_);
            if (f < 0 || f >= n_[k]) return {nullptr, nullptr};
            idx[k] = static_cast<int>(f);
        }
        const std::int64_t c = flat(idx[0], idx[1], idx[2]);
        return {items_.data() + offsets_[c], items_.data() + offsets_[c + 1]};
    }

    bool covered(const Vec3& p) const {
        auto [b, e] = candidates(p);
        for (const int* it = b; it != e; ++it)
            if (fam_.tubes[*it].contains(p)) return true;
        return false;
    }

private:
    int clamp_axis(int k, double v) const {
        return static_cast<int>(std::clamp(v, 0.0, static_cast<double>(n_[k] - 1)));
    }
    std::int64_t flat(int x, int y, int z) const {
        return (static_cast<std::int64_t>(x) * n_[1] + y) * n_[2] + z;
    }

    const TubeFamily& fam_;
    Vec3 lo_;
    double cell_ = 1;
    int n_[3] = {1, 1, 1};
    std::vector<std::int64_t> offsets_;
    std::vector<int> items_;
};

// Minimum distance between segments [p0,p1] and [q0,q1].
double segment_distance(const Vec3& p0, const Vec3& p1, const Vec3& q0, const Vec3& q1) {
    const Vec3 d1 = p1 - p0, d2 = q1 - q0, r = p0 - q0;
    const double a = d1.squaredNorm(), e = d2.squaredNorm(), f = d2.dot(r);
    const double c = d1.dot(r), b = d1.dot(d2);
    const double denom = a * e - b * b;
    double s = denom > 1e-300 ? std::clamp((b * f - c * e) / denom, 0.0, 1.0) : 0.0;
    double t = (b * s + f) / e;
    if (t < 0) {
        t = 0;
        s = std::clamp(-c / a, 0.0, 1.0);
    } else if (t > 1) {
        t = 1;
        s = std::clamp((b - c) / a, 0.0, 1.0);
    }
    return (p0 + s * d1 - (q0 + t * d2)).norm();
}

// Area of the intersection of disks with radii r1, r2 at center distance d.
double lens_area(double r1, double r2, double d) {
    if (d >= r1 + r2) return 0.0;
    const double rmin = std::min(r1, r2);
    if (d <= std::abs(r1 - r2)) return kPi * rmin * rmin;
    const double a1 = std::acos(std::clamp((d * d + r1 * r1 - r2 * r2) / (2 * d * r1), -1.0, 1.0));
    const double a2 = std::acos(std::clamp((d * d + r2 * r2 - r1 * r1) / (2 * d * r2), -1.0, 1.0));
    const double k = (-d + r1 + r2) * (d + r1 - r2) * (d - r1 + r2) * (d + r1 + r2);
    return r1 * r1 * a1 + r2 * r2 * a2 - 0.5 * std::sqrt(std::max(0.0, k));
}

// Upper bound on |small cap big| / |small|.  Two arguments: the cores must
// be within 2 delta, which bounds the usable stretch of `small`'s core by the
// angle between them; and slice by slice, the cross-section of `big` in a
// plane perpendicular to `small` sits inside a disk of radius delta/|cos|.
// The second is integrated by the midpoint rule, so callers leave a margin.
double overlap_bound(const Tube& small, const Tube& big) {
    const double delta = small.delta;
    if (segment_distance(small.a, small.end(), big.a, big.end()) >= 2 * delta) return 0.0;
    const double cosang = std::abs(small.omega.dot(big.omega));
    const double sinang = small.omega.cross(big.omega).norm();
    double bound = 1.0;
    if (sinang > 0) bound = std::min(bound, 4 * delta / (sinang * small.length));
    if (cosang < 0.5) return bound;
    const double dir = small.omega.dot(big.omega);
    const double wide = delta / cosang;
    const double slack = delta * sinang / cosang;
    const int steps = 128;
    double acc = 0;
    for (int k = 0; k < steps; ++k) {
        const Vec3 c = small.a + (small.length * (k + 0.5) / steps) * small.omega;
        const double s = (c - big.a).dot(small.omega) / dir;
        if (s < -slack || s > big.length + slack) continue;
        const Vec3 offset = big.a + s * big.omega - c;
        if (small.dim == 2) {
            const double d = std::abs(offset.dot(normal_of(small)));
            acc += std::max(0.0, std::min(delta, d + wide) - std::max(-delta, d - wide)) / (2 * delta);
        } else {
            acc += lens_area(delta, wide, offset.norm()) / (kPi * delta * delta);
        }
    }
    return std::min(bound, acc / steps);
}

void require(bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(msg);
}

}  // namespace

bool Tube::contains(const Vec3& p) const {
    const Vec3 d = p - a;
    const double t = d.dot(omega);
    if (t < 0 || t > length) return false;
    return d.squaredNorm() - t * t <= delta * delta;
}

void Tube::validate() const {
    require(dim == 2 || dim == 3, "tube: dim must be 2 or 3");
    require(std::abs(omega.norm() - 1.0) <= 1e-12, "tube: direction must be a unit vector");
    require(delta > 0 && delta < 1, "tube: delta must lie in (0, 1)");
    require(length > 0 && std::isfinite(length), "tube: length must be positive");
    require(a.allFinite(), "tube: anchor must be finite");
    if (dim == 2) require(a.z() == 0 && omega.z() == 0, "tube: planar tube has nonzero z");
}

void TubeFamily::validate() const {
    require(!tubes.empty(), "tube family: empty");
    for (const auto& t : tubes) {
        t.validate();
        require(t.dim == dim && t.delta == delta, "tube family: mixed dim or delta");
    }
}

nlohmann::json TubeFamily::to_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& t : tubes) {
        nlohmann::json a = nlohmann::json::array(), w = nlohmann::json::array();
        for (int k = 0; k < dim; ++k) {
            a.push_back(t.a[k]);
            w.push_back(t.omega[k]);
        }
        arr.push_back({{"a", a}, {"omega", w}, {"len", t.length}});
    }
    return {{"dim", dim}, {"delta", delta}, {"placement_tag", placement_tag}, {"tubes", arr}};
}

TubeFamily TubeFamily::from_json(const nlohmann::json& j) {
    TubeFamily fam;
    fam.dim = j.at("dim").get<int>();
    fam.delta = j.at("delta").get<double>();
    fam.placement_tag = j.value("placement_tag", "");
    require(fam.dim == 2 || fam.dim == 3, "tube family: dim must be 2 or 3");
    for (const auto& jt : j.at("tubes")) {
        Tube t;
        t.dim = fam.dim;
        t.delta = fam.delta;
        t.length = jt.value("len", 1.0);
        const auto& a = jt.at("a");
        const auto& w = jt.at("omega");
        require(static_cast<int>(a.size()) == fam.dim && static_cast<int>(w.size()) == fam.dim,
                "tube family: vector length does not match dim");
        for (int k = 0; k < fam.dim; ++k) {
            t.a[k] = a[k].get<double>();
            t.omega[k] = w[k].get<double>();
        }
        fam.tubes.push_back(t);
    }
    fam.validate();
    return fam;
}

bool Prism::contains(const Tube& t) const {
    const Vec3 p0 = frame.transpose() * (t.a - center);
    const Vec3 p1 = frame.transpose() * (t.end() - center);
    for (int k = 0; k < 3; ++k) {
        const double c = t.omega.dot(frame.col(k));
        const double radial = t.dim == 2 && k == 2 ? 0.0 : t.delta * std::sqrt(std::max(0.0, 1 - c * c));
        const double reach = std::max(std::abs(p0[k]), std::abs(p1[k])) + radial;
        if (reach > half[k] * (1 + 1e-12) + 1e-12) return false;
    }
    return true;
}

Placement parse_placement(const std::string& s) {
    if (s == "bush") return Placement::Bush;
    if (s == "random") return Placement::Random;
    if (s == "perron-base") return Placement::PerronBase;
    throw std::invalid_argument("unknown placement '" + s + "' (bush|random|perron-base)");
}

std::string placement_name(Placement p) {
    switch (p) {
        case Placement::Bush: return "bush";
        case Placement::Random: return "random";
        case Placement::PerronBase: return "perron-base";
    }
    return "?";
}

double tube_volume(const Tube& t) { return cross_section(t) * t.length; }

double total_tube_volume(const TubeFamily& fam) {
    double s = 0;
    for (const auto& t : fam.tubes) s += tube_volume(t);
    return s;
}

double direction_distance(const Vec3& u, const Vec3& v) {
    return std::min((u - v).norm(), (u + v).norm());
}

std::vector<Vec3> generate_directions(double delta, int dim) {
    require(delta > 0 && delta < 1, "generate_directions: delta must lie in (0, 1)");
    require(dim == 2 || dim == 3, "generate_directions: dim must be 2 or 3");
    std::vector<Vec3> out;
    if (dim == 2) {
        // Equal angular steps; widen the step until every adjacent chord,
        // including the wrap through the antipode, clears delta in floating point.
        double step = 2 * std::asin(delta / 2);
        for (;;) {
            out.clear();
            const int n = static_cast<int>(std::floor(kPi / step));
            for (int k = 0; k < n; ++k) out.emplace_back(std::cos(k * step), std::sin(k * step), 0.0);
            bool ok = true;
            for (std::size_t k = 0; ok && k < out.size(); ++k)
                ok = direction_distance(out[k], out[(k + 1) % out.size()]) >= delta || out.size() == 1;
            if (ok) return out;
            step *= 1 + 1e-12;
        }
    }

    // Greedy pass over a shuffled dense Fibonacci net of the upper hemisphere,
    // then a hole-filling pass.  Spatial hash on the cube.
    const double cell = delta;
    const int side = static_cast<int>(std::ceil(2.0 / cell)) + 1;
    std::unordered_map<std::int64_t, std::vector<int>> hash;
    auto key = [&](const Vec3& v) {
        std::int64_t k = 0;
        for (int a = 0; a < 3; ++a) k = k * side + static_cast<std::int64_t>(std::floor((v[a] + 1.0) / cell));
        return k;
    };
    auto near_any = [&](const Vec3& v) {
        for (const Vec3& w : {v, Vec3(-v)}) {
            const int cx = static_cast<int>(std::floor((w.x() + 1.0) / cell));
            const int cy = static_cast<int>(std::floor((w.y() + 1.0) / cell));
            const int cz = static_cast<int>(std::floor((w.z() + 1.0) / cell));
            for (int x = cx - 1; x <= cx + 1; ++x)
                for (int y = cy - 1; y <= cy + 1; ++y)
                    for (int z = cz - 1; z <= cz + 1; ++z) {
                        auto it = hash.find((static_cast<std::int64_t>(x) * side + y) * side + z);
                        if (it == hash.end()) continue;
                        for (int idx : it->second)
                            if (direction_distance(out[idx], v) < delta) return true;
                    }
        }
        return false;
    };
    auto take = [&](const Vec3& v) {
        if (near_any(v)) return;
        hash[key(v)].push_back(static_cast<int>(out.size()));
        out.push_back(v);
    };

    const double spacing = delta / 6;
    const auto total = static_cast<std::int64_t>(std::ceil(4 * kPi / (spacing * spacing)));
    std::vector<Vec3> candidates;
    const double golden = kPi * (3.0 - std::sqrt(5.0));
    for (std::int64_t i = 0; i < total; ++i) {
        const double z = 1.0 - (2.0 * i + 1.0) / static_cast<double>(total);
        if (z < 0) break;
        const double r = std::sqrt(std::max(0.0, 1 - z * z));
        candidates.emplace_back(r * std::cos(golden * i), r * std::sin(golden * i), z);
    }
    CounterRng rng(0x6b616b657961ULL, 0);
    for (std::size_t i = candidates.size(); i > 1; --i)
        std::swap(candidates[i - 1], candidates[rng.next() % i]);
    for (const auto& v : candidates) take(v);

    // Repair.  On the full sphere with antipodes added, the points farthest
    // from the set are Voronoi vertices: circumcenters of three nearby
    // points.  After the dense pass every hole is narrower than
    // delta + spacing, so neighbours within 2.5 delta see all of them.
    for (bool added = true; added;) {
        added = false;
        std::vector<Vec3> full;
        for (const auto& v : out) {
            full.push_back(v);
            full.push_back(-v);
        }
        std::unordered_map<std::int64_t, std::vector<int>> near_hash;
        for (int i = 0; i < static_cast<int>(full.size()); ++i) near_hash[key(full[i])].push_back(i);
        const double reach = 2.5 * delta;
        const int span = static_cast<int>(std::ceil(reach / cell));
        std::vector<int> nb;
        for (int i = 0; i < static_cast<int>(full.size()); ++i) {
            const Vec3& p = full[i];
            nb.clear();
            const int cx = static_cast<int>(std::floor((p.x() + 1.0) / cell));
            const int cy = static_cast<int>(std::floor((p.y() + 1.0) / cell));
            const int cz = static_cast<int>(std::floor((p.z() + 1.0) / cell));
            for (int x = cx - span; x <= cx + span; ++x)
                for (int y = cy - span; y <= cy + span; ++y)
                    for (int z = cz - span; z <= cz + span; ++z) {
                        auto it = near_hash.find((static_cast<std::int64_t>(x) * side + y) * side + z);
                        if (it == near_hash.end()) continue;
                        for (int j : it->second)
                            if (j > i && (full[j] - p).norm() < reach) nb.push_back(j);
                    }
            for (std::size_t a = 0; a < nb.size(); ++a)
                for (std::size_t b = a + 1; b < nb.size(); ++b) {
                    Vec3 c = (full[nb[a]] - p).cross(full[nb[b]] - p);
                    if (c.norm() < 1e-15) continue;
                    c.normalize();
                    if (c.dot(p) < 0) c = -c;
                    if (c.z() < 0) c = -c;
                    const std::size_t before = out.size();
                    take(c);
                    added = added || out.size() != before;
                }
        }
    }
    return out;
}

TubeFamily generate_family(double delta, int dim, Placement placement, std::uint64_t seed, int perron_m) {
    require(!(placement == Placement::PerronBase && dim != 2),
            "generate_family: perron-base placement exists only in dimension 2");
    TubeFamily fam;
    fam.dim = dim;
    fam.delta = delta;
    fam.placement_tag = placement_name(placement);
    const auto dirs = generate_directions(delta, dim);
    std::optional<PerronTree> tree;
    if (placement == Placement::PerronBase)
        tree = build_perron_tree(PerronSpec::with_default_schedule(perron_m));
    CounterRng rng(seed, 1);
    for (const auto& w : dirs) {
        Tube t;
        t.dim = dim;
        t.delta = delta;
        t.omega = w;
        if (placement == Placement::Random) {
            Vec3 a;
            do {
                a = Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), dim == 3 ? rng.uniform(-1, 1) : 0.0);
            } while (a.squaredNorm() > 1.0);
            t.a = a;
        } else if (placement == Placement::PerronBase) {
            // Unit tube along the tracked segment, starting at its apex end.
            const double theta = std::atan2(w.y(), w.x()) * 180.0 / kPi;
            const Segment2 s = kakeya_segment(*tree, theta);
            const Vec3 p(s.p().x.to_double(), s.p().y.to_double(), 0.0);
            const Vec3 q(s.q().x.to_double(), s.q().y.to_double(), 0.0);
            t.a = p;
            t.omega = (q - p).normalized();
        }
        fam.tubes.push_back(t);
    }
    fam.validate();
    return fam;
}

TubeFamily parallel_lines_family(double delta) {
    require(delta > 0 && delta < 1, "parallel_lines_family: delta must lie in (0, 1)");
    const double inv = 1.0 / delta;
    const long n = std::lround(inv);
    require(std::abs(inv - static_cast<double>(n)) <= 1e-9 * inv, "parallel_lines_family: 1/delta must be an integer");
    TubeFamily fam;
    fam.dim = 3;
    fam.delta = delta;
    fam.placement_tag = "parallel-lines";
    for (long j = 1; j <= n; ++j)
        for (long k = 1; k <= n; ++k) {
            const Vec3 A(delta * j, 0, 0), B(delta * k, 1, 0);
            Tube t;
            t.dim = 3;
            t.delta = delta;
            t.a = A;
            t.length = (B - A).norm();
            t.omega = (B - A) / t.length;
            fam.tubes.push_back(t);
        }
    return fam;
}

TubeFamily hierarchical_dyadic_family(double delta) {
    const double inv = 1.0 / delta;
    const long n = std::lround(inv);
    require(n >= 2 && (n & (n - 1)) == 0 && static_cast<double>(n) == inv,
            "hierarchical_dyadic_family: delta must be 2^-k with k >= 1");
    TubeFamily fam;
    fam.dim = 3;
    fam.delta = delta;
    fam.placement_tag = "dyadic-sticky";
    for (long m = 0; m < n * n; ++m) {
        // De-interleave the Morton index: even bits give i, odd bits give j.
        long i = 0, j = 0;
        for (int b = 0; (1L << (2 * b)) < n * n; ++b) {
            i |= ((m >> (2 * b)) & 1L) << b;
            j |= ((m >> (2 * b + 1)) & 1L) << b;
        }
        Tube t;
        t.dim = 3;
        t.delta = delta;
        t.a = Vec3((i + 0.5) * delta, (j + 0.5) * delta, 0.0);
        t.omega = Vec3::UnitZ();
        fam.tubes.push_back(t);
    }
    return fam;
}

VolumeEstimate union_volume_grid(const TubeFamily& fam, int cells_per_unit) {
    require(cells_per_unit > 0, "union_volume: resolution must be positive");
    fam.validate();
    const double h = 1.0 / cells_per_unit;
    const double eta = 0.5 * h * std::sqrt(static_cast<double>(fam.dim));
    Box box = family_box(fam, 0.0);
    int n[3] = {1, 1, 1};
    for (int k = 0; k < fam.dim; ++k) {
        box.lo[k] = std::floor(box.lo[k] / h) * h;
        n[k] = static_cast<int>(std::ceil((box.hi[k] - box.lo[k]) / h));
    }
    const double total_cells = static_cast<double>(n[0]) * n[1] * n[2];
    require(total_cells <= 4e8, "union_volume: grid too fine for the family's bounding box");
    const TubeIndex index(fam, eta, fam.dim == 2 ? 2048 : 160);
    struct Tally {
        std::int64_t inside = 0, deep = 0, near = 0;
    };
    std::vector<Tally> rows(n[0]);
    parallel_for(static_cast<std::size_t>(n[0]), [&](std::size_t x) {
        Tally tally;
        for (int y = 0; y < n[1]; ++y)
            for (int z = 0; z < n[2]; ++z) {
                Vec3 c = box.lo + h * Vec3(x + 0.5, y + 0.5, z + 0.5);
                if (fam.dim == 2) c.z() = 0;
                bool in = false, deep = false, near = false;
                auto [b, e] = index.candidates(c);
                for (const int* it = b; it != e && !deep; ++it) {
                    const Tube& t = fam.tubes[*it];
                    const Vec3 d = c - t.a;
                    const double s = d.dot(t.omega);
                    const double r = std::sqrt(std::max(0.0, d.squaredNorm() - s * s));
                    if (s >= -eta && s <= t.length + eta && r <= t.delta + eta) near = true;
                    if (s >= 0 && s <= t.length && r <= t.delta) in = true;
                    if (s >= eta && s <= t.length - eta && r <= t.delta - eta) deep = true;
                }
                tally.inside += in;
                tally.deep += deep;
                tally.near += near || in;
            }
        rows[x] = tally;
    });
    Tally sum;
    for (const auto& r : rows) {
        sum.inside += r.inside;
        sum.deep += r.deep;
        sum.near += r.near;
    }
    const double cell_volume = std::pow(h, fam.dim);
    VolumeEstimate v;
    v.method = "grid";
    v.resolution = cells_per_unit;
    v.value = sum.inside * cell_volume;
    v.std_error = 0.5 * static_cast<double>(sum.near - sum.deep) * cell_volume;
    return v;
}

VolumeEstimate union_volume_mc(const TubeFamily& fam, std::int64_t samples, std::uint64_t seed) {
    require(samples > 0, "union_volume: sample count must be positive");
    fam.validate();
    const Box box = family_box(fam, 0.0);
    const Vec3 ext = box.hi - box.lo;
    const double box_volume = fam.dim == 2 ? ext.x() * ext.y() : ext.prod();
    const TubeIndex index(fam, 0.0, fam.dim == 2 ? 2048 : 160);
    constexpr std::int64_t kBlock = 1 << 16;
    const std::int64_t blocks = (samples + kBlock - 1) / kBlock;
    std::vector<std::int64_t> hits(blocks, 0);
    parallel_for(static_cast<std::size_t>(blocks), [&](std::size_t b) {
        CounterRng rng(seed, b);
        const std::int64_t count = std::min(kBlock, samples - static_cast<std::int64_t>(b) * kBlock);
        std::int64_t h = 0;
        for (std::int64_t i = 0; i < count; ++i) {
            Vec3 p(box.lo.x() + ext.x() * rng.uniform(), box.lo.y() + ext.y() * rng.uniform(), 0.0);
            if (fam.dim == 3) p.z() = box.lo.z() + ext.z() * rng.uniform();
            h += index.covered(p);
        }
        hits[b] = h;
    });
    const std::int64_t total = std::accumulate(hits.begin(), hits.end(), std::int64_t{0});
    const double p = static_cast<double>(total) / static_cast<double>(samples);
    VolumeEstimate v;
    v.method = "monte-carlo";
    v.resolution = samples;
    v.value = p * box_volume;
    v.std_error = box_volume * std::sqrt(p * (1 - p) / static_cast<double>(samples));
    return v;
}

double kakeya_ratio(const TubeFamily& fam, const VolumeEstimate& vol) {
    return vol.value / total_tube_volume(fam);
}

DistinctReport essentially_distinct_check(const TubeFamily& fam, int samples_per_pair, std::uint64_t seed) {
    require(samples_per_pair > 0, "essentially_distinct_check: samples must be positive");
    fam.validate();
    const int n = static_cast<int>(fam.tubes.size());
    struct Row {
        std::int64_t certified = 0, sampled = 0;
        std::vector<PairFlag> flags;
    };
    std::vector<Row> rows(n);
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t ii) {
        const int i = static_cast<int>(ii);
        Row row;
        for (int j = i + 1; j < n; ++j) {
            // Measure the overlap relative to the shorter tube (the binding case).
            const bool swap = fam.tubes[j].length < fam.tubes[i].length;
            const Tube& small = fam.tubes[swap ? j : i];
            const Tube& big = fam.tubes[swap ? i : j];
            if (overlap_bound(small, big) <= 0.45) {
                ++row.certified;
                continue;
            }
            ++row.sampled;
            CounterRng rng(seed, static_cast<std::uint64_t>(i) * static_cast<std::uint64_t>(n) + j);
            const Vec3 e1 = normal_of(small);
            const Vec3 e2 = small.omega.cross(e1);
            int hits = 0;
            for (int s = 0; s < samples_per_pair; ++s) {
                Vec3 p = small.a + small.length * rng.uniform() * small.omega;
                if (small.dim == 2) {
                    p += small.delta * (2 * rng.uniform() - 1) * e1;
                } else {
                    const double r = small.delta * std::sqrt(rng.uniform());
                    const double phi = 2 * kPi * rng.uniform();
                    p += r * std::cos(phi) * e1 + r * std::sin(phi) * e2;
                }
                hits += big.contains(p);
            }
            const double f = static_cast<double>(hits) / samples_per_pair;
            const double se = std::sqrt(f * (1 - f) / samples_per_pair);
            if (f > 0.5 + 3 * se) row.flags.push_back({i, j, f, se});
        }
        rows[i] = std::move(row);
    });
    DistinctReport report;
    report.pairs = static_cast<std::int64_t>(n) * (n - 1) / 2;
    for (auto& r : rows) {
        report.certified += r.certified;
        report.sampled += r.sampled;
        for (auto& f : r.flags) report.flagged.push_back(f);
    }
    return report;
}

int count_contained(const TubeFamily& fam, const Prism& prism) {
    int c = 0;
    for (const auto& t : fam.tubes) c += prism.contains(t);
    return c;
}

WolffReport wolff_axiom_check(const TubeFamily& fam, int random_prisms, std::uint64_t seed) {
    require(fam.dim == 3, "wolff_axiom_check: the axiom is stated for tubes in R^3");
    require(random_prisms >= 0, "wolff_axiom_check: prism count must be nonnegative");
    fam.validate();
    const double delta = fam.delta;
    std::vector<std::pair<Prism, std::string>> prisms;

    Prism slab;
    slab.center = Vec3(0.5, 0.5, 0.0);
    slab.half = Vec3(0.5 + delta, 0.5 + delta, delta);
    prisms.emplace_back(slab, "slab");

    // Smallest box in the principal frame of the endpoint cloud that holds
    // every tube; its thin axis is the best-fit plane normal.
    {
        std::vector<Vec3> pts;
        for (const auto& t : fam.tubes) {
            pts.push_back(t.a);
            pts.push_back(t.end());
        }
        Vec3 mean = Vec3::Zero();
        for (const auto& p : pts) mean += p;
        mean /= static_cast<double>(pts.size());
        Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
        for (const auto& p : pts) cov += (p - mean) * (p - mean).transpose();
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
        Prism fit;
        fit.center = mean;
        fit.frame = eig.eigenvectors();
        for (int k = 0; k < 3; ++k) {
            double reach = 0;
            for (const auto& t : fam.tubes) {
                const double c = t.omega.dot(fit.frame.col(k));
                const double radial = delta * std::sqrt(std::max(0.0, 1 - c * c));
                reach = std::max(reach, std::abs((t.a - mean).dot(fit.frame.col(k))) + radial);
                reach = std::max(reach, std::abs((t.end() - mean).dot(fit.frame.col(k))) + radial);
            }
            fit.half[k] = reach;
        }
        prisms.emplace_back(fit, "principal-plane");
    }

    const Box box = family_box(fam, 0.0);
    CounterRng rng(seed, 7);
    for (int r = 0; r < random_prisms; ++r) {
        Prism p;
        for (int k = 0; k < 3; ++k) p.center[k] = rng.uniform(box.lo[k], box.hi[k]);
        Eigen::Quaterniond q(rng.normal(), rng.normal(), rng.normal(), rng.normal());
        q.normalize();
        p.frame = q.toRotationMatrix();
        for (int k = 0; k < 3; ++k) p.half[k] = delta * std::pow(1.0 / delta, rng.uniform());
        prisms.emplace_back(p, "random");
    }

    std::vector<int> counts(prisms.size());
    parallel_for(prisms.size(), [&](std::size_t i) { counts[i] = count_contained(fam, prisms[i].first); });

    WolffReport report;
    report.prisms_checked = static_cast<int>(prisms.size());
    for (std::size_t i = 0; i < prisms.size(); ++i) {
        const double bound = prisms[i].first.volume() / (delta * delta);
        report.worst_ratio = std::max(report.worst_ratio, counts[i] / bound);
        if (counts[i] > bound) report.violations.push_back({prisms[i].first, prisms[i].second, counts[i], bound});
    }
    return report;
}

bool cores_close(const Tube& s, const Tube& t, double rho) {
    return (s.midpoint() - t.midpoint()).cwiseAbs().maxCoeff() < rho && direction_distance(s.omega, t.omega) < rho;
}

FattenResult fatten(const TubeFamily& fam, double rho) {
    fam.validate();
    require(rho >= fam.delta, "fatten: rho must be at least delta");
    require(rho <= 1.0, "fatten: rho must be at most 1");
    FattenResult out;
    out.kept.dim = fam.dim;
    out.kept.delta = rho;
    out.kept.placement_tag = fam.placement_tag + "/fattened";
    out.assignment.resize(fam.tubes.size());
    for (std::size_t i = 0; i < fam.tubes.size(); ++i) {
        const Tube& t = fam.tubes[i];
        int found = -1;
        // At the coarsest scale everything is one rho-tube.
        if (rho >= 1.0 && !out.kept.tubes.empty()) found = 0;
        for (int k = 0; found < 0 && k < static_cast<int>(out.kept.tubes.size()); ++k)
            if (cores_close(out.kept.tubes[k], t, rho)) found = k;
        if (found < 0) {
            Tube fat = t;
            fat.delta = rho;
            found = static_cast<int>(out.kept.tubes.size());
            out.kept.tubes.push_back(fat);
        }
        out.assignment[i] = found;
    }
    return out;
}

bool StickyReport::sticky() const {
    return std::all_of(scales.begin(), scales.end(), [](const StickyScale& s) { return s.sticky; });
}

StickyReport sticky_check(const TubeFamily& fam, const std::vector<double>& rhos, double C) {
    require(C >= 1, "sticky_check: comparability constant must be at least 1");
    StickyReport report;
    for (double rho : rhos) {
        const FattenResult f = fatten(fam, rho);
        std::vector<int> counts(f.kept.tubes.size(), 0);
        for (int a : f.assignment) ++counts[a];
        // Expected count (rho/delta)^(n-1), i.e. (rho/delta)^2 in R^3.
        const double scale = std::pow(fam.delta / rho, fam.dim - 1);
        StickyScale s;
        s.rho = rho;
        s.kept = static_cast<int>(counts.size());
        s.min_normalized = *std::min_element(counts.begin(), counts.end()) * scale;
        s.max_normalized = *std::max_element(counts.begin(), counts.end()) * scale;
        s.sticky = s.min_normalized >= 1.0 / C && s.max_normalized <= C;
        report.scales.push_back(s);
    }
    return report;
}

}  // namespace kakeya
