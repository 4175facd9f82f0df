#include "kakeya/boxdim.hpp"

#include "kakeya/parallel.hpp"
#include "kakeya/region.hpp"
#include "kakeya/tubes.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <regex>
#include <sstream>
#include <stdexcept>

namespace kakeya {

namespace {

struct Interval {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    bool empty() const { return !(lo <= hi); }
    void hull(const Interval& o) {
        if (o.empty()) return;
        lo = std::min(lo, o.lo);
        hi = std::max(hi, o.hi);
    }
};

// {x : |(x, y, z) - c| <= rho}
Interval ball_row(const Pt3& c, double rho, double y, double z) {
    const double rest = rho * rho - (y - c[1]) * (y - c[1]) - (z - c[2]) * (z - c[2]);
    if (rest < 0) return {};
    const double w = std::sqrt(rest);
    return {c[0] - w, c[0] + w};
}

// {x : dist((x, y, z), segment ab) <= rho}; the capsule is convex, so the
// hull of its cylinder part and its two end balls is the exact answer.
Interval capsule_row(const Pt3& a, const Pt3& b, double rho, double y, double z) {
    Interval out = ball_row(a, rho, y, z);
    out.hull(ball_row(b, rho, y, z));
    const Eigen::Vector3d A(a[0], a[1], a[2]), B(b[0], b[1], b[2]);
    const double len = (B - A).norm();
    if (len == 0) return out;
    const Eigen::Vector3d u = (B - A) / len;
    const Eigen::Vector3d w = Eigen::Vector3d(0, y, z) - A;
    const Eigen::Vector3d e1 = Eigen::Vector3d::UnitX();
    const Eigen::Vector3d wp = w - w.dot(u) * u, ep = e1 - e1.dot(u) * u;
    // |wp + x ep|^2 <= rho^2
    Interval cyl;
    const double qa = ep.squaredNorm(), qb = wp.dot(ep), qc = wp.squaredNorm() - rho * rho;
    if (qa < 1e-14) {
        if (qc > 0) return out;
        cyl = {-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
    } else {
        const double disc = qb * qb - qa * qc;
        if (disc < 0) return out;
        const double s = std::sqrt(disc);
        cyl = {(-qb - s) / qa, (-qb + s) / qa};
    }
    // 0 <= (w + x e1).u <= len
    const double t0 = w.dot(u), tu = u[0];
    Interval slab;
    if (std::fabs(tu) < 1e-14) {
        if (t0 < 0 || t0 > len) return out;
        slab = {-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
    } else {
        const double x0 = (0 - t0) / tu, x1 = (len - t0) / tu;
        slab = {std::min(x0, x1), std::max(x0, x1)};
    }
    out.hull({std::max(cyl.lo, slab.lo), std::min(cyl.hi, slab.hi)});
    return out;
}

// Horizontal chord of a convex polygon at height y.
Interval polygon_row(const std::vector<Pt3>& poly, double y) {
    Interval out;
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Pt3& p = poly[i];
        const Pt3& q = poly[(i + 1) % n];
        const double ylo = std::min(p[1], q[1]), yhi = std::max(p[1], q[1]);
        if (y < ylo || y > yhi) continue;
        if (p[1] == q[1]) {
            out.hull({std::min(p[0], q[0]), std::max(p[0], q[0])});
        } else {
            const double x = p[0] + (y - p[1]) / (q[1] - p[1]) * (q[0] - p[0]);
            out.hull({x, x});
        }
    }
    return out;
}

class Occupancy {
public:
    Occupancy(int dim, const Pt3& lo, const Pt3& hi, double h) : dim_(dim), h_(h), lo_(lo) {
        double total = 1;
        for (int d = 0; d < 3; ++d) {
            n_[d] = d < dim ? static_cast<std::int64_t>(std::ceil((hi[d] - lo[d]) / h)) + 1 : 1;
            total *= static_cast<double>(n_[d]);
        }
        if (total > 3e9) throw std::invalid_argument("neighborhood_volume_curve: grid too large; use a coarser delta");
        cells_.assign(static_cast<std::size_t>(total), 0);
    }

    double centre(int axis, std::int64_t i) const { return lo_[axis] + (static_cast<double>(i) + 0.5) * h_; }
    std::int64_t row_count(int axis) const { return n_[axis]; }

    // index range of rows on `axis` whose centres lie in [a, b]
    std::pair<std::int64_t, std::int64_t> range(int axis, double a, double b) const {
        if (axis >= dim_) return {0, 0};
        const auto i0 = static_cast<std::int64_t>(std::ceil((a - lo_[axis]) / h_ - 0.5));
        const auto i1 = static_cast<std::int64_t>(std::floor((b - lo_[axis]) / h_ - 0.5));
        return {std::max<std::int64_t>(i0, 0), std::min<std::int64_t>(i1, n_[axis] - 1)};
    }

    void mark_row(std::int64_t iy, std::int64_t iz, const Interval& iv) {
        if (iv.empty()) return;
        const auto [i0, i1] = range(0, iv.lo, iv.hi);
        if (i0 > i1) return;
        std::uint8_t* base = cells_.data() + (iz * n_[1] + iy) * n_[0];
        std::fill(base + i0, base + i1 + 1, std::uint8_t{1});
    }

    double volume() const {
        std::int64_t count = 0;
        for (auto c : cells_) count += c;
        return static_cast<double>(count) * std::pow(h_, dim_);
    }

private:
    int dim_;
    double h_;
    Pt3 lo_;
    std::int64_t n_[3]{1, 1, 1};
    std::vector<std::uint8_t> cells_;
};

double neighborhood_volume(const GeometricSet& set, double delta, int cells_per_delta) {
    const double h = delta / cells_per_delta;
    Pt3 lo{INFINITY, INFINITY, INFINITY}, hi{-INFINITY, -INFINITY, -INFINITY};
    auto grow = [&](const Pt3& p) {
        for (int d = 0; d < 3; ++d) {
            lo[d] = std::min(lo[d], p[d]);
            hi[d] = std::max(hi[d], p[d]);
        }
    };
    for (const auto& p : set.points) grow(p);
    for (const auto& s : set.segments) grow(s[0]), grow(s[1]);
    for (const auto& poly : set.convex_polygons)
        for (const auto& p : poly) grow(p);
    for (int d = 0; d < 3; ++d) {
        lo[d] -= delta + h;
        hi[d] += delta + h;
    }
    Occupancy grid(set.dim, lo, hi, h);
    const int dim = set.dim;

    auto mark_capsule = [&](const Pt3& a, const Pt3& b) {
        const auto [y0, y1] = grid.range(1, std::min(a[1], b[1]) - delta, std::max(a[1], b[1]) + delta);
        const auto zr = dim == 3 ? grid.range(2, std::min(a[2], b[2]) - delta, std::max(a[2], b[2]) + delta)
                                 : std::pair<std::int64_t, std::int64_t>{0, 0};
        for (std::int64_t iz = zr.first; iz <= zr.second; ++iz) {
            const double z = dim == 3 ? grid.centre(2, iz) : 0.0;
            for (std::int64_t iy = y0; iy <= y1; ++iy)
                grid.mark_row(iy, iz, capsule_row(a, b, delta, grid.centre(1, iy), z));
        }
    };

    for (const auto& p : set.points) mark_capsule(p, p);
    for (const auto& s : set.segments) mark_capsule(s[0], s[1]);
    for (const auto& poly : set.convex_polygons) {
        double ylo = INFINITY, yhi = -INFINITY;
        for (const auto& p : poly) ylo = std::min(ylo, p[1]), yhi = std::max(yhi, p[1]);
        const auto [y0, y1] = grid.range(1, ylo, yhi);
        for (std::int64_t iy = y0; iy <= y1; ++iy) grid.mark_row(iy, 0, polygon_row(poly, grid.centre(1, iy)));
        for (std::size_t i = 0; i < poly.size(); ++i) mark_capsule(poly[i], poly[(i + 1) % poly.size()]);
    }
    return grid.volume();
}

}  // namespace

void GeometricSet::validate() const {
    if (dim != 2 && dim != 3) throw std::invalid_argument("set: dim must be 2 or 3");
    if (empty()) throw std::invalid_argument("set: empty set");
    if (dim == 3 && !convex_polygons.empty()) throw std::invalid_argument("set: polygons are planar only");
    auto check = [&](const Pt3& p) {
        for (double c : p)
            if (!std::isfinite(c)) throw std::invalid_argument("set: non-finite coordinate");
        if (dim == 2 && p[2] != 0.0) throw std::invalid_argument("set: planar set with z != 0");
    };
    for (const auto& p : points) check(p);
    for (const auto& s : segments) check(s[0]), check(s[1]);
    for (const auto& poly : convex_polygons) {
        if (poly.size() < 3) throw std::invalid_argument("set: polygon with fewer than three vertices");
        for (const auto& p : poly) check(p);
    }
}

GeometricSet GeometricSet::from_region(const Region2& region) {
    GeometricSet s;
    s.dim = 2;
    for (const auto& poly : region.polygons()) {
        std::vector<Pt3> pts;
        for (const auto& p : poly) pts.push_back({p.x.to_double(), p.y.to_double(), 0.0});
        s.convex_polygons.push_back(std::move(pts));
    }
    return s;
}

GeometricSet GeometricSet::from_tubes(const TubeFamily& fam) {
    GeometricSet s;
    s.dim = fam.dim;
    for (const auto& t : fam.tubes) {
        const Vec3 e = t.end();
        s.segments.push_back({Pt3{t.a.x(), t.a.y(), t.a.z()}, Pt3{e.x(), e.y(), e.z()}});
    }
    return s;
}

GeometricSet GeometricSet::from_points(int dim, std::vector<Pt3> pts) {
    GeometricSet s;
    s.dim = dim;
    s.points = std::move(pts);
    return s;
}

GeometricSet GeometricSet::unit_square() {
    GeometricSet s;
    s.convex_polygons.push_back({{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}});
    return s;
}

GeometricSet GeometricSet::unit_segment() {
    GeometricSet s;
    s.segments.push_back({Pt3{0, 0, 0}, Pt3{1, 0, 0}});
    return s;
}

GeometricSet GeometricSet::disc(double radius, int sides) {
    GeometricSet s;
    std::vector<Pt3> poly;
    for (int i = 0; i < sides; ++i) {
        const double t = 2 * std::numbers::pi * i / sides;
        poly.push_back({radius * std::cos(t), radius * std::sin(t), 0});
    }
    s.convex_polygons.push_back(std::move(poly));
    return s;
}

namespace {
std::vector<std::pair<double, double>> cantor_intervals(int level) {
    if (level < 0 || level > 20) throw std::invalid_argument("cantor: level must lie in [0, 20]");
    std::vector<std::pair<double, double>> iv{{0.0, 1.0}}, next;
    for (int k = 0; k < level; ++k) {
        next.clear();
        for (const auto& [a, b] : iv) {
            const double t = (b - a) / 3;
            next.emplace_back(a, a + t);
            next.emplace_back(b - t, b);
        }
        iv.swap(next);
    }
    return iv;
}
}  // namespace

GeometricSet GeometricSet::cantor(int level) {
    GeometricSet s;
    for (const auto& [a, b] : cantor_intervals(level)) s.segments.push_back({Pt3{a, 0, 0}, Pt3{b, 0, 0}});
    return s;
}

GeometricSet GeometricSet::cantor_product(int level) {
    GeometricSet s;
    for (const auto& [a, b] : cantor_intervals(level))
        s.convex_polygons.push_back({{a, 0, 0}, {b, 0, 0}, {b, 1, 0}, {a, 1, 0}});
    return s;
}

void BoxCountCurve::validate() const {
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const auto [d, v] = entries[i];
        if (!(d > 0) || !(v > 0) || !std::isfinite(v)) throw std::invalid_argument("curve: non-positive entry");
        if (i > 0) {
            if (!(d < entries[i - 1].first)) throw std::invalid_argument("curve: deltas must strictly decrease");
            if (v > entries[i - 1].second) throw std::invalid_argument("curve: volume grew as delta shrank");
        }
    }
}

BoxCountCurve neighborhood_volume_curve(const GeometricSet& set, const std::vector<double>& deltas,
                                        int cells_per_delta) {
    set.validate();
    if (cells_per_delta < 1) throw std::invalid_argument("neighborhood_volume_curve: cells_per_delta must be >= 1");
    for (std::size_t i = 0; i < deltas.size(); ++i) {
        if (!(deltas[i] > 0 && deltas[i] < 1)) throw std::invalid_argument("neighborhood_volume_curve: deltas must lie in (0, 1)");
        if (i > 0 && !(deltas[i] < deltas[i - 1]))
            throw std::invalid_argument("neighborhood_volume_curve: deltas must strictly decrease");
    }
    BoxCountCurve curve;
    curve.entries.resize(deltas.size());
    parallel_for(deltas.size(), [&](std::size_t i) {
        curve.entries[i] = {deltas[i], neighborhood_volume(set, deltas[i], cells_per_delta)};
    });
    return curve;
}

DimensionEstimate minkowski_estimate(const BoxCountCurve& curve, int ambient, const MinkowskiOptions& opt) {
    curve.validate();
    if (ambient < 1) throw std::invalid_argument("minkowski_estimate: ambient dimension must be positive");
    if (curve.entries.size() < 4) throw std::invalid_argument("minkowski_estimate: need at least four curve points");
    std::size_t first = 0, last = curve.entries.size();
    if (opt.drop_endpoints && curve.entries.size() >= 6) ++first, --last;
    const int n = static_cast<int>(last - first);

    auto fit = [&](bool boundary) {
        const int cols = boundary ? 3 : 2;
        Eigen::MatrixXd A(n, cols);
        Eigen::VectorXd y(n);
        for (int i = 0; i < n; ++i) {
            const auto [d, v] = curve.entries[first + i];
            A(i, 0) = 1.0;
            A(i, 1) = std::log(d);
            if (boundary) A(i, 2) = d;
            y(i) = std::log(v);
        }
        const Eigen::VectorXd c = A.colPivHouseholderQr().solve(y);
        const double rms = std::sqrt((A * c - y).squaredNorm() / n);
        return std::pair<double, double>{c(1), rms};
    };

    DimensionEstimate est;
    const auto [plain_slope, plain_rms] = fit(false);
    const auto [slope, rms] = opt.boundary_term ? fit(true) : std::pair<double, double>{plain_slope, plain_rms};
    auto clamp = [&](double s) { return std::clamp(ambient - s, 0.0, static_cast<double>(ambient)); };
    est.dimension = clamp(slope);
    est.plain_dimension = clamp(plain_slope);
    est.residual = rms;
    est.delta_max = curve.entries[first].first;
    est.delta_min = curve.entries[last - 1].first;
    est.points_used = n;
    return est;
}

KakeyaBoundReport kakeya_bound_check(const BoxCountCurve& curve, double epsilon) {
    curve.validate();
    if (!(epsilon > 0 && epsilon <= 1)) throw std::invalid_argument("kakeya_bound_check: epsilon must lie in (0, 1]");
    if (curve.entries.empty()) throw std::invalid_argument("kakeya_bound_check: empty curve");
    KakeyaBoundReport rep;
    rep.epsilon = epsilon;
    rep.c_epsilon = INFINITY;
    for (const auto& [d, v] : curve.entries) {
        rep.c_values.push_back(v / std::pow(d, epsilon));
        rep.c_epsilon = std::min(rep.c_epsilon, rep.c_values.back());
    }
    const std::size_t n = curve.entries.size();
    if (n >= 2) {
        double mx = 0, my = 0;
        for (std::size_t i = 0; i < n; ++i) {
            mx += std::log(curve.entries[i].first);
            my += std::log(rep.c_values[i]);
        }
        mx /= n, my /= n;
        double sxx = 0, sxy = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double dx = std::log(curve.entries[i].first) - mx;
            sxx += dx * dx;
            sxy += dx * (std::log(rep.c_values[i]) - my);
        }
        rep.trend = sxy / sxx;
    }
    rep.consistent = rep.c_epsilon > 0 && rep.trend <= kTrendTolerance;
    return rep;
}

std::vector<double> parse_deltas(const std::string& s) {
    static const std::regex range(R"(\s*2\^-(\d+)\s*\.\.\s*2\^-(\d+)\s*)");
    std::smatch m;
    std::vector<double> out;
    if (std::regex_match(s, m, range)) {
        const int a = std::stoi(m[1]), b = std::stoi(m[2]);
        if (a < 1 || b < a || b > 30) throw std::invalid_argument("deltas: bad dyadic range " + s);
        for (int k = a; k <= b; ++k) out.push_back(std::ldexp(1.0, -k));
        return out;
    }
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        static const std::regex pow2(R"(\s*2\^-(\d+)\s*)");
        if (std::regex_match(item, m, pow2)) {
            out.push_back(std::ldexp(1.0, -std::stoi(m[1])));
            continue;
        }
        std::size_t used = 0;
        double v;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            throw std::invalid_argument("deltas: cannot parse '" + item + "'");
        }
        if (item.find_first_not_of(" \t", used) != std::string::npos)
            throw std::invalid_argument("deltas: cannot parse '" + item + "'");
        out.push_back(v);
    }
    if (out.empty()) throw std::invalid_argument("deltas: empty list");
    return out;
}

}  // namespace kakeya
