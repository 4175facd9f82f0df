#include "kakeya/region.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <utility>

namespace kakeya {

Segment2::Segment2(Point2 p, Point2 q) : p_(std::move(p)), q_(std::move(q)) {
    if (p_ == q_) throw std::invalid_argument("Segment2: endpoints coincide");
}

ExactScalar signed_area(const Polygon& poly) {
    ExactScalar twice;
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) twice += cross(poly[i], poly[(i + 1) % n]);
    return twice / ExactScalar(2);
}

namespace {

// cos(30k degrees), k = 0..11.
ExactScalar cos30(int k) {
    const ExactScalar half(mpq_class(1, 2));
    const ExactScalar half_sqrt3(mpq_class(0), mpq_class(1, 2));
    switch (((k % 12) + 12) % 12) {
        case 0: return 1;
        case 1: return half_sqrt3;
        case 2: return half;
        case 3: return 0;
        case 4: return -half;
        case 5: return -half_sqrt3;
        case 6: return -1;
        case 7: return -half_sqrt3;
        case 8: return -half;
        case 9: return 0;
        case 10: return half;
        default: return half_sqrt3;
    }
}

int orientation(const Point2& a, const Point2& b, const Point2& c) {
    return cross(b - a, c - a).sign();
}

bool on_segment(const Point2& a, const Point2& b, const Point2& p) {
    return min(a.x, b.x) <= p.x && p.x <= max(a.x, b.x) && min(a.y, b.y) <= p.y &&
           p.y <= max(a.y, b.y);
}

bool segments_touch(const Point2& a, const Point2& b, const Point2& c, const Point2& d) {
    const int o1 = orientation(a, b, c);
    const int o2 = orientation(a, b, d);
    const int o3 = orientation(c, d, a);
    const int o4 = orientation(c, d, b);
    if (o1 != o2 && o3 != o4) return true;
    if (o1 == 0 && on_segment(a, b, c)) return true;
    if (o2 == 0 && on_segment(a, b, d)) return true;
    if (o3 == 0 && on_segment(c, d, a)) return true;
    if (o4 == 0 && on_segment(c, d, b)) return true;
    return false;
}

Polygon validated(const Polygon& input) {
    Polygon poly;
    for (const auto& p : input)
        if (poly.empty() || !(poly.back() == p)) poly.push_back(p);
    while (poly.size() > 1 && poly.front() == poly.back()) poly.pop_back();
    if (poly.size() < 3) throw std::invalid_argument("degenerate polygon: fewer than 3 distinct vertices");
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
            const Point2& a = poly[i];
            const Point2& b = poly[(i + 1) % n];
            const Point2& c = poly[j];
            const Point2& d = poly[(j + 1) % n];
            if (adjacent) {
                // Adjacent edges may only share their common vertex.
                const Point2& shared = (j == i + 1) ? b : a;
                const Point2& far_ab = (j == i + 1) ? a : b;
                const Point2& far_cd = (j == i + 1) ? d : c;
                if (orientation(shared, far_ab, far_cd) == 0 &&
                    dot(far_ab - shared, far_cd - shared).sign() > 0)
                    throw std::invalid_argument("degenerate polygon: overlapping adjacent edges");
                continue;
            }
            if (segments_touch(a, b, c, d))
                throw std::invalid_argument("degenerate polygon: self-intersecting boundary");
        }
    }
    const ExactScalar area = signed_area(poly);
    if (area.is_zero()) throw std::invalid_argument("degenerate polygon: zero area");
    if (area.sign() < 0) std::reverse(poly.begin(), poly.end());
    return poly;
}

// ---------------------------------------------------------------------------
// Vertical-slab sweep.

struct SweepEdge {
    Point2 left;
    Point2 right;
    ExactScalar slope;
    ExactScalar intercept;
    double slope_d = 0;
    double intercept_d = 0;
    int weight = 0;   // +1: interior above the edge, -1: interior below
    int operand = 0;  // 0 or 1
    int line = 0;     // shared by all edges on the same supporting line
};

using CoveragePredicate = std::function<bool(int, int)>;

class SlabSweep {
public:
    SlabSweep(const std::vector<std::pair<const Region2*, int>>& inputs, CoveragePredicate keep)
        : keep_(std::move(keep)) {
        std::map<std::pair<ExactScalar, ExactScalar>, int> lines;
        for (const auto& [region, operand] : inputs) {
            for (const auto& poly : region->polygons()) {
                const std::size_t n = poly.size();
                for (std::size_t i = 0; i < n; ++i) {
                    const Point2& a = poly[i];
                    const Point2& b = poly[(i + 1) % n];
                    const int c = ExactScalar::compare(a.x, b.x);
                    if (c == 0) continue;
                    SweepEdge e;
                    e.left = c < 0 ? a : b;
                    e.right = c < 0 ? b : a;
                    e.weight = c < 0 ? 1 : -1;
                    e.operand = operand;
                    e.slope = (e.right.y - e.left.y) / (e.right.x - e.left.x);
                    e.intercept = e.left.y - e.slope * e.left.x;
                    e.slope_d = e.slope.to_double();
                    e.intercept_d = e.intercept.to_double();
                    auto [it, inserted] =
                        lines.try_emplace({e.slope, e.intercept}, static_cast<int>(lines.size()));
                    e.line = it->second;
                    edges_.push_back(std::move(e));
                }
            }
        }
        std::sort(edges_.begin(), edges_.end(),
                  [](const SweepEdge& l, const SweepEdge& r) { return l.left.x < r.left.x; });
    }

    std::vector<Polygon> run() {
        std::vector<Polygon> out;
        if (edges_.empty()) return out;
        std::set<ExactScalar> events;
        for (const auto& e : edges_) {
            events.insert(e.left.x);
            events.insert(e.right.x);
        }
        cache_.assign(edges_.size(), std::nullopt);
        stamps_.assign(edges_.size(), 0);
        std::size_t next_edge = 0;
        std::vector<int> active;
        std::map<std::pair<int, int>, OpenRun> open;

        for (auto it = events.begin(); std::next(it) != events.end(); ++it) {
            const ExactScalar& xl = *it;
            const double xl_d = xl.to_double();
            ++stamp_;
            std::erase_if(active, [&](int e) { return edges_[e].right.x <= xl; });
            while (next_edge < edges_.size() && edges_[next_edge].left.x == xl)
                active.push_back(static_cast<int>(next_edge++));

            // Order just to the right of xl: by height at xl, then by slope.
            auto below = [&](int a, int b) {
                const int c = compare_at(a, b, xl, xl_d);
                if (c != 0) return c < 0;
                return ExactScalar::compare(edges_[a].slope, edges_[b].slope) < 0;
            };
            for (std::size_t i = 1; i < active.size(); ++i) {
                const int v = active[i];
                std::size_t j = i;
                while (j > 0 && below(v, active[j - 1])) {
                    active[j] = active[j - 1];
                    --j;
                }
                active[j] = v;
            }

            // Split the slab at the first crossing of adjacent edges.
            ExactScalar xr = *std::next(it);
            for (std::size_t i = 0; i + 1 < active.size(); ++i) {
                const SweepEdge& lo = edges_[active[i]];
                const SweepEdge& hi = edges_[active[i + 1]];
                if (lo.line == hi.line) continue;
                if (ExactScalar::compare(lo.slope, hi.slope) <= 0) continue;
                if (!maybe_before(lo, hi, xr)) continue;
                ExactScalar x = (hi.intercept - lo.intercept) / (lo.slope - hi.slope);
                if (x < xr) xr = std::move(x);
            }
            if (!(xr == *std::next(it))) events.insert(xr);

            // Walk upward through the line groups and collect covered intervals.
            std::map<std::pair<int, int>, OpenRun> next_open;
            int cover[2] = {0, 0};
            bool inside = false;
            int lower_edge = -1;
            for (std::size_t i = 0; i < active.size();) {
                std::size_t j = i;
                const int line = edges_[active[i]].line;
                while (j < active.size() && edges_[active[j]].line == line) {
                    cover[edges_[active[j]].operand] += edges_[active[j]].weight;
                    ++j;
                }
                const bool now = keep_(cover[0], cover[1]);
                if (!inside && now) {
                    lower_edge = active[i];
                } else if (inside && !now) {
                    const std::pair<int, int> key{edges_[lower_edge].line, line};
                    auto found = open.find(key);
                    if (found != open.end()) {
                        next_open.emplace(key, std::move(found->second));
                        open.erase(found);
                    } else {
                        next_open.emplace(key, OpenRun{xl, lower_edge, active[i]});
                    }
                }
                inside = now;
                i = j;
            }
            for (auto& [key, run] : open) emit(run, xl, out);
            open = std::move(next_open);
        }
        const ExactScalar& last = *events.rbegin();
        for (auto& [key, run] : open) emit(run, last, out);
        return out;
    }

private:
    struct OpenRun {
        ExactScalar x_start;
        int lower;
        int upper;
    };

    const ExactScalar& y_at(int e, const ExactScalar& x) {
        if (!cache_[e] || stamps_[e] != stamp_) {
            cache_[e] = edges_[e].slope * x + edges_[e].intercept;
            stamps_[e] = stamp_;
        }
        return *cache_[e];
    }

    int compare_at(int a, int b, const ExactScalar& x, double x_d) {
        const SweepEdge& ea = edges_[a];
        const SweepEdge& eb = edges_[b];
        const double ta = ea.slope_d * x_d;
        const double tb = eb.slope_d * x_d;
        const double d = (ta + ea.intercept_d) - (tb + eb.intercept_d);
        const double tol = 1e-11 * (std::fabs(ta) + std::fabs(ea.intercept_d) + std::fabs(tb) +
                                    std::fabs(eb.intercept_d)) +
                           1e-300;
        if (d > tol) return 1;
        if (d < -tol) return -1;
        return ExactScalar::compare(y_at(a, x), y_at(b, x));
    }

    // Conservative double test: false only when the crossing of lo and hi
    // certainly lies at or beyond xr.
    static bool maybe_before(const SweepEdge& lo, const SweepEdge& hi, const ExactScalar& xr) {
        const double num = hi.intercept_d - lo.intercept_d;
        const double den = lo.slope_d - hi.slope_d;
        const double num_err = 1e-14 * (std::fabs(hi.intercept_d) + std::fabs(lo.intercept_d));
        const double den_err = 1e-14 * (std::fabs(lo.slope_d) + std::fabs(hi.slope_d));
        if (!(std::fabs(den) > 1e3 * den_err) || den <= 0) return true;
        const double x = num / den;
        const double err = (num_err + std::fabs(x) * den_err) / std::fabs(den) * 4 +
                           1e-12 * std::fabs(xr.to_double());
        return x < xr.to_double() + err;
    }

    void emit(const OpenRun& run, const ExactScalar& x_end, std::vector<Polygon>& out) const {
        const SweepEdge& lo = edges_[run.lower];
        const SweepEdge& hi = edges_[run.upper];
        const Point2 candidates[4] = {
            {run.x_start, lo.slope * run.x_start + lo.intercept},
            {x_end, lo.slope * x_end + lo.intercept},
            {x_end, hi.slope * x_end + hi.intercept},
            {run.x_start, hi.slope * run.x_start + hi.intercept},
        };
        Polygon poly;
        for (const auto& p : candidates)
            if (poly.empty() || !(poly.back() == p)) poly.push_back(p);
        while (poly.size() > 1 && poly.front() == poly.back()) poly.pop_back();
        if (poly.size() >= 3) out.push_back(std::move(poly));
    }

    std::vector<SweepEdge> edges_;
    CoveragePredicate keep_;
    std::vector<std::optional<ExactScalar>> cache_;
    std::vector<unsigned> stamps_;
    unsigned stamp_ = 0;
};

Region2 sweep(const std::vector<std::pair<const Region2*, int>>& inputs, CoveragePredicate keep) {
    SlabSweep s(inputs, std::move(keep));
    return Region2::from_normalized(s.run());
}

nlohmann::json mpz_to_json(const mpz_class& z) {
    if (z.fits_slong_p()) return z.get_si();
    return z.get_str();
}

mpz_class mpz_from_json(const nlohmann::json& j) {
    if (j.is_number_integer()) return mpz_class(std::to_string(j.get<long long>()));
    if (j.is_string()) return mpz_class(j.get<std::string>());
    throw std::invalid_argument("expected integer or decimal string");
}

}  // namespace

Point2 RigidMotion::apply(const Point2& p) const {
    if (angle_degrees % 30 != 0)
        throw std::invalid_argument("rotation angle must be a multiple of 30 degrees, got " +
                                    std::to_string(angle_degrees));
    const int k = angle_degrees / 30;
    const ExactScalar c = cos30(k);
    const ExactScalar s = cos30(k - 3);
    const Point2 d = p - center;
    return Point2{center.x + c * d.x - s * d.y, center.y + s * d.x + c * d.y} + translation;
}

Region2 Region2::from_polygons(const std::vector<Polygon>& polygons) {
    Region2 raw;
    for (const auto& p : polygons) raw.pieces_.push_back(validated(p));
    return sweep({{&raw, 0}}, [](int a, int) { return a > 0; });
}

Region2 Region2::from_normalized(std::vector<Polygon> pieces) {
    Region2 r;
    r.pieces_ = std::move(pieces);
    return r;
}

std::size_t Region2::vertex_count() const {
    std::size_t n = 0;
    for (const auto& p : pieces_) n += p.size();
    return n;
}

Region2 region_union(const Region2& a, const Region2& b) {
    return sweep({{&a, 0}, {&b, 1}}, [](int ca, int cb) { return ca > 0 || cb > 0; });
}

Region2 region_intersect(const Region2& a, const Region2& b) {
    return sweep({{&a, 0}, {&b, 1}}, [](int ca, int cb) { return ca > 0 && cb > 0; });
}

Region2 region_difference(const Region2& a, const Region2& b) {
    return sweep({{&a, 0}, {&b, 1}}, [](int ca, int cb) { return ca > 0 && cb <= 0; });
}

Region2 region_union_all(const std::vector<Region2>& parts) {
    std::vector<std::pair<const Region2*, int>> inputs;
    for (const auto& p : parts) inputs.emplace_back(&p, 0);
    return sweep(inputs, [](int a, int) { return a > 0; });
}

ExactScalar region_area(const Region2& a) {
    ExactScalar total;
    for (const auto& p : a.polygons()) total += signed_area(p);
    return total;
}

Region2 transform(const Region2& a, const RigidMotion& motion) {
    if (motion.angle_degrees % 30 != 0)
        throw std::invalid_argument("rotation angle must be a multiple of 30 degrees, got " +
                                    std::to_string(motion.angle_degrees));
    std::vector<Polygon> pieces;
    pieces.reserve(a.polygons().size());
    for (const auto& poly : a.polygons()) {
        Polygon q;
        q.reserve(poly.size());
        for (const auto& p : poly) q.push_back(motion.apply(p));
        pieces.push_back(std::move(q));
    }
    return Region2::from_normalized(std::move(pieces));
}

namespace {

// Closed parameter interval of s inside a convex CCW polygon, or nullopt.
std::optional<std::pair<ExactScalar, ExactScalar>> clip_convex(const Polygon& poly,
                                                               const Segment2& s) {
    ExactScalar lo = 0;
    ExactScalar hi = 1;
    const Point2 dir = s.q() - s.p();
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Point2 e = poly[(i + 1) % n] - poly[i];
        // inside: cross(e, p(t) - v) >= 0  <=>  base + t * rate >= 0
        const ExactScalar base = cross(e, s.p() - poly[i]);
        const ExactScalar rate = cross(e, dir);
        const int rs = rate.sign();
        if (rs == 0) {
            if (base.sign() < 0) return std::nullopt;
            continue;
        }
        const ExactScalar t = -base / rate;
        if (rs > 0) {
            if (lo < t) lo = t;
        } else {
            if (t < hi) hi = t;
        }
        if (hi < lo) return std::nullopt;
    }
    return std::make_pair(lo, hi);
}

// Floating pre-test: false only if the segment certainly misses the polygon.
bool may_hit(const Polygon& poly, double px, double py, double qx, double qy) {
    double lo = 0, hi = 1;
    const std::size_t n = poly.size();
    const double dx = qx - px, dy = qy - py;
    for (std::size_t i = 0; i < n; ++i) {
        const double vx = poly[i].x.to_double(), vy = poly[i].y.to_double();
        const double ex = poly[(i + 1) % n].x.to_double() - vx;
        const double ey = poly[(i + 1) % n].y.to_double() - vy;
        const double base = ex * (py - vy) - ey * (px - vx);
        const double rate = ex * dy - ey * dx;
        const double slack = 1e-9 * (std::fabs(ex) + std::fabs(ey)) *
                             (1 + std::fabs(px) + std::fabs(py) + std::fabs(dx) + std::fabs(dy));
        if (std::fabs(rate) <= slack) {
            if (base < -slack) return false;
            continue;
        }
        const double t = -base / rate;
        const double tslack = 2 * slack / std::fabs(rate);
        if (rate > 0)
            lo = std::max(lo, t - tslack);
        else
            hi = std::min(hi, t + tslack);
        if (hi < lo) return false;
    }
    return true;
}

}  // namespace

bool contains_point(const Region2& a, const Point2& p) {
    for (const auto& poly : a.polygons()) {
        bool inside = true;
        const std::size_t n = poly.size();
        for (std::size_t i = 0; i < n && inside; ++i)
            inside = cross(poly[(i + 1) % n] - poly[i], p - poly[i]).sign() >= 0;
        if (inside) return true;
    }
    return false;
}

bool contains_segment(const Region2& a, const Segment2& s) {
    const double px = s.p().x.to_double(), py = s.p().y.to_double();
    const double qx = s.q().x.to_double(), qy = s.q().y.to_double();
    std::vector<std::pair<ExactScalar, ExactScalar>> pieces;
    for (const auto& poly : a.polygons()) {
        if (!may_hit(poly, px, py, qx, qy)) continue;
        if (auto iv = clip_convex(poly, s)) pieces.push_back(std::move(*iv));
    }
    std::sort(pieces.begin(), pieces.end(),
              [](const auto& l, const auto& r) { return l.first < r.first; });
    ExactScalar reach = 0;
    bool started = false;
    for (const auto& [lo, hi] : pieces) {
        if (reach < lo) return false;
        if (!started) {
            if (lo.sign() > 0) return false;
            started = true;
        }
        if (reach < hi) reach = hi;
    }
    return started && reach == ExactScalar(1);
}

nlohmann::json scalar_to_json(const ExactScalar& v) {
    const mpq_class& a = v.rational_part();
    const mpq_class& b = v.sqrt3_part();
    return nlohmann::json::array(
        {mpz_to_json(a.get_num()), mpz_to_json(a.get_den()), mpz_to_json(b.get_num()),
         mpz_to_json(b.get_den())});
}

ExactScalar scalar_from_json(const nlohmann::json& j) {
    if (!j.is_array() || j.size() != 4) throw std::invalid_argument("scalar must have 4 integers");
    const mpz_class ad = mpz_from_json(j[1]);
    const mpz_class bd = mpz_from_json(j[3]);
    if (ad <= 0 || bd <= 0) throw std::invalid_argument("scalar denominators must be positive");
    return {mpq_class(mpz_from_json(j[0]), ad), mpq_class(mpz_from_json(j[2]), bd)};
}

nlohmann::json point_to_json(const Point2& p) {
    nlohmann::json out = scalar_to_json(p.x);
    for (auto& v : scalar_to_json(p.y)) out.push_back(v);
    return out;
}

Point2 point_from_json(const nlohmann::json& j) {
    if (!j.is_array() || j.size() != 8) throw std::invalid_argument("point must have 8 integers");
    const nlohmann::json x = {j[0], j[1], j[2], j[3]};
    const nlohmann::json y = {j[4], j[5], j[6], j[7]};
    return {scalar_from_json(x), scalar_from_json(y)};
}

nlohmann::json Region2::to_json() const {
    nlohmann::json polys = nlohmann::json::array();
    for (const auto& poly : pieces_) {
        nlohmann::json verts = nlohmann::json::array();
        for (const auto& p : poly) verts.push_back(point_to_json(p));
        polys.push_back(std::move(verts));
    }
    return {{"polygons", std::move(polys)}};
}

Region2 Region2::from_json(const nlohmann::json& j) {
    if (!j.contains("polygons") || !j["polygons"].is_array())
        throw std::invalid_argument("region JSON needs a \"polygons\" array");
    std::vector<Polygon> polys;
    for (const auto& pj : j["polygons"]) {
        Polygon poly;
        for (const auto& vj : pj) poly.push_back(point_from_json(vj));
        polys.push_back(std::move(poly));
    }
    return from_polygons(polys);
}

}  // namespace kakeya
