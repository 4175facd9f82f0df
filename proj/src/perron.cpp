#include "kakeya/perron.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace kakeya {

namespace {

ExactScalar inv_sqrt3() { return {mpq_class(0), mpq_class(1, 3)}; }

// Index of the sliver whose base contains x (the leftmost one on ties).
std::size_t owner(const PerronSpec& spec, const ExactScalar& x) {
    const std::size_t n = std::size_t{1} << spec.m;
    const ExactScalar width = ExactScalar(2) * inv_sqrt3() / ExactScalar(static_cast<long>(n));
    const ExactScalar offset = (x + inv_sqrt3()) / width;
    // floor of offset, adjusted so boundary points belong to the left sliver
    long k = static_cast<long>(std::floor(offset.to_double()));
    while (k > 0 && !(ExactScalar(k) < offset)) --k;
    while (k + 1 < static_cast<long>(n) && ExactScalar(k + 1) < offset) ++k;
    if (k < 0) k = 0;
    return static_cast<std::size_t>(k);
}

}  // namespace

PerronSpec PerronSpec::with_default_schedule(int m) {
    PerronSpec s;
    s.m = m;
    for (int i = 1; i <= m; ++i) s.schedule.emplace_back(mpq_class(i, i + 2));
    return s;
}

void PerronSpec::validate() const {
    if (m <= 0) throw std::invalid_argument("perron: m must be positive, got " + std::to_string(m));
    if (m > 16) throw std::invalid_argument("perron: m above 16 is not supported");
    if (static_cast<int>(schedule.size()) != m)
        throw std::invalid_argument("perron: schedule has " + std::to_string(schedule.size()) +
                                    " entries, expected m = " + std::to_string(m));
    for (const auto& s : schedule)
        if (s.sign() < 0 || !(s < ExactScalar(1)))
            throw std::invalid_argument("perron: shift fraction " + s.to_string() +
                                        " outside [0, 1)");
}

Point2 apex() { return {0, 1}; }

Polygon base_triangle() { return {{-inv_sqrt3(), 0}, {inv_sqrt3(), 0}, apex()}; }

std::vector<Polygon> bisect(const PerronSpec& spec) {
    if (spec.m <= 0) throw std::invalid_argument("perron: m must be positive");
    const long n = 1L << spec.m;
    const ExactScalar width = ExactScalar(2) * inv_sqrt3() / ExactScalar(n);
    std::vector<Polygon> out;
    out.reserve(n);
    for (long k = 0; k < n; ++k) {
        const ExactScalar x0 = -inv_sqrt3() + ExactScalar(k) * width;
        const ExactScalar x1 = k + 1 == n ? inv_sqrt3() : x0 + width;
        out.push_back({{x0, 0}, {x1, 0}, apex()});
    }
    return out;
}

PerronTree build_perron_tree(const PerronSpec& spec) {
    spec.validate();
    const std::size_t n = std::size_t{1} << spec.m;
    const ExactScalar leaf_width = ExactScalar(2) * inv_sqrt3() / ExactScalar(static_cast<long>(n));
    std::vector<ExactScalar> shift(n);
    for (int level = 1; level <= spec.m; ++level) {
        const std::size_t block = std::size_t{1} << (level - 1);
        // Paired blocks close the gap by sigma * block width, half each.
        const ExactScalar half_step = spec.schedule[level - 1] *
                                      ExactScalar(static_cast<long>(block)) * leaf_width /
                                      ExactScalar(2);
        for (std::size_t start = 0; start < n; start += 2 * block) {
            for (std::size_t k = start; k < start + block; ++k) shift[k] += half_step;
            for (std::size_t k = start + block; k < start + 2 * block; ++k) shift[k] -= half_step;
        }
    }
    PerronTree tree;
    tree.spec = spec;
    std::vector<Region2> parts;
    parts.reserve(n);
    const auto slivers = bisect(spec);
    for (std::size_t k = 0; k < n; ++k) {
        tree.piece_shifts.push_back({shift[k], 0});
        Polygon moved;
        for (const auto& p : slivers[k]) moved.push_back({p.x + shift[k], p.y});
        parts.push_back(Region2::from_normalized({std::move(moved)}));
    }
    tree.region = region_union_all(parts);
    return tree;
}

ExactScalar base_point_for_angle(double alpha_degrees) {
    if (!(std::fabs(alpha_degrees) <= 30.0))
        throw std::invalid_argument("direction " + std::to_string(alpha_degrees) +
                                    " deg lies outside the apex sector [-30, 30]");
    if (alpha_degrees == 30.0) return inv_sqrt3();
    if (alpha_degrees == -30.0) return -inv_sqrt3();
    const double t = std::tan(alpha_degrees * std::numbers::pi / 180.0);
    const double scale = 1099511627776.0;  // 2^40
    mpq_class q(mpz_class(static_cast<long>(std::llround(t * scale))), mpz_class(1099511627776L));
    q.canonicalize();
    ExactScalar x(q);
    if (inv_sqrt3() < x) x = inv_sqrt3();
    if (x < -inv_sqrt3()) x = -inv_sqrt3();
    return x;
}

Segment2 tracked_segment(const PerronTree& tree, const ExactScalar& base_x) {
    const Point2& s = tree.piece_shifts.at(owner(tree.spec, base_x));
    return {apex() + s, Point2{base_x, 0} + s};
}

bool covers_direction(const PerronTree& tree, double alpha_degrees) {
    return contains_segment(tree.region, tracked_segment(tree, base_point_for_angle(alpha_degrees)));
}

CoverageReport direction_coverage(const PerronTree& tree, int n_dirs) {
    if (n_dirs < 1) throw std::invalid_argument("direction_coverage: n_dirs must be positive");
    CoverageReport report;
    for (int j = 0; j < n_dirs; ++j) {
        const double alpha = n_dirs == 1 ? 0.0 : -30.0 + 60.0 * j / (n_dirs - 1);
        ++report.sampled;
        if (covers_direction(tree, alpha))
            ++report.covered;
        else
            report.missed_degrees.push_back(alpha);
    }
    return report;
}

Region2 assemble_kakeya(const PerronTree& tree) {
    std::vector<Region2> copies;
    for (int k = 0; k < 3; ++k) copies.push_back(transform(tree.region, {120 * k, apex(), {0, 0}}));
    return region_union_all(copies);
}

Segment2 kakeya_segment(const PerronTree& tree, double theta_degrees) {
    // Line directions repeat every 180 degrees; the unrotated tree carries
    // line angles [60, 120], the 120/240 degree copies [0, 60] and [120, 180].
    double phi = std::fmod(theta_degrees, 180.0);
    if (phi < 0) phi += 180.0;
    int copy = 0;
    double alpha = phi - 90.0;
    if (phi < 60.0) {
        copy = 1;
        alpha = phi - 30.0;
    } else if (phi > 120.0) {
        copy = 2;
        alpha = phi - 150.0;
    }
    const Segment2 s = tracked_segment(tree, base_point_for_angle(alpha));
    const RigidMotion rot{120 * copy, apex(), {0, 0}};
    return {rot.apply(s.p()), rot.apply(s.q())};
}

CoverageReport kakeya_coverage(const PerronTree& tree, const Region2& assembled, int n_dirs) {
    if (n_dirs < 1) throw std::invalid_argument("kakeya_coverage: n_dirs must be positive");
    CoverageReport report;
    for (int j = 0; j < n_dirs; ++j) {
        const double theta = 360.0 * j / n_dirs;
        ++report.sampled;
        if (contains_segment(assembled, kakeya_segment(tree, theta)))
            ++report.covered;
        else
            report.missed_degrees.push_back(theta);
    }
    return report;
}

nlohmann::json PerronTree::to_json() const {
    nlohmann::json schedule = nlohmann::json::array();
    for (const auto& s : spec.schedule) schedule.push_back(scalar_to_json(s));
    nlohmann::json shifts = nlohmann::json::array();
    for (const auto& s : piece_shifts) shifts.push_back(point_to_json(s));
    return {{"m", spec.m},
            {"schedule", std::move(schedule)},
            {"piece_shifts", std::move(shifts)},
            {"region", region.to_json()}};
}

PerronTree PerronTree::from_json(const nlohmann::json& j) {
    PerronSpec spec;
    spec.m = j.at("m").get<int>();
    for (const auto& s : j.at("schedule")) spec.schedule.push_back(scalar_from_json(s));
    PerronTree tree = build_perron_tree(spec);
    const auto& shifts = j.at("piece_shifts");
    bool same = shifts.size() == tree.piece_shifts.size();
    for (std::size_t k = 0; same && k < shifts.size(); ++k)
        same = point_from_json(shifts[k]) == tree.piece_shifts[k];
    if (!same || !(j.at("region") == tree.region.to_json()))
        throw std::invalid_argument("tree JSON is inconsistent with its own schedule");
    return tree;
}

}  // namespace kakeya
