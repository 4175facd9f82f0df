#include "kakeya/cli.hpp"

#include "kakeya/boxdim.hpp"
#include "kakeya/heisenberg.hpp"
#include "kakeya/parallel.hpp"
#include "kakeya/perron.hpp"
#include "kakeya/report.hpp"
#include "kakeya/spectral.hpp"
#include "kakeya/tubes.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>

#ifndef KAKEYA_LAB_VERSION
#define KAKEYA_LAB_VERSION "0.0.0"
#endif

namespace kakeya::cli {

namespace {

using nlohmann::json;

struct RunContext {
    std::vector<std::string> outputs;
    std::vector<std::uint64_t> seeds;
    int nan_cells = 0;
    std::vector<std::string> check_failures;
    json extra = json::object();

    void add_output(const std::string& path, const std::string& bytes) {
        write_file(path, bytes);
        outputs.push_back(path);
    }
    void add_table(const std::string& path, const Table& t) {
        nan_cells += t.nan_count();
        add_output(path, emit_csv(t));
    }
    void require(bool ok, const std::string& what) {
        if (!ok) check_failures.push_back(what);
    }
};

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto a = item.find_first_not_of(" \t"), b = item.find_last_not_of(" \t");
        if (a == std::string::npos) throw std::invalid_argument("empty item in list '" + s + "'");
        out.push_back(item.substr(a, b - a + 1));
    }
    if (out.empty()) throw std::invalid_argument("empty list");
    return out;
}

std::vector<double> parse_reals(const std::string& s) {
    std::vector<double> out;
    for (const auto& item : split_list(s)) {
        std::size_t used = 0;
        double v = 0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != item.size()) throw std::invalid_argument("not a number: '" + item + "'");
        out.push_back(v);
    }
    return out;
}

PerronSpec perron_spec(int m, const std::string& schedule) {
    if (schedule.empty()) return PerronSpec::with_default_schedule(m);
    PerronSpec spec;
    spec.m = m;
    for (const auto& item : split_list(schedule)) spec.schedule.push_back(ExactScalar::from_string(item));
    spec.validate();
    return spec;
}

Table make_table(std::vector<Column> schema) {
    Table t;
    t.schema = std::move(schema);
    return t;
}

// ---------------------------------------------------------------- perron

struct PerronOpts {
    int m = 0;
    std::string schedule, out, svg, csv;
    int segments = 0;
    bool check = false;
};

void run_perron(const PerronOpts& o, RunContext& ctx) {
    const PerronTree tree = build_perron_tree(perron_spec(o.m, o.schedule));
    ctx.add_output(o.out, tree.to_json().dump(1) + "\n");
    if (!o.svg.empty()) {
        std::vector<SvgSegment> segs;
        for (int j = 0; j < o.segments; ++j) {
            const double alpha = o.segments == 1 ? 0.0 : -30.0 + 60.0 * j / (o.segments - 1);
            const Segment2 s = tracked_segment(tree, base_point_for_angle(alpha));
            segs.push_back({s.p().x.to_double(), s.p().y.to_double(), s.q().x.to_double(), s.q().y.to_double()});
        }
        ctx.add_output(o.svg, emit_region_svg(tree.region, segs));
    }
    const ExactScalar area = region_area(tree.region);
    if (!o.csv.empty() || o.check) {
        const CoverageReport cov = direction_coverage(tree, 721);
        ctx.require(cov.covered == cov.sampled, "direction coverage below 1 on 721 sector directions");
        if (!o.csv.empty()) {
            Table t = make_table({{"m", ColumnType::Integer},
                                  {"area_exact", ColumnType::Text},
                                  {"area", ColumnType::Real},
                                  {"area_over_triangle", ColumnType::Real},
                                  {"directions", ColumnType::Integer},
                                  {"coverage", ColumnType::Real}});
            t.rows.push_back({std::int64_t{o.m}, area.to_string(), area.to_double(),
                              area.to_double() * std::sqrt(3.0), std::int64_t{cov.sampled}, cov.fraction()});
            ctx.add_table(o.csv, t);
        }
    }
    ctx.extra["area"] = area.to_string();
}

// ---------------------------------------------------------------- kakeya

struct KakeyaOpts {
    int m = 6;
    std::string schedule, out, svg, csv;
    int dirs = 1440;
    bool check = false;
};

void run_kakeya(const KakeyaOpts& o, RunContext& ctx) {
    if (o.dirs < 1) throw std::invalid_argument("--dirs must be positive");
    const PerronTree tree = build_perron_tree(perron_spec(o.m, o.schedule));
    const Region2 set = assemble_kakeya(tree);
    ctx.add_output(o.out, set.to_json().dump(1) + "\n");
    if (!o.svg.empty()) ctx.add_output(o.svg, emit_region_svg(set));
    const CoverageReport cov = kakeya_coverage(tree, set, o.dirs);
    ctx.require(cov.covered == cov.sampled, "full-circle coverage below 1");
    if (!o.csv.empty()) {
        Table t = make_table({{"m", ColumnType::Integer},
                              {"area", ColumnType::Real},
                              {"directions", ColumnType::Integer},
                              {"covered", ColumnType::Integer},
                              {"coverage", ColumnType::Real}});
        t.rows.push_back({std::int64_t{o.m}, region_area(set).to_double(), std::int64_t{cov.sampled},
                          std::int64_t{cov.covered}, cov.fraction()});
        ctx.add_table(o.csv, t);
    }
}

// ---------------------------------------------------------------- tubes

struct TubesGenOpts {
    int dim = 0;
    double delta = 0;
    std::string placement = "random", out;
    std::uint64_t seed = 0;
    int perron_m = 6;
};

void run_tubes_gen(const TubesGenOpts& o, RunContext& ctx) {
    if (o.dim != 2 && o.dim != 3) throw std::invalid_argument("--dim must be 2 or 3");
    if (!(o.delta > 0 && o.delta < 1)) throw std::invalid_argument("--delta must lie in (0, 1)");
    TubeFamily fam;
    if (o.placement == "parallel-lines") {
        if (o.dim != 3) throw std::invalid_argument("parallel-lines is a 3D family");
        fam = parallel_lines_family(o.delta);
    } else if (o.placement == "dyadic") {
        if (o.dim != 3) throw std::invalid_argument("dyadic is a 3D family");
        fam = hierarchical_dyadic_family(o.delta);
    } else {
        fam = generate_family(o.delta, o.dim, parse_placement(o.placement), o.seed, o.perron_m);
    }
    ctx.seeds.push_back(o.seed);
    ctx.add_output(o.out, fam.to_json().dump(1) + "\n");
    ctx.extra["tubes"] = fam.tubes.size();
}

struct TubesAnalyzeOpts {
    std::string in, out, checks = "volume,distinct,wolff,sticky", rhos;
    std::int64_t mc_samples = 1000000;
    int grid_res = 0;
    std::uint64_t seed = 0;
    int pair_samples = 2000;
    int prisms = 1000;
    double sticky_c = 4.0;
};

void run_tubes_analyze(const TubesAnalyzeOpts& o, RunContext& ctx) {
    const TubeFamily fam = TubeFamily::from_json(json::parse(read_file(o.in)));
    fam.validate();
    ctx.seeds.push_back(o.seed);
    const double delta = fam.delta;
    Table t = make_table({{"check", ColumnType::Text},
                          {"scale", ColumnType::Real},
                          {"statistic", ColumnType::Text},
                          {"value", ColumnType::Real},
                          {"threshold", ColumnType::Real, true},
                          {"verdict", ColumnType::Text}});
    auto info = [&](const std::string& check, double scale, const std::string& stat, double v) {
        t.rows.push_back({check, scale, stat, v, std::monostate{}, std::string("info")});
    };
    auto judged = [&](const std::string& check, double scale, const std::string& stat, double v, double thr,
                      bool pass) {
        t.rows.push_back({check, scale, stat, v, thr, std::string(pass ? "pass" : "fail")});
        ctx.require(pass, check + "/" + stat);
    };
    for (const auto& check : split_list(o.checks)) {
        if (check == "volume") {
            if (o.mc_samples < 1) throw std::invalid_argument("--mc-samples must be positive");
            const VolumeEstimate mc = union_volume_mc(fam, o.mc_samples, o.seed);
            info("volume", delta, "union_volume_mc", mc.value);
            info("volume", delta, "std_error_mc", mc.std_error);
            info("volume", delta, "total_tube_volume", total_tube_volume(fam));
            const double ratio = kakeya_ratio(fam, mc);
            if (fam.placement_tag == "parallel-lines")
                info("volume", delta, "kakeya_ratio", ratio);
            else
                judged("volume", delta, "kakeya_ratio", ratio, 0.1 * std::sqrt(delta), ratio >= 0.1 * std::sqrt(delta));
            if (o.grid_res > 0) {
                const VolumeEstimate g = union_volume_grid(fam, o.grid_res);
                info("volume", delta, "union_volume_grid", g.value);
                info("volume", delta, "grid_band", g.std_error);
            }
        } else if (check == "distinct") {
            const DistinctReport r = essentially_distinct_check(fam, o.pair_samples, o.seed);
            info("distinct", delta, "pairs", static_cast<double>(r.pairs));
            info("distinct", delta, "certified", static_cast<double>(r.certified));
            info("distinct", delta, "sampled", static_cast<double>(r.sampled));
            judged("distinct", delta, "flagged", static_cast<double>(r.flagged.size()), 0.0, r.passed());
        } else if (check == "wolff") {
            if (fam.dim != 3) {
                info("wolff", delta, "skipped_planar", 1.0);
                continue;
            }
            const WolffReport r = wolff_axiom_check(fam, o.prisms, o.seed);
            info("wolff", delta, "prisms_checked", r.prisms_checked);
            info("wolff", delta, "violations", static_cast<double>(r.violations.size()));
            judged("wolff", delta, "worst_ratio", r.worst_ratio, 1.0, r.worst_ratio <= 1.0);
        } else if (check == "sticky") {
            std::vector<double> rhos;
            if (!o.rhos.empty())
                rhos = parse_reals(o.rhos);
            else
                for (double r = 2 * delta; r < 1.0; r *= 2) rhos.push_back(r);
            const StickyReport r = sticky_check(fam, rhos, o.sticky_c);
            for (const auto& s : r.scales) {
                info("sticky", s.rho, "kept", s.kept);
                judged("sticky", s.rho, "min_normalized", s.min_normalized, 1.0 / o.sticky_c,
                       s.min_normalized >= 1.0 / o.sticky_c);
                judged("sticky", s.rho, "max_normalized", s.max_normalized, o.sticky_c, s.max_normalized <= o.sticky_c);
            }
        } else {
            throw std::invalid_argument("unknown check '" + check + "' (volume|distinct|wolff|sticky)");
        }
    }
    ctx.add_table(o.out, t);
}

// ---------------------------------------------------------------- heisenberg

struct HeisenbergOpts {
    std::string delta, out;
    std::int64_t samples = 1000000;
    std::uint64_t seed = 0;
    std::int64_t containment_samples = 0;
    bool check = false;
};

void run_heisenberg(const HeisenbergOpts& o, RunContext& ctx) {
    const std::vector<double> deltas = parse_reals(o.delta);
    ctx.seeds.push_back(o.seed);
    Table t = make_table({{"delta", ColumnType::Real},
                          {"volume", ColumnType::Real},
                          {"std_error", ColumnType::Real},
                          {"sum_tube_vol", ColumnType::Real},
                          {"count", ColumnType::Integer}});
    json containment = json::array();
    for (double d : deltas) {
        if (!(d > 0 && d <= 0.25)) throw std::invalid_argument("--delta must lie in (0, 1/4]");
        const ComplexTubeFamily fam = build_complex_family(d);
        const VolumeEstimate v = heisenberg_neighborhood_volume(d, o.samples, o.seed);
        t.rows.push_back({d, v.value, v.std_error, total_complex_tube_volume(fam), fam.count()});
        const std::int64_t cs = o.containment_samples > 0 ? o.containment_samples : (o.check ? 100000 : 0);
        if (cs > 0) {
            const ContainmentReport c = tube_containment(fam, cs, o.seed + 1);
            containment.push_back({{"delta", d}, {"sampled", c.sampled}, {"inside", c.inside}});
            ctx.require(c.fraction() >= 0.99, "tube containment below 99%");
        }
    }
    if (!containment.empty()) ctx.extra["containment"] = containment;
    ctx.add_table(o.out, t);
}

// ---------------------------------------------------------------- fefferman

struct FeffermanOpts {
    double r = 0;
    std::string p = "2,4", tree, out, heatmap, packets;
    int grid = 0;
    double period = 0;
    bool full_circle = false, single_packet = false;
    int heatmap_size = 128;
};

void run_fefferman(const FeffermanOpts& o, RunContext& ctx) {
    const PerronTree tree = o.tree.empty() ? build_perron_tree(PerronSpec::with_default_schedule(6))
                                           : PerronTree::from_json(json::parse(read_file(o.tree)));
    FeffermanConfig c;
    c.r = o.r;
    c.ps = parse_reals(o.p);
    c.N = o.grid;
    c.L = o.period;
    c.full_circle = o.full_circle;
    c.single_packet = o.single_packet;
    c.heatmap_size = o.heatmap_size;
    const FeffermanReport rep = fefferman_experiment(tree, c);
    Table t = make_table({{"r", ColumnType::Real},
                          {"p", ColumnType::Real},
                          {"N", ColumnType::Integer},
                          {"L", ColumnType::Real},
                          {"packets", ColumnType::Integer},
                          {"norm_f", ColumnType::Real},
                          {"norm_sf", ColumnType::Real},
                          {"ratio", ColumnType::Real}});
    for (std::size_t i = 0; i < rep.ratios.size(); ++i) {
        const double p = rep.config.ps[i];
        t.rows.push_back({rep.config.r, p, std::int64_t{rep.config.N}, rep.config.L,
                          static_cast<std::int64_t>(rep.packets.size()), rep.norm_f[i], rep.norm_sf[i], rep.ratios[i]});
        if (p == 2.0) ctx.require(rep.ratios[i] <= 1.0 + 1e-9, "p=2 ratio above 1");
        if (o.single_packet && p >= 2 && p <= 6) ctx.require(rep.ratios[i] <= 2.0, "single-packet ratio above 2");
    }
    ctx.add_table(o.out, t);
    if (!o.packets.empty()) {
        Table pt = make_table({{"index", ColumnType::Integer},
                               {"tree_copy", ColumnType::Integer},
                               {"alpha_degrees", ColumnType::Real},
                               {"base_x", ColumnType::Real},
                               {"base_y", ColumnType::Real},
                               {"centre_x", ColumnType::Real},
                               {"centre_y", ColumnType::Real},
                               {"l2_norm", ColumnType::Real}});
        for (std::size_t i = 0; i < rep.packets.size(); ++i) {
            const auto& d = rep.packets[i];
            pt.rows.push_back({static_cast<std::int64_t>(i), std::int64_t{d.tree_copy}, d.alpha_degrees, d.base[0],
                               d.base[1], d.y[0], d.y[1], d.l2_norm});
        }
        ctx.add_table(o.packets, pt);
    }
    if (!o.heatmap.empty())
        ctx.add_output(o.heatmap, emit_heatmap_svg(rep.heat, rep.heat_n, -rep.config.L / 2, -rep.config.L / 2,
                                                   rep.config.L));
}

// ---------------------------------------------------------------- multiplier

struct MultiplierOpts {
    std::string kind, in, out;
    double R = 1.0, alpha = 0.0;
};

void run_multiplier(const MultiplierOpts& o, RunContext& ctx) {
    MultiplierSpec m;
    m.kind = MultiplierSpec::parse_kind(o.kind);
    m.R = o.R;
    m.alpha = o.alpha;
    m.validate();
    std::istringstream in(read_file(o.in));
    const GridField f = read_field(in);
    const GridField g = apply_multiplier(f, m);
    std::ostringstream out;
    write_field(out, g);
    ctx.add_output(o.out, out.str());
    const double a = lp_norm(f, 2.0), b = lp_norm(g, 2.0);
    ctx.extra["l2_in"] = a;
    ctx.extra["l2_out"] = b;
    ctx.require(b <= a * (1 + 1e-12) + 1e-300, "L2 norm grew under a multiplier bounded by 1");
}

// ---------------------------------------------------------------- dim

struct DimOpts {
    std::string in, set, deltas = "2^-3..2^-9", out;
    double epsilon = 0.5;
    int cells_per_delta = 4;
    bool plain = false, check = false;
};

GeometricSet load_set(const DimOpts& o, int& ambient) {
    if (!o.set.empty() == !o.in.empty()) throw std::invalid_argument("give exactly one of --in and --set");
    if (!o.set.empty()) {
        ambient = 2;
        if (o.set == "square") return GeometricSet::unit_square();
        if (o.set == "segment") return GeometricSet::unit_segment();
        if (o.set == "disc") return GeometricSet::disc(0.5);
        if (o.set == "cantor") return GeometricSet::cantor(10);
        if (o.set == "cantor-product") return GeometricSet::cantor_product(10);
        if (o.set.rfind("perron-kakeya:", 0) == 0) {
            const int m = std::stoi(o.set.substr(14));
            return GeometricSet::from_region(assemble_kakeya(build_perron_tree(PerronSpec::with_default_schedule(m))));
        }
        throw std::invalid_argument("unknown --set '" + o.set +
                                    "' (square|segment|disc|cantor|cantor-product|perron-kakeya:<m>)");
    }
    const std::string text = read_file(o.in);
    const bool is_csv = o.in.size() >= 4 && o.in.substr(o.in.size() - 4) == ".csv";
    if (is_csv) {
        std::vector<Pt3> pts;
        int dim = 0;
        for (const auto& rec : parse_csv_records(text)) {
            if (rec.empty() || (rec.size() == 1 && rec[0].empty())) continue;
            std::vector<double> v;
            bool numeric = true;
            for (const auto& s : rec) {
                std::size_t used = 0;
                try {
                    v.push_back(std::stod(s, &used));
                } catch (const std::exception&) {
                    numeric = false;
                }
                if (numeric && used != s.size()) numeric = false;
            }
            if (!numeric) {
                if (pts.empty() && dim == 0) continue;  // header
                throw std::invalid_argument("points csv: non-numeric row");
            }
            if (v.size() != 2 && v.size() != 3) throw std::invalid_argument("points csv: rows need 2 or 3 coordinates");
            if (dim == 0) dim = static_cast<int>(v.size());
            if (static_cast<int>(v.size()) != dim) throw std::invalid_argument("points csv: mixed dimensions");
            pts.push_back({v[0], v[1], dim == 3 ? v[2] : 0.0});
        }
        ambient = dim == 0 ? 2 : dim;
        return GeometricSet::from_points(ambient, std::move(pts));
    }
    const json j = json::parse(text);
    if (j.contains("tubes")) {
        const TubeFamily fam = TubeFamily::from_json(j);
        ambient = fam.dim;
        return GeometricSet::from_tubes(fam);
    }
    ambient = 2;
    if (j.contains("region")) return GeometricSet::from_region(PerronTree::from_json(j).region);
    return GeometricSet::from_region(Region2::from_json(j));
}

void run_dim(const DimOpts& o, RunContext& ctx) {
    int ambient = 2;
    const GeometricSet set = load_set(o, ambient);
    const BoxCountCurve curve = neighborhood_volume_curve(set, parse_deltas(o.deltas), o.cells_per_delta);
    MinkowskiOptions mo;
    mo.boundary_term = !o.plain;
    const DimensionEstimate est = minkowski_estimate(curve, ambient, mo);
    const KakeyaBoundReport kb = kakeya_bound_check(curve, o.epsilon);
    Table t = make_table({{"section", ColumnType::Text},
                          {"delta", ColumnType::Real, true},
                          {"statistic", ColumnType::Text},
                          {"value", ColumnType::Real}});
    for (std::size_t i = 0; i < curve.entries.size(); ++i) {
        t.rows.push_back({std::string("curve"), curve.entries[i].first, std::string("volume"), curve.entries[i].second});
        t.rows.push_back({std::string("curve"), curve.entries[i].first, std::string("c_ratio"), kb.c_values[i]});
    }
    auto summary = [&](const std::string& sec, const std::string& stat, double v) {
        t.rows.push_back({sec, std::monostate{}, stat, v});
    };
    summary("fit", "dimension", est.dimension);
    summary("fit", "plain_dimension", est.plain_dimension);
    summary("fit", "residual", est.residual);
    summary("fit", "delta_max", est.delta_max);
    summary("fit", "delta_min", est.delta_min);
    summary("bound", "epsilon", kb.epsilon);
    summary("bound", "c_epsilon", kb.c_epsilon);
    summary("bound", "trend", kb.trend);
    summary("bound", "consistent", kb.consistent ? 1.0 : 0.0);
    ctx.require(kb.consistent, "Kakeya bound not consistent");
    ctx.add_table(o.out, t);
}

// ---------------------------------------------------------------- plumbing

std::vector<std::string> with_config(const std::vector<std::string>& args) {
    std::vector<std::string> rest;
    std::string config;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config") {
            if (i + 1 >= args.size()) throw std::invalid_argument("--config needs a file");
            config = args[++i];
        } else if (args[i].rfind("--config=", 0) == 0) {
            config = args[i].substr(9);
        } else {
            rest.push_back(args[i]);
        }
    }
    if (config.empty()) return rest;
    std::size_t path_len = 0;
    if (!rest.empty() && rest[0].rfind("-", 0) != 0) {
        path_len = 1;
        if (rest[0] == "tubes" && rest.size() > 1 && rest[1].rfind("-", 0) != 0) path_len = 2;
    }
    std::vector<std::string> out(rest.begin(), rest.begin() + static_cast<std::ptrdiff_t>(path_len));
    for (const auto& [k, v] : parse_config(read_file(config))) out.push_back("--" + k + "=" + v);
    out.insert(out.end(), rest.begin() + static_cast<std::ptrdiff_t>(path_len), rest.end());
    return out;
}

json collect_params(const CLI::App* sub, std::vector<std::string>& command) {
    json params = json::object();
    for (const CLI::Option* opt : sub->get_options()) {
        if (opt->get_lnames().empty()) continue;
        const std::string name = opt->get_lnames()[0];
        if (name == "help" || name == "manifest") continue;
        const bool flag = opt->get_expected_max() == 0;
        if (opt->count() > 0) {
            const std::string v = opt->results().back();
            params[name] = flag ? json(opt->as<bool>()) : json(v);
            if (!flag)
                command.push_back("--" + name + "=" + v);
            else if (opt->as<bool>())
                command.push_back("--" + name);
        } else {
            params[name] = flag ? json(false) : json(opt->get_default_str());
        }
    }
    return params;
}

}  // namespace

int dispatch(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
    const auto start = std::chrono::steady_clock::now();
    CLI::App app{"kakeya_lab: Kakeya sets, tubes and Fourier multipliers", "kakeya_lab"};
    app.require_subcommand(1);
    app.option_defaults()->always_capture_default()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    std::string manifest_path;
    bool check = false;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--manifest", manifest_path, "manifest path (default: <first output>.manifest.json)");
        sub->add_flag("--check", check, "exit 3 when an acceptance assertion fails");
    };

    RunContext ctx;
    std::function<void()> action;

    PerronOpts po;
    auto* perron = app.add_subcommand("perron", "build a Perron tree");
    perron->add_option("--m", po.m, "bisection depth")->required()->check(CLI::Range(1, 12));
    perron->add_option("--schedule", po.schedule, "comma-separated shift fractions (default i/(i+2))");
    perron->add_option("--out", po.out, "tree JSON")->required();
    perron->add_option("--svg", po.svg, "SVG rendering");
    perron->add_option("--segments", po.segments, "tracked segments drawn in the SVG")->check(CLI::Range(0, 10000));
    perron->add_option("--csv", po.csv, "area and coverage report");
    common(perron);
    perron->callback([&] { po.check = check, action = [&] { run_perron(po, ctx); }; });

    KakeyaOpts ko;
    auto* kakeya = app.add_subcommand("kakeya", "assemble three rotated Perron trees");
    kakeya->add_option("--m", ko.m, "bisection depth")->check(CLI::Range(1, 12));
    kakeya->add_option("--schedule", ko.schedule, "comma-separated shift fractions");
    kakeya->add_option("--out", ko.out, "region JSON")->required();
    kakeya->add_option("--svg", ko.svg, "SVG rendering");
    kakeya->add_option("--dirs", ko.dirs, "directions sampled over the full circle");
    kakeya->add_option("--csv", ko.csv, "coverage report");
    common(kakeya);
    kakeya->callback([&] { action = [&] { run_kakeya(ko, ctx); }; });

    auto* tubes = app.add_subcommand("tubes", "tube families");
    tubes->require_subcommand(1);
    TubesGenOpts tg;
    auto* gen = tubes->add_subcommand("gen", "generate a tube family");
    gen->add_option("--dim", tg.dim, "2 or 3")->required();
    gen->add_option("--delta", tg.delta, "tube radius")->required();
    gen->add_option("--placement", tg.placement, "bush|random|perron-base|parallel-lines|dyadic");
    gen->add_option("--seed", tg.seed, "random seed");
    gen->add_option("--perron-m", tg.perron_m, "tree depth for perron-base");
    gen->add_option("--out", tg.out, "family JSON")->required();
    common(gen);
    gen->callback([&] { action = [&] { run_tubes_gen(tg, ctx); }; });
    TubesAnalyzeOpts ta;
    auto* analyze = tubes->add_subcommand("analyze", "volumes and structural checks");
    analyze->add_option("--in", ta.in, "family JSON")->required();
    analyze->add_option("--checks", ta.checks, "comma list of volume,distinct,wolff,sticky");
    analyze->add_option("--mc-samples", ta.mc_samples, "Monte Carlo samples");
    analyze->add_option("--grid-res", ta.grid_res, "grid cells per unit (0: skip the grid estimate)");
    analyze->add_option("--seed", ta.seed, "random seed");
    analyze->add_option("--pair-samples", ta.pair_samples, "samples per undecided tube pair");
    analyze->add_option("--prisms", ta.prisms, "random prisms for the Wolff check");
    analyze->add_option("--rhos", ta.rhos, "comma list of sticky scales (default 2^k delta)");
    analyze->add_option("--sticky-c", ta.sticky_c, "sticky constant C");
    analyze->add_option("--out", ta.out, "CSV report")->required();
    common(analyze);
    analyze->callback([&] { action = [&] { run_tubes_analyze(ta, ctx); }; });

    HeisenbergOpts ho;
    auto* heis = app.add_subcommand("heisenberg", "Heisenberg neighbourhood volumes");
    heis->add_option("--delta", ho.delta, "delta or comma list")->required();
    heis->add_option("--samples", ho.samples, "Monte Carlo samples per delta");
    heis->add_option("--seed", ho.seed, "random seed");
    heis->add_option("--containment-samples", ho.containment_samples, "tube containment samples (0: skip)");
    heis->add_option("--out", ho.out, "CSV")->required();
    common(heis);
    heis->callback([&] { ho.check = check, action = [&] { run_heisenberg(ho, ctx); }; });

    FeffermanOpts fo;
    auto* feff = app.add_subcommand("fefferman", "ball multiplier pile-up experiment");
    feff->add_option("--r", fo.r, "rectangle scale r")->required();
    feff->add_option("--p", fo.p, "exponent or comma list");
    feff->add_option("--grid", fo.grid, "samples per axis (0: smallest that resolves r)");
    feff->add_option("--period", fo.period, "period L (0: 2.5/r^2, 3.5/r^2 with --full-circle)");
    feff->add_option("--tree", fo.tree, "tree JSON (default m=6)");
    feff->add_flag("--full-circle", fo.full_circle, "three rotated trees");
    feff->add_flag("--single-packet", fo.single_packet, "control run with one packet");
    feff->add_option("--heatmap-size", fo.heatmap_size, "heat map cells per axis");
    feff->add_option("--out", fo.out, "CSV of norm ratios")->required();
    feff->add_option("--heatmap", fo.heatmap, "SVG heat map of |Sf|^2");
    feff->add_option("--packets", fo.packets, "CSV of per-packet diagnostics");
    common(feff);
    feff->callback([&] { action = [&] { run_fefferman(fo, ctx); }; });

    MultiplierOpts mo;
    auto* mult = app.add_subcommand("multiplier", "apply a Fourier multiplier to field.bin");
    mult->add_option("--kind", mo.kind, "ball|square|br|lowpass")->required();
    mult->add_option("--R", mo.R, "radius");
    mult->add_option("--alpha", mo.alpha, "Bochner-Riesz exponent");
    mult->add_option("--in", mo.in, "input field.bin")->required();
    mult->add_option("--out", mo.out, "output field.bin")->required();
    common(mult);
    mult->callback([&] { action = [&] { run_multiplier(mo, ctx); }; });

    DimOpts dop;
    auto* dim = app.add_subcommand("dim", "box-counting dimension and Kakeya bound");
    dim->add_option("--in", dop.in, "region.json, tree.json, tubes.json or points.csv");
    dim->add_option("--set", dop.set, "built-in set instead of --in");
    dim->add_option("--deltas", dop.deltas, "2^-a..2^-b or comma list");
    dim->add_option("--epsilon", dop.epsilon, "exponent of the Kakeya bound");
    dim->add_option("--cells-per-delta", dop.cells_per_delta, "grid cells per delta");
    dim->add_flag("--plain", dop.plain, "plain slope fit without the boundary term");
    dim->add_option("--out", dop.out, "CSV")->required();
    common(dim);
    dim->callback([&] { action = [&] { run_dim(dop, ctx); }; });

    const auto named = [&](const CLI::App* a) { return a->get_name() == raw_args[0]; };
    if (!raw_args.empty() && raw_args[0].rfind("-", 0) != 0 && app.get_subcommands(named).empty()) {
        err << "error: unknown subcommand '" << raw_args[0] << "'\n" << app.help();
        return kExitValidation;
    }
    std::vector<std::string> args;
    try {
        args = with_config(raw_args);
        std::vector<const char*> argv{"kakeya_lab"};
        for (const auto& a : args) argv.push_back(a.c_str());
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n" << app.help();
        return kExitValidation;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitValidation;
    }

    CLI::App* sub = app.get_subcommands().front();
    std::vector<std::string> command{sub->get_name()};
    while (!sub->get_subcommands().empty()) {
        sub = sub->get_subcommands().front();
        command.push_back(sub->get_name());
    }

    try {
        action();
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitError;
    }

    json manifest;
    manifest["tool"] = "kakeya_lab";
    manifest["version"] = KAKEYA_LAB_VERSION;
    manifest["subcommand"] = command.size() > 1 ? command[0] + " " + command[1] : command[0];
    manifest["params"] = collect_params(sub, command);
    manifest["command"] = command;
    manifest["seeds"] = ctx.seeds;
    const char* threads = std::getenv("KAKEYA_LAB_THREADS");
    manifest["threads"] = threads ? json(threads) : json(nullptr);
    manifest["wall_time_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    json outputs = json::array();
    for (const auto& p : ctx.outputs) {
        const std::string bytes = read_file(p);
        outputs.push_back({{"path", p}, {"bytes", bytes.size()}, {"sha256", sha256_hex(bytes)}});
    }
    manifest["outputs"] = outputs;
    manifest["nan_cells"] = ctx.nan_cells;
    manifest["check_failures"] = ctx.check_failures;
    manifest["results"] = ctx.extra;
    const std::string mpath = !manifest_path.empty() ? manifest_path
                              : ctx.outputs.empty()   ? std::string("kakeya_lab.manifest.json")
                                                      : ctx.outputs.front() + ".manifest.json";
    try {
        write_file(mpath, manifest.dump(1) + "\n");
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitError;
    }
    for (const auto& p : ctx.outputs) out << "wrote " << p << "\n";
    if (ctx.nan_cells > 0) err << "warning: " << ctx.nan_cells << " NaN cells (flagged in the manifest)\n";
    if (check && !ctx.check_failures.empty()) {
        for (const auto& f : ctx.check_failures) err << "check failed: " << f << "\n";
        return kExitCheckFailed;
    }
    return kExitOk;
}

}  // namespace kakeya::cli
