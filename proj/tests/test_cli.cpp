#include "kakeya/cli.hpp"
#include "kakeya/perron.hpp"
#include "kakeya/report.hpp"
#include "kakeya/spectral.hpp"

#include "json.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <sstream>

using namespace kakeya;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("kakeya_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    int run(std::vector<std::string> args) {
        std::ostringstream o, e;
        const int code = cli::dispatch(args, o, e);
        out_ = o.str();
        err_ = e.str();
        return code;
    }

    fs::path dir_;
    std::string out_, err_;
};

std::size_t count_of(const std::string& hay, const std::string& needle) {
    std::size_t n = 0;
    for (std::size_t p = hay.find(needle); p != std::string::npos; p = hay.find(needle, p + 1)) ++n;
    return n;
}

}  // namespace

TEST_F(Cli, PerronHappyPathWritesTreeAndManifest) {
    ASSERT_EQ(run({"perron", "--m", "4", "--schedule", "0.33,0.5,0.6,0.67", "--out", path("t.json")}), 0) << err_;
    const PerronTree t = PerronTree::from_json(json::parse(read_file(path("t.json"))));
    EXPECT_EQ(t.spec.m, 4);
    EXPECT_EQ(t.spec.schedule[0], ExactScalar::from_string("33/100"));
    const json m = json::parse(read_file(path("t.json.manifest.json")));
    EXPECT_EQ(m["tool"], "kakeya_lab");
    EXPECT_EQ(m["subcommand"], "perron");
    EXPECT_EQ(m["params"]["schedule"], "0.33,0.5,0.6,0.67");
    ASSERT_EQ(m["outputs"].size(), 1u);
    EXPECT_EQ(m["outputs"][0]["sha256"], sha256_file(path("t.json")));
    EXPECT_EQ(m["outputs"][0]["bytes"], fs::file_size(path("t.json")));
}

TEST_F(Cli, UnsupportedDimensionIsAValidationError) {
    EXPECT_EQ(run({"tubes", "gen", "--delta", "0.3", "--dim", "4", "--out", path("t.json")}), 2);
    EXPECT_NE(err_.find("--dim"), std::string::npos);
    EXPECT_FALSE(fs::exists(path("t.json")));
    // missing required flags are caught by the parser
    EXPECT_EQ(run({"tubes", "gen", "--delta", "0.3", "--dim", "4"}), 2);
}

TEST_F(Cli, UnknownSubcommandPrintsUsageOnStderr) {
    EXPECT_EQ(run({"volcano"}), 2);
    EXPECT_NE(err_.find("volcano"), std::string::npos);
    EXPECT_NE(err_.find("Usage"), std::string::npos);
    EXPECT_TRUE(out_.empty());
    EXPECT_EQ(run({}), 2);
    EXPECT_EQ(run({"tubes", "smash"}), 2);
}

TEST_F(Cli, BadNumbersAndRangesAreRejected) {
    EXPECT_EQ(run({"perron", "--m", "zero", "--out", path("t.json")}), 2);
    EXPECT_EQ(run({"perron", "--m", "0", "--out", path("t.json")}), 2);
    EXPECT_EQ(run({"heisenberg", "--delta", "0.1,x", "--out", path("h.csv")}), 2);
    EXPECT_EQ(run({"fefferman", "--r", "0.03125", "--grid", "1024", "--out", path("f.csv")}), 2);
    EXPECT_NE(err_.find("need N >= 8192"), std::string::npos);
    EXPECT_EQ(run({"dim", "--out", path("d.csv")}), 2);
    EXPECT_EQ(run({"multiplier", "--kind", "hexagon", "--in", path("x"), "--out", path("y")}), 2);
}

TEST_F(Cli, MissingInputFileIsARuntimeError) {
    EXPECT_EQ(run({"tubes", "analyze", "--in", path("absent.json"), "--out", path("a.csv")}), 1);
}

TEST_F(Cli, HeisenbergIsDeterministic) {
    const std::vector<std::string> a = {"heisenberg", "--delta", "0.0625", "--samples", "1000000", "--seed", "7",
                                        "--out", path("a.csv")};
    std::vector<std::string> b = a;
    b.back() = path("b.csv");
    ASSERT_EQ(run(a), 0) << err_;
    ASSERT_EQ(run(b), 0) << err_;
    EXPECT_EQ(read_file(path("a.csv")), read_file(path("b.csv")));
    const Table t = parse_csv(read_file(path("a.csv")), {{"delta", ColumnType::Real},
                                                         {"volume", ColumnType::Real},
                                                         {"std_error", ColumnType::Real},
                                                         {"sum_tube_vol", ColumnType::Real},
                                                         {"count", ColumnType::Integer}});
    ASSERT_EQ(t.rows.size(), 1u);
    EXPECT_EQ(std::get<double>(t.rows[0][0]), 0.0625);
    const json m = json::parse(read_file(path("a.csv.manifest.json")));
    EXPECT_EQ(m["seeds"], json::array({7}));
}

TEST_F(Cli, OutputsIndependentOfThreadCount) {
    ASSERT_EQ(run({"tubes", "gen", "--dim", "3", "--delta", "0.125", "--seed", "3", "--out", path("t.json")}), 0);
    std::vector<std::string> csv;
    for (const char* threads : {"1", "4"}) {
        ::setenv("KAKEYA_LAB_THREADS", threads, 1);
        const std::string out = path(std::string("a") + threads + ".csv");
        EXPECT_EQ(run({"tubes", "analyze", "--in", path("t.json"), "--mc-samples", "100000", "--prisms", "50",
                       "--pair-samples", "200", "--checks", "volume,wolff,sticky", "--out", out}),
                  0)
            << err_;
        csv.push_back(read_file(out));
    }
    ::unsetenv("KAKEYA_LAB_THREADS");
    EXPECT_EQ(csv[0], csv[1]);
}

TEST_F(Cli, CheckFailureExitsThree) {
    // a segment's neighbourhood shrinks like delta, so the Kakeya bound fails
    EXPECT_EQ(run({"dim", "--set", "segment", "--out", path("d.csv"), "--check"}), 3);
    EXPECT_NE(err_.find("check failed"), std::string::npos);
    EXPECT_TRUE(fs::exists(path("d.csv")));
    EXPECT_EQ(run({"dim", "--set", "segment", "--out", path("d.csv")}), 0);
    EXPECT_EQ(run({"dim", "--set", "square", "--out", path("d.csv"), "--check"}), 0);
}

TEST_F(Cli, ConfigFileValuesYieldToFlags) {
    write_file(path("run.cfg"), "# perron defaults\nm = 3\nout = " + path("cfg.json") + "\n");
    ASSERT_EQ(run({"perron", "--config", path("run.cfg"), "--m", "5"}), 0) << err_;
    const PerronTree t = PerronTree::from_json(json::parse(read_file(path("cfg.json"))));
    EXPECT_EQ(t.spec.m, 5);
    ASSERT_EQ(run({"perron", "--config=" + path("run.cfg")}), 0) << err_;
    EXPECT_EQ(PerronTree::from_json(json::parse(read_file(path("cfg.json")))).spec.m, 3);
}

TEST_F(Cli, ConfigFileRejectsUnknownAndDuplicateKeys) {
    write_file(path("bad.cfg"), "m = 3\ncolour = blue\n");
    EXPECT_EQ(run({"perron", "--config", path("bad.cfg"), "--out", path("t.json")}), 2);
    EXPECT_NE(err_.find("colour"), std::string::npos);
    write_file(path("dup.cfg"), "m = 3\nm = 4\n");
    EXPECT_EQ(run({"perron", "--config", path("dup.cfg"), "--out", path("t.json")}), 2);
    EXPECT_EQ(run({"perron", "--config", path("missing.cfg"), "--out", path("t.json")}), 2);
}

TEST_F(Cli, ManifestCommandReproducesDigests) {
    ASSERT_EQ(run({"fefferman", "--r", "0.125", "--p", "2,4", "--out", path("f.csv"), "--heatmap", path("f.svg"),
                   "--heatmap-size", "32", "--single-packet"}),
              0)
        << err_;
    const json m = json::parse(read_file(path("f.csv.manifest.json")));
    const std::vector<std::string> cmd = m["command"];
    EXPECT_NE(std::find(cmd.begin(), cmd.end(), "--single-packet"), cmd.end());
    fs::remove(path("f.csv"));
    fs::remove(path("f.svg"));
    ASSERT_EQ(run(cmd), 0) << err_;
    for (const auto& o : m["outputs"]) EXPECT_EQ(sha256_file(o["path"]), o["sha256"]);
}

TEST_F(Cli, MultiplierMatchesLibrary) {
    GridField f = GridField::zeros(2, 32, 6.0);
    for (std::size_t i = 0; i < f.size(); ++i) f.data[i] = cplx(std::sin(0.1 * i), std::cos(0.37 * i));
    std::ostringstream bin;
    write_field(bin, f);
    write_file(path("in.bin"), bin.str());
    ASSERT_EQ(run({"multiplier", "--kind", "ball", "--R", "1.2", "--in", path("in.bin"), "--out", path("out.bin")}), 0)
        << err_;
    std::istringstream back(read_file(path("out.bin")));
    const GridField g = read_field(back);
    EXPECT_EQ(g.data, apply_multiplier(f, {MultiplierKind::Ball, 1.2, 0.0}).data);
}

TEST_F(Cli, DimReadsPointsCsv) {
    write_file(path("pts.csv"), "x,y\n0,0\n1,0\n0.5,0.5\n");
    ASSERT_EQ(run({"dim", "--in", path("pts.csv"), "--deltas", "2^-4..2^-8", "--out", path("d.csv")}), 0) << err_;
    const Table t = parse_csv(read_file(path("d.csv")), {{"section", ColumnType::Text},
                                                         {"delta", ColumnType::Real, true},
                                                         {"statistic", ColumnType::Text},
                                                         {"value", ColumnType::Real}});
    for (const auto& r : t.rows)
        if (std::get<std::string>(r[2]) == "dimension") EXPECT_NEAR(std::get<double>(r[3]), 0.0, 0.05);
}

TEST(Csv, RoundTripsTypedRows) {
    Table t;
    t.schema = {{"name", ColumnType::Text}, {"x", ColumnType::Real}, {"n", ColumnType::Integer},
                {"note", ColumnType::Text, true}};
    t.rows = {{std::string("plain"), 0.1, std::int64_t{-3}, std::string("a,b")},
              {std::string("quo\"te"), 1e-300, std::int64_t{1} << 60, std::monostate{}},
              {std::string("line\nbreak"), -2.5, std::int64_t{0}, std::string("")}};
    const std::string csv = emit_csv(t);
    EXPECT_EQ(csv.find('\r'), std::string::npos);
    const Table back = parse_csv(csv, t.schema);
    ASSERT_EQ(back.rows.size(), t.rows.size());
    for (std::size_t i = 0; i < t.rows.size(); ++i)
        for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(back.rows[i][j], t.rows[i][j]) << i << "," << j;
    EXPECT_EQ(back.rows[0][3], t.rows[0][3]);
    EXPECT_TRUE(std::holds_alternative<std::monostate>(back.rows[1][3]));
}

TEST(Csv, FullPrecisionAndSpecialValues) {
    EXPECT_EQ(std::stod(format_real(0.1)), 0.1);
    EXPECT_EQ(format_real(0.1), "0.10000000000000001");
    EXPECT_EQ(format_real(NAN), "nan");
    EXPECT_EQ(format_real(-INFINITY), "-inf");
}

TEST(Csv, ZeroRowsIsHeaderOnly) {
    Table t;
    t.schema = {{"a", ColumnType::Real}, {"b", ColumnType::Text}};
    EXPECT_EQ(emit_csv(t), "a,b\n");
    EXPECT_TRUE(parse_csv("a,b\n", t.schema).rows.empty());
}

TEST(Csv, NanIsPrintedAndCounted) {
    Table t;
    t.schema = {{"v", ColumnType::Real}};
    t.rows = {{NAN}, {1.0}, {NAN}};
    EXPECT_EQ(emit_csv(t), "v\nnan\n1\nnan\n");
    EXPECT_EQ(t.nan_count(), 2);
    EXPECT_TRUE(std::isnan(std::get<double>(parse_csv(emit_csv(t), t.schema).rows[0][0])));
}

TEST(Csv, SchemaMismatchThrows) {
    Table t;
    t.schema = {{"a", ColumnType::Real}, {"b", ColumnType::Integer}};
    t.rows = {{1.0}};
    EXPECT_THROW(emit_csv(t), SchemaError);
    t.rows = {{1.0, 2.0}};
    EXPECT_THROW(emit_csv(t), SchemaError);
    t.rows = {{1.0, std::monostate{}}};
    EXPECT_THROW(emit_csv(t), SchemaError);
    EXPECT_THROW(parse_csv("a,c\n1,2\n", t.schema), SchemaError);
    EXPECT_THROW(parse_csv("a,b\n1,2.5\n", t.schema), SchemaError);
    EXPECT_THROW(parse_csv("a,b\n1\n", t.schema), SchemaError);
}

TEST(Svg, EmptyRegionHasEmptyGeometryLayer) {
    const std::string svg = emit_region_svg(Region2{});
    EXPECT_EQ(svg.rfind("<?xml", 0), 0u);
    EXPECT_NE(svg.find("<svg"), std::string::npos);
    EXPECT_NE(svg.find("</svg>"), std::string::npos);
    EXPECT_EQ(count_of(svg, "<path"), 0u);
    EXPECT_NE(svg.find("<g id=\"geometry\""), std::string::npos);
}

TEST(Svg, OnePathPerPolygonAndDeterministic) {
    const PerronTree t = build_perron_tree(PerronSpec::with_default_schedule(4));
    const std::string a = emit_region_svg(t.region, {{0, 1, 0.1, 0}});
    EXPECT_EQ(count_of(a, "<path"), t.region.polygons().size());
    EXPECT_EQ(count_of(a, "<line"), 1u);
    EXPECT_EQ(a, emit_region_svg(build_perron_tree(PerronSpec::with_default_schedule(4)).region, {{0, 1, 0.1, 0}}));
}

TEST(Svg, HeatmapHasOneRectPerCell) {
    std::vector<double> v(9, 0.0);
    v[4] = 2.0;
    const std::string svg = emit_heatmap_svg(v, 3, -1, -1, 2);
    EXPECT_EQ(count_of(svg, "<rect"), 9u);
    EXPECT_THROW(emit_heatmap_svg(v, 4, 0, 0, 1), std::invalid_argument);
}

TEST(Digest, KnownSha256Vectors) {
    EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Config, ParsesCommentsAndRejectsMalformedLines) {
    const auto c = parse_config("# header\n\n a = 1 \nb=x,y # trailing\n");
    ASSERT_EQ(c.size(), 2u);
    EXPECT_EQ(c.at("a"), "1");
    EXPECT_EQ(c.at("b"), "x,y");
    EXPECT_THROW(parse_config("a 1\n"), std::invalid_argument);
    EXPECT_THROW(parse_config("a=1\na=2\n"), std::invalid_argument);
}
