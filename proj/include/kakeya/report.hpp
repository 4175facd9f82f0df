#pragma once

// Output plumbing shared by the command-line tool: typed CSV tables, SVG
// figures, SHA-256 digests and key=value experiment configs.

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace kakeya {

class Region2;

/// Raised when rows do not fit the declared schema.
struct SchemaError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

enum class ColumnType { Text, Real, Integer };

struct Column {
    std::string name;
    ColumnType type = ColumnType::Real;
    /// Optional cells may hold std::monostate and print empty.
    bool optional = false;
};

using Cell = std::variant<std::monostate, std::string, double, std::int64_t>;
using Row = std::vector<Cell>;

struct Table {
    std::vector<Column> schema;
    std::vector<Row> rows;

    /// Throws SchemaError on a width or type mismatch.
    void validate() const;
    /// Number of real cells holding NaN.
    int nan_count() const;
};

/// 17 significant digits; NaN prints as "nan", infinities as "inf"/"-inf".
std::string format_real(double v);
/// Header plus rows, RFC-4180 quoting, '\n' line endings.
std::string emit_csv(const Table& t);
/// Inverse of emit_csv for the given schema.  Throws SchemaError on bad input.
Table parse_csv(const std::string& text, const std::vector<Column>& schema);
/// Untyped RFC-4180 parse.
std::vector<std::vector<std::string>> parse_csv_records(const std::string& text);

struct SvgStyle {
    double width_px = 800;
    double margin = 0.05;  // fraction of the larger extent
    std::string fill = "#4a7ab0";
    std::string stroke = "#1d3557";
    double stroke_px = 0.5;
};

struct SvgSegment {
    double x0, y0, x1, y1;
};

/// World coordinates map to the viewBox by (x, y) -> (x, -y): the viewBox is
/// the bounding box of all geometry (y negated) padded by style.margin.  One
/// <path> per polygon in region order inside <g id="geometry">, then one
/// <line> per segment inside <g id="segments">.
std::string emit_region_svg(const Region2& region, const std::vector<SvgSegment>& segments = {},
                            const SvgStyle& style = {});
/// n x n cell values, row-major with row 0 at the smallest x.  Cell (i, j)
/// covers [x0 + i w, x0 + (i+1) w] x [y0 + j w, ...], w = extent / n, drawn
/// with y up.  Grey level is log(1 + v / max) / log 2.
std::string emit_heatmap_svg(const std::vector<double>& values, int n, double x0, double y0, double extent,
                             const SvgStyle& style = {});

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::string& path);

/// key = value lines; '#' starts a comment; blank lines ignored.  Duplicate
/// keys and lines without '=' are rejected.
std::map<std::string, std::string> parse_config(const std::string& text);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& bytes);

}  // namespace kakeya
