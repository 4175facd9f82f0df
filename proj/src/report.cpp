#include "kakeya/report.hpp"

#include "kakeya/region.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace kakeya {

namespace {

bool needs_quotes(const std::string& s) { return s.find_first_of(",\"\r\n") != std::string::npos; }

std::string quote(const std::string& s) {
    if (!needs_quotes(s)) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string cell_text(const Cell& c) {
    if (std::holds_alternative<std::monostate>(c)) return "";
    if (const auto* s = std::get_if<std::string>(&c)) return quote(*s);
    if (const auto* d = std::get_if<double>(&c)) return format_real(*d);
    return std::to_string(std::get<std::int64_t>(c));
}

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

}  // namespace

void Table::validate() const {
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const Row& row = rows[r];
        if (row.size() != schema.size())
            throw SchemaError("row " + std::to_string(r) + " has " + std::to_string(row.size()) + " cells, schema has " +
                              std::to_string(schema.size()));
        for (std::size_t c = 0; c < row.size(); ++c) {
            const Column& col = schema[c];
            const Cell& cell = row[c];
            bool ok = false;
            if (std::holds_alternative<std::monostate>(cell))
                ok = col.optional;
            else if (col.type == ColumnType::Text)
                ok = std::holds_alternative<std::string>(cell);
            else if (col.type == ColumnType::Real)
                ok = std::holds_alternative<double>(cell);
            else
                ok = std::holds_alternative<std::int64_t>(cell);
            if (!ok) throw SchemaError("row " + std::to_string(r) + ": cell '" + col.name + "' has the wrong type");
        }
    }
}

int Table::nan_count() const {
    int n = 0;
    for (const auto& row : rows)
        for (const auto& cell : row)
            if (const auto* d = std::get_if<double>(&cell); d && std::isnan(*d)) ++n;
    return n;
}

std::string format_real(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string emit_csv(const Table& t) {
    t.validate();
    std::string out;
    for (std::size_t c = 0; c < t.schema.size(); ++c) {
        if (c) out += ',';
        out += quote(t.schema[c].name);
    }
    out += '\n';
    for (const auto& row : t.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out += ',';
            out += cell_text(row[c]);
        }
        out += '\n';
    }
    return out;
}

std::vector<std::vector<std::string>> parse_csv_records(const std::string& text) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> rec;
    std::string field;
    bool in_quotes = false, any = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field += c;
            }
            continue;
        }
        if (c == '"') {
            in_quotes = true;
            any = true;
        } else if (c == ',') {
            rec.push_back(field);
            field.clear();
            any = true;
        } else if (c == '\n' || c == '\r') {
            if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
            rec.push_back(field);
            records.push_back(rec);
            rec.clear();
            field.clear();
            any = false;
        } else {
            field += c;
            any = true;
        }
    }
    if (in_quotes) throw SchemaError("csv: unterminated quoted field");
    if (any || !field.empty()) {
        rec.push_back(field);
        records.push_back(rec);
    }
    return records;
}

Table parse_csv(const std::string& text, const std::vector<Column>& schema) {
    const auto records = parse_csv_records(text);
    if (records.empty()) throw SchemaError("csv: missing header");
    Table t;
    t.schema = schema;
    const auto& header = records[0];
    if (header.size() != schema.size()) throw SchemaError("csv: header width does not match the schema");
    for (std::size_t c = 0; c < schema.size(); ++c)
        if (header[c] != schema[c].name) throw SchemaError("csv: unexpected column '" + header[c] + "'");
    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& rec = records[r];
        if (rec.size() != schema.size()) throw SchemaError("csv: row " + std::to_string(r) + " has the wrong width");
        Row row;
        for (std::size_t c = 0; c < rec.size(); ++c) {
            const std::string& s = rec[c];
            const Column& col = schema[c];
            if (s.empty() && col.optional) {
                row.emplace_back(std::monostate{});
                continue;
            }
            if (col.type == ColumnType::Text) {
                row.emplace_back(s);
            } else if (col.type == ColumnType::Real) {
                if (s == "nan") {
                    row.emplace_back(std::numeric_limits<double>::quiet_NaN());
                    continue;
                }
                std::size_t used = 0;
                double v = 0;
                try {
                    v = std::stod(s, &used);
                } catch (const std::exception&) {
                    used = 0;
                }
                if (used != s.size() || s.empty()) throw SchemaError("csv: '" + s + "' is not a real number");
                row.emplace_back(v);
            } else {
                std::size_t used = 0;
                long long v = 0;
                try {
                    v = std::stoll(s, &used);
                } catch (const std::exception&) {
                    used = 0;
                }
                if (used != s.size() || s.empty()) throw SchemaError("csv: '" + s + "' is not an integer");
                row.emplace_back(static_cast<std::int64_t>(v));
            }
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

std::string emit_region_svg(const Region2& region, const std::vector<SvgSegment>& segments, const SvgStyle& style) {
    double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
    auto grow = [&](double x, double y) {
        xmin = std::min(xmin, x), xmax = std::max(xmax, x);
        ymin = std::min(ymin, -y), ymax = std::max(ymax, -y);
    };
    std::vector<std::vector<std::pair<double, double>>> polys;
    for (const auto& poly : region.polygons()) {
        std::vector<std::pair<double, double>> pts;
        for (const auto& p : poly) {
            pts.emplace_back(p.x.to_double(), p.y.to_double());
            grow(pts.back().first, pts.back().second);
        }
        polys.push_back(std::move(pts));
    }
    for (const auto& s : segments) grow(s.x0, s.y0), grow(s.x1, s.y1);
    if (!(xmin <= xmax)) xmin = 0, xmax = 1, ymin = -1, ymax = 0;
    const double extent = std::max({xmax - xmin, ymax - ymin, 1e-9});
    const double pad = style.margin * extent;
    const double vx = xmin - pad, vy = ymin - pad, vw = xmax - xmin + 2 * pad, vh = ymax - ymin + 2 * pad;
    const double height_px = style.width_px * vh / vw;
    const double stroke = style.stroke_px * vw / style.width_px;

    std::ostringstream out;
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(style.width_px) << "\" height=\""
        << num(height_px) << "\" viewBox=\"" << num(vx) << ' ' << num(vy) << ' ' << num(vw) << ' ' << num(vh)
        << "\">\n";
    out << "<g id=\"geometry\" fill=\"" << style.fill << "\" stroke=\"" << style.stroke << "\" stroke-width=\""
        << num(stroke) << "\">\n";
    for (const auto& pts : polys) {
        out << "<path d=\"";
        for (std::size_t i = 0; i < pts.size(); ++i)
            out << (i ? " L" : "M") << num(pts[i].first) << ',' << num(-pts[i].second);
        out << " Z\"/>\n";
    }
    out << "</g>\n";
    if (!segments.empty()) {
        out << "<g id=\"segments\" stroke=\"#e63946\" stroke-width=\"" << num(stroke) << "\">\n";
        for (const auto& s : segments)
            out << "<line x1=\"" << num(s.x0) << "\" y1=\"" << num(-s.y0) << "\" x2=\"" << num(s.x1) << "\" y2=\""
                << num(-s.y1) << "\"/>\n";
        out << "</g>\n";
    }
    out << "</svg>\n";
    return out.str();
}

std::string emit_heatmap_svg(const std::vector<double>& values, int n, double x0, double y0, double extent,
                             const SvgStyle& style) {
    if (n < 1 || values.size() != static_cast<std::size_t>(n) * n)
        throw std::invalid_argument("heatmap: values must hold n*n cells");
    const double w = extent / n;
    double vmax = 0;
    for (double v : values) vmax = std::max(vmax, v);
    std::ostringstream out;
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(style.width_px) << "\" height=\""
        << num(style.width_px) << "\" viewBox=\"" << num(x0) << ' ' << num(-(y0 + extent)) << ' ' << num(extent) << ' '
        << num(extent) << "\" shape-rendering=\"crispEdges\">\n";
    out << "<g id=\"heatmap\">\n";
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double v = values[static_cast<std::size_t>(i) * n + j];
            const double t = vmax > 0 ? std::log1p(v / vmax) / std::log(2.0) : 0.0;
            const int g = 255 - static_cast<int>(std::lround(255 * std::clamp(t, 0.0, 1.0)));
            char color[8];
            std::snprintf(color, sizeof color, "#%02x%02x%02x", g, g, g);
            out << "<rect x=\"" << num(x0 + i * w) << "\" y=\"" << num(-(y0 + (j + 1) * w)) << "\" width=\"" << num(w)
                << "\" height=\"" << num(w) << "\" fill=\"" << color << "\"/>\n";
        }
    out << "</g>\n</svg>\n";
    return out.str();
}

std::string sha256_hex(const std::string& bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256 failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

std::string sha256_file(const std::string& path) { return sha256_hex(read_file(path)); }

std::map<std::string, std::string> parse_config(const std::string& text) {
    std::map<std::string, std::string> out;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
        if (key.empty()) throw std::invalid_argument("config line " + std::to_string(lineno) + ": empty key");
        if (!out.emplace(key, value).second) throw std::invalid_argument("config: duplicate key '" + key + "'");
    }
    return out;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace kakeya
