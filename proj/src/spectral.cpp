#include "kakeya/spectral.hpp"

#include "kakeya/parallel.hpp"
#include "kakeya/perron.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <istream>
#include <mutex>
#include <numbers>
#include <ostream>
#include <stdexcept>

namespace kakeya {

namespace {

constexpr double kPi = std::numbers::pi;

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

// FFTW's planner is not thread safe; execution is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

void transform_in_place(GridField& f, int sign) {
    f.validate();
    fftw_complex* buf = reinterpret_cast<fftw_complex*>(f.data.data());
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        plan = f.dim == 1 ? fftw_plan_dft_1d(f.N, buf, buf, sign, FFTW_ESTIMATE)
                          : fftw_plan_dft_2d(f.N, f.N, buf, buf, sign, FFTW_ESTIMATE);
    }
    if (plan == nullptr) throw std::runtime_error("fftw: planning failed");
    fftw_execute(plan);
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        fftw_destroy_plan(plan);
    }
    const double scale = std::pow(static_cast<double>(f.N), -0.5 * f.dim);
    for (auto& v : f.data) v *= scale;
}

// Signed integer frequency of FFT-order bin k.
int signed_bin(int k, int N) { return k < N / 2 ? k : k - N; }

bool keeps_everything(const MultiplierSpec& m, const GridField& f) {
    const double nyq = -0.5 * f.N / f.L;
    return multiplier_symbol(m, nyq, f.dim == 2 ? nyq : 0.0) != 0.0;
}

// Per-row partial sums, added in row order.
template <class RowFn>
double ordered_sum(int rows, RowFn&& row) {
    std::vector<double> partial(static_cast<std::size_t>(rows), 0.0);
    parallel_for(partial.size(), [&](std::size_t i) { partial[i] = row(static_cast<int>(i)); });
    double s = 0.0;
    for (double v : partial) s += v;
    return s;
}

double raised_cosine(double t, double half_width) {
    const double a = std::fabs(t) / half_width;
    if (a <= 0.5) return 1.0;
    if (a >= 1.0) return 0.0;
    return 0.5 * (1.0 + std::cos(kPi * (a - 0.5) / 0.5));
}

double wrap(double d, double L) { return d - L * std::floor(d / L + 0.5); }

void put_u64(std::ostream& out, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t get_u64(std::istream& in) {
    unsigned char b[8];
    if (!in.read(reinterpret_cast<char*>(b), 8)) throw std::runtime_error("field.bin: truncated");
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
    return v;
}

void put_f64(std::ostream& out, double d) {
    std::uint64_t v;
    std::memcpy(&v, &d, 8);
    put_u64(out, v);
}

double get_f64(std::istream& in) {
    const std::uint64_t v = get_u64(in);
    double d;
    std::memcpy(&d, &v, 8);
    return d;
}

constexpr char kFieldMagic[9] = "KAKFIELD";

}  // namespace

GridField GridField::zeros(int dim, int N, double L) {
    GridField f;
    f.dim = dim;
    f.N = N;
    f.L = L;
    if (dim != 1 && dim != 2) throw std::invalid_argument("GridField: dim must be 1 or 2");
    if (N < 8 || !is_power_of_two(N)) throw std::invalid_argument("GridField: N must be a power of two >= 8");
    f.data.assign(dim == 1 ? static_cast<std::size_t>(N) : static_cast<std::size_t>(N) * N, cplx{});
    f.validate();
    return f;
}

void GridField::validate() const {
    if (dim != 1 && dim != 2) throw std::invalid_argument("GridField: dim must be 1 or 2");
    if (N < 8 || !is_power_of_two(N)) throw std::invalid_argument("GridField: N must be a power of two >= 8");
    if (!(L > 0) || !std::isfinite(L)) throw std::invalid_argument("GridField: L must be positive");
    const std::size_t want = dim == 1 ? static_cast<std::size_t>(N) : static_cast<std::size_t>(N) * N;
    if (data.size() != want) throw std::invalid_argument("GridField: data size is not N^dim");
}

double GridField::coordinate(int j) const { return signed_bin(j, N) * L / N; }

double GridField::frequency(int k) const { return signed_bin(k, N) / L; }

GridField dft_forward(const GridField& f) {
    GridField g = f;
    transform_in_place(g, FFTW_FORWARD);
    return g;
}

GridField dft_inverse(const GridField& f) {
    GridField g = f;
    transform_in_place(g, FFTW_BACKWARD);
    return g;
}

GridField continuous_transform(const GridField& f) {
    GridField g = dft_forward(f);
    const double scale = std::pow(f.L / std::sqrt(static_cast<double>(f.N)), f.dim);
    for (auto& v : g.data) v *= scale;
    return g;
}

void MultiplierSpec::validate() const {
    if (!(R > 0) || !std::isfinite(R)) throw std::invalid_argument("multiplier: R must be positive");
    if (!(alpha >= 0) || !std::isfinite(alpha)) throw std::invalid_argument("multiplier: alpha must be >= 0");
}

MultiplierKind MultiplierSpec::parse_kind(const std::string& s) {
    if (s == "ball") return MultiplierKind::Ball;
    if (s == "square") return MultiplierKind::Square;
    if (s == "br" || s == "bochner-riesz") return MultiplierKind::BochnerRiesz;
    if (s == "lowpass" || s == "lowpass-unit") return MultiplierKind::LowpassUnit;
    throw std::invalid_argument("unknown multiplier kind: " + s);
}

double multiplier_symbol(const MultiplierSpec& m, double xi_x, double xi_y) {
    const double r2 = xi_x * xi_x + xi_y * xi_y;
    switch (m.kind) {
        case MultiplierKind::Ball:
            return r2 <= m.R * m.R ? 1.0 : 0.0;
        case MultiplierKind::LowpassUnit:
            return r2 <= 1.0 ? 1.0 : 0.0;
        case MultiplierKind::Square:
            return std::fabs(xi_x) <= m.R && std::fabs(xi_y) <= m.R ? 1.0 : 0.0;
        case MultiplierKind::BochnerRiesz:
            return r2 <= m.R * m.R ? std::pow(1.0 - r2 / (m.R * m.R), m.alpha) : 0.0;
    }
    return 0.0;
}

GridField apply_multiplier(const GridField& f, const MultiplierSpec& m) {
    m.validate();
    GridField g = dft_forward(f);
    const bool keep_nyquist = keeps_everything(m, f);
    const int N = f.N;
    const int rows = f.dim == 1 ? 1 : N;
    parallel_for(static_cast<std::size_t>(rows), [&](std::size_t row) {
        const int kx = static_cast<int>(row);
        for (int k = 0; k < N; ++k) {
            cplx& v = f.dim == 1 ? g.data[k] : g.data[static_cast<std::size_t>(kx) * N + k];
            const bool nyquist = k == N / 2 || (f.dim == 2 && kx == N / 2);
            if (nyquist && !keep_nyquist) {
                v = 0.0;
                continue;
            }
            const double s = f.dim == 1 ? multiplier_symbol(m, g.frequency(k), 0.0)
                                        : multiplier_symbol(m, g.frequency(kx), g.frequency(k));
            v *= s;
        }
    });
    transform_in_place(g, FFTW_BACKWARD);
    return g;
}

GridField partial_integral_1d(const GridField& f, double R, PartialMethod method) {
    f.validate();
    if (f.dim != 1) throw std::invalid_argument("partial_integral_1d: field must be 1D");
    if (!(R > 0)) throw std::invalid_argument("partial_integral_1d: R must be positive");
    const int N = f.N;
    const double KL = std::floor(R * f.L);
    if (KL >= N / 2) return f;
    const int K = static_cast<int>(KL);

    if (method == PartialMethod::Truncation) {
        GridField g = dft_forward(f);
        for (int k = 0; k < N; ++k)
            if (std::abs(signed_bin(k, N)) > K) g.data[k] = 0.0;
        transform_in_place(g, FFTW_BACKWARD);
        return g;
    }

    std::vector<double> kernel(N);
    kernel[0] = (2.0 * K + 1.0) / N;
    for (int j = 1; j < N; ++j)
        kernel[j] = std::sin(kPi * (2.0 * K + 1.0) * j / N) / (N * std::sin(kPi * j / N));
    GridField g = f;
    parallel_for(static_cast<std::size_t>(N), [&](std::size_t i) {
        cplx acc = 0.0;
        for (int j = 0; j < N; ++j) acc += kernel[j] * f.data[(i + N - j) % N];
        g.data[i] = acc;
    });
    return g;
}

double lp_norm(const GridField& f, double p) {
    f.validate();
    if (!(p >= 1)) throw std::invalid_argument("lp_norm: p must be >= 1");
    const std::size_t row_len = static_cast<std::size_t>(f.N);
    const int rows = f.dim == 1 ? 1 : f.N;
    if (std::isinf(p)) {
        double m = 0.0;
        for (const auto& v : f.data) m = std::max(m, std::abs(v));
        return m;
    }
    const double s = ordered_sum(rows, [&](int row) {
        double acc = 0.0;
        const cplx* base = f.data.data() + row * row_len;
        for (std::size_t i = 0; i < row_len; ++i) {
            const double a = std::abs(base[i]);
            const double a2 = a * a;
            acc += p == 2.0 ? a2 : p == 4.0 ? a2 * a2 : std::pow(a, p);
        }
        return acc;
    });
    const double cell = std::pow(f.L / f.N, f.dim);
    return std::pow(s * cell, 1.0 / p);
}

int required_grid_size(double r, double L) {
    if (!(r > 0 && r < 1)) throw std::invalid_argument("packet: r must lie in (0, 1)");
    const double need = 2.0 * L * (1.0 + r);
    int N = 8;
    while (N < need) {
        if (N > (1 << 29)) throw std::invalid_argument("packet: required grid too large");
        N *= 2;
    }
    return N;
}

void require_resolved(double r, int N, double L) {
    if (!(r > 0 && r < 1)) throw std::invalid_argument("packet: r must lie in (0, 1)");
    if (1.0 / L > 0.5 * r * r)
        throw std::invalid_argument("packet: period L = " + std::to_string(L) +
                                    " cannot resolve r^2; need L >= " + std::to_string(2.0 / (r * r)));
    const int need = required_grid_size(r, L);
    if (N < need)
        throw std::invalid_argument("packet: grid N = " + std::to_string(N) + " does not reach |xi| = 1 + r at L = " +
                                    std::to_string(L) + "; need N >= " + std::to_string(need));
}

void add_packet_spectrum(GridField& spectrum, const WavePacket& packet) {
    spectrum.validate();
    if (spectrum.dim != 2) throw std::invalid_argument("packet: spectrum must be 2D");
    const double r = packet.theta.r;
    require_resolved(r, spectrum.N, spectrum.L);
    const int N = spectrum.N;
    const double L = spectrum.L;
    const double ex = std::cos(packet.theta.phi), ey = std::sin(packet.theta.phi);
    const double hu = 0.5 * r * r, hv = 0.5 * r;
    // bounding box of theta in frequency
    const double bx = std::fabs(ex) * hu + std::fabs(ey) * hv;
    const double by = std::fabs(ey) * hu + std::fabs(ex) * hv;
    const int kx0 = static_cast<int>(std::ceil((ex - bx) * L)), kx1 = static_cast<int>(std::floor((ex + bx) * L));
    const int ky0 = static_cast<int>(std::ceil((ey - by) * L)), ky1 = static_cast<int>(std::floor((ey + by) * L));
    const double scale = static_cast<double>(N) / (L * L);
    for (int kx = kx0; kx <= kx1; ++kx) {
        const double xx = kx / L;
        for (int ky = ky0; ky <= ky1; ++ky) {
            const double yy = ky / L;
            const double u = xx * ex + yy * ey - 1.0;
            const double v = -xx * ey + yy * ex;
            const double w = raised_cosine(u, hu) * raised_cosine(v, hv);
            if (w == 0.0) continue;
            const double phase = -2.0 * kPi * (packet.y[0] * xx + packet.y[1] * yy);
            const std::size_t ix = static_cast<std::size_t>((kx % N + N) % N);
            const std::size_t iy = static_cast<std::size_t>((ky % N + N) % N);
            spectrum.data[ix * N + iy] += scale * w * cplx(std::cos(phase), std::sin(phase));
        }
    }
}

GridField make_packet(const WavePacket& packet, int N, double L) {
    GridField g = GridField::zeros(2, N, L);
    add_packet_spectrum(g, packet);
    transform_in_place(g, FFTW_BACKWARD);
    return g;
}

double dual_rectangle_mass_fraction(const GridField& f, const WavePacket& packet, double enlarge) {
    f.validate();
    if (f.dim != 2) throw std::invalid_argument("dual_rectangle_mass_fraction: field must be 2D");
    const double r = packet.theta.r;
    const double ex = std::cos(packet.theta.phi), ey = std::sin(packet.theta.phi);
    const double half_along = 0.5 * enlarge / (r * r), half_across = 0.5 * enlarge / r;
    const int N = f.N;
    std::vector<double> in_rows(N), all_rows(N);
    parallel_for(static_cast<std::size_t>(N), [&](std::size_t row) {
        const double dx = wrap(f.coordinate(static_cast<int>(row)) - packet.y[0], f.L);
        double in = 0.0, all = 0.0;
        for (int j = 0; j < N; ++j) {
            const double dy = wrap(f.coordinate(j) - packet.y[1], f.L);
            const double m = std::norm(f.data[row * N + j]);
            all += m;
            if (std::fabs(dx * ex + dy * ey) <= half_along && std::fabs(-dx * ey + dy * ex) <= half_across) in += m;
        }
        in_rows[row] = in;
        all_rows[row] = all;
    });
    double in = 0.0, all = 0.0;
    for (int i = 0; i < N; ++i) {
        in += in_rows[i];
        all += all_rows[i];
    }
    return all > 0 ? in / all : 0.0;
}

FeffermanConfig FeffermanConfig::resolved() const {
    FeffermanConfig c = *this;
    if (!(c.r > 0 && c.r < 1)) throw std::invalid_argument("fefferman: r must lie in (0, 1)");
    if (c.ps.empty()) throw std::invalid_argument("fefferman: no exponents given");
    for (double p : c.ps)
        if (!(p >= 1)) throw std::invalid_argument("fefferman: p must be >= 1");
    if (c.L <= 0) c.L = (c.full_circle ? 3.5 : 2.5) / (c.r * c.r);
    if (c.N <= 0) c.N = required_grid_size(c.r, c.L);
    if (c.N < 8 || !is_power_of_two(c.N)) throw std::invalid_argument("fefferman: N must be a power of two >= 8");
    require_resolved(c.r, c.N, c.L);
    if (c.heatmap_size < 1 || c.heatmap_size > c.N || c.N % c.heatmap_size != 0)
        throw std::invalid_argument("fefferman: heatmap size must divide N");
    return c;
}

FeffermanReport fefferman_experiment(const PerronTree& tree, const FeffermanConfig& config) {
    FeffermanReport rep;
    rep.config = config.resolved();
    const FeffermanConfig& c = rep.config;
    const double r = c.r;
    const double ell = 1.0 / (r * r);
    const double H = 0.5 * ell;
    const int M = static_cast<int>(std::floor((kPi / 3.0) / r));
    if (M < 1) throw std::invalid_argument("fefferman: r too large for the sector");

    // The unit tree has its apex at (0, 1) and base on y = 0; it is scaled by
    // H.  One tree is centred by dropping the scene a quarter of a packet
    // length; three trees are centred on their common apex.
    const double cx = 0.0, cy = c.full_circle ? -H : -0.25 * ell;
    const int copies = c.full_circle ? 3 : 1;

    GridField spec = GridField::zeros(2, c.N, c.L);
    std::vector<int> js;
    if (c.single_packet)
        js.push_back(M / 2);
    else
        for (int j = 0; j < M; ++j) js.push_back(j);

    for (int copy = 0; copy < copies; ++copy) {
        const double rot = copy * 2.0 * kPi / 3.0;
        const double cr = std::cos(rot), sr = std::sin(rot);
        auto place = [&](double x, double y) {
            // rotate about the apex (0, H), then centre
            const double dx = x, dy = y - H;
            return std::array<double, 2>{cr * dx - sr * dy + cx, sr * dx + cr * dy + H + cy};
        };
        for (int j : js) {
            const double alpha = -kPi / 6.0 + (j + 0.5) * (kPi / 3.0) / M;
            const double alpha_deg = alpha * 180.0 / kPi;
            const Segment2 seg = tracked_segment(tree, base_point_for_angle(alpha_deg));
            const double px = H * seg.p().x.to_double(), py = H * seg.p().y.to_double();
            const double qx = H * seg.q().x.to_double(), qy = H * seg.q().y.to_double();
            const auto apex_pt = place(px, py);
            const auto base_pt = place(qx, qy);
            double dx = base_pt[0] - apex_pt[0], dy = base_pt[1] - apex_pt[1];
            const double len = std::hypot(dx, dy);
            dx /= len;
            dy /= len;
            WavePacket wp;
            wp.theta = {std::atan2(dy, dx), r};
            wp.y = {base_pt[0] + 0.5 * ell * dx, base_pt[1] + 0.5 * ell * dy};
            add_packet_spectrum(spec, wp);

            PacketDiagnostic d;
            d.alpha_degrees = alpha_deg;
            d.tree_copy = copy;
            d.base = base_pt;
            d.y = wp.y;
            rep.packets.push_back(d);
        }
    }

    // Packet norms: every packet has the same taper, so one computation serves.
    {
        GridField one = GridField::zeros(2, c.N, c.L);
        WavePacket wp;
        wp.theta = {-kPi / 2.0, r};
        add_packet_spectrum(one, wp);
        double s = 0.0;
        for (const auto& v : one.data) s += std::norm(v);
        const double norm = std::sqrt(s) * c.L / c.N;  // unitary sum to continuous L^2
        for (auto& d : rep.packets) d.l2_norm = norm;
    }

    GridField sf = spec;
    const MultiplierSpec lowpass{MultiplierKind::LowpassUnit, 1.0, 0.0};
    const int N = c.N;
    parallel_for(static_cast<std::size_t>(N), [&](std::size_t kx) {
        for (int ky = 0; ky < N; ++ky) {
            const bool nyquist = static_cast<int>(kx) == N / 2 || ky == N / 2;
            cplx& v = sf.data[kx * N + ky];
            v = nyquist ? cplx(0.0) : v * multiplier_symbol(lowpass, sf.frequency(static_cast<int>(kx)), sf.frequency(ky));
        }
    });
    transform_in_place(spec, FFTW_BACKWARD);
    transform_in_place(sf, FFTW_BACKWARD);

    for (double p : c.ps) {
        const double a = lp_norm(sf, p), b = lp_norm(spec, p);
        rep.norm_sf.push_back(a);
        rep.norm_f.push_back(b);
        rep.ratios.push_back(b > 0 ? a / b : 0.0);
    }

    rep.heat_n = c.heatmap_size;
    const int block = N / rep.heat_n;
    rep.heat.assign(static_cast<std::size_t>(rep.heat_n) * rep.heat_n, 0.0);
    // Blocks are laid out from the most negative coordinate, so row 0 of the
    // map is x = -L/2.
    parallel_for(static_cast<std::size_t>(rep.heat_n), [&](std::size_t bi) {
        for (int bj = 0; bj < rep.heat_n; ++bj) {
            double acc = 0.0;
            for (int a = 0; a < block; ++a) {
                const int ix = (static_cast<int>(bi) * block + a + N / 2) % N;
                for (int b = 0; b < block; ++b) {
                    const int iy = (bj * block + b + N / 2) % N;
                    acc += std::norm(sf.data[static_cast<std::size_t>(ix) * N + iy]);
                }
            }
            rep.heat[bi * rep.heat_n + bj] = acc / (block * block);
        }
    });
    return rep;
}

void write_field(std::ostream& out, const GridField& f) {
    f.validate();
    out.write(kFieldMagic, 8);
    put_u64(out, static_cast<std::uint64_t>(f.dim));
    put_u64(out, static_cast<std::uint64_t>(f.N));
    put_f64(out, f.L);
    for (const auto& v : f.data) {
        put_f64(out, v.real());
        put_f64(out, v.imag());
    }
    if (!out) throw std::runtime_error("field.bin: write failed");
}

GridField read_field(std::istream& in) {
    char magic[8];
    if (!in.read(magic, 8) || std::memcmp(magic, kFieldMagic, 8) != 0)
        throw std::runtime_error("field.bin: bad magic");
    const std::uint64_t dim = get_u64(in), N = get_u64(in);
    const double L = get_f64(in);
    if (dim < 1 || dim > 2 || N < 8 || N > (1u << 20)) throw std::runtime_error("field.bin: bad header");
    GridField f = GridField::zeros(static_cast<int>(dim), static_cast<int>(N), L);
    for (auto& v : f.data) {
        const double re = get_f64(in);
        const double im = get_f64(in);
        v = cplx(re, im);
    }
    return f;
}

}  // namespace kakeya
