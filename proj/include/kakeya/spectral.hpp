#pragma once

// Periodic-grid Fourier analysis: unitary DFTs, frequency multipliers,
// 1D partial sums, wave packets and the ball-multiplier pile-up experiment.
//
// Conventions.  A field with N samples per axis and period L lives at the
// points j L / N, read on the torus [-L/2, L/2).  Data is row-major (x index
// slowest) and, on the frequency side, in FFT order: bin k stands for the
// frequency k/L for k < N/2 and (k - N)/L otherwise.  The forward transform is
// F[k] = N^(-dim/2) sum_j f[j] exp(-2 pi i j.k / N).

#include <array>
#include <complex>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace kakeya {

struct PerronTree;

using cplx = std::complex<double>;

struct GridField {
    int dim = 1;
    int N = 8;
    double L = 1.0;
    std::vector<cplx> data;

    static GridField zeros(int dim, int N, double L);
    /// N >= 8 and a power of two, dim 1 or 2, L > 0, data size N^dim.
    void validate() const;
    std::size_t size() const { return data.size(); }
    /// Torus coordinate of sample index j, in [-L/2, L/2).
    double coordinate(int j) const;
    /// Frequency of FFT-order bin k, in [-N/(2L), N/(2L)).
    double frequency(int k) const;
};

GridField dft_forward(const GridField& f);
GridField dft_inverse(const GridField& f);
/// dft_forward rescaled by (L / sqrt(N))^dim: approximates the continuous
/// transform of f at the lattice frequencies.
GridField continuous_transform(const GridField& f);

enum class MultiplierKind { Ball, Square, BochnerRiesz, LowpassUnit };

struct MultiplierSpec {
    MultiplierKind kind = MultiplierKind::Ball;
    double R = 1.0;
    double alpha = 0.0;

    void validate() const;
    static MultiplierKind parse_kind(const std::string& s);
};

/// Symbol value at frequency (xi_x, xi_y); xi_y is ignored in 1D.
/// Bochner-Riesz is pow(1 - |xi|^2/R^2, alpha) on the closed ball, so
/// alpha = 0 gives exactly the ball's 1.0.
double multiplier_symbol(const MultiplierSpec& m, double xi_x, double xi_y);
/// Multiplies the spectrum by the symbol and transforms back.  Bins on a
/// Nyquist row or column (k = N/2 on some axis) are zeroed unless the
/// multiplier keeps every bin of the lattice: such bins stand for +-N/(2L)
/// at once, and zeroing them keeps real fields real.
GridField apply_multiplier(const GridField& f, const MultiplierSpec& m);

enum class PartialMethod { Truncation, Dirichlet };

/// S_R f in 1D.  Truncation zeroes |xi| > R; Dirichlet convolves circularly
/// with the periodized kernel (1/N) sin(pi (2K+1) j / N) / sin(pi j / N),
/// K = floor(R L), the lattice form of sin(2 pi R x) / (pi x).
GridField partial_integral_1d(const GridField& f, double R, PartialMethod method);

/// Riemann sum with cell weight (L/N)^dim; p = infinity gives the max.
double lp_norm(const GridField& f, double p);

/// r x r^2 rectangle tangent to the unit circle at angle phi: radial width
/// r^2, tangential width r, centred at (cos phi, sin phi).
struct FreqRect {
    double phi = 0.0;
    double r = 0.125;
};

struct WavePacket {
    FreqRect theta;
    std::array<double, 2> y{0.0, 0.0};
};

/// Smallest power-of-two N whose lattice covers the rectangle on a grid of
/// period L, and throws with that N in the message if `N` is smaller or if
/// 1/L is coarser than r^2/2.
void require_resolved(double r, int N, double L);
int required_grid_size(double r, double L);

/// Adds the packet's unitary DFT coefficients to `spectrum` (2D, FFT order):
/// a separable raised-cosine taper, flat on the middle half of theta, times
/// exp(-2 pi i y.xi).
void add_packet_spectrum(GridField& spectrum, const WavePacket& packet);
GridField make_packet(const WavePacket& packet, int N, double L);
/// Share of the L^2 mass inside the dual rectangle (1/r^2 along the centre
/// direction, 1/r across) scaled by `enlarge` and centred at y.
double dual_rectangle_mass_fraction(const GridField& f, const WavePacket& packet, double enlarge = 3.0);

struct FeffermanConfig {
    double r = 0.125;
    std::vector<double> ps{2.0, 4.0};
    int N = 0;      // 0: required_grid_size(r, L)
    double L = 0;   // 0: 2.5 / r^2, or 3.5 / r^2 with full_circle
    bool full_circle = false;
    bool single_packet = false;
    int heatmap_size = 128;

    /// Fills in N and L defaults and checks resolvability.
    FeffermanConfig resolved() const;
};

struct PacketDiagnostic {
    double alpha_degrees = 0;     // angle of the centre direction from straight down
    int tree_copy = 0;            // 0, 1, 2 with full_circle
    std::array<double, 2> base{}; // tracked base point, scaled
    std::array<double, 2> y{};    // packet centre
    double l2_norm = 0;
};

struct FeffermanReport {
    FeffermanConfig config;
    std::vector<double> norm_f;
    std::vector<double> norm_sf;
    std::vector<double> ratios;  // per config.ps
    std::vector<PacketDiagnostic> packets;
    int heat_n = 0;
    std::vector<double> heat;    // block means of |Sf|^2, row-major (x slowest)
};

/// Packets along the tree's tracked directions at spacing r, each long
/// rectangle starting at its tracked base point and running away from the
/// apex, so that its double sweeps back over the tree.  f = sum f_T, S = ball
/// of radius 1.
FeffermanReport fefferman_experiment(const PerronTree& tree, const FeffermanConfig& config);

/// field.bin: 32-byte little-endian header (8-byte magic "KAKFIELD", uint64
/// dim, uint64 N, float64 L) followed by N^dim interleaved float64 complex
/// samples in row-major order.
void write_field(std::ostream& out, const GridField& f);
GridField read_field(std::istream& in);

}  // namespace kakeya
