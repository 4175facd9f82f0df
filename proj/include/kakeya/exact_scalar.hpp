#pragma once

#include <gmpxx.h>

#include <cmath>
#include <compare>
#include <string>

namespace kakeya {

/// Exact element a + b*sqrt(3) of the field Q[sqrt 3].
///
/// Both rational parts are kept canonical by GMP (lowest terms, positive
/// denominator), so two values are equal iff their parts are equal.  A double
/// approximation is cached and used as a filter in comparisons; the exact
/// path runs only when the filter cannot separate the operands.
class ExactScalar {
public:
    ExactScalar() = default;
    ExactScalar(long v) : a_(v), approx_(static_cast<double>(v)), magnitude_(approx_ < 0 ? -approx_ : approx_) {}  // NOLINT
    ExactScalar(mpq_class a, mpq_class b = 0);

    static ExactScalar sqrt3() { return {0, 1}; }
    /// Parses "p/q" or a decimal literal such as "0.33" into an exact rational.
    static ExactScalar from_string(const std::string& text);

    const mpq_class& rational_part() const noexcept { return a_; }
    const mpq_class& sqrt3_part() const noexcept { return b_; }
    double to_double() const noexcept { return approx_; }

    int sign() const;
    bool is_zero() const { return sgn(a_) == 0 && sgn(b_) == 0; }
    ExactScalar abs() const { return sign() < 0 ? -*this : *this; }
    /// a - b*sqrt(3).
    ExactScalar conjugate() const { return {a_, -b_}; }

    ExactScalar operator-() const { return {-a_, -b_}; }
    ExactScalar& operator+=(const ExactScalar& o);
    ExactScalar& operator-=(const ExactScalar& o);
    ExactScalar& operator*=(const ExactScalar& o);
    ExactScalar& operator/=(const ExactScalar& o);

    friend ExactScalar operator+(ExactScalar l, const ExactScalar& r) { return l += r; }
    friend ExactScalar operator-(ExactScalar l, const ExactScalar& r) { return l -= r; }
    friend ExactScalar operator*(ExactScalar l, const ExactScalar& r) { return l *= r; }
    friend ExactScalar operator/(ExactScalar l, const ExactScalar& r) { return l /= r; }

    friend bool operator==(const ExactScalar& l, const ExactScalar& r) {
        return l.a_ == r.a_ && l.b_ == r.b_;
    }
    friend std::strong_ordering operator<=>(const ExactScalar& l, const ExactScalar& r) {
        const int c = compare(l, r);
        return c < 0 ? std::strong_ordering::less
                     : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
    }

    /// Returns -1, 0 or +1.
    static int compare(const ExactScalar& l, const ExactScalar& r);

    std::string to_string() const;

private:
    void refresh() {
        const double a = a_.get_d();
        const double b = b_.get_d() * 1.7320508075688772;
        approx_ = a + b;
        magnitude_ = std::abs(a) + std::abs(b);
    }

    mpq_class a_{0};
    mpq_class b_{0};
    double approx_ = 0.0;
    // |a| + |b| sqrt3; bounds the rounding error of approx_.
    double magnitude_ = 0.0;
};

inline ExactScalar min(const ExactScalar& l, const ExactScalar& r) { return r < l ? r : l; }
inline ExactScalar max(const ExactScalar& l, const ExactScalar& r) { return l < r ? r : l; }

}  // namespace kakeya
