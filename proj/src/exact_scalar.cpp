#include "kakeya/exact_scalar.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace kakeya {

ExactScalar::ExactScalar(mpq_class a, mpq_class b) : a_(std::move(a)), b_(std::move(b)) {
    a_.canonicalize();
    b_.canonicalize();
    refresh();
}

ExactScalar ExactScalar::from_string(const std::string& text) {
    if (text.empty()) throw std::invalid_argument("empty number");
    const auto slash = text.find('/');
    if (slash != std::string::npos) {
        mpq_class q;
        if (q.set_str(text, 10) != 0 || q.get_den() == 0)
            throw std::invalid_argument("malformed fraction '" + text + "'");
        q.canonicalize();
        return {q};
    }
    std::string digits;
    long exponent = 0;
    bool seen_point = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if ((c == '-' || c == '+') && i == 0) {
            if (c == '-') digits.push_back('-');
        } else if (c == '.' && !seen_point) {
            seen_point = true;
        } else if (c >= '0' && c <= '9') {
            digits.push_back(c);
            if (seen_point) --exponent;
        } else {
            throw std::invalid_argument("malformed decimal '" + text + "'");
        }
    }
    if (digits.empty() || digits == "-") throw std::invalid_argument("malformed decimal '" + text + "'");
    mpz_class num(digits, 10);
    mpz_class den = 1;
    mpz_ui_pow_ui(den.get_mpz_t(), 10, static_cast<unsigned long>(-exponent));
    mpq_class q(num, den);
    q.canonicalize();
    return {q};
}

int ExactScalar::sign() const {
    const int sa = sgn(a_);
    const int sb = sgn(b_);
    if (sa >= 0 && sb >= 0) return (sa > 0 || sb > 0) ? 1 : 0;
    if (sa <= 0 && sb <= 0) return -1;
    // Mixed signs: compare a^2 with 3 b^2.
    const mpq_class lhs = a_ * a_;
    const mpq_class rhs = 3 * b_ * b_;
    const int raw = cmp(lhs, rhs);
    const int c = (raw > 0) - (raw < 0);
    return sa > 0 ? c : -c;
}

ExactScalar& ExactScalar::operator+=(const ExactScalar& o) {
    a_ += o.a_;
    b_ += o.b_;
    refresh();
    return *this;
}

ExactScalar& ExactScalar::operator-=(const ExactScalar& o) {
    a_ -= o.a_;
    b_ -= o.b_;
    refresh();
    return *this;
}

ExactScalar& ExactScalar::operator*=(const ExactScalar& o) {
    mpq_class a = a_ * o.a_ + 3 * b_ * o.b_;
    mpq_class b = a_ * o.b_ + b_ * o.a_;
    a_ = std::move(a);
    b_ = std::move(b);
    refresh();
    return *this;
}

ExactScalar& ExactScalar::operator/=(const ExactScalar& o) {
    // (a + b r)/(c + d r) = (a + b r)(c - d r) / (c^2 - 3 d^2)
    const mpq_class norm = o.a_ * o.a_ - 3 * o.b_ * o.b_;
    if (sgn(norm) == 0) throw std::domain_error("ExactScalar: division by zero");
    mpq_class a = (a_ * o.a_ - 3 * b_ * o.b_) / norm;
    mpq_class b = (b_ * o.a_ - a_ * o.b_) / norm;
    a_ = std::move(a);
    b_ = std::move(b);
    refresh();
    return *this;
}

int ExactScalar::compare(const ExactScalar& l, const ExactScalar& r) {
    const double d = l.approx_ - r.approx_;
    const double tol = 1e-12 * (l.magnitude_ + r.magnitude_);
    if (d > tol) return 1;
    if (d < -tol) return -1;
    return (l - r).sign();
}

std::string ExactScalar::to_string() const {
    if (sgn(b_) == 0) return a_.get_str();
    if (sgn(a_) == 0) return b_.get_str() + "*sqrt3";
    return a_.get_str() + (sgn(b_) > 0 ? "+" : "") + b_.get_str() + "*sqrt3";
}

}  // namespace kakeya
