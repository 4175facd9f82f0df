#include "kakeya/exact_scalar.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using kakeya::ExactScalar;

TEST(ExactScalar, CanonicalRationals) {
    const ExactScalar v(mpq_class(6, -4), mpq_class(10, 20));
    EXPECT_EQ(v.rational_part().get_num(), -3);
    EXPECT_EQ(v.rational_part().get_den(), 2);
    EXPECT_EQ(v.sqrt3_part().get_den(), 2);
}

TEST(ExactScalar, SqrtThreeSquaredIsThree) {
    EXPECT_EQ(ExactScalar::sqrt3() * ExactScalar::sqrt3(), ExactScalar(3));
}

TEST(ExactScalar, SignOfMixedParts) {
    // 2 - sqrt3 > 0, 1 - sqrt3 < 0, -7 + 4 sqrt3 < 0 (48 < 49)
    EXPECT_EQ(ExactScalar(2, -1).sign(), 1);
    EXPECT_EQ(ExactScalar(1, -1).sign(), -1);
    EXPECT_EQ(ExactScalar(-7, 4).sign(), -1);
    EXPECT_EQ(ExactScalar(-6, 4).sign(), 1);
    EXPECT_EQ(ExactScalar().sign(), 0);
    // large numerators: sign must still be exactly +-1
    const ExactScalar big(mpq_class("-5846358260314411/2216654921236158"),
                          mpq_class("13102570126596331/4433309842472316"));
    EXPECT_EQ(big.sign(), 1);
    EXPECT_EQ((-big).sign(), -1);
}

TEST(ExactScalar, CancellationNearZeroIsDecidedExactly) {
    // 97 - 56 sqrt3 ~ 0.00515 and 18817 - 10864 sqrt3 ~ 2.66e-5, both positive.
    const ExactScalar a(97, -56);
    const ExactScalar b(18817, -10864);
    EXPECT_EQ(a.sign(), 1);
    EXPECT_EQ(b.sign(), 1);
    EXPECT_LT(b, a);
    // Units of Z[sqrt3]: (2 + sqrt3)(2 - sqrt3) = 1
    EXPECT_EQ(ExactScalar(2, 1) * ExactScalar(2, -1), ExactScalar(1));
}

TEST(ExactScalar, DivisionInvertsMultiplication) {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<long> d(-50, 50);
    for (int i = 0; i < 200; ++i) {
        const ExactScalar x(mpq_class(d(rng), 7), mpq_class(d(rng), 3));
        ExactScalar y(mpq_class(d(rng), 5), mpq_class(d(rng), 2));
        if (y.is_zero()) y = ExactScalar(1);
        EXPECT_EQ((x * y) / y, x);
        EXPECT_NEAR((x * y).to_double(), x.to_double() * y.to_double(), 1e-9);
    }
}

TEST(ExactScalar, DivisionByZeroThrows) {
    EXPECT_THROW(ExactScalar(1) / ExactScalar(0), std::domain_error);
}

TEST(ExactScalar, ParsesDecimalsAndFractions) {
    EXPECT_EQ(ExactScalar::from_string("0.33"), ExactScalar(mpq_class(33, 100)));
    EXPECT_EQ(ExactScalar::from_string("-1.5"), ExactScalar(mpq_class(-3, 2)));
    EXPECT_EQ(ExactScalar::from_string("2/6"), ExactScalar(mpq_class(1, 3)));
    EXPECT_THROW(ExactScalar::from_string("0.3.3"), std::invalid_argument);
    EXPECT_THROW(ExactScalar::from_string("abc"), std::invalid_argument);
}

TEST(ExactScalar, OrderingMatchesDoublesOnRandomValues) {
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<long> d(-1000, 1000);
    for (int i = 0; i < 500; ++i) {
        const ExactScalar x(mpq_class(d(rng), 97), mpq_class(d(rng), 89));
        const ExactScalar y(mpq_class(d(rng), 83), mpq_class(d(rng), 79));
        const double dx = x.to_double(), dy = y.to_double();
        if (std::fabs(dx - dy) > 1e-9) EXPECT_EQ(x < y, dx < dy);
    }
}
