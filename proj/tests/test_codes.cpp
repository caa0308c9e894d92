#include <doctest.h>

#include "d2d/analytic.hpp"
#include "d2d/codes.hpp"

using namespace d2d;

TEST_CASE("mbr_params examples") {
    const auto one = mbr_params(1);
    CHECK(one.n == 2);
    CHECK(one.d == 1);
    CHECK(one.alpha == Fraction(1, 1));
    CHECK(one.gamma == Fraction(1, 1));
    CHECK(one.retrieval == Fraction(1, 1));

    const auto three = mbr_params(3);
    CHECK(three.n == 4);
    CHECK(three.d == 3);
    CHECK(three.gamma == Fraction(1, 2));
    CHECK(three.retrieval == Fraction(3, 2));
    CHECK(three.retrieval.value() == 1.5);

    const auto big = mbr_params(1'000'000);
    CHECK(big.retrieval.value() == doctest::Approx(2.0).epsilon(1e-5));
    CHECK(big.gamma.value() < 1e-5);

    CHECK_THROWS_AS(mbr_params(0), DomainError);
    CHECK_THROWS_AS(mbr_params(-4), DomainError);
}

TEST_CASE("MBR invariants hold exactly for every k") {
    for (std::int64_t k = 1; k <= 5000; ++k) {
        const auto c = mbr_params(k);
        REQUIRE(c.n == c.k + 1);
        REQUIRE(c.d == c.k);
        REQUIRE(c.alpha == c.gamma);
        REQUIRE(std::uint64_t{c.n} * c.gamma == Fraction(2, 1));
        REQUIRE(c.retrieval == std::uint64_t{c.k} * c.alpha);
        REQUIRE(std::uint64_t{c.n} * c.alpha >= c.retrieval);
        REQUIRE(c.retrieval >= Fraction(1, 1));
        REQUIRE(c.retrieval < Fraction(2, 1));
        REQUIRE((c.retrieval == Fraction(1, 1)) == (k == 1));
    }
}

TEST_CASE("Fraction arithmetic") {
    CHECK(Fraction(6, 8) == Fraction(3, 4));
    CHECK(Fraction(2, 3) * Fraction(3, 2) == Fraction(1, 1));
    CHECK(Fraction(1, 3) < Fraction(1, 2));
    CHECK(Fraction(0, 5) == Fraction(0, 1));
    CHECK_THROWS_AS(Fraction(1, 0), DomainError);
}
