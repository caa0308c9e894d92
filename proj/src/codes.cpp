#include "d2d/codes.hpp"

#include <numeric>

#include "d2d/analytic.hpp"

namespace d2d {

Fraction::Fraction(std::uint64_t num, std::uint64_t den) {
    if (den == 0) throw DomainError("fraction with zero denominator");
    const std::uint64_t g = std::gcd(num, den);
    num_ = num / g;
    den_ = den / g;
}

Fraction operator*(const Fraction& a, const Fraction& b) {
    // cross-reduce first so small operands never overflow
    const std::uint64_t g1 = std::gcd(a.num_, b.den_);
    const std::uint64_t g2 = std::gcd(b.num_, a.den_);
    return Fraction((a.num_ / g1) * (b.num_ / g2), (a.den_ / g2) * (b.den_ / g1));
}

__extension__ using Wide = unsigned __int128;

std::strong_ordering operator<=>(const Fraction& a, const Fraction& b) {
    const Wide lhs = static_cast<Wide>(a.num_) * b.den_;
    const Wide rhs = static_cast<Wide>(b.num_) * a.den_;
    return lhs <=> rhs;
}

std::ostream& operator<<(std::ostream& os, const Fraction& f) {
    os << f.num_;
    if (f.den_ != 1) os << '/' << f.den_;
    return os;
}

MbrCodeParams mbr_params(std::int64_t k) {
    if (k < 1) throw DomainError("MBR code requires k >= 1");
    if (k >= (std::int64_t{1} << 31)) throw DomainError("MBR code k too large");
    const auto kk = static_cast<std::uint32_t>(k);

    MbrCodeParams c;
    c.k = kk;
    c.n = kk + 1;
    c.d = kk;
    // MBR point: alpha = gamma = 2Bd / (k (2d - k + 1)), which is 2/(k+1) at d = k.
    c.gamma = Fraction(2, std::uint64_t{kk} + 1);
    c.alpha = c.gamma;
    c.retrieval = std::uint64_t{kk} * c.alpha;
    return c;
}

}  // namespace d2d
