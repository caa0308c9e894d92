#pragma once

#include <compare>
#include <cstdint>
#include <ostream>

namespace d2d {

/// Exact non-negative rational in lowest terms. Bandwidths are expressed in
/// file-size units, so every quantity of a (k+1, k, k) code is a ratio of
/// small integers.
class Fraction {
public:
    constexpr Fraction() = default;
    Fraction(std::uint64_t num, std::uint64_t den);

    std::uint64_t num() const { return num_; }
    std::uint64_t den() const { return den_; }
    double value() const { return static_cast<double>(num_) / static_cast<double>(den_); }

    friend Fraction operator*(const Fraction& a, const Fraction& b);
    friend Fraction operator*(std::uint64_t a, const Fraction& b) { return Fraction(a, 1) * b; }
    friend bool operator==(const Fraction&, const Fraction&) = default;
    friend std::strong_ordering operator<=>(const Fraction& a, const Fraction& b);
    friend std::ostream& operator<<(std::ostream& os, const Fraction& f);

private:
    std::uint64_t num_ = 0;
    std::uint64_t den_ = 1;
};

/// Parameters of the (n, k, d) = (k+1, k, k) minimum-bandwidth regenerating
/// code, with the file size normalised to 1.
struct MbrCodeParams {
    std::uint32_t k = 1;
    std::uint32_t n = 2;
    std::uint32_t d = 1;
    Fraction alpha;      // stored per node
    Fraction gamma;      // downloaded to regenerate one lost block
    Fraction retrieval;  // downloaded to reconstruct the file from k blocks
};

/// Throws DomainError for k < 1.
MbrCodeParams mbr_params(std::int64_t k);

}  // namespace d2d
