#include "d2d/analytic.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

#include "d2d/codes.hpp"

namespace d2d {

namespace {

bool finite_positive(double x) { return std::isfinite(x) && x > 0.0; }

void require_node_count(double node_count) {
    if (!finite_positive(node_count)) throw DomainError("expected node count N must be finite and > 0");
}

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

}  // namespace

void SystemParams::validate_community() const {
    require_node_count(node_count);
    if (!finite_positive(request_rate)) throw DomainError("request rate omega must be finite and > 0");
    if (!finite_positive(lifetime)) throw DomainError("node lifetime T must be finite and > 0");
}

void SystemParams::validate() const {
    // R = 1 is admitted as the boundary where both download paths cost the same
    if (!std::isfinite(cost_ratio) || !(cost_ratio >= 1.0)) throw DomainError("cost ratio R must be finite and >= 1");
    validate_community();
}

std::uint32_t caching_nodes(const PolicySpec& policy) {
    return std::visit(overloaded{
                          [](const BaseStationOnly&) -> std::uint32_t { return 0; },
                          [](const SimpleCaching&) -> std::uint32_t { return 1; },
                          [](const Replication2&) -> std::uint32_t { return 2; },
                          [](const MbrRegenerating& m) -> std::uint32_t { return m.k + 1; },
                      },
                      policy);
}

std::string to_string(const PolicySpec& policy) {
    return std::visit(overloaded{
                          [](const BaseStationOnly&) -> std::string { return "bs"; },
                          [](const SimpleCaching&) -> std::string { return "simple"; },
                          [](const Replication2&) -> std::string { return "2rep"; },
                          [](const MbrRegenerating& m) -> std::string { return "mbr:" + std::to_string(m.k); },
                      },
                      policy);
}

PolicySpec parse_policy(std::string_view text, std::uint32_t default_k) {
    if (text == "bs" || text == "bs-only" || text == "base-station") return BaseStationOnly{};
    if (text == "simple") return SimpleCaching{};
    if (text == "2rep" || text == "replication") return Replication2{};
    if (text == "mbr") {
        if (default_k < 1) throw DomainError("MBR policy requires k >= 1");
        return MbrRegenerating{default_k};
    }
    if (text.starts_with("mbr:")) {
        const auto digits = text.substr(4);
        std::uint32_t k = 0;
        const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), k);
        if (ec != std::errc{} || ptr != digits.data() + digits.size() || k < 1)
            throw DomainError("bad MBR policy '" + std::string(text) + "': expected mbr:<k> with k >= 1");
        return MbrRegenerating{k};
    }
    throw DomainError("unknown policy '" + std::string(text) + "' (expected bs, simple, 2rep, mbr or mbr:<k>)");
}

namespace analytic {

double steady_state_pmf(double node_count, std::int64_t i) {
    require_node_count(node_count);
    if (i < 0) throw DomainError("node count i must be >= 0");
    const double di = static_cast<double>(i);
    return std::exp(di * std::log(node_count) - node_count - std::lgamma(di + 1.0));
}

double prob_fewer_than(double node_count, std::int64_t m) {
    require_node_count(node_count);
    if (m < 1) throw DomainError("threshold m must be >= 1");
    double sum = 0.0;
    for (std::int64_t i = 0; i < m; ++i) {
        const double term = steady_state_pmf(node_count, i);
        sum += term;
        // past the mode the remaining terms cannot move the sum
        if (static_cast<double>(i) > node_count && term < sum * std::numeric_limits<double>::epsilon() * 1e-3) break;
    }
    return std::min(sum, 1.0);
}

double cost_bs_only(const SystemParams& p) {
    p.validate();
    return p.cost_ratio * p.node_count * p.request_rate;
}

double cost_simple(const SystemParams& p) {
    p.validate();
    const double requests_per_lifetime = p.aggregate_request_rate() * p.lifetime;
    return (requests_per_lifetime + p.cost_ratio) / (p.lifetime + 1.0 / p.aggregate_request_rate());
}

double cost_simple_expanded(const SystemParams& p) {
    p.validate();
    const double nw = p.aggregate_request_rate();
    return (nw * nw * p.lifetime + p.cost_ratio * nw) / (1.0 + nw * p.lifetime);
}

double repair_cost_rate(std::uint32_t k, double lifetime) {
    if (!finite_positive(lifetime)) throw DomainError("node lifetime T must be finite and > 0");
    const MbrCodeParams code = mbr_params(k);
    // k+1 holders each fail at rate 1/T and each failure moves gamma; the
    // product is exactly 2 for every k.
    const Fraction traffic_per_lifetime = std::uint64_t{code.n} * code.gamma;
    return traffic_per_lifetime.value() / lifetime;
}

double cost_mbr(const SystemParams& p, std::uint32_t k) {
    p.validate();
    const MbrCodeParams code = mbr_params(k);
    return p.aggregate_request_rate() * code.retrieval.value() + repair_cost_rate(k, p.lifetime);
}

double cost_2rep(const SystemParams& p) {
    p.validate();
    return p.aggregate_request_rate() + 2.0 / p.lifetime;
}

double redundancy_threshold(const SystemParams& p) {
    p.validate_community();
    return 3.0 + 2.0 / (p.aggregate_request_rate() * p.lifetime);
}

double cost(const SystemParams& p, const PolicySpec& policy) {
    return std::visit(overloaded{
                          [&](const BaseStationOnly&) { return cost_bs_only(p); },
                          [&](const SimpleCaching&) { return cost_simple(p); },
                          [&](const Replication2&) { return cost_2rep(p); },
                          [&](const MbrRegenerating& m) { return cost_mbr(p, m.k); },
                      },
                      policy);
}

PolicyChoice best_policy(const SystemParams& p, std::uint32_t k_max) {
    p.validate();
    if (k_max < 1) throw DomainError("k_max must be >= 1");

    constexpr double tie_tolerance = 1e-12;
    PolicyChoice best{BaseStationOnly{}, cost_bs_only(p)};
    auto consider = [&](PolicySpec candidate) {
        const double rate = cost(p, candidate);
        // candidates arrive in order of increasing caching nodes, so only a
        // strictly cheaper one may replace the incumbent
        if (rate < best.rate * (1.0 - tie_tolerance)) best = {candidate, rate};
    };
    consider(SimpleCaching{});
    consider(Replication2{});
    for (std::uint32_t k = 1; k <= k_max; ++k) consider(MbrRegenerating{k});
    return best;
}

}  // namespace analytic
}  // namespace d2d
