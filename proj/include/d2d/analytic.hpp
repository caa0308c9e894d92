#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>

namespace d2d {

/// Raised when a formula or sampler is called outside its domain.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// System parameters of a D2D storage community.
///
/// cost_ratio is the energy of a base-station download relative to a D2D
/// download of the same file; node_count is the expected population; the
/// request rate is per node; lifetime is the mean sojourn time of a node.
struct SystemParams {
    double cost_ratio = 0.0;
    double node_count = 0.0;
    double request_rate = 0.0;
    double lifetime = 0.0;

    /// Throws DomainError unless cost_ratio >= 1 and the rest are finite and positive.
    void validate() const;

    /// Same checks minus the cost_ratio bound.
    void validate_community() const;

    double departure_rate() const { return 1.0 / lifetime; }
    double arrival_rate() const { return node_count / lifetime; }
    double aggregate_request_rate() const { return node_count * request_rate; }
};

struct BaseStationOnly {
    bool operator==(const BaseStationOnly&) const = default;
};
struct SimpleCaching {
    bool operator==(const SimpleCaching&) const = default;
};
struct Replication2 {
    bool operator==(const Replication2&) const = default;
};
struct MbrRegenerating {
    std::uint32_t k = 1;
    bool operator==(const MbrRegenerating&) const = default;
};

using PolicySpec = std::variant<BaseStationOnly, SimpleCaching, Replication2, MbrRegenerating>;

/// Number of nodes the policy keeps the file (or a block of it) on.
std::uint32_t caching_nodes(const PolicySpec& policy);

/// Short stable name: "bs", "simple", "2rep", "mbr:<k>".
std::string to_string(const PolicySpec& policy);

/// Inverse of to_string. Also accepts "mbr" with default_k. Throws DomainError.
PolicySpec parse_policy(std::string_view text, std::uint32_t default_k = 1);

namespace analytic {

/// Stationary probability of i nodes in an M/M/inf community with mean N,
/// evaluated in log space so large i neither overflows nor loses the tail.
double steady_state_pmf(double node_count, std::int64_t i);

/// P(population < m) under the stationary distribution.
double prob_fewer_than(double node_count, std::int64_t m);

double cost_bs_only(const SystemParams& p);

/// Renewal-reward cost of keeping exactly one cached copy.
double cost_simple(const SystemParams& p);

/// Same quantity via the product form (N^2 w^2 T + R N w) / (1 + N w T).
double cost_simple_expanded(const SystemParams& p);

/// Repair energy per unit time of a (k+1, k, k) MBR code. Always 2/T.
double repair_cost_rate(std::uint32_t k, double lifetime);

double cost_mbr(const SystemParams& p, std::uint32_t k);
double cost_2rep(const SystemParams& p);

/// Cost ratio above which 2-replication beats simple caching.
/// The cost_ratio field of p is ignored.
double redundancy_threshold(const SystemParams& p);

/// Analytic cost of an arbitrary policy.
double cost(const SystemParams& p, const PolicySpec& policy);

struct PolicyChoice {
    PolicySpec policy;
    double rate = 0.0;
};

/// Cheapest policy among all table rows, MBR searched over k in [1, k_max].
/// Costs within a relative 1e-12 of each other count as tied; ties go to
/// the policy with fewer caching nodes.
PolicyChoice best_policy(const SystemParams& p, std::uint32_t k_max);

}  // namespace analytic
}  // namespace d2d
