#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "d2d/analytic.hpp"
#include "d2d/population.hpp"

namespace d2d {

/// Raised for unusable simulation settings (empty horizon, no replications).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct SimConfig {
    double horizon_multiplier = 2000.0;  // horizon in units of the node lifetime
    std::uint64_t seed = 0;
    std::uint32_t replications = 20;
    unsigned threads = 0;  // 0: one per hardware thread

    double horizon(const SystemParams& p) const { return horizon_multiplier * p.lifetime; }
    void validate(const SystemParams& p) const;
};

/// Energy spent over one simulated horizon. Each component is a transfer
/// count times its unit cost, so the total is an exact sum of the three.
struct CostBreakdown {
    double bs_energy = 0.0;
    double d2d_download_energy = 0.0;
    double repair_energy = 0.0;
    std::uint64_t bs_fallback_count = 0;
    double horizon = 0.0;

    double total() const { return bs_energy + d2d_download_energy + repair_energy; }
    double rate() const { return total() / horizon; }
};

struct RunStats {
    std::uint64_t request_count = 0;
    std::uint64_t local_hit_count = 0;
    std::uint64_t bs_download_count = 0;
    std::uint64_t dropped_request_count = 0;  // every live node was a holder
    std::uint64_t repair_count = 0;
    std::uint64_t arrivals = 0;
    std::uint64_t departures = 0;
    double mean_population = 0.0;
};

struct RunResult {
    std::uint64_t seed = 0;
    CostBreakdown cost;
    RunStats stats;
};

enum class TraceKind : std::uint8_t { Arrival, Departure, LocalDownload, BsDownload, Repair, Reseed, Dropped, CacheLost };

std::string_view to_string(TraceKind kind);

struct TraceRecord {
    double time = 0.0;
    TraceKind kind = TraceKind::Arrival;
    NodeId node;
    double energy_delta = 0.0;
    std::uint64_t population = 0;
};

using TraceSink = std::function<void(const TraceRecord&)>;

/// One run over [0, cfg.horizon(p)] seeded with cfg.seed.
///
/// Requests arrive at aggregate rate n(t) * omega, the requester drawn
/// uniformly from live nodes not holding cached data. Repairs are
/// instantaneous on departure of a holder and go to a uniformly chosen idle
/// node; with no idle node they fire on the next arrival. When too few
/// holders survive, the next request is served by the base station and the
/// cache is re-seeded around the requester.
RunResult run_simulation(const SystemParams& p, const PolicySpec& policy, const SimConfig& cfg,
                         const TraceSink& trace = {});

struct ReplicatedSummary {
    double mean_rate = 0.0;
    double sample_std = 0.0;  // zero for a single replication
    double std_error = 0.0;
    std::vector<RunResult> runs;  // in replication order

    std::vector<double> rates() const;
    /// Mean over replications of repair_energy / horizon.
    double mean_repair_rate() const;
    std::uint64_t total_fallbacks() const;
};

/// cfg.replications independent runs; replication r uses derive_seed(cfg.seed, r).
/// Runs may execute concurrently but the summary does not depend on it.
ReplicatedSummary run_replicated(const SystemParams& p, const PolicySpec& policy, const SimConfig& cfg);

struct AnalyticComparison {
    double analytic_rate = 0.0;
    ReplicatedSummary simulated;
    double relative_error = 0.0;  // |simulated - analytic| / analytic
};

AnalyticComparison compare_to_analytic(const SystemParams& p, const PolicySpec& policy, const SimConfig& cfg);

}  // namespace d2d
