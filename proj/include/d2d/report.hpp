#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "d2d/analytic.hpp"
#include "d2d/engine.hpp"

namespace d2d {

nlohmann::json to_json(const SystemParams& p);
nlohmann::json to_json(const CostBreakdown& c);
nlohmann::json to_json(const RunStats& s);

/// Per-run summary: params, policy, seed, cost breakdown, run statistics.
nlohmann::json run_summary_json(const SystemParams& p, const PolicySpec& policy, const RunResult& run);

nlohmann::json replicated_summary_json(const SystemParams& p, const PolicySpec& policy, const SimConfig& cfg,
                                       const ReplicatedSummary& summary);

/// Trace sink writing `time,event_kind,node_id,energy_delta,population`.
/// Writes the header immediately; the stream must outlive the sink.
TraceSink csv_trace_sink(std::ostream& os);

struct SweepRow {
    std::string param;
    double value = 0.0;
    std::string policy;
    double analytic_rate = 0.0;
    std::optional<double> sim_mean_rate;  // empty when the sweep is analytic only
    std::optional<double> sim_stderr;
    std::uint32_t replications = 0;
    std::uint64_t seed = 0;
};

inline constexpr const char* sweep_csv_header =
    "param,value,policy,analytic_rate,sim_mean_rate,sim_stderr,replications,seed";

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);

}  // namespace d2d
