#include "d2d/report.hpp"

#include <cmath>
#include <ostream>

#include "d2d/format.hpp"

namespace d2d {

using nlohmann::json;

json to_json(const SystemParams& p) {
    return json{{"R", p.cost_ratio}, {"N", p.node_count}, {"omega", p.request_rate}, {"T", p.lifetime}};
}

json to_json(const CostBreakdown& c) {
    return json{{"bs_energy", c.bs_energy},
                {"d2d_download_energy", c.d2d_download_energy},
                {"repair_energy", c.repair_energy},
                {"total_energy", c.total()},
                {"bs_fallback_count", c.bs_fallback_count},
                {"horizon", c.horizon},
                {"rate", c.rate()}};
}

json to_json(const RunStats& s) {
    return json{{"request_count", s.request_count},
                {"local_hit_count", s.local_hit_count},
                {"bs_download_count", s.bs_download_count},
                {"dropped_request_count", s.dropped_request_count},
                {"repair_count", s.repair_count},
                {"arrivals", s.arrivals},
                {"departures", s.departures},
                {"mean_population", s.mean_population}};
}

json run_summary_json(const SystemParams& p, const PolicySpec& policy, const RunResult& run) {
    return json{{"params", to_json(p)},
                {"policy", to_string(policy)},
                {"seed", run.seed},
                {"cost", to_json(run.cost)},
                {"stats", to_json(run.stats)}};
}

json replicated_summary_json(const SystemParams& p, const PolicySpec& policy, const SimConfig& cfg,
                             const ReplicatedSummary& summary) {
    json runs = json::array();
    for (const auto& r : summary.runs) runs.push_back(run_summary_json(p, policy, r));
    const double analytic_rate = analytic::cost(p, policy);
    return json{{"params", to_json(p)},
                {"policy", to_string(policy)},
                {"seed", cfg.seed},
                {"replications", cfg.replications},
                {"horizon", cfg.horizon(p)},
                {"analytic_rate", analytic_rate},
                {"sim_mean_rate", summary.mean_rate},
                {"sim_sample_std", summary.sample_std},
                {"sim_stderr", summary.std_error},
                {"relative_error", std::abs(summary.mean_rate - analytic_rate) / analytic_rate},
                {"runs", runs}};
}

TraceSink csv_trace_sink(std::ostream& os) {
    os << "time,event_kind,node_id,energy_delta,population\n";
    return [&os](const TraceRecord& r) {
        os << format_number(r.time) << ',' << to_string(r.kind) << ',';
        if (r.kind != TraceKind::Dropped && r.kind != TraceKind::CacheLost) os << r.node.value;
        os << ',' << format_number(r.energy_delta) << ',' << r.population << '\n';
    };
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
    os << sweep_csv_header << '\n';
    for (const auto& r : rows) {
        os << r.param << ',' << format_number(r.value) << ',' << r.policy << ',' << format_number(r.analytic_rate)
           << ',';
        if (r.sim_mean_rate) os << format_number(*r.sim_mean_rate);
        os << ',';
        if (r.sim_stderr) os << format_number(*r.sim_stderr);
        os << ',' << r.replications << ',' << r.seed << '\n';
    }
}

}  // namespace d2d
