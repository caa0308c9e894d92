#include "d2d/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <optional>
#include <thread>

#include "d2d/codes.hpp"

namespace d2d {

void SimConfig::validate(const SystemParams& p) const {
    if (!std::isfinite(horizon_multiplier) || !(horizon(p) > 0.0) || !std::isfinite(horizon(p)))
        throw ConfigError("simulation horizon must be finite and > 0");
    if (replications < 1) throw ConfigError("replications must be >= 1");
}

std::string_view to_string(TraceKind kind) {
    switch (kind) {
        case TraceKind::Arrival: return "arrival";
        case TraceKind::Departure: return "departure";
        case TraceKind::LocalDownload: return "d2d_download";
        case TraceKind::BsDownload: return "bs_download";
        case TraceKind::Repair: return "repair";
        case TraceKind::Reseed: return "reseed";
        case TraceKind::Dropped: return "dropped_request";
        case TraceKind::CacheLost: return "cache_lost";
    }
    return "unknown";
}

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

// How a policy keeps its holders. Repair and local service both need at
// least min_serving surviving holders; below that the cached data is lost.
struct Rules {
    std::uint32_t target = 0;
    std::uint32_t min_serving = 0;
    double request_cost = 0.0;
    double repair_cost = 0.0;
    bool counts_fallbacks = false;
    bool paid_reseed = false;  // re-seeding copies are charged as repairs
};

Rules rules_for(const PolicySpec& policy) {
    return std::visit(overloaded{
                          [](const BaseStationOnly&) { return Rules{}; },
                          [](const SimpleCaching&) { return Rules{1, 1, 1.0, 0.0, false, false}; },
                          [](const Replication2&) { return Rules{2, 1, 1.0, 1.0, true, true}; },
                          [](const MbrRegenerating& m) {
                              const MbrCodeParams code = mbr_params(m.k);
                              return Rules{code.n, code.k, code.retrieval.value(), code.gamma.value(), true, false};
                          },
                      },
                      policy);
}

struct Holder {
    NodeId node;
    std::uint32_t block;
};

class Simulation {
public:
    Simulation(const SystemParams& p, const PolicySpec& policy, const SimConfig& cfg, const TraceSink& trace)
        : params_(p),
          rules_(rules_for(policy)),
          horizon_(cfg.horizon(p)),
          seed_(cfg.seed),
          trace_(trace),
          churn_(p.node_count, p.lifetime, horizon_, derive_seed(cfg.seed, 0)),
          rng_(derive_seed(cfg.seed, 1)) {}

    RunResult run() {
        seed_initial();
        double next_request = draw_request(0.0);
        for (;;) {
            const double churn_time = churn_.peek_time();
            if (next_request <= churn_time) {
                if (next_request > horizon_) break;
                on_request(next_request);
                next_request = draw_request(next_request);
            } else {
                const PopulationEvent ev = *churn_.next();
                advance(ev.time);
                if (ev.kind == PopulationEventKind::Arrival)
                    on_arrival(ev);
                else
                    on_departure(ev);
                // the request rate follows n(t); memorylessness lets us redraw
                next_request = draw_request(ev.time);
            }
        }
        advance(horizon_);
        return finish();
    }

private:
    double draw_request(double now) {
        const auto n = churn_.live().size();
        if (n == 0) return std::numeric_limits<double>::infinity();
        return now + std::exponential_distribution<double>(static_cast<double>(n) * params_.request_rate)(rng_);
    }

    void advance(double t) {
        population_area_ += static_cast<double>(churn_.live().size()) * (t - last_time_);
        last_time_ = t;
    }

    bool is_holder(NodeId id) const { return id.value < holder_flag_.size() && holder_flag_[id.value]; }

    std::optional<NodeId> pick_non_holder() {
        const LiveSet& live = churn_.live();
        if (live.size() <= holders_.size()) return std::nullopt;
        for (;;) {
            const NodeId id = live.sample(rng_);
            if (!is_holder(id)) return id;
        }
    }

    void add_holder(NodeId id, std::uint32_t block) {
        if (id.value >= holder_flag_.size()) holder_flag_.resize(id.value + 1, 0);
        holder_flag_[id.value] = 1;
        holders_.push_back(Holder{id, block});
    }

    void clear_holders() {
        for (const Holder& h : holders_) holder_flag_[h.node.value] = 0;
        holders_.clear();
    }

    std::uint32_t missing_block() const {
        for (std::uint32_t b = 0; b < rules_.target; ++b) {
            const bool present =
                std::any_of(holders_.begin(), holders_.end(), [b](const Holder& h) { return h.block == b; });
            if (!present) return b;
        }
        return rules_.target;
    }

    void emit(double t, TraceKind kind, NodeId node, double energy) {
        if (trace_) trace_(TraceRecord{t, kind, node, energy, churn_.live().size()});
    }

    // Holders below min_serving cannot rebuild anything; the data is gone.
    void drop_if_lost(double t) {
        if (holders_.empty() || holders_.size() >= rules_.min_serving) return;
        clear_holders();
        emit(t, TraceKind::CacheLost, NodeId{}, 0.0);
    }

    void seed_initial() {
        for (std::uint32_t b = 0; b < rules_.target; ++b) {
            const auto id = pick_non_holder();
            if (!id) break;
            add_holder(*id, b);
            emit(0.0, TraceKind::Reseed, *id, 0.0);
        }
        drop_if_lost(0.0);
    }

    void top_up(double t) {
        while (!holders_.empty() && holders_.size() < rules_.target) {
            const auto id = pick_non_holder();
            if (!id) return;
            add_holder(*id, missing_block());
            ++repair_transfers_;
            emit(t, TraceKind::Repair, *id, rules_.repair_cost);
        }
    }

    void on_request(double t) {
        ++stats_.request_count;
        const auto requester = pick_non_holder();
        if (!requester) {
            ++stats_.dropped_request_count;
            emit(t, TraceKind::Dropped, NodeId{}, 0.0);
            return;
        }
        if (rules_.target > 0 && !holders_.empty()) {
            ++stats_.local_hit_count;
            ++local_downloads_;
            emit(t, TraceKind::LocalDownload, *requester, rules_.request_cost);
            return;
        }

        ++stats_.bs_download_count;
        emit(t, TraceKind::BsDownload, *requester, params_.cost_ratio);
        if (rules_.target == 0) return;
        if (rules_.counts_fallbacks) ++fallbacks_;

        // the requester now holds the whole file and re-seeds the cache
        add_holder(*requester, 0);
        for (std::uint32_t b = 1; b < rules_.target; ++b) {
            const auto id = pick_non_holder();
            if (!id) break;
            add_holder(*id, b);
            if (rules_.paid_reseed) {
                ++repair_transfers_;
                emit(t, TraceKind::Repair, *id, rules_.repair_cost);
            } else {
                emit(t, TraceKind::Reseed, *id, 0.0);
            }
        }
    }

    void on_arrival(const PopulationEvent& ev) {
        emit(ev.time, TraceKind::Arrival, ev.node, 0.0);
        top_up(ev.time);
    }

    void on_departure(const PopulationEvent& ev) {
        emit(ev.time, TraceKind::Departure, ev.node, 0.0);
        if (!is_holder(ev.node)) return;
        holder_flag_[ev.node.value] = 0;
        std::erase_if(holders_, [&](const Holder& h) { return h.node == ev.node; });
        drop_if_lost(ev.time);
        top_up(ev.time);
    }

    RunResult finish() const {
        RunResult r;
        r.seed = seed_;
        r.cost.horizon = horizon_;
        r.cost.bs_energy = static_cast<double>(stats_.bs_download_count) * params_.cost_ratio;
        r.cost.d2d_download_energy = static_cast<double>(local_downloads_) * rules_.request_cost;
        r.cost.repair_energy = static_cast<double>(repair_transfers_) * rules_.repair_cost;
        r.cost.bs_fallback_count = fallbacks_;
        r.stats = stats_;
        r.stats.repair_count = repair_transfers_;
        r.stats.arrivals = churn_.arrivals();
        r.stats.departures = churn_.departures();
        r.stats.mean_population = population_area_ / horizon_;
        return r;
    }

    SystemParams params_;
    Rules rules_;
    double horizon_;
    std::uint64_t seed_;
    const TraceSink& trace_;
    ChurnProcess churn_;
    Rng rng_;

    std::vector<Holder> holders_;
    std::vector<std::uint8_t> holder_flag_;
    RunStats stats_;
    std::uint64_t local_downloads_ = 0;
    std::uint64_t repair_transfers_ = 0;
    std::uint64_t fallbacks_ = 0;
    double last_time_ = 0.0;
    double population_area_ = 0.0;
};

}  // namespace

RunResult run_simulation(const SystemParams& p, const PolicySpec& policy, const SimConfig& cfg,
                         const TraceSink& trace) {
    p.validate();
    cfg.validate(p);
    if (const auto* m = std::get_if<MbrRegenerating>(&policy); m && m->k < 1)
        throw DomainError("MBR policy requires k >= 1");
    return Simulation(p, policy, cfg, trace).run();
}

std::vector<double> ReplicatedSummary::rates() const {
    std::vector<double> out;
    out.reserve(runs.size());
    for (const auto& r : runs) out.push_back(r.cost.rate());
    return out;
}

double ReplicatedSummary::mean_repair_rate() const {
    double sum = 0.0;
    for (const auto& r : runs) sum += r.cost.repair_energy / r.cost.horizon;
    return runs.empty() ? 0.0 : sum / static_cast<double>(runs.size());
}

std::uint64_t ReplicatedSummary::total_fallbacks() const {
    std::uint64_t n = 0;
    for (const auto& r : runs) n += r.cost.bs_fallback_count;
    return n;
}

ReplicatedSummary run_replicated(const SystemParams& p, const PolicySpec& policy, const SimConfig& cfg) {
    p.validate();
    cfg.validate(p);

    ReplicatedSummary summary;
    summary.runs.resize(cfg.replications);

    unsigned workers = cfg.threads != 0 ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min<unsigned>(workers, cfg.replications);

    std::atomic<std::uint32_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto work = [&] {
        for (std::uint32_t r = next++; r < cfg.replications; r = next++) {
            try {
                SimConfig one = cfg;
                one.seed = derive_seed(cfg.seed, r);
                summary.runs[r] = run_simulation(p, policy, one);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (unsigned i = 0; i < workers; ++i) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);

    const auto rates = summary.rates();
    const double n = static_cast<double>(rates.size());
    double sum = 0.0;
    for (double x : rates) sum += x;
    summary.mean_rate = sum / n;
    if (rates.size() > 1) {
        double ss = 0.0;
        for (double x : rates) ss += (x - summary.mean_rate) * (x - summary.mean_rate);
        summary.sample_std = std::sqrt(ss / (n - 1.0));
        summary.std_error = summary.sample_std / std::sqrt(n);
    }
    return summary;
}

AnalyticComparison compare_to_analytic(const SystemParams& p, const PolicySpec& policy, const SimConfig& cfg) {
    AnalyticComparison c;
    c.analytic_rate = analytic::cost(p, policy);
    c.simulated = run_replicated(p, policy, cfg);
    c.relative_error = std::abs(c.simulated.mean_rate - c.analytic_rate) / c.analytic_rate;
    return c;
}

}  // namespace d2d
