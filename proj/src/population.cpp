#include "d2d/population.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include "d2d/analytic.hpp"
#include "d2d/format.hpp"

namespace d2d {

namespace {

void require_positive(double x, const char* what) {
    if (!std::isfinite(x) || !(x > 0.0)) throw DomainError(std::string(what) + " must be finite and > 0");
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) { return splitmix64(base ^ splitmix64(stream)); }

double sample_interarrival(Rng& rng, double node_count, double lifetime) {
    require_positive(node_count, "expected node count N");
    require_positive(lifetime, "node lifetime T");
    return std::exponential_distribution<double>(node_count / lifetime)(rng);
}

double sample_lifetime(Rng& rng, double lifetime) {
    require_positive(lifetime, "node lifetime T");
    return std::exponential_distribution<double>(1.0 / lifetime)(rng);
}

void LiveSet::insert(NodeId id) {
    if (id.value >= position_.size()) position_.resize(id.value + 1, absent);
    if (position_[id.value] != absent) return;
    position_[id.value] = static_cast<std::uint32_t>(members_.size());
    members_.push_back(id);
}

void LiveSet::erase(NodeId id) {
    if (!contains(id)) return;
    const std::uint32_t slot = position_[id.value];
    const NodeId moved = members_.back();
    members_[slot] = moved;
    position_[moved.value] = slot;
    members_.pop_back();
    position_[id.value] = absent;
}

bool LiveSet::contains(NodeId id) const { return id.value < position_.size() && position_[id.value] != absent; }

NodeId LiveSet::sample(Rng& rng) const {
    if (members_.empty()) throw DomainError("cannot sample from an empty live set");
    return members_[std::uniform_int_distribution<std::size_t>(0, members_.size() - 1)(rng)];
}

ChurnProcess::ChurnProcess(double node_count, double lifetime, double horizon, std::uint64_t seed)
    : node_count_(node_count), lifetime_(lifetime), horizon_(horizon), rng_(seed) {
    require_positive(node_count, "expected node count N");
    require_positive(lifetime, "node lifetime T");
    if (!std::isfinite(horizon) || horizon < 0.0) throw DomainError("horizon must be finite and >= 0");

    initial_count_ = std::poisson_distribution<std::uint64_t>(node_count_)(rng_);
    for (std::uint64_t i = 0; i < initial_count_; ++i) {
        const NodeId id{next_id_++};
        live_.insert(id);
        schedule(sample_lifetime(rng_, lifetime_), PopulationEventKind::Departure, id);
    }
    schedule(sample_interarrival(rng_, node_count_, lifetime_), PopulationEventKind::Arrival, NodeId{next_id_++});
}

void ChurnProcess::schedule(double time, PopulationEventKind kind, NodeId node) {
    queue_.push(Pending{time, seq_++, kind, node});
}

double ChurnProcess::peek_time() const {
    const double t = queue_.top().time;
    return t > horizon_ ? std::numeric_limits<double>::infinity() : t;
}

std::optional<PopulationEvent> ChurnProcess::next() {
    // the pending arrival keeps the queue non-empty
    const Pending top = queue_.top();
    if (top.time > horizon_) return std::nullopt;
    queue_.pop();

    if (top.kind == PopulationEventKind::Arrival) {
        live_.insert(top.node);
        ++arrivals_;
        schedule(top.time + sample_lifetime(rng_, lifetime_), PopulationEventKind::Departure, top.node);
        schedule(top.time + sample_interarrival(rng_, node_count_, lifetime_), PopulationEventKind::Arrival,
                 NodeId{next_id_++});
    } else {
        live_.erase(top.node);
        ++departures_;
    }
    return PopulationEvent{top.time, top.kind, top.node};
}

PopulationTrajectory generate_trajectory(double node_count, double lifetime, double horizon, std::uint64_t seed) {
    ChurnProcess churn(node_count, lifetime, horizon, derive_seed(seed, 0));
    PopulationTrajectory traj;
    traj.initial_count = churn.initial_count();
    traj.horizon = horizon;
    while (auto ev = churn.next()) traj.events.push_back(*ev);
    return traj;
}

Occupancy occupancy(const PopulationTrajectory& trajectory) {
    Occupancy occ;
    std::vector<bool> alive(trajectory.initial_count, true);
    std::int64_t count = static_cast<std::int64_t>(trajectory.initial_count);
    occ.min_count = count;
    std::vector<double> time_at;
    double last = 0.0;
    double weighted = 0.0;

    auto accumulate = [&](double until) {
        const double dt = until - last;
        if (static_cast<std::size_t>(count) >= time_at.size()) time_at.resize(count + 1, 0.0);
        time_at[count] += dt;
        weighted += dt * static_cast<double>(count);
        last = until;
    };

    for (const auto& ev : trajectory.events) {
        if (ev.time < last) throw DomainError("trajectory times must be non-decreasing");
        accumulate(ev.time);
        if (ev.node.value >= alive.size()) alive.resize(ev.node.value + 1, false);
        if (ev.kind == PopulationEventKind::Arrival) {
            if (alive[ev.node.value]) throw DomainError("node arrived twice");
            alive[ev.node.value] = true;
            ++count;
            ++occ.arrivals;
        } else {
            if (!alive[ev.node.value]) throw DomainError("departure of a node that is not live");
            alive[ev.node.value] = false;
            --count;
            ++occ.departures;
        }
        occ.min_count = std::min(occ.min_count, count);
    }
    if (trajectory.horizon > last) accumulate(trajectory.horizon);

    const double span = last;
    occ.fraction.resize(time_at.size());
    if (span > 0.0) {
        for (std::size_t i = 0; i < time_at.size(); ++i) occ.fraction[i] = time_at[i] / span;
        occ.mean = weighted / span;
    } else {
        occ.fraction.assign(static_cast<std::size_t>(count) + 1, 0.0);
        occ.fraction[count] = 1.0;
        occ.mean = static_cast<double>(count);
    }
    return occ;
}

double total_variation_to_poisson(const Occupancy& occ, double node_count) {
    double diff = 0.0;
    double covered = 0.0;
    for (std::size_t i = 0; i < occ.fraction.size(); ++i) {
        const double p = analytic::steady_state_pmf(node_count, static_cast<std::int64_t>(i));
        covered += p;
        diff += std::abs(occ.fraction[i] - p);
    }
    diff += std::max(0.0, 1.0 - covered);
    return 0.5 * diff;
}

void write_trajectory_csv(std::ostream& os, const PopulationTrajectory& trajectory) {
    os << "time,event,node_id,count_after\n";
    std::uint64_t count = trajectory.initial_count;
    os << "0,initial,," << count << '\n';
    for (const auto& ev : trajectory.events) {
        const bool arrival = ev.kind == PopulationEventKind::Arrival;
        count = arrival ? count + 1 : count - 1;
        os << format_number(ev.time) << ',' << (arrival ? "arrival" : "departure") << ',' << ev.node.value << ','
           << count << '\n';
    }
}

}  // namespace d2d
