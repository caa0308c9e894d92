#pragma once

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <queue>
#include <random>
#include <vector>

namespace d2d {

/// The generator used by every simulation stream.
using Rng = std::mt19937_64;

/// splitmix64 finaliser.
std::uint64_t splitmix64(std::uint64_t x);

/// Seed of an independent stream derived from a base seed:
/// splitmix64(base ^ splitmix64(stream)). Replication r of a run seeded s
/// uses derive_seed(s, r); inside a run, stream 0 drives churn and stream 1
/// drives requests and policy choices.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

struct NodeId {
    std::uint64_t value = 0;
    auto operator<=>(const NodeId&) const = default;
};

enum class PopulationEventKind : std::uint8_t { Arrival, Departure };

struct PopulationEvent {
    double time = 0.0;
    PopulationEventKind kind = PopulationEventKind::Arrival;
    NodeId node;
};

/// A realisation of the M/M/inf community. Initial nodes carry ids
/// 0..initial_count-1 and have no arrival event.
struct PopulationTrajectory {
    std::uint64_t initial_count = 0;
    double horizon = 0.0;
    std::vector<PopulationEvent> events;
};

double sample_interarrival(Rng& rng, double node_count, double lifetime);
double sample_lifetime(Rng& rng, double lifetime);

/// Uniformly sampleable set of live nodes. Ids must be handed out densely
/// (as ChurnProcess does) since membership is indexed by id.
class LiveSet {
public:
    void insert(NodeId id);
    void erase(NodeId id);
    bool contains(NodeId id) const;
    std::size_t size() const { return members_.size(); }
    bool empty() const { return members_.empty(); }
    NodeId at(std::size_t i) const { return members_[i]; }
    NodeId sample(Rng& rng) const;

private:
    static constexpr std::uint32_t absent = UINT32_MAX;
    std::vector<NodeId> members_;
    std::vector<std::uint32_t> position_;
};

/// Event-by-event M/M/inf churn over [0, horizon], started in stationarity:
/// Poisson(N) initial nodes with Exp(T) residual lifetimes, arrivals at rate
/// N/T, each node leaving Exp(T) after it arrives. Simultaneous events are
/// ordered by scheduling sequence.
class ChurnProcess {
public:
    ChurnProcess(double node_count, double lifetime, double horizon, std::uint64_t seed);

    /// Next event, applied to live(); nullopt once the horizon is reached.
    std::optional<PopulationEvent> next();

    /// Time of the next event, or +inf if it lies beyond the horizon.
    double peek_time() const;

    const LiveSet& live() const { return live_; }
    std::uint64_t initial_count() const { return initial_count_; }
    std::uint64_t arrivals() const { return arrivals_; }
    std::uint64_t departures() const { return departures_; }

private:
    struct Pending {
        double time;
        std::uint64_t seq;
        PopulationEventKind kind;
        NodeId node;
        bool operator>(const Pending& o) const { return time != o.time ? time > o.time : seq > o.seq; }
    };

    void schedule(double time, PopulationEventKind kind, NodeId node);

    double node_count_;
    double lifetime_;
    double horizon_;
    Rng rng_;
    std::priority_queue<Pending, std::vector<Pending>, std::greater<>> queue_;
    LiveSet live_;
    std::uint64_t next_id_ = 0;
    std::uint64_t seq_ = 0;
    std::uint64_t initial_count_ = 0;
    std::uint64_t arrivals_ = 0;
    std::uint64_t departures_ = 0;
};

/// Collects a ChurnProcess seeded with derive_seed(seed, 0), exactly the
/// churn the engine sees for the same run seed.
PopulationTrajectory generate_trajectory(double node_count, double lifetime, double horizon, std::uint64_t seed);

/// Time-weighted occupancy of a trajectory: fraction of [0, horizon] spent
/// at each population size.
struct Occupancy {
    std::vector<double> fraction;  // index = population size
    double mean = 0.0;
    std::int64_t min_count = 0;
    std::int64_t arrivals = 0;
    std::int64_t departures = 0;
};

/// Throws DomainError if the trajectory is malformed (decreasing times,
/// departure of an unknown node, negative count).
Occupancy occupancy(const PopulationTrajectory& trajectory);

/// Total-variation distance between an occupancy histogram and Poisson(N).
double total_variation_to_poisson(const Occupancy& occ, double node_count);

/// CSV `time,event,node_id,count_after`; first row is the initial seeding.
void write_trajectory_csv(std::ostream& os, const PopulationTrajectory& trajectory);

}  // namespace d2d
