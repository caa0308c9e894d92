#include "d2d/commands.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include "d2d/format.hpp"
#include "d2d/population.hpp"

namespace d2d::cli {

namespace {

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

bool is_integral(double x) { return std::isfinite(x) && x == std::floor(x); }

void apply(SystemParams& p, std::uint32_t& k, const std::string& param, double value) {
    if (param == "R")
        p.cost_ratio = value;
    else if (param == "N")
        p.node_count = value;
    else if (param == "omega")
        p.request_rate = value;
    else if (param == "T")
        p.lifetime = value;
    else if (param == "k") {
        if (!is_integral(value) || value < 1 || value > 1e9) throw DomainError("swept k must be a positive integer");
        k = static_cast<std::uint32_t>(value);
    } else {
        throw DomainError("unknown sweep parameter '" + param + "' (expected R, N, omega, T or k)");
    }
}

// Writes to a file when a path other than "-" is given, stdout otherwise.
class Output {
public:
    Output(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
        if (!path.empty() && path != "-") {
            file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
            if (!*file_) throw IoError("cannot open '" + path + "' for writing");
            stream_ = file_.get();
        }
    }
    std::ostream& stream() { return *stream_; }
    void close() {
        stream_->flush();
        if (!*stream_) throw IoError("write failed");
    }

private:
    std::unique_ptr<std::ofstream> file_;
    std::ostream* stream_;
};

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
        if (ec != std::errc{} || ptr != item.data() + item.size())
            throw DomainError("cannot parse '" + item + "' as a number");
        out.push_back(v);
    }
    return out;
}

std::uint64_t default_seed() {
    const char* env = std::getenv(seed_env_var);
    if (env == nullptr || *env == '\0') return 1;
    std::uint64_t seed = 0;
    const std::string_view text(env);
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), seed);
    if (ec != std::errc{} || ptr != text.data() + text.size())
        throw DomainError(std::string(seed_env_var) + " must be an unsigned integer");
    return seed;
}

}  // namespace

void SweepSpec::validate() const {
    static const std::vector<std::string> known{"R", "N", "omega", "T", "k"};
    if (std::find(known.begin(), known.end(), param) == known.end())
        throw DomainError("unknown sweep parameter '" + param + "' (expected R, N, omega, T or k)");
    if (!values.empty()) {
        for (double v : values)
            if (!std::isfinite(v)) throw DomainError("sweep values must be finite");
        return;
    }
    if (!std::isfinite(from) || !std::isfinite(to) || !(from < to)) throw DomainError("sweep needs from < to");
    if (steps < 2) throw DomainError("sweep needs at least 2 steps");
    if (scale == Scale::Log && !(from > 0.0)) throw DomainError("log-scaled sweep needs from > 0");
}

std::vector<double> SweepSpec::grid() const {
    validate();
    if (!values.empty()) return values;
    return make_grid(from, to, steps, scale);
}

namespace {

// keeps decade grids printing as 0.01 rather than 0.010000000000000004
double round_significant(double x, int digits) {
    if (x == 0.0) return x;
    const double scale = std::pow(10.0, digits - 1 - static_cast<int>(std::floor(std::log10(std::abs(x)))));
    return std::round(x * scale) / scale;
}

}  // namespace

std::vector<double> make_grid(double from, double to, std::uint32_t steps, Scale scale) {
    if (!std::isfinite(from) || !std::isfinite(to) || !(from < to)) throw DomainError("grid needs from < to");
    if (steps < 2) throw DomainError("grid needs at least 2 steps");
    if (scale == Scale::Log && !(from > 0.0)) throw DomainError("log-scaled grid needs from > 0");
    std::vector<double> out(steps);
    const double last = static_cast<double>(steps - 1);
    for (std::uint32_t i = 0; i < steps; ++i) {
        const double f = static_cast<double>(i) / last;
        out[i] = scale == Scale::Linear ? from + f * (to - from)
                                        : std::exp(std::log(from) + f * (std::log(to) - std::log(from)));
        out[i] = round_significant(out[i], 12);
    }
    out.front() = from;
    out.back() = to;
    return out;
}

std::vector<SweepRow> run_sweep(const SystemParams& base, const SweepSpec& spec,
                                const std::vector<PolicySpec>& policies, const SimConfig& cfg, bool simulate) {
    if (policies.empty()) throw DomainError("sweep needs at least one policy");
    std::vector<SweepRow> rows;
    for (double value : spec.grid()) {
        SystemParams p = base;
        std::uint32_t k = 0;
        apply(p, k, spec.param, value);
        for (PolicySpec policy : policies) {
            if (auto* m = std::get_if<MbrRegenerating>(&policy); m && k != 0) m->k = k;
            SweepRow row;
            row.param = spec.param;
            row.value = value;
            row.policy = to_string(policy);
            row.analytic_rate = analytic::cost(p, policy);
            row.replications = cfg.replications;
            row.seed = cfg.seed;
            if (simulate) {
                const ReplicatedSummary s = run_replicated(p, policy, cfg);
                row.sim_mean_rate = s.mean_rate;
                row.sim_stderr = s.std_error;
            }
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

namespace {

struct Options {
    SystemParams params{5.0, 100.0, 0.5, 0.02};
    std::uint32_t k = 1;
    SimConfig sim;
    std::string output = "-";

    // analytic
    std::uint32_t k_max = 8;
    bool json = false;

    // boundary
    double nwt_from = 0.1;
    double nwt_to = 100.0;
    std::uint32_t nwt_steps = 31;
    bool nwt_linear = false;

    // simulate
    std::string policy = "2rep";
    std::string trace;

    // sweep
    std::string sweep_param;
    double from = 0.0;
    double to = 0.0;
    std::uint32_t steps = 0;
    std::string scale = "linear";
    std::string values;
    std::vector<std::string> policies{"simple", "2rep"};
    bool analytic_only = false;

    // trajectory
    double horizon = -1.0;
};

int cmd_analytic(const Options& o, std::ostream& out) {
    const SystemParams& p = o.params;
    p.validate();
    std::vector<PolicySpec> rows{BaseStationOnly{}, SimpleCaching{}, Replication2{}};
    for (std::uint32_t k = 1; k <= o.k_max; ++k) rows.emplace_back(MbrRegenerating{k});
    const double threshold = analytic::redundancy_threshold(p);
    const auto best = analytic::best_policy(p, o.k_max);

    if (o.json) {
        nlohmann::json costs = nlohmann::json::array();
        for (const auto& policy : rows)
            costs.push_back({{"policy", to_string(policy)},
                             {"caching_nodes", caching_nodes(policy)},
                             {"rate", analytic::cost(p, policy)}});
        const nlohmann::json doc{{"params", to_json(p)},
                                 {"costs", costs},
                                 {"redundancy_threshold", threshold},
                                 {"best", {{"policy", to_string(best.policy)}, {"rate", best.rate}}}};
        out << doc.dump(2) << '\n';
        return exit_ok;
    }
    out << "kind,policy,caching_nodes,value\n";
    for (const auto& policy : rows)
        out << "cost," << to_string(policy) << ',' << caching_nodes(policy) << ','
            << format_number(analytic::cost(p, policy)) << '\n';
    out << "threshold,,," << format_number(threshold) << '\n';
    out << "best," << to_string(best.policy) << ',' << caching_nodes(best.policy) << ',' << format_number(best.rate)
        << '\n';
    return exit_ok;
}

int cmd_boundary(const Options& o, std::ostream& out) {
    const auto points = make_grid(o.nwt_from, o.nwt_to, o.nwt_steps, o.nwt_linear ? Scale::Linear : Scale::Log);
    Output file(o.output, out);
    file.stream() << "nwt,r_threshold\n";
    for (double nwt : points) {
        // with omega = T = 1 the product N*omega*T is nwt exactly
        const SystemParams p{1.0, nwt, 1.0, 1.0};
        file.stream() << format_number(nwt) << ',' << format_number(analytic::redundancy_threshold(p)) << '\n';
    }
    file.close();
    return exit_ok;
}

int cmd_simulate(const Options& o, std::ostream& out) {
    const PolicySpec policy = parse_policy(o.policy, o.k);
    const ReplicatedSummary summary = run_replicated(o.params, policy, o.sim);
    if (!o.trace.empty()) {
        Output trace_file(o.trace, out);
        SimConfig first = o.sim;
        first.seed = derive_seed(o.sim.seed, 0);
        run_simulation(o.params, policy, first, csv_trace_sink(trace_file.stream()));
        trace_file.close();
    }
    Output file(o.output, out);
    file.stream() << replicated_summary_json(o.params, policy, o.sim, summary).dump(2) << '\n';
    file.close();
    return exit_ok;
}

int cmd_sweep(const Options& o, std::ostream& out) {
    SweepSpec spec;
    spec.param = o.sweep_param;
    spec.from = o.from;
    spec.to = o.to;
    spec.steps = o.steps;
    if (o.scale == "log")
        spec.scale = Scale::Log;
    else if (o.scale != "linear")
        throw DomainError("scale must be linear or log");
    if (!o.values.empty()) spec.values = parse_list(o.values);
    spec.validate();

    std::vector<PolicySpec> policies;
    for (const auto& name : o.policies) policies.push_back(parse_policy(name, o.k));
    const auto rows = run_sweep(o.params, spec, policies, o.sim, !o.analytic_only);
    Output file(o.output, out);
    write_sweep_csv(file.stream(), rows);
    file.close();
    return exit_ok;
}

int cmd_trajectory(const Options& o, std::ostream& out) {
    o.params.validate_community();
    const double horizon = o.horizon >= 0.0 ? o.horizon : o.sim.horizon(o.params);
    const auto traj = generate_trajectory(o.params.node_count, o.params.lifetime, horizon, o.sim.seed);
    Output file(o.output, out);
    write_trajectory_csv(file.stream(), traj);
    file.close();
    return exit_ok;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Options o;
    CLI::App app{"Energy cost of D2D caching under node churn: closed forms and discrete-event simulation",
                 "d2dsim"};
    app.set_config("--config", "", "key=value file supplying defaults for the shared flags");
    app.require_subcommand(1);

    try {
        o.sim.seed = default_seed();
    } catch (const DomainError& e) {
        err << "error: " << e.what() << '\n';
        return exit_usage;
    }

    app.add_option("--R", o.params.cost_ratio, "BS-to-D2D energy cost ratio")->capture_default_str();
    app.add_option("--N", o.params.node_count, "expected number of nodes")->capture_default_str();
    app.add_option("--omega", o.params.request_rate, "file request rate per node")->capture_default_str();
    app.add_option("--T", o.params.lifetime, "expected node lifetime")->capture_default_str();
    app.add_option("--k", o.k, "MBR code dimension for policy 'mbr'")->capture_default_str();
    app.add_option("--seed", o.sim.seed, std::string("base seed (default from ") + seed_env_var + ", else 1)");
    app.add_option("--reps", o.sim.replications, "independent replications")->capture_default_str();
    app.add_option("--horizon-mult", o.sim.horizon_multiplier, "simulated horizon in units of T")
        ->capture_default_str();
    app.add_option("--threads", o.sim.threads, "worker threads for replications (0 = all cores)");

    auto* analytic = app.add_subcommand("analytic", "closed-form cost of every caching method");
    analytic->add_option("--k-max", o.k_max, "largest MBR k to tabulate")->capture_default_str();
    analytic->add_flag("--json", o.json, "emit JSON instead of CSV");

    auto* boundary = app.add_subcommand("boundary", "decision threshold R* over a grid of N*omega*T");
    boundary->add_option("--from", o.nwt_from)->capture_default_str();
    boundary->add_option("--to", o.nwt_to)->capture_default_str();
    boundary->add_option("--steps", o.nwt_steps)->capture_default_str();
    boundary->add_flag("--linear", o.nwt_linear, "linear instead of log spacing");
    boundary->add_option("-o,--output", o.output, "CSV path, '-' for stdout");

    auto* simulate = app.add_subcommand("simulate", "replicated simulation, JSON summary");
    simulate->add_option("--policy", o.policy, "bs, simple, 2rep, mbr or mbr:<k>")->capture_default_str();
    simulate->add_option("-o,--output", o.output, "JSON path, '-' for stdout");
    simulate->add_option("--trace", o.trace, "event trace CSV of replication 0");

    auto* sweep = app.add_subcommand("sweep", "parameter sweep, CSV of analytic and simulated rates");
    sweep->add_option("--param", o.sweep_param, "R, N, omega, T or k")->required();
    sweep->add_option("--from", o.from);
    sweep->add_option("--to", o.to);
    sweep->add_option("--steps", o.steps);
    sweep->add_option("--scale", o.scale, "linear or log")->capture_default_str();
    sweep->add_option("--values", o.values, "explicit comma-separated grid, overrides from/to/steps");
    sweep->add_option("--policies", o.policies, "policies to evaluate")->delimiter(',')->capture_default_str();
    sweep->add_flag("--analytic-only", o.analytic_only, "skip simulation columns");
    sweep->add_option("-o,--output", o.output, "CSV path, '-' for stdout");

    auto* trajectory = app.add_subcommand("trajectory", "population trajectory CSV of the churn process");
    trajectory->add_option("--horizon", o.horizon, "absolute horizon (default horizon-mult * T)");
    trajectory->add_option("-o,--output", o.output, "CSV path, '-' for stdout");

    for (auto* sub : {analytic, boundary, simulate, sweep, trajectory}) sub->fallthrough();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return exit_usage;
    }

    try {
        if (*analytic) return cmd_analytic(o, out);
        if (*boundary) return cmd_boundary(o, out);
        if (*simulate) return cmd_simulate(o, out);
        if (*sweep) return cmd_sweep(o, out);
        if (*trajectory) return cmd_trajectory(o, out);
    } catch (const DomainError& e) {
        err << "error: " << e.what() << '\n';
        return exit_usage;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return exit_usage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_runtime;
    }
    return exit_usage;
}

}  // namespace d2d::cli
