#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "d2d/analytic.hpp"
#include "d2d/engine.hpp"
#include "d2d/report.hpp"

namespace d2d::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_runtime = 1;
inline constexpr int exit_usage = 2;

/// Environment variable consulted for the default --seed.
inline constexpr const char* seed_env_var = "D2DSIM_SEED";

enum class Scale { Linear, Log };

/// steps points from `from` to `to` inclusive, evenly spaced or geometric.
std::vector<double> make_grid(double from, double to, std::uint32_t steps, Scale scale);

/// Grid over one parameter: either from/to/steps/scale or an explicit list.
struct SweepSpec {
    std::string param;  // R, N, omega, T or k
    double from = 0.0;
    double to = 0.0;
    std::uint32_t steps = 0;
    Scale scale = Scale::Linear;
    std::vector<double> values;

    /// Throws DomainError on an unknown parameter or malformed range.
    void validate() const;
    std::vector<double> grid() const;
};

/// One row per (grid value, policy) in grid order. When the swept
/// parameter is k, every MBR policy takes its k from the grid.
std::vector<SweepRow> run_sweep(const SystemParams& base, const SweepSpec& spec,
                                const std::vector<PolicySpec>& policies, const SimConfig& cfg, bool simulate);

/// Runs the command line (without the program name). Returns the exit code:
/// 0 success, 2 usage error or invalid parameters, 1 runtime failure.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace d2d::cli
