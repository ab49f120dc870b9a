#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "flexmarket/lp/model.hpp"

namespace flexmarket::lp {

struct SolveOptions {
    double mip_gap = 0.0;          // relative
    double time_limit_s = kInf;
    std::uint32_t seed = 0;
    bool relax_integrality = false;
    bool want_duals = false;       // only meaningful for continuous models
    bool verbose = false;
    std::vector<double> start;     // MIP start; empty for none
};

enum class SolveStatus {
    optimal,         // proven within the requested gap
    feasible,        // stopped early (time limit) with an incumbent
    infeasible,
    unbounded,
    error,
};

[[nodiscard]] std::string_view to_string(SolveStatus s);

struct SolveResult {
    SolveStatus status = SolveStatus::error;
    std::vector<double> x;
    std::vector<double> row_duals;      // d obj / d rhs, minimization sense
    std::vector<double> reduced_costs;
    double objective = 0.0;
    double best_bound = 0.0;
    double mip_gap = 0.0;
    std::string message;

    [[nodiscard]] bool has_solution() const {
        return status == SolveStatus::optimal || status == SolveStatus::feasible;
    }
};

/// Backend-neutral solver. Implementations must be usable from several
/// threads at once as long as each call gets its own model.
class MipSolver {
public:
    virtual ~MipSolver() = default;
    [[nodiscard]] virtual std::string name() const = 0;
    [[nodiscard]] virtual SolveResult solve(const MipModel& model, const SolveOptions& opts) const = 0;

    /// Names of rows in an irreducible infeasible subset of the LP
    /// relaxation. Empty when the backend cannot compute one.
    [[nodiscard]] virtual std::vector<std::string> infeasible_core(const MipModel& model) const;
};

/// Environment variable consulted by `make_default_solver`.
inline constexpr const char* kSolverEnvVar = "FLEXMARKET_SOLVER";

/// Known names: "highs".
[[nodiscard]] std::unique_ptr<MipSolver> make_solver(std::string_view name);

/// Backend from FLEXMARKET_SOLVER, defaulting to HiGHS.
[[nodiscard]] std::unique_ptr<MipSolver> make_default_solver();

}  // namespace flexmarket::lp
