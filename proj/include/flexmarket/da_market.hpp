#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "flexmarket/grid.hpp"
#include "flexmarket/lp/model.hpp"
#include "flexmarket/lp/solver.hpp"
#include "flexmarket/scenario.hpp"
#include "flexmarket/system_model.hpp"

namespace flexmarket {

inline constexpr std::size_t kUp = 0;
inline constexpr std::size_t kDown = 1;

enum class DaDesign { base, ir, fo };
[[nodiscard]] std::string_view to_string(DaDesign d);

struct IrProductVars {
    ReserveProductDef def;
    Grid<lp::VarId> award;        // [unit][hour]; invalid where the unit is ineligible
    Grid<double> step_quantity;   // [step][hour] MW
    Grid<lp::VarId> step_short;   // [step][hour]
    std::vector<lp::RowId> requirement;  // [hour]
};

struct FoSellerVars {
    FlexSellerParams params;
    std::size_t unit = 0;
    std::array<Grid<lp::VarId>, 2> hs;  // [direction] -> [tier][hour]
    Grid<lp::VarId> u_rt;               // [tier][hour]; empty unless fast start
};

struct FoBuyerVars {
    UncertainAccount account;   // levels filled, [level][hour]
    double vc_up = 0.0;         // resolved self-hedge costs
    double vc_down = 0.0;
    std::vector<lp::VarId> p_da;        // [hour]
    std::array<Grid<lp::VarId>, 2> hd;  // [direction] -> [tier][hour]
    std::array<Grid<lp::VarId>, 2> sd;
    Grid<lp::VarId> y;                  // [level][hour]
    Grid<lp::RowId> hedge;              // [level][hour], the hedging identity rows
};

/// The DA unit-commitment MILP plus handles into it. Column tags name the
/// objective term a cost belongs to; row tags name the constraint family.
struct DaProblem {
    lp::MipModel milp;
    DaDesign design = DaDesign::base;
    MarketConfig config;
    std::vector<Generator> units;
    std::vector<double> demand;  // fixed DA demand per hour (median net load)
    std::size_t hours = 0;

    Grid<lp::VarId> p, u, start, stop;  // [unit][hour]
    std::vector<lp::VarId> shortfall, surplus;
    std::vector<lp::RowId> balance;

    std::vector<IrProductVars> ir;

    TierStructure tiers;
    std::vector<FoSellerVars> sellers;
    std::vector<FoBuyerVars> buyers;
    std::array<Grid<lp::RowId>, 2> fo_balance;  // [direction] -> [tier][hour]

    [[nodiscard]] std::size_t unit_index(const std::string& id) const;
};

struct DaSolution {
    lp::SolveStatus status = lp::SolveStatus::error;
    double objective = 0.0;
    double best_bound = 0.0;
    double mip_gap = 0.0;
    std::vector<double> x;

    Grid<double> p, u;                     // [unit][hour]
    Grid<double> award_up, award_down;     // [unit][hour], FO or IR totals
    std::vector<Grid<double>> ir_award;    // [product] -> [unit][hour]
    std::vector<std::array<Grid<double>, 2>> hs;  // [seller] -> [direction] -> [tier][hour]
    std::vector<Grid<double>> u_rt;        // [seller] -> [tier][hour]
    std::vector<std::vector<double>> buyer_p_da;  // [buyer][hour]
    std::vector<std::array<Grid<double>, 2>> hd, sd;
    std::vector<Grid<double>> y;
    std::vector<double> shortfall, surplus;
    std::map<std::string, double> cost_terms;  // by column tag

    [[nodiscard]] double value(lp::VarId v) const { return v.valid() ? x.at(static_cast<std::size_t>(v.index)) : 0.0; }

    /// Energy, no-load and start-up cost of the physical schedule.
    [[nodiscard]] double production_cost() const;

    /// Net load served by the schedule: generation plus DA shortfall minus surplus.
    [[nodiscard]] std::vector<double> scheduled_net_load() const;

    [[nodiscard]] std::vector<int> committed_count(const std::vector<Generator>& units, CommitClass cls) const;
};

struct DaPrices {
    std::vector<double> energy;            // [hour] $/MWh
    std::array<Grid<double>, 2> fo;        // [direction] -> [tier][hour] $/MW
    std::vector<std::vector<double>> reserve;  // [product][hour] $/MW
    std::string method;                    // how duals were obtained
};

/// Standard UC with demand fixed at the median of `forecast` (net load).
[[nodiscard]] DaProblem build_base_uc(const SystemModel& model, const PercentileTable& forecast);
[[nodiscard]] DaProblem build_base_uc(const SystemModel& model, const std::vector<double>& demand);

/// Imbalance reserves: stepped demand curves sized from `net_load`
/// percentiles, cascading by rank, headroom and modified ramp limits.
void apply_ir_design(DaProblem& p, const std::vector<ReserveProductDef>& products, const PercentileTable& net_load);

/// Flexibility options with endogenous demand. Buyers whose `levels` are
/// empty take the levels of `tiers`.
void apply_fo_design(DaProblem& p, const std::vector<FlexSellerParams>& sellers,
                     const std::vector<UncertainAccount>& buyers, const TierStructure& tiers, const MarketConfig& cfg);

/// The single aggregate buyer: levels, DA forecast and self-hedge costs from the tiers.
[[nodiscard]] UncertainAccount aggregate_buyer(const TierStructure& tiers, const MarketConfig& cfg);

/// Solves within cfg.mip_gap; throws SolveError when infeasible or failed.
[[nodiscard]] DaSolution solve_da(const DaProblem& p, const MarketConfig& cfg, const lp::MipSolver* solver = nullptr);

/// Reads a solution vector (from any source) into a DaSolution.
[[nodiscard]] DaSolution extract_solution(const DaProblem& p, std::vector<double> x);

/// Fixes the binaries at `sol`, re-solves the LP and reads the duals.
[[nodiscard]] DaPrices compute_prices(const DaProblem& p, const DaSolution& sol, const lp::MipSolver* solver = nullptr);

void write_lp_file(const DaProblem& p, const std::filesystem::path& path);
void write_da_solution_csv(const DaProblem& p, const DaSolution& sol, const std::filesystem::path& path);
void write_da_prices_csv(const DaProblem& p, const DaPrices& prices, const std::filesystem::path& path);

}  // namespace flexmarket
