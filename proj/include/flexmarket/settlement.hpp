#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "flexmarket/da_market.hpp"
#include "flexmarket/rt_market.hpp"

namespace flexmarket {

enum class PartyClass { seller, buyer, load, iso };
enum class Stage { da, rt };
enum class Product { energy, fo_up, fo_down, ir_up, ir_down };

[[nodiscard]] std::string_view to_string(PartyClass c);
[[nodiscard]] std::string_view to_string(Stage s);
[[nodiscard]] std::string_view to_string(Product p);

inline constexpr const char* kIsoParty = "iso";

struct LedgerEntry {
    std::string party;
    PartyClass cls = PartyClass::seller;
    Stage stage = Stage::da;
    Product product = Product::energy;
    int day = 0;
    std::size_t interval = 0;  // hour for DA entries, RT interval for RT entries
    double amount = 0.0;       // $, positive = receives
    std::string component;     // energy, premium, payoff, procurement, allocation
    std::size_t pair = 0;      // shared by an entry and its ISO counterpart
};

/// Double-entry ledger with the ISO as central counterparty: every posted
/// party entry gets a mirrored ISO entry.
class CashflowLedger {
public:
    void post(LedgerEntry e);
    /// Appends another ledger, keeping pairs distinct.
    void append(const CashflowLedger& other);
    /// Entry without a counterpart; only for building audit fixtures.
    void post_unpaired(LedgerEntry e);

    [[nodiscard]] const std::vector<LedgerEntry>& entries() const { return entries_; }
    [[nodiscard]] double total() const;
    [[nodiscard]] bool empty() const { return entries_.empty(); }

private:
    std::vector<LedgerEntry> entries_;
    std::size_t next_pair_ = 1;
};

/// DA position and realized injection of one uncertain party (negative for load).
struct UncertainPosition {
    std::string party;
    PartyClass cls = PartyClass::buyer;
    std::vector<double> da_position;  // [hour] MW
    std::vector<double> realized;     // [interval] MW
};

/// DA injection position of all uncertain demand and supply taken together:
/// FO buyer positions less the fixed part of the balance right-hand side.
[[nodiscard]] std::vector<double> uncertain_da_position(const DaProblem& p, const DaSolution& sol);

/// The single aggregate account: realized injection is minus realized net load.
[[nodiscard]] UncertainPosition aggregate_position(const DaProblem& p, const DaSolution& sol,
                                                   std::span<const double> realized_net_load);

[[nodiscard]] CashflowLedger settle_da_energy(const DaProblem& p, const DaSolution& sol, const DaPrices& prices, int day = 0);

[[nodiscard]] CashflowLedger settle_fo_premiums(const DaProblem& p, const DaSolution& sol, const DaPrices& prices,
                                                int day = 0);

struct ExerciseRecord {
    std::string buyer;
    Direction direction = Direction::up;
    std::size_t tier = 0;
    std::size_t interval = 0;
    bool quantity_trigger = false;
    bool price_trigger = false;   // true when any matched seller is in the money
    bool beyond_levels = false;   // realized outside the outermost levels
    double held_mw = 0.0;
    double triggered_mw = 0.0;    // volume inside the tier on the triggered side
    double exercised_mw = 0.0;    // triggered volume matched to in-the-money sellers
    double payoff_per_mw = 0.0;   // $/MWh, weighted over matched sellers
};

struct FoPayoffs {
    std::vector<ExerciseRecord> records;
    CashflowLedger ledger;
};

/// Dual-trigger payoffs. `realized[b]` is buyer b's realized injection per RT
/// interval. Sellers in a tier are matched pro rata to their holdings.
[[nodiscard]] FoPayoffs settle_fo_payoffs(const DaProblem& p, const DaSolution& sol, const RtResult& rt,
                                          const std::vector<std::vector<double>>& realized, int day = 0);

/// Deviations from the DA schedule at lambda^RT for units and uncertain parties.
[[nodiscard]] CashflowLedger settle_rt_energy(const RtSystem& sys, const RtResult& rt,
                                              std::span<const UncertainPosition> uncertain, int day = 0);

struct IrSettlementSummary {
    double da_cost = 0.0;
    double rt_recovery = 0.0;
    [[nodiscard]] double recovery_ratio() const { return da_cost > 0 ? rt_recovery / da_cost : 0.0; }
};

/// DA reserve payments and RT allocation of their cost to parties with
/// observed imbalances. `constituents` carry each party's DA forecast as
/// da_position.
[[nodiscard]] CashflowLedger settle_ir(const DaProblem& p, const DaSolution& sol, const DaPrices& prices,
                                       std::span<const UncertainPosition> constituents, int day = 0,
                                       IrSettlementSummary* summary = nullptr);

struct IsoPosition {
    std::map<std::pair<Product, Stage>, double> net;  // ISO net $, positive = receives
    double total = 0.0;
    double ir_da_cost = 0.0;
    double ir_rt_recovery = 0.0;

    [[nodiscard]] double get(Product p, Stage s) const;
    [[nodiscard]] double fo_net(std::optional<Stage> s = std::nullopt) const;
    [[nodiscard]] double ir_recovery_ratio() const { return ir_da_cost > 0 ? ir_rt_recovery / ir_da_cost : 0.0; }
};

/// Audits the pairing (throws AuditError naming unmatched entries) and sums ISO rows.
[[nodiscard]] IsoPosition iso_position(const CashflowLedger& ledger);

struct CashflowRow {
    int day = 0;
    double da_energy = 0.0;
    double da_up = 0.0, da_down = 0.0;
    double rt_energy = 0.0;
    double rt_up = 0.0, rt_down = 0.0;
    double total = 0.0;    // da_up + da_down + rt_energy + rt_up + rt_down
    double rt_cost = 0.0;  // RT incremental cost borne by the class
    double margin = 0.0;   // total - rt_cost
};

struct CashflowStats {
    std::vector<CashflowRow> days;
    CashflowRow mean;
    CashflowRow stdev;  // sample standard deviation; 0 with one day
};

/// Per-day component cashflows of the parties in `classes`, as one account.
[[nodiscard]] CashflowStats aggregate_cashflows(const CashflowLedger& ledger, const std::vector<PartyClass>& classes,
                                                const std::map<int, double>& rt_costs = {});

void write_ledger_csv(const CashflowLedger& ledger, const std::filesystem::path& path);
void write_iso_position_csv(const IsoPosition& iso, const std::filesystem::path& path);
void write_exercise_csv(std::span<const ExerciseRecord> records, const std::filesystem::path& path);
void write_cashflow_stats_csv(const std::map<std::string, CashflowStats>& by_label, const std::filesystem::path& path);

}  // namespace flexmarket
