#include <cstdlib>
#include <map>
#include <string>

#include <Highs.h>

#include "flexmarket/errors.hpp"
#include "flexmarket/lp/solver.hpp"

namespace flexmarket::lp {

std::string_view to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::optimal: return "optimal";
        case SolveStatus::feasible: return "feasible";
        case SolveStatus::infeasible: return "infeasible";
        case SolveStatus::unbounded: return "unbounded";
        case SolveStatus::error: return "error";
    }
    return "unknown";
}

std::vector<std::string> MipSolver::infeasible_core(const MipModel&) const { return {}; }

namespace {

HighsLp to_highs_lp(const MipModel& model, bool keep_integrality) {
    HighsLp lp;
    const auto n = static_cast<HighsInt>(model.num_vars());
    const auto m = static_cast<HighsInt>(model.num_rows());
    lp.num_col_ = n;
    lp.num_row_ = m;
    lp.sense_ = ObjSense::kMinimize;
    lp.offset_ = model.objective_offset;
    lp.col_cost_.resize(static_cast<std::size_t>(n));
    lp.col_lower_.resize(static_cast<std::size_t>(n));
    lp.col_upper_.resize(static_cast<std::size_t>(n));
    bool any_int = false;
    std::vector<HighsVarType> integrality(static_cast<std::size_t>(n), HighsVarType::kContinuous);
    for (HighsInt j = 0; j < n; ++j) {
        const auto& c = model.columns()[static_cast<std::size_t>(j)];
        lp.col_cost_[static_cast<std::size_t>(j)] = c.cost;
        lp.col_lower_[static_cast<std::size_t>(j)] = c.lower;
        lp.col_upper_[static_cast<std::size_t>(j)] = c.upper;
        if (c.type != VarType::continuous && keep_integrality) {
            integrality[static_cast<std::size_t>(j)] = HighsVarType::kInteger;
            any_int = true;
        }
    }
    if (any_int) lp.integrality_ = std::move(integrality);

    lp.row_lower_.resize(static_cast<std::size_t>(m));
    lp.row_upper_.resize(static_cast<std::size_t>(m));
    auto& a = lp.a_matrix_;
    a.format_ = MatrixFormat::kRowwise;
    a.num_col_ = n;
    a.num_row_ = m;
    a.start_.assign(1, 0);
    std::map<int, double> merged;
    for (HighsInt i = 0; i < m; ++i) {
        const auto& r = model.rows()[static_cast<std::size_t>(i)];
        lp.row_lower_[static_cast<std::size_t>(i)] = r.lower;
        lp.row_upper_[static_cast<std::size_t>(i)] = r.upper;
        merged.clear();
        for (const auto& t : r.terms) merged[t.var.index] += t.coef;
        for (const auto& [j, v] : merged) {
            if (v == 0.0) continue;
            a.index_.push_back(static_cast<HighsInt>(j));
            a.value_.push_back(v);
        }
        a.start_.push_back(static_cast<HighsInt>(a.index_.size()));
    }
    return lp;
}

void configure(Highs& h, const SolveOptions& opts) {
    h.setOptionValue("output_flag", opts.verbose);
    h.setOptionValue("threads", 1);
    h.setOptionValue("random_seed", static_cast<HighsInt>(opts.seed));
    h.setOptionValue("mip_rel_gap", opts.mip_gap);
    h.setOptionValue("mip_abs_gap", 1e-9);
    if (opts.time_limit_s < kInf) h.setOptionValue("time_limit", opts.time_limit_s);
    h.setOptionValue("primal_feasibility_tolerance", 1e-7);
    h.setOptionValue("dual_feasibility_tolerance", 1e-7);
    h.setOptionValue("mip_feasibility_tolerance", 1e-7);
}

class HighsBackend final : public MipSolver {
public:
    std::string name() const override { return "highs"; }

    SolveResult solve(const MipModel& model, const SolveOptions& opts) const override {
        SolveResult out;
        if (model.num_vars() == 0) {
            out.status = SolveStatus::optimal;
            out.objective = model.objective_offset;
            out.best_bound = out.objective;
            out.row_duals.assign(model.num_rows(), 0.0);
            for (const auto& r : model.rows()) {
                if (r.lower > 0.0 || r.upper < 0.0) out.status = SolveStatus::infeasible;
            }
            return out;
        }
        const bool mip = model.has_integers() && !opts.relax_integrality;
        Highs h;
        configure(h, opts);
        HighsStatus st = h.passModel(to_highs_lp(model, mip));
        if (st == HighsStatus::kError) {
            out.message = "HiGHS rejected the model";
            return out;
        }
        if (mip && opts.start.size() == model.num_vars()) {
            HighsSolution start;
            start.col_value = opts.start;
            start.value_valid = true;
            h.setSolution(start);
        }
        st = h.run();
        const auto ms = h.getModelStatus();
        const auto& info = h.getInfo();
        switch (ms) {
            case HighsModelStatus::kOptimal:
                out.status = SolveStatus::optimal;
                break;
            case HighsModelStatus::kInfeasible:
                out.status = SolveStatus::infeasible;
                break;
            case HighsModelStatus::kUnbounded:
            case HighsModelStatus::kUnboundedOrInfeasible:
                out.status = SolveStatus::unbounded;
                break;
            case HighsModelStatus::kTimeLimit:
            case HighsModelStatus::kIterationLimit:
            case HighsModelStatus::kInterrupt:
            case HighsModelStatus::kSolutionLimit:
                out.status = info.primal_solution_status == kSolutionStatusFeasible ? SolveStatus::feasible
                                                                                     : SolveStatus::error;
                break;
            default:
                out.status = SolveStatus::error;
        }
        out.message = h.modelStatusToString(ms);
        if (!out.has_solution()) return out;

        const auto& sol = h.getSolution();
        out.x = sol.col_value;
        out.objective = info.objective_function_value;
        if (mip) {
            out.best_bound = info.mip_dual_bound;
            out.mip_gap = info.mip_gap;
        } else {
            out.best_bound = out.objective;
            out.mip_gap = 0.0;
            if (sol.dual_valid) {
                out.row_duals = sol.row_dual;
                out.reduced_costs = sol.col_dual;
            }
        }
        return out;
    }

    std::vector<std::string> infeasible_core(const MipModel& model) const override {
        Highs h;
        h.setOptionValue("output_flag", false);
        h.setOptionValue("threads", 1);
        if (h.passModel(to_highs_lp(model, false)) == HighsStatus::kError) return {};
        h.setOptionValue("iis_strategy", static_cast<HighsInt>(kIisStrategyFromLp | kIisStrategyIrreducible));
        HighsIis iis;
        if (h.getIis(iis) == HighsStatus::kError || !iis.valid_) return {};
        std::vector<std::string> names;
        for (HighsInt r : iis.row_index_) {
            names.push_back(model.rows().at(static_cast<std::size_t>(r)).name);
        }
        for (HighsInt c : iis.col_index_) {
            names.push_back("bound:" + model.columns().at(static_cast<std::size_t>(c)).name);
        }
        return names;
    }
};

}  // namespace

std::unique_ptr<MipSolver> make_solver(std::string_view name) {
    if (name.empty() || name == "highs" || name == "HiGHS") return std::make_unique<HighsBackend>();
    throw InputError("unknown solver backend '" + std::string(name) + "' (available: highs)");
}

std::unique_ptr<MipSolver> make_default_solver() {
    const char* env = std::getenv(kSolverEnvVar);
    return make_solver(env ? std::string_view(env) : std::string_view("highs"));
}

}  // namespace flexmarket::lp
