#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

namespace flexmarket::lp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class VarType { continuous, binary, integer };

/// Column handle. Default-constructed handles are invalid.
struct VarId {
    int index = -1;
    [[nodiscard]] bool valid() const { return index >= 0; }
    friend bool operator==(VarId, VarId) = default;
};

/// Row handle. Default-constructed handles are invalid.
struct RowId {
    int index = -1;
    [[nodiscard]] bool valid() const { return index >= 0; }
    friend bool operator==(RowId, RowId) = default;
};

struct Term {
    VarId var;
    double coef = 0.0;
};

struct Column {
    std::string name;
    double lower = 0.0;
    double upper = kInf;
    double cost = 0.0;
    VarType type = VarType::continuous;
    std::string tag;  // objective term category
};

struct Row {
    std::string name;
    std::vector<Term> terms;
    double lower = -kInf;
    double upper = kInf;
    std::string tag;  // equation family
};

/// Minimization model: variables with bounds and linear costs, two-sided rows.
///
/// Rows keep their coefficients as an unordered term list; repeated
/// variables are summed when the model is handed to a backend.
class MipModel {
public:
    VarId add_var(std::string name, double lower, double upper, double cost,
                  VarType type = VarType::continuous, std::string tag = {});

    RowId add_row(std::string name, std::vector<Term> terms, double lower,
                  double upper, std::string tag = {});

    void add_term(RowId row, VarId var, double coef);
    void set_row_bounds(RowId row, double lower, double upper);
    void set_var_bounds(VarId var, double lower, double upper);
    void set_cost(VarId var, double cost);
    void set_type(VarId var, VarType type);

    [[nodiscard]] const Column& column(VarId v) const { return columns_.at(static_cast<std::size_t>(v.index)); }
    [[nodiscard]] const Row& row(RowId r) const { return rows_.at(static_cast<std::size_t>(r.index)); }
    [[nodiscard]] const std::vector<Column>& columns() const { return columns_; }
    [[nodiscard]] const std::vector<Row>& rows() const { return rows_; }
    [[nodiscard]] std::size_t num_vars() const { return columns_.size(); }
    [[nodiscard]] std::size_t num_rows() const { return rows_.size(); }
    [[nodiscard]] bool has_integers() const;

    double objective_offset = 0.0;

    /// Objective value of `x` (including the offset).
    [[nodiscard]] double evaluate(const std::vector<double>& x) const;

    /// Row activity of `x`.
    [[nodiscard]] double activity(RowId r, const std::vector<double>& x) const;

    /// Largest bound or row violation of `x`; integrality is checked with
    /// distance to the nearest integer.
    [[nodiscard]] double max_violation(const std::vector<double>& x) const;

    /// CPLEX-LP text rendering for external inspection.
    [[nodiscard]] std::string to_lp_format() const;

private:
    std::vector<Column> columns_;
    std::vector<Row> rows_;
};

}  // namespace flexmarket::lp
