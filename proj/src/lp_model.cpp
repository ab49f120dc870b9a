#include "flexmarket/lp/model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

namespace flexmarket::lp {

VarId MipModel::add_var(std::string name, double lower, double upper, double cost,
                        VarType type, std::string tag) {
    if (type == VarType::binary) {
        lower = std::max(lower, 0.0);
        upper = std::min(upper, 1.0);
    }
    columns_.push_back(Column{std::move(name), lower, upper, cost, type, std::move(tag)});
    return VarId{static_cast<int>(columns_.size()) - 1};
}

RowId MipModel::add_row(std::string name, std::vector<Term> terms, double lower,
                        double upper, std::string tag) {
    for (const auto& t : terms) {
        if (!t.var.valid() || static_cast<std::size_t>(t.var.index) >= columns_.size()) {
            throw std::out_of_range("row '" + name + "' references an unknown variable");
        }
    }
    rows_.push_back(Row{std::move(name), std::move(terms), lower, upper, std::move(tag)});
    return RowId{static_cast<int>(rows_.size()) - 1};
}

void MipModel::add_term(RowId row, VarId var, double coef) {
    if (!var.valid() || static_cast<std::size_t>(var.index) >= columns_.size()) {
        throw std::out_of_range("add_term: unknown variable");
    }
    rows_.at(static_cast<std::size_t>(row.index)).terms.push_back(Term{var, coef});
}

void MipModel::set_row_bounds(RowId row, double lower, double upper) {
    auto& r = rows_.at(static_cast<std::size_t>(row.index));
    r.lower = lower;
    r.upper = upper;
}

void MipModel::set_var_bounds(VarId var, double lower, double upper) {
    auto& c = columns_.at(static_cast<std::size_t>(var.index));
    c.lower = lower;
    c.upper = upper;
}

void MipModel::set_cost(VarId var, double cost) {
    columns_.at(static_cast<std::size_t>(var.index)).cost = cost;
}

void MipModel::set_type(VarId var, VarType type) {
    columns_.at(static_cast<std::size_t>(var.index)).type = type;
}

bool MipModel::has_integers() const {
    return std::any_of(columns_.begin(), columns_.end(),
                       [](const Column& c) { return c.type != VarType::continuous; });
}

double MipModel::evaluate(const std::vector<double>& x) const {
    double obj = objective_offset;
    for (std::size_t j = 0; j < columns_.size(); ++j) {
        obj += columns_[j].cost * x.at(j);
    }
    return obj;
}

double MipModel::activity(RowId r, const std::vector<double>& x) const {
    double a = 0.0;
    for (const auto& t : row(r).terms) {
        a += t.coef * x.at(static_cast<std::size_t>(t.var.index));
    }
    return a;
}

double MipModel::max_violation(const std::vector<double>& x) const {
    double worst = 0.0;
    for (std::size_t j = 0; j < columns_.size(); ++j) {
        const auto& c = columns_[j];
        worst = std::max({worst, c.lower - x[j], x[j] - c.upper});
        if (c.type != VarType::continuous) {
            worst = std::max(worst, std::abs(x[j] - std::round(x[j])));
        }
    }
    for (std::size_t i = 0; i < rows_.size(); ++i) {
        const double a = activity(RowId{static_cast<int>(i)}, x);
        worst = std::max({worst, rows_[i].lower - a, a - rows_[i].upper});
    }
    return worst;
}

namespace {

std::string lp_name(const std::string& raw, char prefix, std::size_t idx) {
    // LP format forbids a few characters; fall back to positional names.
    std::string out;
    out.reserve(raw.size());
    for (char ch : raw) {
        if (std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '.') {
            out.push_back(ch);
        } else if (ch == '[' || ch == ']' || ch == ',' || ch == ':') {
            out.push_back('_');
        }
    }
    if (out.empty() || std::isdigit(static_cast<unsigned char>(out.front()))) {
        out = fmt::format("{}{}_{}", prefix, idx, out);
    }
    return out;
}

void write_expr(std::ostringstream& os, const std::map<int, double>& coefs,
                const std::vector<std::string>& names) {
    bool first = true;
    int on_line = 0;
    for (const auto& [j, c] : coefs) {
        if (c == 0.0) continue;
        if (first) {
            os << fmt::format("{}{} {}", c < 0 ? "- " : "", std::abs(c), names[static_cast<std::size_t>(j)]);
        } else {
            os << fmt::format(" {} {} {}", c < 0 ? "-" : "+", std::abs(c), names[static_cast<std::size_t>(j)]);
        }
        first = false;
        if (++on_line % 6 == 0) os << "\n   ";
    }
    if (first) os << "0 " << names.front();
}

}  // namespace

std::string MipModel::to_lp_format() const {
    std::vector<std::string> names;
    names.reserve(columns_.size());
    for (std::size_t j = 0; j < columns_.size(); ++j) names.push_back(lp_name(columns_[j].name, 'x', j));

    std::ostringstream os;
    os.precision(17);
    os << "\\ flexmarket model: " << columns_.size() << " columns, " << rows_.size() << " rows\n";
    if (objective_offset != 0.0) os << "\\ objective offset " << objective_offset << "\n";
    os << "Minimize\n obj: ";
    std::map<int, double> obj;
    for (std::size_t j = 0; j < columns_.size(); ++j) {
        if (columns_[j].cost != 0.0) obj[static_cast<int>(j)] = columns_[j].cost;
    }
    if (columns_.empty()) {
        os << "0\n";
    } else {
        write_expr(os, obj, names);
        os << "\n";
    }
    os << "Subject To\n";
    for (std::size_t i = 0; i < rows_.size(); ++i) {
        const auto& r = rows_[i];
        std::map<int, double> coefs;
        for (const auto& t : r.terms) coefs[t.var.index] += t.coef;
        const std::string rn = lp_name(r.name, 'r', i);
        if (r.lower == r.upper) {
            os << " " << rn << ": ";
            write_expr(os, coefs, names);
            os << " = " << r.upper << "\n";
            continue;
        }
        if (r.lower > -kInf) {
            os << " " << rn << "_lo: ";
            write_expr(os, coefs, names);
            os << " >= " << r.lower << "\n";
        }
        if (r.upper < kInf) {
            os << " " << rn << "_up: ";
            write_expr(os, coefs, names);
            os << " <= " << r.upper << "\n";
        }
    }
    os << "Bounds\n";
    for (std::size_t j = 0; j < columns_.size(); ++j) {
        const auto& c = columns_[j];
        if (c.lower == -kInf && c.upper == kInf) {
            os << " " << names[j] << " free\n";
        } else if (c.upper == kInf) {
            os << " " << names[j] << " >= " << c.lower << "\n";
        } else if (c.lower == -kInf) {
            os << " -inf <= " << names[j] << " <= " << c.upper << "\n";
        } else {
            os << " " << c.lower << " <= " << names[j] << " <= " << c.upper << "\n";
        }
    }
    bool any_int = false;
    for (std::size_t j = 0; j < columns_.size(); ++j) {
        if (columns_[j].type == VarType::continuous) continue;
        if (!any_int) os << "General\n";
        any_int = true;
        os << " " << names[j] << "\n";
    }
    os << "End\n";
    return os.str();
}

}  // namespace flexmarket::lp
