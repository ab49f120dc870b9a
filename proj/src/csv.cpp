#include "flexmarket/csv.hpp"

#include <cmath>
#include <sstream>

#include <fmt/format.h>

#include "flexmarket/errors.hpp"

namespace flexmarket {

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (v == 0.0) return "0";  // folds -0
    return fmt::format("{}", v);
}

namespace {

std::string quote(const std::string& f) {
    if (f.find_first_of(",\"\n\r") == std::string::npos) return f;
    std::string out = "\"";
    for (char c : f) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

}  // namespace

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : out_(path, std::ios::binary), width_(header.size()), path_(path) {
    if (!out_) throw InputError("cannot write " + path.string());
    row(header);
}

void CsvWriter::row(const std::vector<std::string>& fields) {
    if (fields.size() != width_) {
        throw std::logic_error(fmt::format("{}: row has {} fields, header has {}", path_.string(), fields.size(), width_));
    }
    for (std::size_t k = 0; k < fields.size(); ++k) {
        if (k) out_ << ',';
        out_ << quote(fields[k]);
    }
    out_ << '\n';
}

std::size_t CsvTable::column_index(const std::string& name) const {
    for (std::size_t k = 0; k < header.size(); ++k) {
        if (header[k] == name) return k;
    }
    throw InputError("missing CSV column '" + name + "'");
}

double CsvTable::number(std::size_t row, const std::string& column) const {
    const auto& s = rows.at(row).at(column_index(column));
    if (s == "nan" || s.empty()) return std::nan("");
    try {
        return std::stod(s);
    } catch (const std::exception&) {
        throw InputError(fmt::format("column {} row {}: '{}' is not a number", column, row + 2, s));
    }
}

CsvTable parse_csv(const std::string& text, const std::string& source) {
    CsvTable table;
    std::vector<std::string> fields;
    std::string cur;
    bool in_quotes = false;
    bool any = false;
    auto end_row = [&] {
        fields.push_back(cur);
        cur.clear();
        if (table.header.empty()) {
            table.header = std::move(fields);
        } else {
            if (fields.size() != table.header.size()) {
                throw InputError(fmt::format("{}:{}: expected {} fields, found {}", source, table.rows.size() + 2,
                                             table.header.size(), fields.size()));
            }
            table.rows.push_back(std::move(fields));
        }
        fields.clear();
        any = false;
    };
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                cur += c;
            }
            continue;
        }
        if (c == '"') {
            in_quotes = true;
            any = true;
        } else if (c == ',') {
            fields.push_back(cur);
            cur.clear();
            any = true;
        } else if (c == '\n') {
            end_row();
        } else if (c != '\r') {
            cur += c;
            any = true;
        }
    }
    if (in_quotes) throw InputError(source + ": unterminated quote");
    if (any || !fields.empty()) end_row();
    if (table.header.empty()) throw InputError(source + ": empty CSV");
    return table;
}

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_csv(ss.str(), path.string());
}

}  // namespace flexmarket
