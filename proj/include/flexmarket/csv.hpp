#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace flexmarket {

/// Shortest decimal text that reads back to the same double; "nan" for NaN.
[[nodiscard]] std::string format_number(double v);

/// Comma-separated writer. Fields containing commas, quotes or newlines are quoted.
class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);
    void row(const std::vector<std::string>& fields);

private:
    std::ofstream out_;
    std::size_t width_;
    std::filesystem::path path_;
};

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Throws InputError naming the missing column.
    [[nodiscard]] std::size_t column_index(const std::string& name) const;
    [[nodiscard]] double number(std::size_t row, const std::string& column) const;
};

[[nodiscard]] CsvTable read_csv(const std::filesystem::path& path);
[[nodiscard]] CsvTable parse_csv(const std::string& text, const std::string& source = "csv");

}  // namespace flexmarket
