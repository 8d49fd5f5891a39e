#pragma once

// Column-oriented sweep output and its CSV form: '#'-prefixed "key: value"
// metadata lines, a header row, then data rows. Floats use 17 significant
// digits, lines end in LF.

#include <cstdint>
#include <deque>
#include <filesystem>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace qrad {

using Cell = std::variant<double, std::int64_t, std::string>;

struct Column {
    std::string name;  // carries its unit suffix, e.g. bias_A, gain_dB
    std::vector<Cell> values;
};

class SweepResult {
public:
    // References stay valid as further columns are added.
    Column& add_column(std::string name);
    Column& column(const std::string& name);
    const Column& column(const std::string& name) const;
    bool has_column(const std::string& name) const;

    const std::deque<Column>& columns() const noexcept { return columns_; }

    // Insertion-ordered; setting an existing key replaces its value in place.
    void set_meta(const std::string& key, std::string value);
    const std::string* meta(const std::string& key) const;
    const std::vector<std::pair<std::string, std::string>>& metadata() const noexcept { return metadata_; }

    // Throws std::logic_error if the columns have unequal length.
    std::size_t rows() const;

    // Appends rows of another result with the same column layout.
    void append_rows(const SweepResult& other);

private:
    std::deque<Column> columns_;
    std::vector<std::pair<std::string, std::string>> metadata_;
};

std::string format_double(double value);
std::string format_cell(const Cell& cell);

std::string to_csv(const SweepResult& result);

// Writes to a sibling temporary file and renames it over the target.
void write_csv_atomic(const SweepResult& result, const std::filesystem::path& path);

// Numeric view of a column (int cells widened, strings rejected).
std::vector<double> numeric_column(const SweepResult& result, const std::string& name);

}  // namespace qrad
