#include "qrad/sweep_result.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace qrad {

Column& SweepResult::add_column(std::string name)
{
    if (has_column(name))
        throw std::logic_error("duplicate column " + name);
    columns_.push_back(Column{std::move(name), {}});
    return columns_.back();
}

Column& SweepResult::column(const std::string& name)
{
    return const_cast<Column&>(std::as_const(*this).column(name));
}

const Column& SweepResult::column(const std::string& name) const
{
    auto it = std::find_if(columns_.begin(), columns_.end(), [&](const Column& c) { return c.name == name; });
    if (it == columns_.end())
        throw std::out_of_range("no column named " + name);
    return *it;
}

bool SweepResult::has_column(const std::string& name) const
{
    return std::any_of(columns_.begin(), columns_.end(), [&](const Column& c) { return c.name == name; });
}

void SweepResult::set_meta(const std::string& key, std::string value)
{
    for (auto& [k, v] : metadata_) {
        if (k == key) {
            v = std::move(value);
            return;
        }
    }
    metadata_.emplace_back(key, std::move(value));
}

const std::string* SweepResult::meta(const std::string& key) const
{
    for (const auto& [k, v] : metadata_)
        if (k == key)
            return &v;
    return nullptr;
}

std::size_t SweepResult::rows() const
{
    if (columns_.empty())
        return 0;
    const std::size_t n = columns_.front().values.size();
    for (const auto& c : columns_)
        if (c.values.size() != n)
            throw std::logic_error("column " + c.name + " has a different length");
    return n;
}

void SweepResult::append_rows(const SweepResult& other)
{
    if (columns_.empty()) {
        columns_ = other.columns_;
        return;
    }
    if (other.columns_.size() != columns_.size())
        throw std::logic_error("cannot append rows with a different column layout");
    for (std::size_t k = 0; k < columns_.size(); ++k) {
        if (columns_[k].name != other.columns_[k].name)
            throw std::logic_error("cannot append rows with a different column layout");
        auto& dst = columns_[k].values;
        dst.insert(dst.end(), other.columns_[k].values.begin(), other.columns_[k].values.end());
    }
}

std::string format_double(double value)
{
    if (std::isnan(value))
        return "nan";
    if (std::isinf(value))
        return value > 0 ? "inf" : "-inf";
    std::array<char, 64> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value, std::chars_format::general, 17);
    if (ec != std::errc())
        throw std::runtime_error("float formatting failed");
    return std::string(buf.data(), end);
}

std::string format_cell(const Cell& cell)
{
    struct Visitor {
        std::string operator()(double v) const { return format_double(v); }
        std::string operator()(std::int64_t v) const { return std::to_string(v); }
        std::string operator()(const std::string& v) const { return v; }
    };
    return std::visit(Visitor{}, cell);
}

std::string to_csv(const SweepResult& result)
{
    std::ostringstream out;
    for (const auto& [k, v] : result.metadata())
        out << "# " << k << ": " << v << '\n';

    const auto& cols = result.columns();
    for (std::size_t c = 0; c < cols.size(); ++c)
        out << (c ? "," : "") << cols[c].name;
    out << '\n';

    const std::size_t n = result.rows();
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < cols.size(); ++c)
            out << (c ? "," : "") << format_cell(cols[c].values[r]);
        out << '\n';
    }
    return out.str();
}

void write_csv_atomic(const SweepResult& result, const std::filesystem::path& path)
{
    const std::string text = to_csv(result);
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream file(tmp, std::ios::binary | std::ios::trunc);
        if (!file)
            throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        file.write(text.data(), static_cast<std::streamsize>(text.size()));
        if (!file)
            throw std::runtime_error("write to " + tmp.string() + " failed");
    }
    std::filesystem::rename(tmp, path);
}

std::vector<double> numeric_column(const SweepResult& result, const std::string& name)
{
    const auto& col = result.column(name);
    std::vector<double> out;
    out.reserve(col.values.size());
    for (const auto& cell : col.values) {
        if (const auto* d = std::get_if<double>(&cell))
            out.push_back(*d);
        else if (const auto* i = std::get_if<std::int64_t>(&cell))
            out.push_back(static_cast<double>(*i));
        else
            throw std::invalid_argument("column " + name + " is not numeric");
    }
    return out;
}

}  // namespace qrad
