#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "erie/value.hpp"

namespace erie {

enum class ColumnType { Number, Text, Datetime, Boolean };

std::string column_type_name(ColumnType t);

// Columnar relational table. Immutable by convention: transforms build new
// tables instead of mutating in place.
class DataTable {
  public:
    struct Column {
        std::string name;
        ColumnType type = ColumnType::Text;
    };

    DataTable() = default;

    void add_column(std::string name, ColumnType type);
    // Appends a row; must supply one value per column.
    void add_row(std::vector<Value> row);

    std::size_t row_count() const { return rows_.size(); }
    std::size_t column_count() const { return columns_.size(); }
    const std::vector<Column>& columns() const { return columns_; }
    const std::vector<std::vector<Value>>& rows() const { return rows_; }

    bool has_column(const std::string& name) const;
    std::size_t column_index(const std::string& name) const;  // throws Error::Data
    std::optional<std::size_t> find_column(const std::string& name) const;
    ColumnType column_type(const std::string& name) const;

    const Value& at(std::size_t row, std::size_t col) const { return rows_[row][col]; }
    const Value& at(std::size_t row, const std::string& col) const;

    // Non-null values of one column, in row order.
    std::vector<Value> column_values(const std::string& name) const;
    std::vector<double> numeric_column(const std::string& name) const;

  private:
    std::vector<Column> columns_;
    std::vector<std::vector<Value>> rows_;
};

// Parses an ISO-8601-ish date or datetime into epoch milliseconds (UTC).
// Accepts YYYY-MM-DD, optionally followed by [T ]HH:MM[:SS[.sss]][Z].
std::optional<double> parse_datetime_ms(const std::string& text);

// Inverse rendering: date-only when the value falls on a UTC midnight,
// otherwise YYYY-MM-DDTHH:MM:SS[.sss]Z.
std::string epoch_ms_to_iso(double epochMs);

// Builds a table from rows of (name, value) pairs, inferring column types:
// all-numeric -> number, ISO-date-like -> datetime, booleans -> boolean,
// otherwise text.
DataTable table_from_records(
    const std::vector<std::vector<std::pair<std::string, Value>>>& records);

DataTable load_json_table(const std::string& jsonText);
DataTable load_csv_table(const std::string& csvText);
DataTable load_table_file(const std::string& path);

}  // namespace erie
