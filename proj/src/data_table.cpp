#include "erie/data_table.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <map>
#include <sstream>

#include "erie/error.hpp"
#include "json.hpp"

namespace erie {

bool value_equal(const Value& a, const Value& b) {
    if (a.index() != b.index()) {
        // bool/number cross-compare so JSON true == 1 behaves sanely
        if ((is_bool(a) && is_number(b)) || (is_number(a) && is_bool(b)))
            return as_number(a) == as_number(b);
        return false;
    }
    return a == b;
}

std::string number_to_text(double d) {
    if (std::isnan(d)) return "NaN";
    double r = std::round(d);
    if (d == r && std::abs(d) < 1e15) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.0f", d);
        return buf;
    }
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", d);
    return buf;
}

std::string value_to_text(const Value& v) {
    if (is_null(v)) return "null";
    if (auto* s = std::get_if<std::string>(&v)) return *s;
    if (auto* b = std::get_if<bool>(&v)) return *b ? "true" : "false";
    return number_to_text(std::get<double>(v));
}

std::string column_type_name(ColumnType t) {
    switch (t) {
        case ColumnType::Number: return "number";
        case ColumnType::Text: return "text";
        case ColumnType::Datetime: return "datetime";
        case ColumnType::Boolean: return "boolean";
    }
    return "?";
}

std::string ValidationReport::to_string() const {
    std::ostringstream out;
    for (const auto& d : items) {
        out << (d.severity == Diagnostic::Severity::Err ? "error" : "warning");
        if (!d.path.empty()) out << " [" << d.path << "]";
        out << ": " << d.message << "\n";
    }
    return out.str();
}

void DataTable::add_column(std::string name, ColumnType type) {
    if (has_column(name))
        throw Error(Error::Kind::Data, "duplicate column name: " + name);
    if (!rows_.empty())
        throw Error(Error::Kind::Data, "cannot add column after rows");
    columns_.push_back({std::move(name), type});
}

void DataTable::add_row(std::vector<Value> row) {
    if (row.size() != columns_.size())
        throw Error(Error::Kind::Data, "ragged row: expected " +
                                           std::to_string(columns_.size()) + " values, got " +
                                           std::to_string(row.size()));
    rows_.push_back(std::move(row));
}

bool DataTable::has_column(const std::string& name) const {
    return find_column(name).has_value();
}

std::optional<std::size_t> DataTable::find_column(const std::string& name) const {
    for (std::size_t i = 0; i < columns_.size(); ++i)
        if (columns_[i].name == name) return i;
    return std::nullopt;
}

std::size_t DataTable::column_index(const std::string& name) const {
    if (auto i = find_column(name)) return *i;
    throw Error(Error::Kind::Data, "unknown column: " + name);
}

ColumnType DataTable::column_type(const std::string& name) const {
    return columns_[column_index(name)].type;
}

const Value& DataTable::at(std::size_t row, const std::string& col) const {
    return rows_[row][column_index(col)];
}

std::vector<Value> DataTable::column_values(const std::string& name) const {
    std::size_t c = column_index(name);
    std::vector<Value> out;
    out.reserve(rows_.size());
    for (const auto& r : rows_)
        if (!is_null(r[c])) out.push_back(r[c]);
    return out;
}

std::vector<double> DataTable::numeric_column(const std::string& name) const {
    std::size_t c = column_index(name);
    std::vector<double> out;
    out.reserve(rows_.size());
    for (const auto& r : rows_) {
        if (is_null(r[c])) continue;
        if (!is_number(r[c]))
            throw Error(Error::Kind::Data, "column " + name + " is not numeric");
        out.push_back(std::get<double>(r[c]));
    }
    return out;
}

std::optional<double> parse_datetime_ms(const std::string& text) {
    int y = 0, mo = 0, d = 0, h = 0, mi = 0;
    double sec = 0.0;
    int n = 0;
    if (std::sscanf(text.c_str(), "%4d-%2d-%2d%n", &y, &mo, &d, &n) != 3) return std::nullopt;
    std::string rest = text.substr(static_cast<std::size_t>(n));
    if (!rest.empty()) {
        char sep = rest[0];
        if (sep != 'T' && sep != ' ') return std::nullopt;
        rest = rest.substr(1);
        int n2 = 0;
        if (std::sscanf(rest.c_str(), "%2d:%2d%n", &h, &mi, &n2) != 2) return std::nullopt;
        rest = rest.substr(static_cast<std::size_t>(n2));
        if (!rest.empty() && rest[0] == ':') {
            int n3 = 0;
            if (std::sscanf(rest.c_str(), ":%lf%n", &sec, &n3) != 1) return std::nullopt;
            rest = rest.substr(static_cast<std::size_t>(n3));
        }
        if (rest == "Z") rest.clear();
        if (!rest.empty()) return std::nullopt;
    }
    if (mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23 || mi > 59 || sec >= 61.0)
        return std::nullopt;
    // days since epoch, civil-date algorithm
    int yy = y - (mo <= 2 ? 1 : 0);
    int era = (yy >= 0 ? yy : yy - 399) / 400;
    unsigned yoe = static_cast<unsigned>(yy - era * 400);
    unsigned doy = static_cast<unsigned>((153 * (mo + (mo > 2 ? -3 : 9)) + 2) / 5 + d - 1);
    unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    long long days = static_cast<long long>(era) * 146097 + static_cast<long long>(doe) - 719468;
    double ms = (static_cast<double>(days) * 86400.0 + h * 3600.0 + mi * 60.0 + sec) * 1000.0;
    return ms;
}

std::string epoch_ms_to_iso(double epochMs) {
    long long totalMs = static_cast<long long>(std::llround(epochMs));
    long long days = totalMs / 86400000;
    long long rem = totalMs % 86400000;
    if (rem < 0) {
        rem += 86400000;
        --days;
    }
    // civil date from day count
    long long z = days + 719468;
    long long era = (z >= 0 ? z : z - 146096) / 146097;
    unsigned doe = static_cast<unsigned>(z - era * 146097);
    unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    long long y = static_cast<long long>(yoe) + era * 400;
    unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    unsigned mp = (5 * doy + 2) / 153;
    unsigned d = doy - (153 * mp + 2) / 5 + 1;
    unsigned m = mp + (mp < 10 ? 3 : -9);
    if (m <= 2) ++y;

    char buf[48];
    if (rem == 0) {
        std::snprintf(buf, sizeof(buf), "%04lld-%02u-%02u", y, m, d);
        return buf;
    }
    long long ms = rem % 1000;
    long long s = (rem / 1000) % 60;
    long long mi = (rem / 60000) % 60;
    long long h = rem / 3600000;
    if (ms)
        std::snprintf(buf, sizeof(buf), "%04lld-%02u-%02uT%02lld:%02lld:%02lld.%03lldZ", y, m, d,
                      h, mi, s, ms);
    else
        std::snprintf(buf, sizeof(buf), "%04lld-%02u-%02uT%02lld:%02lld:%02lldZ", y, m, d, h, mi,
                      s);
    return buf;
}

namespace {

bool looks_numeric(const std::string& s, double& out) {
    if (s.empty()) return false;
    char* end = nullptr;
    out = std::strtod(s.c_str(), &end);
    return end && *end == '\0';
}

DataTable finalize_records(
    const std::vector<std::vector<std::pair<std::string, Value>>>& records) {
    // column order = first appearance across records
    std::vector<std::string> names;
    std::map<std::string, std::size_t> index;
    for (const auto& rec : records)
        for (const auto& [k, v] : rec)
            if (!index.count(k)) {
                index[k] = names.size();
                names.push_back(k);
            }

    std::vector<std::vector<Value>> rows(records.size(),
                                         std::vector<Value>(names.size(), Value{}));
    for (std::size_t r = 0; r < records.size(); ++r)
        for (const auto& [k, v] : records[r]) rows[r][index[k]] = v;

    // type inference per column
    DataTable table;
    std::vector<ColumnType> types(names.size(), ColumnType::Text);
    std::vector<bool> convertDates(names.size(), false);
    for (std::size_t c = 0; c < names.size(); ++c) {
        bool any = false, allNum = true, allBool = true, allDate = true;
        for (const auto& row : rows) {
            const Value& v = row[c];
            if (is_null(v)) continue;
            any = true;
            if (!is_number(v)) allNum = false;
            if (!is_bool(v)) allBool = false;
            if (!is_text(v) || !parse_datetime_ms(std::get<std::string>(v)))
                allDate = false;
        }
        if (!any)
            types[c] = ColumnType::Text;
        else if (allNum)
            types[c] = ColumnType::Number;
        else if (allBool)
            types[c] = ColumnType::Boolean;
        else if (allDate) {
            types[c] = ColumnType::Datetime;
            convertDates[c] = true;
        } else
            types[c] = ColumnType::Text;
    }
    for (std::size_t c = 0; c < names.size(); ++c) table.add_column(names[c], types[c]);
    for (auto& row : rows) {
        for (std::size_t c = 0; c < names.size(); ++c)
            if (convertDates[c] && is_text(row[c]))
                row[c] = *parse_datetime_ms(std::get<std::string>(row[c]));
        table.add_row(std::move(row));
    }
    return table;
}

}  // namespace

DataTable table_from_records(
    const std::vector<std::vector<std::pair<std::string, Value>>>& records) {
    return finalize_records(records);
}

DataTable load_json_table(const std::string& jsonText) {
    nlohmann::ordered_json doc;
    try {
        doc = nlohmann::ordered_json::parse(jsonText);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(Error::Kind::Data, std::string("data JSON parse error: ") + e.what());
    }
    if (!doc.is_array())
        throw Error(Error::Kind::Data, "data JSON must be an array of flat objects");
    std::vector<std::vector<std::pair<std::string, Value>>> records;
    records.reserve(doc.size());
    for (const auto& item : doc) {
        if (!item.is_object())
            throw Error(Error::Kind::Data, "data JSON rows must be objects");
        std::vector<std::pair<std::string, Value>> rec;
        for (auto it = item.begin(); it != item.end(); ++it) {
            const auto& v = it.value();
            if (v.is_null())
                rec.emplace_back(it.key(), Value{});
            else if (v.is_number())
                rec.emplace_back(it.key(), v.get<double>());
            else if (v.is_boolean())
                rec.emplace_back(it.key(), v.get<bool>());
            else if (v.is_string())
                rec.emplace_back(it.key(), v.get<std::string>());
            else
                throw Error(Error::Kind::Data,
                            "nested values are not supported in data rows (key " + it.key() + ")");
        }
        records.push_back(std::move(rec));
    }
    return finalize_records(records);
}

namespace {

// RFC-4180: quoted fields may contain commas, newlines, and doubled quotes.
std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false;
    bool fieldStarted = false;
    std::size_t i = 0;
    auto endField = [&] {
        row.push_back(field);
        field.clear();
        fieldStarted = false;
    };
    auto endRow = [&] {
        endField();
        rows.push_back(row);
        row.clear();
    };
    while (i < text.size()) {
        char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    i += 2;
                    continue;
                }
                quoted = false;
                ++i;
                continue;
            }
            field += c;
            ++i;
            continue;
        }
        if (c == '"' && !fieldStarted && field.empty()) {
            quoted = true;
            fieldStarted = true;
            ++i;
            continue;
        }
        if (c == ',') {
            endField();
            ++i;
            continue;
        }
        if (c == '\r') {
            ++i;
            continue;
        }
        if (c == '\n') {
            endRow();
            ++i;
            continue;
        }
        field += c;
        fieldStarted = true;
        ++i;
    }
    if (fieldStarted || !field.empty() || !row.empty()) endRow();
    return rows;
}

}  // namespace

DataTable load_csv_table(const std::string& csvText) {
    auto rows = parse_csv(csvText);
    if (rows.empty()) throw Error(Error::Kind::Data, "CSV has no header row");
    const auto& header = rows[0];
    std::vector<std::vector<std::pair<std::string, Value>>> records;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        if (rows[r].size() != header.size())
            throw Error(Error::Kind::Data, "ragged CSV row " + std::to_string(r + 1));
        std::vector<std::pair<std::string, Value>> rec;
        for (std::size_t c = 0; c < header.size(); ++c) {
            const std::string& cell = rows[r][c];
            double num;
            if (cell.empty())
                rec.emplace_back(header[c], Value{});
            else if (looks_numeric(cell, num))
                rec.emplace_back(header[c], num);
            else if (cell == "true" || cell == "false")
                rec.emplace_back(header[c], cell == "true");
            else
                rec.emplace_back(header[c], cell);
        }
        records.push_back(std::move(rec));
    }
    return finalize_records(records);
}

DataTable load_table_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Error::Kind::Io, "cannot open data file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    std::string text = buf.str();
    auto dot = path.find_last_of('.');
    std::string ext = dot == std::string::npos ? "" : path.substr(dot + 1);
    if (ext == "csv") return load_csv_table(text);
    return load_json_table(text);
}

}  // namespace erie
