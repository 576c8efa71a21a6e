#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <variant>

namespace erie {

// A cell value: null, number, text, or boolean. Datetimes are carried as
// numbers (epoch milliseconds); the column type tags them as datetime.
using Value = std::variant<std::monostate, double, std::string, bool>;

inline bool is_null(const Value& v) { return std::holds_alternative<std::monostate>(v); }
inline bool is_number(const Value& v) { return std::holds_alternative<double>(v); }
inline bool is_text(const Value& v) { return std::holds_alternative<std::string>(v); }
inline bool is_bool(const Value& v) { return std::holds_alternative<bool>(v); }

inline double as_number(const Value& v) {
    if (auto* d = std::get_if<double>(&v)) return *d;
    if (auto* b = std::get_if<bool>(&v)) return *b ? 1.0 : 0.0;
    return std::nan("");
}

inline std::optional<double> try_number(const Value& v) {
    if (auto* d = std::get_if<double>(&v)) return *d;
    return std::nullopt;
}

// Truthiness for filter/condition tests; null is false.
inline bool truthy(const Value& v) {
    if (auto* b = std::get_if<bool>(&v)) return *b;
    if (auto* d = std::get_if<double>(&v)) return *d != 0.0 && !std::isnan(*d);
    if (auto* s = std::get_if<std::string>(&v)) return !s->empty();
    return false;
}

bool value_equal(const Value& a, const Value& b);

// Plain-text rendering used for speech, labels, and the queue table.
// Numbers drop trailing zeros ("4.5", "3", "0.001").
std::string value_to_text(const Value& v);
std::string number_to_text(double d);

}  // namespace erie
