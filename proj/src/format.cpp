#include "erie/format.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <ctime>

#include "erie/data_table.hpp"
#include "erie/error.hpp"

namespace erie {

namespace {

// Trims trailing zeros from a fixed/scientific rendering and normalizes the
// exponent to the compact "e-30" style.
std::string tidy(std::string s) {
    auto epos = s.find_first_of("eE");
    std::string mant = epos == std::string::npos ? s : s.substr(0, epos);
    std::string exp = epos == std::string::npos ? "" : s.substr(epos);
    if (mant.find('.') != std::string::npos) {
        while (!mant.empty() && mant.back() == '0') mant.pop_back();
        if (!mant.empty() && mant.back() == '.') mant.pop_back();
    }
    if (!exp.empty()) {
        std::string digits;
        bool neg = false;
        for (char c : exp.substr(1)) {
            if (c == '-') neg = true;
            else if (c != '+') digits += c;
        }
        while (digits.size() > 1 && digits.front() == '0') digits.erase(digits.begin());
        exp = std::string("e") + (neg ? "-" : "") + digits;
    }
    if (mant.empty() || mant == "-") mant += "0";
    return mant + exp;
}

std::string significant(double v, int precision) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
    return tidy(buf);
}

}  // namespace

std::string format_number(double v, const std::string& pattern) {
    if (std::isnan(v)) return "NaN";
    if (pattern.empty()) return number_to_text(v);

    std::string p = pattern;
    char type = 0;
    if (!p.empty() && std::isalpha(static_cast<unsigned char>(p.back()))) {
        type = p.back();
        p.pop_back();
    } else if (!p.empty() && p.back() == '%') {
        type = '%';
        p.pop_back();
    }
    int precision = -1;
    if (!p.empty()) {
        if (p[0] != '.')
            throw Error(Error::Kind::Parse, "unsupported format pattern: " + pattern);
        precision = std::atoi(p.c_str() + 1);
        if (precision <= 0)
            throw Error(Error::Kind::Parse, "bad format precision: " + pattern);
    }

    char buf[64];
    switch (type) {
        case 0:
            return significant(v, precision > 0 ? precision : 6);
        case 'f':
            std::snprintf(buf, sizeof(buf), "%.*f", precision >= 0 ? precision : 6, v);
            return buf;
        case 'd':
            std::snprintf(buf, sizeof(buf), "%.0f", v);
            return buf;
        case 'e':
            std::snprintf(buf, sizeof(buf), "%.*e", precision >= 0 ? precision : 6, v);
            return tidy(buf);
        case 'g':
            return significant(v, precision > 0 ? precision : 6);
        case '%': {
            std::snprintf(buf, sizeof(buf), "%.*f", precision >= 0 ? precision : 0, v * 100.0);
            return std::string(buf) + "%";
        }
        case 's': {
            static const char* prefixes[] = {"y", "z", "a", "f", "p", "n",  "\xc2\xb5", "m",
                                             "",  "k", "M", "G", "T", "P", "E", "Z", "Y"};
            int tier = 8;
            double a = std::abs(v);
            if (a > 0) {
                tier = static_cast<int>(std::floor(std::log10(a) / 3.0)) + 8;
                tier = std::max(0, std::min(16, tier));
            }
            double scaled = v / std::pow(10.0, (tier - 8) * 3);
            std::string s = significant(scaled, precision > 0 ? precision : 3);
            return s + prefixes[tier];
        }
        default:
            throw Error(Error::Kind::Parse, "unsupported format type: " + pattern);
    }
}

std::string format_datetime(double epochMs, const std::string& pattern) {
    std::time_t secs = static_cast<std::time_t>(std::floor(epochMs / 1000.0));
    std::tm tm{};
    gmtime_r(&secs, &tm);
    char buf[128];
    if (std::strftime(buf, sizeof(buf), pattern.c_str(), &tm) == 0) return "";
    return buf;
}

std::string format_value(const Value& v, const std::string& pattern, bool isDatetime) {
    if (is_null(v)) return "null";
    if (is_text(v)) return std::get<std::string>(v);
    if (is_bool(v)) return std::get<bool>(v) ? "true" : "false";
    double d = std::get<double>(v);
    if (isDatetime)
        return format_datetime(d, pattern.find('%') != std::string::npos ? pattern : "%Y-%m-%d");
    return format_number(d, pattern);
}

}  // namespace erie
