#include "erie/scale.hpp"

#include <algorithm>
#include <cmath>

#include "erie/channels.hpp"
#include "erie/error.hpp"

namespace erie {

namespace {

void emit(std::vector<std::string>* warnings, const std::string& msg) {
    if (warnings) warnings->push_back(msg);
}

double curve_transform(const ResolvedScale& s, double x) {
    switch (s.curve) {
        case CurveType::Linear: return x;
        case CurveType::Log:
            if (x <= 0)
                throw Error(Error::Kind::Compile,
                            "log scale is undefined at " + number_to_text(x));
            return std::log(x);
        case CurveType::Sqrt:
            if (x < 0)
                throw Error(Error::Kind::Compile,
                            "sqrt scale is undefined at " + number_to_text(x));
            return std::sqrt(x);
        case CurveType::Pow: return std::pow(x, s.exponent);
        case CurveType::Symlog: {
            double c = s.symlogC > 0 ? s.symlogC : 1.0;
            return x >= 0 ? std::log1p(x / c) : -std::log1p(-x / c);
        }
    }
    return x;
}

}  // namespace

std::vector<Value> infer_domain(const ChannelSpec& channel, const DataTable& table) {
    if (channel.scale.domain) return *channel.scale.domain;
    if (channel.field.empty())
        throw Error(Error::Kind::Compile,
                    "cannot infer a domain for channel " + channel.channel + " without a field");
    auto values = table.column_values(channel.field);
    if (values.empty())
        throw Error(Error::Kind::Compile,
                    "cannot infer a domain from empty column " + channel.field);

    bool quantitative = channel.encType == EncodingType::Quantitative ||
                        channel.encType == EncodingType::Temporal;
    if (!channel.encTypeExplicit)
        quantitative = table.column_type(channel.field) == ColumnType::Number ||
                       table.column_type(channel.field) == ColumnType::Datetime;

    if (quantitative) {
        double lo = as_number(values[0]), hi = as_number(values[0]);
        for (const auto& v : values) {
            double d = as_number(v);
            if (std::isnan(d))
                throw Error(Error::Kind::Compile,
                            "non-numeric value in quantitative column " + channel.field);
            lo = std::min(lo, d);
            hi = std::max(hi, d);
        }
        if (channel.scale.zero.value_or(false)) {
            lo = std::min(lo, 0.0);
            hi = std::max(hi, 0.0);
        }
        return {Value{lo}, Value{hi}};
    }

    // nominal/ordinal: distinct values, first-appearance order
    std::vector<Value> levels;
    for (const auto& v : values) {
        bool seen = false;
        for (const auto& l : levels)
            if (value_equal(l, v)) {
                seen = true;
                break;
            }
        if (!seen) levels.push_back(v);
    }
    return levels;
}

ResolvedScale resolve_scale(const ChannelSpec& channel, const std::vector<Value>& domain,
                            std::vector<std::string>* warnings) {
    const ChannelInfo* info = channel_info(channel.channel);
    if (!info)
        throw Error(Error::Kind::Compile, "cannot resolve scale for channel " + channel.channel);
    const ScaleSpec& sc = channel.scale;

    ResolvedScale out;
    out.channel = channel.channel;
    out.capMin = info->capMin;
    out.capMax = info->capMax;
    out.format = channel.format;
    out.field = channel.field;
    out.title = sc.title.value_or(channel.field);
    out.description = sc.description;
    out.polarity = sc.polarity.value_or(Polarity::Positive);
    out.curve = sc.scaleType.value_or(CurveType::Linear);
    out.exponent = sc.exponent.value_or(2.0);
    out.symlogC = sc.constant.value_or(1.0);
    if (out.title == channel.field) {
        // bin-derived fields read by their source name in descriptions
        for (const char* suffix : {"__bin", "-bin"}) {
            std::string s(suffix);
            if (out.title.size() > s.size() &&
                out.title.compare(out.title.size() - s.size(), s.size(), s) == 0) {
                out.title = out.title.substr(0, out.title.size() - s.size());
                break;
            }
        }
    }
    out.roundToNote = sc.roundToNote.value_or(false);
    out.timing = sc.timing.value_or(Timing::Absolute);
    out.length = sc.length;
    out.band = sc.band;
    out.tapDuration = sc.tapDuration;
    out.singleTapPosition = sc.singleTappingPosition.value_or("start");
    out.domainValues = domain;

    bool categorical = false;
    for (const auto& v : domain)
        if (!is_number(v)) categorical = true;
    if (channel.encTypeExplicit &&
        (channel.encType == EncodingType::Nominal || channel.encType == EncodingType::Ordinal))
        categorical = true;
    out.categorical = categorical;

    if (categorical) {
        for (const auto& v : domain) out.levels.push_back(value_to_text(v));
        for (std::size_t i = 0; i < domain.size(); ++i)
            out.domain.push_back(static_cast<double>(i));
    } else {
        for (const auto& v : domain) out.domain.push_back(as_number(v));
        if (!std::is_sorted(out.domain.begin(), out.domain.end()))
            throw Error(Error::Kind::Compile,
                        "scale domain for " + channel.channel + " must be ascending");
    }

    const std::size_t points = categorical ? std::max<std::size_t>(out.levels.size(), 1) : out.domain.size();

    if (sc.range) {
        bool names = false;
        for (const auto& v : *sc.range)
            if (is_text(v)) names = true;
        if (names) {
            for (const auto& v : *sc.range) out.rangeNames.push_back(value_to_text(v));
        } else {
            for (const auto& v : *sc.range) out.range.push_back(as_number(v));
        }
    } else if (sc.maxDistinct.value_or(false)) {
        out.range = {info->maxDistinctMin, info->maxDistinctMax};
    } else if (sc.times) {
        if (categorical)
            throw Error(Error::Kind::Compile, "times shortcut needs a numeric domain");
        for (double d : out.domain) out.range.push_back(d * *sc.times);
        // the identity-times mapping has no direction to flip
        out.polarity = Polarity::Positive;
    } else if (channel.channel == "time") {
        double len = sc.length.value_or(5.0);
        double pad = sc.band.value_or(0.0);
        out.range = {0.0, std::max(0.0, len - pad)};
    } else if (channel.channel == "duration") {
        out.range = {0.0, sc.band.value_or(2.0)};
    } else {
        out.range = {info->defaultRangeMin, info->defaultRangeMax};
    }

    // stretch a 2-point range across piecewise domains if needed
    if (!out.range.empty() && out.range.size() != points && !categorical) {
        if (out.range.size() == 2 && points > 2) {
            std::vector<double> expanded;
            double lo = out.range.front(), hi = out.range.back();
            double dlo = out.domain.front(), dhi = out.domain.back();
            for (double d : out.domain)
                expanded.push_back(dhi == dlo ? lo : lo + (hi - lo) * (d - dlo) / (dhi - dlo));
            out.range = expanded;
        } else {
            throw Error(Error::Kind::Compile,
                        "domain and range sizes differ for channel " + channel.channel);
        }
    }

    if (out.polarity == Polarity::Negative) {
        std::reverse(out.range.begin(), out.range.end());
        std::reverse(out.rangeNames.begin(), out.rangeNames.end());
    }

    if (!out.range.empty() && info->capMax > info->capMin) {
        for (double& r : out.range) {
            if (r < info->capMin || r > info->capMax) {
                emit(warnings, "range value " + number_to_text(r) + " clamped to " +
                                   channel.channel + " caps");
                r = std::clamp(r, info->capMin, info->capMax);
            }
        }
    }
    return out;
}

double map_value(const ResolvedScale& scale, const Value& v,
                 std::vector<std::string>* warnings) {
    if (scale.categorical) {
        std::string key = value_to_text(v);
        std::size_t idx = scale.levels.size();
        for (std::size_t i = 0; i < scale.levels.size(); ++i)
            if (scale.levels[i] == key) {
                idx = i;
                break;
            }
        if (idx == scale.levels.size()) {
            emit(warnings, "value \"" + key + "\" missing from " + scale.channel +
                               " domain; clamped to last level");
            idx = scale.levels.empty() ? 0 : scale.levels.size() - 1;
        }
        if (scale.range.size() == scale.levels.size() && !scale.range.empty())
            return scale.range[idx];
        if (scale.range.size() >= 2) {
            std::size_t n = scale.levels.size();
            if (n <= 1) return 0.5 * (scale.range.front() + scale.range.back());
            double t = static_cast<double>(idx) / static_cast<double>(n - 1);
            return scale.range.front() + (scale.range.back() - scale.range.front()) * t;
        }
        return 0;
    }

    double x = as_number(v);
    if (std::isnan(x))
        throw Error(Error::Kind::Compile, "cannot map non-numeric value onto " + scale.channel);
    if (scale.domain.size() < 2 || scale.range.size() != scale.domain.size()) {
        // degenerate scale: single point maps to the first range value
        return scale.range.empty() ? 0 : scale.range.front();
    }

    double lo = scale.domain.front(), hi = scale.domain.back();
    if (x < lo || x > hi) {
        emit(warnings, "value " + number_to_text(x) + " outside " + scale.channel +
                           " domain [" + number_to_text(lo) + ", " + number_to_text(hi) +
                           "]; clamped");
        x = std::clamp(x, lo, hi);
    }

    std::size_t seg = 0;
    while (seg + 2 < scale.domain.size() && x > scale.domain[seg + 1]) ++seg;
    double d0 = scale.domain[seg], d1 = scale.domain[seg + 1];
    double r0 = scale.range[seg], r1 = scale.range[seg + 1];
    double t;
    if (d1 == d0)
        t = 0;
    else {
        double g0 = curve_transform(scale, d0);
        double g1 = curve_transform(scale, d1);
        double gx = curve_transform(scale, x);
        t = g1 == g0 ? 0.0 : (gx - g0) / (g1 - g0);
    }
    double mapped = r0 + (r1 - r0) * t;
    if (scale.capMax > scale.capMin) mapped = std::clamp(mapped, scale.capMin, scale.capMax);
    if (scale.roundToNote && scale.channel == "pitch" && mapped > 0)
        mapped = round_to_note(mapped);
    return mapped;
}

std::string map_level_name(const ResolvedScale& scale, const Value& v) {
    if (scale.rangeNames.empty())
        throw Error(Error::Kind::Compile, "scale has no named range");
    std::string key = value_to_text(v);
    for (std::size_t i = 0; i < scale.levels.size(); ++i)
        if (scale.levels[i] == key)
            return scale.rangeNames[std::min(i, scale.rangeNames.size() - 1)];
    return scale.rangeNames.back();
}

Timeline assign_times(const TimeLayoutInput& in, const DataTable& table,
                      std::vector<std::string>* warnings) {
    Timeline out;
    const std::size_t n = table.row_count();

    Timing timing = Timing::Relative;
    if (in.timeScale) timing = in.timeScale->timing;
    out.timing = timing;

    std::optional<double> band;
    if (in.timeScale && in.timeScale->band) band = in.timeScale->band;

    auto time_value = [&](std::size_t row) -> double {
        const ChannelSpec* ch = in.timeChannel;
        return map_value(*in.timeScale, table.at(row, ch->field), warnings);
    };

    auto extent_of = [&](std::size_t row) -> double {
        if (in.continued) return 0.0;
        if (in.time2Channel) {
            double endV = map_value(*in.timeScale, table.at(row, in.time2Channel->field), warnings);
            return endV;  // caller interprets as an absolute end
        }
        if (in.durationChannel && in.durationScale)
            return map_value(*in.durationScale, table.at(row, in.durationChannel->field), warnings);
        if (band) return *band;
        return in.defaultBand;
    };

    if (in.time2Channel && timing != Timing::Absolute)
        throw Error(Error::Kind::Compile, "time2 requires absolute timing");

    if (!in.timeScale || timing == Timing::Relative) {
        // playback order: domain order for categorical time, ascending encoded
        // value otherwise, row order when no time channel exists
        std::vector<std::size_t> order(n);
        for (std::size_t i = 0; i < n; ++i) order[i] = i;
        if (in.timeScale && in.timeChannel) {
            std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                return time_value(a) < time_value(b);
            });
        }
        double t = 0;
        for (std::size_t i : order) {
            double extent = in.continued ? (band ? *band : in.defaultBand) : extent_of(i);
            out.items.push_back({i, t, t + extent});
            t += extent;
        }
        out.totalLength = t;
        return out;
    }

    if (timing == Timing::Simultaneous) {
        double maxEnd = 0;
        for (std::size_t i = 0; i < n; ++i) {
            double extent = extent_of(i);
            out.items.push_back({i, 0.0, extent});
            maxEnd = std::max(maxEnd, extent);
        }
        out.totalLength = maxEnd;
        return out;
    }

    // absolute timing
    std::vector<TimeAssignment> items;
    double maxEnd = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double start = time_value(i);
        double end;
        if (in.continued)
            end = start;
        else if (in.time2Channel)
            end = extent_of(i);
        else
            end = start + extent_of(i);
        if (end < start) {
            emit(warnings, "sound end precedes start at row " + std::to_string(i) +
                               "; clamped to start");
            end = start;
        }
        items.push_back({i, start, end});
        maxEnd = std::max(maxEnd, end);
    }
    std::stable_sort(items.begin(), items.end(),
                     [](const TimeAssignment& a, const TimeAssignment& b) {
                         return a.start < b.start;
                     });
    if (!in.continued) {
        for (std::size_t k = 1; k < items.size(); ++k)
            if (items[k].start < items[k - 1].end - 1e-9) {
                emit(warnings, "absolute sounds overlap on a discrete tone");
                break;
            }
    }
    out.items = std::move(items);
    out.totalLength = in.timeScale->length.value_or(maxEnd);
    if (in.continued && !in.timeScale->length) out.totalLength = maxEnd;
    out.totalLength = std::max(out.totalLength, maxEnd);
    return out;
}

double TapPattern::total_duration() const {
    double t = 0;
    for (const auto& s : segments) t += s.duration;
    return t;
}

int taps_from_speed(double speed, double band) {
    return static_cast<int>(std::floor(speed * band + 0.5));
}

TapPattern tap_pattern(int taps, double band, double tapDuration,
                       const std::string& singleTapPosition,
                       std::vector<std::string>* warnings) {
    if (band <= 0) throw Error(Error::Kind::Compile, "tap pattern requires a positive band");
    TapPattern out;
    out.taps = std::max(0, taps);
    const double d = tapDuration;

    if (out.taps == 0) {
        out.segments.push_back({false, band});
        return out;
    }
    if (out.taps == 1) {
        double rest = band - d;
        if (rest < 0) {
            emit(warnings, "tap sound longer than band");
            rest = 0;
        }
        if (singleTapPosition == "middle") {
            out.segments.push_back({false, rest / 2});
            out.segments.push_back({true, std::min(d, band)});
            out.segments.push_back({false, rest / 2});
        } else if (singleTapPosition == "end") {
            out.segments.push_back({false, rest});
            out.segments.push_back({true, std::min(d, band)});
        } else {
            out.segments.push_back({true, std::min(d, band)});
            out.segments.push_back({false, rest});
        }
        return out;
    }

    double pause = (band - out.taps * d) / static_cast<double>(out.taps - 1);
    if (pause < 0) {
        emit(warnings, "taps exceed band; pauses floored at zero");
        pause = 0;
    }
    for (int i = 0; i < out.taps; ++i) {
        out.segments.push_back({true, d});
        if (i + 1 < out.taps) out.segments.push_back({false, pause});
    }
    return out;
}

double round_to_note(double freqHz) {
    if (freqHz <= 0)
        throw Error(Error::Kind::Compile, "cannot round a non-positive frequency to a note");
    double steps = std::round(12.0 * std::log2(freqHz / 440.0));
    return 440.0 * std::pow(2.0, steps / 12.0);
}

double beats_to_seconds(double quantity, const ConfigSpec& config) {
    if (!config.beats()) return quantity;
    double beats = quantity;
    if (config.roundBeats.value_or(false)) beats = std::round(beats);
    return beats * 60.0 / config.bpm_or_default();
}

}  // namespace erie
