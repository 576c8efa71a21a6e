#pragma once

#include <optional>
#include <string>
#include <vector>

#include "erie/data_table.hpp"
#include "erie/spec.hpp"

namespace erie {

// A compiled mapping from data domain to physical audio range for one
// channel. Negative polarity is baked in as a reversed range list, so
// mapping code never needs to look at polarity again.
struct ResolvedScale {
    std::string channel;
    bool categorical = false;

    std::vector<double> domain;        // numeric breakpoints, ascending
    std::vector<Value> domainValues;   // original values, for descriptions
    std::vector<std::string> levels;   // categorical levels in order
    std::vector<double> range;         // physical values (post polarity)
    std::vector<std::string> rangeNames;  // timbre: instrument names

    Polarity polarity = Polarity::Positive;
    CurveType curve = CurveType::Linear;
    double exponent = 2.0;  // pow curve
    double symlogC = 1.0;   // symlog curve

    double capMin = 0;
    double capMax = 0;

    // time-channel extras
    Timing timing = Timing::Absolute;
    std::optional<double> length;
    std::optional<double> band;

    bool roundToNote = false;
    bool isDatetime = false;
    std::string format;
    std::string title;  // scale title or field name, for descriptions
    std::string field;
    std::optional<std::string> description;  // markup, or "skip"
    std::optional<double> tapDuration;
    std::string singleTapPosition = "start";

    double domain_min() const { return domain.empty() ? 0 : domain.front(); }
    double domain_max() const { return domain.empty() ? 0 : domain.back(); }
};

// Quantitative: [min, max] (zero-extended when zero=true); nominal/ordinal:
// distinct values in first-appearance order, or the explicit domain order.
std::vector<Value> infer_domain(const ChannelSpec& channel, const DataTable& table);

ResolvedScale resolve_scale(const ChannelSpec& channel, const std::vector<Value>& domain,
                            std::vector<std::string>* warnings = nullptr);

// Piecewise interpolation under the scale's curve; values outside the domain
// clamp to the nearest endpoint (with a warning when a sink is given).
double map_value(const ResolvedScale& scale, const Value& v,
                 std::vector<std::string>* warnings = nullptr);
std::string map_level_name(const ResolvedScale& scale, const Value& v);

struct TimeAssignment {
    std::size_t row = 0;
    double start = 0;
    double end = 0;
};

struct Timeline {
    std::vector<TimeAssignment> items;  // in playback order
    double totalLength = 0;
    Timing timing = Timing::Absolute;
};

// Lays rows out on the time axis. Exactly one of {band, duration channel,
// time2 channel} supplies each sound's extent (continued tones treat events
// as breakpoints). defaultBand applies when nothing supplies an extent.
struct TimeLayoutInput {
    const ResolvedScale* timeScale = nullptr;     // null: sequential rows
    const ResolvedScale* durationScale = nullptr;
    const ChannelSpec* timeChannel = nullptr;
    const ChannelSpec* time2Channel = nullptr;
    const ChannelSpec* durationChannel = nullptr;
    bool continued = false;
    double defaultBand = 0.2;
};

Timeline assign_times(const TimeLayoutInput& in, const DataTable& table,
                      std::vector<std::string>* warnings = nullptr);

struct TapSegment {
    bool sound = false;
    double duration = 0;
};

struct TapPattern {
    std::vector<TapSegment> segments;
    int taps = 0;
    double total_duration() const;
};

// n taps of fixed duration separated by equal pauses filling the band; the
// trailing pause is omitted. A single tap honors singleTappingPosition.
TapPattern tap_pattern(int taps, double band, double tapDuration,
                       const std::string& singleTapPosition,
                       std::vector<std::string>* warnings = nullptr);

// Taps-per-second value -> tap count over the band (round half up).
int taps_from_speed(double speed, double band);

// Nearest 12-TET frequency, A4 = 440 Hz.
double round_to_note(double freqHz);

// Every time quantity multiplies by 60/bpm under beats config; roundBeats
// rounds the raw beat value to an integer first.
double beats_to_seconds(double quantity, const ConfigSpec& config);

}  // namespace erie
