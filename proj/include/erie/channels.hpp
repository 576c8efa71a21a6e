#pragma once

#include <optional>
#include <string>
#include <vector>

namespace erie {

// The closed encoding-channel vocabulary, plus channels contributed by
// registered audio filters. Canonical names are camelCase; hyphenated
// spellings ("tap-speed") are accepted and canonicalized at parse time.
struct ChannelInfo {
    std::string name;        // canonical ("tapSpeed")
    std::string spoken;      // speech rendering ("tap speed")
    double capMin = 0;       // physical clamp bounds
    double capMax = 0;
    double defaultRangeMin = 0;  // range applied when the spec gives none
    double defaultRangeMax = 0;
    double maxDistinctMin = 0;   // widest range for maxDistinct=true
    double maxDistinctMax = 0;
    double defaultValue = 0;     // event value when the channel is unencoded
    bool timeLike = false;       // quantities in time units (beat-convertible)
};

const std::vector<ChannelInfo>& core_channels();

// All legal channel names: core set + filter-contributed ones.
std::vector<std::string> known_channel_names();

// Hyphenated or camelCase -> canonical camelCase; nullopt when unknown.
std::optional<std::string> canonical_channel_name(const std::string& name);

const ChannelInfo* channel_info(const std::string& canonicalName);

// Channels owned by preset filters (biquadFrequency, envelopeAttack, ...).
struct FilterChannelInfo {
    std::string name;
    std::string filterName;  // which preset filter consumes it
    double defaultValue;
    double capMin;
    double capMax;
};
const std::vector<FilterChannelInfo>& filter_channels();
const FilterChannelInfo* filter_channel_info(const std::string& name);

std::vector<std::string> preset_filter_names();
bool is_preset_filter(const std::string& name);

}  // namespace erie
