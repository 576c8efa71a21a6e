#include "erie/channels.hpp"

#include <algorithm>
#include <cctype>

namespace erie {

const std::vector<ChannelInfo>& core_channels() {
    // caps are physical clamp bounds; default ranges are applied when a
    // dynamic channel omits range/maxDistinct/times.
    static const std::vector<ChannelInfo> table = {
        //  name          spoken           capMin  capMax  defLo    defHi   mdLo  mdHi    default timeLike
        {"time", "time", 0, 86400, 0, 5, 0, 86400, 0, true},
        {"time2", "time2", 0, 86400, 0, 5, 0, 86400, 0, true},
        {"duration", "duration", 0, 600, 0, 2, 0, 600, 0, true},
        {"tapSpeed", "tap speed", 0, 40, 0, 5, 0, 40, 0, false},
        {"tapCount", "tap count", 0, 100, 0, 10, 0, 100, 0, false},
        {"pitch", "pitch", 0, 20000, 207.65, 1600, 20, 20000, 523.25, false},
        {"detune", "detune", -2400, 2400, -100, 100, -2400, 2400, 0, false},
        {"pan", "pan", -1, 1, -1, 1, -1, 1, 0, false},
        {"loudness", "loudness", 0, 2, 0, 1, 0, 2, 1, false},
        {"timbre", "timbre", 0, 0, 0, 0, 0, 0, 0, false},
        {"postReverb", "reverb", 0, 10, 0, 2, 0, 10, 0, true},
        {"modulation", "modulation", 0, 50, 0, 4, 0, 50, 1, false},
        {"harmonicity", "harmonicity", 0, 50, 0, 4, 0, 50, 1, false},
        {"speechBefore", "speech before", 0, 0, 0, 0, 0, 0, 0, false},
        {"speechAfter", "speech after", 0, 0, 0, 0, 0, 0, 0, false},
        {"repeat", "repeat", 0, 0, 0, 0, 0, 0, 0, false},
    };
    return table;
}

const std::vector<FilterChannelInfo>& filter_channels() {
    static const std::vector<FilterChannelInfo> table = {
        {"biquadFrequency", "biquad", 1000, 1, 20000},
        {"biquadQ", "biquad", 1, 0.01, 100},
        {"biquadGain", "biquad", 0, -40, 40},
        {"envelopeAttack", "envelope", 0.01, 0, 10},
        {"envelopeDecay", "envelope", 0.05, 0, 10},
        {"envelopeSustain", "envelope", 1, 0, 1},
        {"envelopeRelease", "envelope", 0.05, 0, 10},
        {"distortionDrive", "distortion", 1, 0, 100},
        {"compressorThreshold", "compressor", -24, -100, 0},
        {"compressorRatio", "compressor", 4, 1, 20},
    };
    return table;
}

const FilterChannelInfo* filter_channel_info(const std::string& name) {
    for (const auto& fc : filter_channels())
        if (fc.name == name) return &fc;
    return nullptr;
}

std::vector<std::string> preset_filter_names() {
    return {"lowpass", "highpass", "bandpass", "notch", "peaking",
            "envelope", "distortion", "compressor"};
}

bool is_preset_filter(const std::string& name) {
    auto names = preset_filter_names();
    return std::find(names.begin(), names.end(), name) != names.end();
}

std::vector<std::string> known_channel_names() {
    std::vector<std::string> out;
    for (const auto& c : core_channels()) out.push_back(c.name);
    for (const auto& fc : filter_channels()) out.push_back(fc.name);
    return out;
}

namespace {

std::string hyphen_to_camel(const std::string& name) {
    std::string out;
    bool up = false;
    for (char c : name) {
        if (c == '-' || c == '_') {
            up = true;
            continue;
        }
        out += up ? static_cast<char>(std::toupper(static_cast<unsigned char>(c))) : c;
        up = false;
    }
    return out;
}

}  // namespace

std::optional<std::string> canonical_channel_name(const std::string& name) {
    std::string camel = hyphen_to_camel(name);
    for (const auto& c : core_channels())
        if (c.name == camel) return c.name;
    for (const auto& fc : filter_channels())
        if (fc.name == camel) return fc.name;
    return std::nullopt;
}

const ChannelInfo* channel_info(const std::string& canonicalName) {
    for (const auto& c : core_channels())
        if (c.name == canonicalName) return &c;
    return nullptr;
}

}  // namespace erie
