#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "erie/filters.hpp"
#include "erie/instruments.hpp"
#include "erie/queue.hpp"
#include "erie/wav.hpp"

namespace erie {

enum class SpeechPolicy { SilenceEstimate, ExternalCommand, Omit };

struct RenderConfig {
    int sampleRate = 44100;  // 22050 | 44100 | 48000
    WavFormat bitDepth = WavFormat::Pcm16;
    SpeechPolicy speechPolicy = SpeechPolicy::SilenceEstimate;
    std::string speechCommand;  // "{}" expands to the quoted text; else text on stdin
    std::uint64_t noiseSeed = 1;
    std::optional<std::pair<std::size_t, std::size_t>> subQueueRange;  // [i, j)
    bool parallel = true;       // OpenMP across sub-queues and events
    std::string samplePackDir;  // overrides synthetic instrument fallbacks
};

struct TranscriptEntry {
    double start = 0;
    std::string text;
};

struct RenderResult {
    PcmBuffer buffer;
    std::vector<TranscriptEntry> transcript;
    std::vector<std::string> warnings;
};

// Synthesizes the queue into stereo PCM. Sub-queues lay out back to back;
// reverb tails bleed into subsequent audio but never past the final frame.
RenderResult render(const AudioQueue& queue, const RenderConfig& config = {});

// One line per speech item: "<start-seconds>\t<text>".
std::string transcript_text(const std::vector<TranscriptEntry>& transcript);

// Equal-power stereo placement: left = cos((pan+1)*pi/4), right = sin(...).
std::pair<double, double> pan_gains(double pan);

// Mono event synthesis exactly as the renderer performs it (instrument,
// tap gating, micro-envelope, filter chain, reverb tail); exposed for tests.
std::vector<double> synth_event_samples(const ToneEvent& event,
                                        const InstrumentProgram& program,
                                        const FilterRegistry& filters,
                                        const std::vector<std::string>& chain,
                                        const SynthContext& ctx);

}  // namespace erie
