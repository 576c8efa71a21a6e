#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "erie/scale.hpp"
#include "erie/spec.hpp"

namespace erie {

// Every ToneEvent property is physical-unit-resolved: seconds, Hz, cents,
// linear gain, pan in [-1, 1]. No data values survive compilation.
struct ToneEvent {
    double start = 0;
    double duration = 0;
    double pitch = 523.25;
    double detune = 0;
    double loudness = 1;
    double pan = 0;
    double modulation = 1;
    double harmonicity = 1;
    double postReverb = 0;
    std::string timbre;  // set only when a timbre channel overrides the series instrument
    std::optional<TapPattern> tap;
    std::map<std::string, double> extra;  // filter-channel values

    double end() const { return start + duration; }
};

struct SpeechItem {
    std::string text;
    double rate = 1.0;
};

struct ToneSeries {
    std::string instrument = "sine";
    bool continued = false;
    std::vector<std::string> filters;
    std::map<std::string, RampMode> ramps;  // per-channel, continued series
    std::vector<ToneEvent> events;          // sorted by start

    double duration() const;
};

struct ToneSpeechItem {
    bool isSpeech = false;
    SpeechItem speech;
    ToneEvent tone;
};

// tone-speech-series: relative-timed; speech items have no fixed duration in
// the IR (the renderer assigns one from its speech policy).
struct ToneSpeechSeries {
    std::string instrument = "sine";
    bool continued = false;
    std::vector<std::string> filters;
    std::vector<ToneSpeechItem> items;
};

struct SubQueue {
    enum class Kind { Speech, ToneSeries, ToneSpeechSeries, ToneOverlay };
    Kind kind = Kind::Speech;
    std::string role;  // frame | title | description | scale | announcement | body

    SpeechItem speech;
    ToneSeries series;
    ToneSpeechSeries speechSeries;
    std::vector<ToneSeries> layers;  // tone-overlay; layers are flat series
};

struct SamplingRef {
    std::string name;
    std::string url;
    double basePitch = 523.25;
};

struct AudioQueue {
    std::vector<SubQueue> subQueues;
    std::string title;
    double estimatedDuration = 0;  // speech durations use the renderer default model

    // named instruments the sub-queues reference, carried so a serialized
    // queue stays renderable on its own
    std::vector<SynthDef> synths;
    std::vector<WaveDef> waves;
    std::vector<SamplingRef> samplings;

    std::size_t size() const { return subQueues.size(); }
};

struct CompileOptions {
    std::string baseDir;            // data url resolution root
    bool interactivePlayer = false; // emit the player intro line
    bool parallel = true;           // OpenMP in data kernels
};

struct CompileResult {
    AudioQueue queue;
    std::vector<std::string> warnings;
};

// --- queue-compiler operations ---

// Full pipeline: validated spec -> audio queue with speech framing, scale
// descriptions, repeat/sequence/overlay structure, and config applied.
CompileResult compile(const SonificationSpec& spec, const CompileOptions& options = {});

// Repeat expansion in isolation: the alternating value-speech / tone
// sub-queues of a repeat channel, without any global framing.
std::vector<SubQueue> expand_repeat(const SonificationSpec& spec, const Stream& stream,
                                    const CompileOptions& options = {});

// Beats-to-seconds conversion over every time quantity in the queue.
void apply_config(AudioQueue& queue, const ConfigSpec& config);

// Tick layer: short events at 0, interval, 2*interval, ... up to length.
ToneSeries emit_ticks(const TickDef& tick, double length);

// --- IR serialization ---

std::string queue_to_json(const AudioQueue& queue, int indent = 2);
AudioQueue queue_from_json(const std::string& jsonText);
bool looks_like_queue_json(const std::string& jsonText);

// Plain-text table mirroring the published queue-table layout.
std::string queue_table(const AudioQueue& queue);

// Speech duration model shared by the compiler's estimate and the renderer's
// silence policy: characterCount / (15 * rate) seconds.
double speech_duration_estimate(const SpeechItem& item);

}  // namespace erie
