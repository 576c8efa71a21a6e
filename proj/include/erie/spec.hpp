#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "erie/data_table.hpp"
#include "erie/error.hpp"
#include "erie/transform.hpp"
#include "erie/value.hpp"

namespace erie {

enum class EncodingType { Quantitative, Ordinal, Nominal, Temporal };
enum class Polarity { Positive, Negative };
enum class CurveType { Linear, Log, Pow, Sqrt, Symlog };
enum class Timing { Absolute, Relative, Simultaneous };
enum class RampMode { Default, None, Linear, Exponential };

std::string encoding_type_name(EncodingType t);

struct DataSource {
    enum class Kind { None, Url, Inline, Named };
    Kind kind = Kind::None;
    std::string url;   // resolved relative to the spec file
    std::string name;  // named dataset reference
    DataTable inlineValues;
};

struct TickDef {
    std::string name;
    double interval = 1.0;            // seconds (or beats under beats config)
    std::optional<double> pitch;      // default 1000 Hz
    std::optional<double> duration;   // default 0.05 s
    std::optional<double> loudness;   // default 0.4
    std::optional<std::string> instrument;
};

struct SynthDef {
    std::string name;
    std::string kind = "FM";          // FM | AM
    std::string carrierWave = "sine";
    std::string modulatorWave = "sine";
    double modulationIndex = 1.0;     // defaults, overridable per event
    double harmonicity = 1.0;
};

struct WaveDef {
    std::string name;
    std::vector<double> sine;    // per-harmonic sine coefficients, k = 1..n
    std::vector<double> cosine;  // matching cosine coefficients
};

struct SamplingDef {
    std::string name;
    std::string url;
    double basePitch = 261.63;  // middle C unless stated
};

struct DatasetDef {
    std::string name;
    DataSource source;  // Url or Inline
};

struct ScaleSpec {
    std::optional<std::vector<Value>> domain;
    std::optional<std::vector<Value>> range;  // numbers, or names for timbre
    std::optional<bool> maxDistinct;
    std::optional<double> times;
    std::optional<std::string> description;  // markup text or "skip"
    std::optional<Polarity> polarity;
    std::optional<CurveType> scaleType;
    std::optional<double> exponent;   // pow curve, default 2
    std::optional<double> constant;   // symlog curve, default 1
    std::optional<bool> zero;
    std::optional<Timing> timing;
    std::optional<double> length;
    std::optional<double> band;
    std::optional<std::string> title;
    std::optional<bool> roundToNote;
    std::optional<std::string> singleTappingPosition;  // start | middle | end
    std::optional<double> tapDuration;                 // tap sound length, default 0.19
    std::optional<std::string> tickName;
    std::optional<TickDef> tickInline;
};

struct ConditionCase {
    std::string test;  // expression source
    Value value;
};

struct ChannelSpec {
    enum class Kind { Dynamic, Conditioned, Static };
    Kind kind = Kind::Dynamic;
    std::string channel;  // canonical name

    // dynamic
    std::string field;
    EncodingType encType = EncodingType::Quantitative;
    bool encTypeExplicit = false;
    ScaleSpec scale;
    RampMode ramp = RampMode::Default;
    // inline transform shortcuts (desugared by normalize)
    bool binInline = false;
    std::optional<double> binStep;
    std::optional<std::string> aggregateInline;

    // conditioned
    std::vector<ConditionCase> conditions;
    Value fallback;

    // static
    Value value;

    std::string format;

    // repeat channel only
    std::vector<std::string> repeatFields;
    std::vector<std::string> repeatBy;  // sequence | overlay per field
    bool repeatSpeech = false;
};

struct ToneSpec {
    std::string type = "sine";  // preset or named synth/wave/sampling
    bool continued = false;
    std::vector<std::string> filters;
};

struct ConfigSpec {
    std::optional<std::string> timeUnit;  // seconds | beats
    std::optional<double> bpm;
    std::optional<bool> roundBeats;
    std::optional<double> speechRate;
    std::optional<bool> skipTitle;
    std::optional<bool> skipDescription;
    std::optional<bool> skipScaleSpeech;
    std::optional<bool> skipStartSpeech;
    std::optional<bool> skipFinishSpeech;
    std::map<std::string, bool> forceSequenceScaleConsistency;

    // stream config overrides top-level config key-by-key
    ConfigSpec merged_over(const ConfigSpec& base) const;

    bool beats() const { return timeUnit && *timeUnit == "beats"; }
    double bpm_or_default() const { return bpm ? *bpm : 100.0; }
    double speech_rate() const { return speechRate ? *speechRate : 1.0; }
    bool skip(const std::optional<bool>& flag) const { return flag && *flag; }
};

struct Stream {
    DataSource data;
    std::vector<TransformStep> transforms;
    ToneSpec tone;
    std::vector<ChannelSpec> encoding;  // at most one item per channel
    std::optional<std::string> name;
    std::optional<std::string> title;
    std::optional<std::string> description;
    ConfigSpec config;

    const ChannelSpec* find_channel(const std::string& canonicalName) const;
};

struct Overlay {
    std::vector<Stream> streams;
    std::optional<std::string> name;
};

// Sequence entries may nest (a nested sequence is still a sequence);
// normalize() flattens them into one ordered list.
struct SeqItem {
    enum class Kind { Stream, Overlay, Sequence };
    Kind kind = Kind::Stream;
    Stream stream;
    Overlay overlay;
    std::vector<SeqItem> sequence;
};

struct SonificationSpec {
    enum class RootKind { Stream, Sequence, Overlay };
    RootKind rootKind = RootKind::Stream;
    Stream stream;
    std::vector<SeqItem> sequence;
    Overlay overlay;

    std::vector<DatasetDef> datasets;
    std::vector<SynthDef> synths;
    std::vector<WaveDef> waves;
    std::vector<SamplingDef> samplings;
    std::vector<TickDef> ticks;
    std::vector<TransformStep> globalTransform;
    std::optional<std::string> title;
    std::optional<std::string> description;
    ConfigSpec config;

    const DatasetDef* find_dataset(const std::string& name) const;
    const SynthDef* find_synth(const std::string& name) const;
    const WaveDef* find_wave(const std::string& name) const;
    const SamplingDef* find_sampling(const std::string& name) const;
    const TickDef* find_tick(const std::string& name) const;
};

// --- spec-model operations ---

// Parses a JSON design document. Collects non-fatal notes (unknown config
// keys, ...) into `warnings` when given. Throws Error(Parse) otherwise.
SonificationSpec parse_spec(const std::string& jsonText,
                            ValidationReport* warnings = nullptr);
SonificationSpec parse_spec_file(const std::string& path,
                                 ValidationReport* warnings = nullptr);

ValidationReport validate(const SonificationSpec& spec);

// Desugars inline bin/aggregate, prepends global transforms, merges configs
// into streams, and flattens nested sequences. Idempotent.
SonificationSpec normalize(const SonificationSpec& spec);

// Canonical serialized form; parse(serialize(parse(x))) == parse(x).
std::string serialize(const SonificationSpec& spec);

}  // namespace erie
