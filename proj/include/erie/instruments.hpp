#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "erie/queue.hpp"
#include "erie/spec.hpp"
#include "erie/wav.hpp"

namespace erie {

enum class OscShape { Sine, Sawtooth, Triangle, Square };
enum class NoiseColor { White, Pink, Brown };

// What a resolved instrument name plays as.
struct InstrumentProgram {
    enum class Family { Oscillator, Wave, Fm, Am, Noise, Sample, Percussive, Custom };
    Family family = Family::Oscillator;
    OscShape shape = OscShape::Sine;
    NoiseColor color = NoiseColor::White;
    WaveDef wave;
    SynthDef synth;                      // FM/AM parameters
    std::shared_ptr<PcmBuffer> sample;   // sampling playback source
    double basePitch = 523.25;
    std::string preset;                  // percussive preset name
    bool pitchless = false;              // percussive presets ignore event pitch
};

struct SynthContext {
    int sampleRate = 44100;
    std::uint64_t seed = 0;  // per-event, derived from (global seed, queue idx, event idx)
};

// Event -> mono samples; the micro-envelope and tap gating are applied by the
// renderer around this.
using SynthFn =
    std::function<void(const ToneEvent&, const InstrumentProgram&, const SynthContext&,
                       std::vector<double>&)>;

bool is_preset_instrument(const std::string& name);
std::vector<std::string> preset_instrument_names();

class InstrumentRegistry {
  public:
    InstrumentRegistry();

    // Rejects duplicate names.
    void register_program(const std::string& name, InstrumentProgram program);
    void register_custom(const std::string& name, SynthFn fn);

    bool has(const std::string& name) const;
    const InstrumentProgram* find(const std::string& name) const;
    const SynthFn* find_custom(const std::string& name) const;

    // Registers a spec's named synth/wave/sampling defs (sampling sources are
    // loaded relative to baseDir).
    void add_spec_definitions(const SonificationSpec& spec, const std::string& baseDir);

    // Sample pack: directory with <instrument>.wav files and a manifest.json
    // declaring base pitches; overrides the synthetic percussion fallbacks.
    void load_sample_pack(const std::string& dir);

  private:
    std::map<std::string, InstrumentProgram> programs_;
    std::map<std::string, SynthFn> custom_;
};

// Deterministic per-event sample synthesis (no envelope, no pan).
void synth_program(const ToneEvent& event, const InstrumentProgram& program,
                   const SynthContext& ctx, std::vector<double>& out);

// Phase-domain primitives shared with the continued-tone voice (phase in
// cycles; wraps internally).
double osc_sample(OscShape shape, double phase);
double wave_sample(const WaveDef& wave, double phase);

// Small deterministic generator used for noise instruments.
class SeededRng {
  public:
    explicit SeededRng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ull) {}
    std::uint64_t next();
    double uniform();  // [-1, 1)

  private:
    std::uint64_t state_;
};

std::uint64_t mix_seed(std::uint64_t global, std::uint64_t subQueue, std::uint64_t event);

}  // namespace erie
