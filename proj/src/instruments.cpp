#include "erie/instruments.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "erie/error.hpp"
#include "json.hpp"

namespace erie {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names = {
        "sine",       "sawtooth",  "triangle",  "square",     "whiteNoise", "pinkNoise",
        "brownNoise", "piano",     "pianoElec", "violin",     "guitar",     "metalGuitar",
        "clap",       "hihat",     "highKick",  "lowKick",    "fm",         "am"};
    return names;
}

double effective_freq(const ToneEvent& ev) {
    return ev.pitch * std::pow(2.0, ev.detune / 1200.0);
}

std::size_t event_samples(const ToneEvent& ev, int sampleRate) {
    return static_cast<std::size_t>(std::llround(ev.duration * sampleRate));
}

// Voss-McCartney pink noise, 16 rows.
struct PinkNoise {
    SeededRng rng;
    double rows[16];
    std::uint32_t counter = 0;
    double runningSum = 0;

    explicit PinkNoise(std::uint64_t seed) : rng(seed) {
        for (double& r : rows) {
            r = rng.uniform();
            runningSum += r;
        }
    }
    double next() {
        ++counter;
        int idx = counter ? __builtin_ctz(counter) : 0;
        if (idx > 15) idx = 15;
        runningSum -= rows[idx];
        rows[idx] = rng.uniform();
        runningSum += rows[idx];
        return (runningSum + rng.uniform()) / 17.0;
    }
};

void synth_noise(const ToneEvent& ev, NoiseColor color, const SynthContext& ctx,
                 std::vector<double>& out) {
    std::size_t n = out.size();
    switch (color) {
        case NoiseColor::White: {
            SeededRng rng(ctx.seed);
            for (std::size_t i = 0; i < n; ++i) out[i] = rng.uniform();
            break;
        }
        case NoiseColor::Pink: {
            PinkNoise pink(ctx.seed);
            for (std::size_t i = 0; i < n; ++i) out[i] = pink.next();
            break;
        }
        case NoiseColor::Brown: {
            SeededRng rng(ctx.seed);
            double b = 0;
            const double leak = 0.02;
            for (std::size_t i = 0; i < n; ++i) {
                b = (1.0 - leak) * b + rng.uniform() * 0.1;
                out[i] = b;
            }
            double peak = 0;
            for (double v : out) peak = std::max(peak, std::abs(v));
            if (peak > 1e-12)
                for (double& v : out) v /= peak;
            break;
        }
    }
    (void)ev;
}

void synth_wave(const ToneEvent& ev, const WaveDef& wave, const SynthContext& ctx,
                std::vector<double>& out) {
    double f = effective_freq(ev);
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = wave_sample(wave, f * static_cast<double>(i) / ctx.sampleRate);
}

void synth_fm(const ToneEvent& ev, const SynthDef& def, const SynthContext& ctx,
              std::vector<double>& out) {
    if (ev.modulation < 0)
        throw Error(Error::Kind::Render, "negative modulation index");
    double fc = effective_freq(ev);
    double harmonicity = ev.harmonicity * def.harmonicity;
    double index = ev.modulation * def.modulationIndex;
    double fm = harmonicity * fc;
    for (std::size_t i = 0; i < out.size(); ++i) {
        double t = static_cast<double>(i) / ctx.sampleRate;
        double mod = index * std::sin(kTwoPi * fm * t);
        out[i] = std::sin(kTwoPi * fc * t + mod);
    }
}

void synth_am(const ToneEvent& ev, const SynthDef& def, const SynthContext& ctx,
              std::vector<double>& out) {
    if (ev.modulation < 0)
        throw Error(Error::Kind::Render, "negative modulation index");
    double fc = effective_freq(ev);
    double harmonicity = ev.harmonicity * def.harmonicity;
    double depth = ev.modulation * def.modulationIndex;
    double fm = harmonicity * fc;
    for (std::size_t i = 0; i < out.size(); ++i) {
        double t = static_cast<double>(i) / ctx.sampleRate;
        double m = (1.0 + depth * std::sin(kTwoPi * fm * t)) / (1.0 + depth);
        out[i] = std::sin(kTwoPi * fc * t) * m;
    }
}

void synth_sample(const ToneEvent& ev, const InstrumentProgram& program,
                  const SynthContext& ctx, std::vector<double>& out) {
    const PcmBuffer& src = *program.sample;
    if (src.frames() == 0) return;
    double ratio = 1.0;
    if (!program.pitchless && program.basePitch > 0)
        ratio = effective_freq(ev) / program.basePitch;
    double srcStep = ratio * static_cast<double>(src.sampleRate) / ctx.sampleRate;
    double pos = 0;
    for (std::size_t i = 0; i < out.size(); ++i) {
        std::size_t i0 = static_cast<std::size_t>(pos);
        if (i0 + 1 >= src.frames()) break;
        double frac = pos - static_cast<double>(i0);
        double mono0 = 0.5 * (src.left[i0] + src.right[i0]);
        double mono1 = 0.5 * (src.left[i0 + 1] + src.right[i0 + 1]);
        out[i] = mono0 * (1 - frac) + mono1 * frac;
        pos += srcStep;
    }
}

// --- synthetic percussion / instrument fallbacks -------------------------
// Used when no sample pack supplies the real recordings.

void add_decaying_partials(std::vector<double>& out, int sampleRate, double f0,
                           const std::vector<std::pair<double, double>>& partials,
                           double decaySeconds, double attackSeconds) {
    for (std::size_t i = 0; i < out.size(); ++i) {
        double t = static_cast<double>(i) / sampleRate;
        double env = std::exp(-t / decaySeconds);
        if (t < attackSeconds && attackSeconds > 0) env *= t / attackSeconds;
        double acc = 0;
        for (const auto& [ratio, amp] : partials) acc += amp * std::sin(kTwoPi * f0 * ratio * t);
        out[i] += env * acc;
    }
}

void synth_piano(const ToneEvent& ev, const SynthContext& ctx, std::vector<double>& out,
                 bool electric) {
    double f = effective_freq(ev);
    std::vector<std::pair<double, double>> partials;
    if (electric) {
        partials = {{1.0, 1.0}, {2.0, 0.25}, {3.0, 0.08}};
    } else {
        for (int k = 1; k <= 6; ++k) {
            double inharmonicity = 1.0 + 0.0004 * k * k;
            partials.push_back({k * inharmonicity, std::pow(1.0 / k, 1.7)});
        }
    }
    double decay = std::clamp(ev.duration, 0.4, 2.5);
    add_decaying_partials(out, ctx.sampleRate, f, partials, decay * 0.5, 0.003);
    double norm = 0;
    for (const auto& [r, a] : partials) norm += a;
    if (norm > 0)
        for (double& v : out) v /= norm;
}

void synth_violin(const ToneEvent& ev, const SynthContext& ctx, std::vector<double>& out) {
    double f = effective_freq(ev);
    double norm = 0;
    for (int k = 1; k <= 8; ++k) norm += 1.0 / k;
    for (std::size_t i = 0; i < out.size(); ++i) {
        double t = static_cast<double>(i) / ctx.sampleRate;
        double vibrato = 1.0 + 0.006 * std::sin(kTwoPi * 5.5 * t);
        double acc = 0;
        for (int k = 1; k <= 8; ++k) acc += std::sin(kTwoPi * f * vibrato * k * t) / k;
        double attack = std::min(1.0, t / 0.06);
        out[i] = attack * acc / norm;
    }
}

void synth_plucked(const ToneEvent& ev, const SynthContext& ctx, std::vector<double>& out,
                   bool metal) {
    // Karplus-Strong plucked string
    double f = std::max(20.0, effective_freq(ev));
    std::size_t period = std::max<std::size_t>(2, static_cast<std::size_t>(ctx.sampleRate / f));
    std::vector<double> line(period);
    SeededRng rng(ctx.seed);
    for (double& v : line) v = rng.uniform();
    std::size_t idx = 0;
    for (std::size_t i = 0; i < out.size(); ++i) {
        double cur = line[idx];
        std::size_t nxt = (idx + 1) % period;
        line[idx] = 0.996 * 0.5 * (cur + line[nxt]);
        idx = nxt;
        out[i] = metal ? std::tanh(4.0 * cur) : cur;
    }
}

void synth_clap(const SynthContext& ctx, std::vector<double>& out) {
    SeededRng rng(ctx.seed);
    // three noise bursts 8 ms apart with a fast decay, band-shaped by a
    // simple two-pole resonator near 1.8 kHz
    double b1 = 0, b2 = 0;
    double w = kTwoPi * 1800.0 / ctx.sampleRate;
    double r = 0.97;
    double a1 = -2 * r * std::cos(w);
    double a2 = r * r;
    for (std::size_t i = 0; i < out.size(); ++i) {
        double t = static_cast<double>(i) / ctx.sampleRate;
        double env = 0;
        for (int burst = 0; burst < 3; ++burst) {
            double dt = t - burst * 0.008;
            if (dt >= 0) env += std::exp(-dt / 0.03);
        }
        double x = rng.uniform() * env;
        double y = x - a1 * b1 - a2 * b2;
        b2 = b1;
        b1 = y;
        out[i] = 0.25 * y;
    }
    double peak = 0;
    for (double v : out) peak = std::max(peak, std::abs(v));
    if (peak > 1.0)
        for (double& v : out) v /= peak;
}

void synth_hihat(const SynthContext& ctx, std::vector<double>& out) {
    // six inharmonic square partials, highpass-shaped, short decay
    static const double ratios[] = {2.0, 3.0, 4.16, 5.43, 6.79, 8.21};
    double f0 = 400.0;
    double prev = 0, prevOut = 0;
    double hp = std::exp(-kTwoPi * 7000.0 / ctx.sampleRate);
    for (std::size_t i = 0; i < out.size(); ++i) {
        double t = static_cast<double>(i) / ctx.sampleRate;
        double acc = 0;
        for (double r : ratios)
            acc += osc_sample(OscShape::Square, f0 * r * t);
        acc /= 6.0;
        double y = hp * (prevOut + acc - prev);  // one-pole highpass
        prev = acc;
        prevOut = y;
        out[i] = y * std::exp(-t / 0.05);
    }
}

void synth_kick(const SynthContext& ctx, std::vector<double>& out, bool high) {
    double fStart = high ? 150.0 : 80.0;
    double fEnd = high ? 50.0 : 35.0;
    double sweep = high ? 0.05 : 0.08;
    double decay = high ? 0.12 : 0.25;
    double phase = 0;
    for (std::size_t i = 0; i < out.size(); ++i) {
        double t = static_cast<double>(i) / ctx.sampleRate;
        double f = t < sweep ? fStart + (fEnd - fStart) * (t / sweep) : fEnd;
        phase += f / ctx.sampleRate;
        out[i] = std::sin(kTwoPi * phase) * std::exp(-t / decay);
    }
}

}  // namespace

double osc_sample(OscShape shape, double phase) {
    double p = phase - std::floor(phase);
    switch (shape) {
        case OscShape::Sine: return std::sin(kTwoPi * p);
        case OscShape::Sawtooth: return 2.0 * p - 1.0;
        case OscShape::Square: return p < 0.5 ? 1.0 : -1.0;
        case OscShape::Triangle: return p < 0.5 ? 4.0 * p - 1.0 : 3.0 - 4.0 * p;
    }
    return 0;
}

double wave_sample(const WaveDef& wave, double phase) {
    double norm = 0;
    for (std::size_t k = 0; k < wave.sine.size(); ++k)
        norm += std::abs(wave.sine[k]) +
                (k < wave.cosine.size() ? std::abs(wave.cosine[k]) : 0.0);
    if (norm < 1e-12) norm = 1;
    double acc = 0;
    for (std::size_t k = 0; k < wave.sine.size(); ++k) {
        double w = kTwoPi * phase * static_cast<double>(k + 1);
        acc += wave.sine[k] * std::sin(w);
        if (k < wave.cosine.size()) acc += wave.cosine[k] * std::cos(w);
    }
    return acc / norm;
}

std::uint64_t SeededRng::next() {
    // splitmix64
    state_ += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

double SeededRng::uniform() {
    return static_cast<double>(next() >> 11) / 4503599627370496.0 * 2.0 - 1.0;
}

std::uint64_t mix_seed(std::uint64_t global, std::uint64_t subQueue, std::uint64_t event) {
    SeededRng rng(global ^ (subQueue * 0x9e3779b97f4a7c15ull) ^
                  (event * 0xc2b2ae3d27d4eb4full));
    return rng.next();
}

bool is_preset_instrument(const std::string& name) {
    const auto& names = preset_names();
    return std::find(names.begin(), names.end(), name) != names.end();
}

std::vector<std::string> preset_instrument_names() { return preset_names(); }

InstrumentRegistry::InstrumentRegistry() {
    auto osc = [&](const char* name, OscShape shape) {
        InstrumentProgram p;
        p.family = InstrumentProgram::Family::Oscillator;
        p.shape = shape;
        register_program(name, p);
    };
    osc("sine", OscShape::Sine);
    osc("sawtooth", OscShape::Sawtooth);
    osc("triangle", OscShape::Triangle);
    osc("square", OscShape::Square);

    auto noise = [&](const char* name, NoiseColor color) {
        InstrumentProgram p;
        p.family = InstrumentProgram::Family::Noise;
        p.color = color;
        register_program(name, p);
    };
    noise("whiteNoise", NoiseColor::White);
    noise("pinkNoise", NoiseColor::Pink);
    noise("brownNoise", NoiseColor::Brown);

    {
        InstrumentProgram p;
        p.family = InstrumentProgram::Family::Fm;
        register_program("fm", p);
        p.family = InstrumentProgram::Family::Am;
        register_program("am", p);
    }

    for (const char* name :
         {"piano", "pianoElec", "violin", "guitar", "metalGuitar", "clap", "hihat",
          "highKick", "lowKick"}) {
        InstrumentProgram p;
        p.family = InstrumentProgram::Family::Percussive;
        p.preset = name;
        p.pitchless = std::string(name) == "clap" || std::string(name) == "hihat" ||
                      std::string(name) == "highKick" || std::string(name) == "lowKick";
        register_program(name, p);
    }
}

void InstrumentRegistry::register_program(const std::string& name, InstrumentProgram program) {
    if (has(name))
        throw Error(Error::Kind::Render, "instrument \"" + name + "\" is already registered");
    programs_.emplace(name, std::move(program));
}

void InstrumentRegistry::register_custom(const std::string& name, SynthFn fn) {
    if (has(name))
        throw Error(Error::Kind::Render, "instrument \"" + name + "\" is already registered");
    custom_.emplace(name, std::move(fn));
}

bool InstrumentRegistry::has(const std::string& name) const {
    return programs_.count(name) || custom_.count(name);
}

const InstrumentProgram* InstrumentRegistry::find(const std::string& name) const {
    auto it = programs_.find(name);
    return it == programs_.end() ? nullptr : &it->second;
}

const SynthFn* InstrumentRegistry::find_custom(const std::string& name) const {
    auto it = custom_.find(name);
    return it == custom_.end() ? nullptr : &it->second;
}

void InstrumentRegistry::add_spec_definitions(const SonificationSpec& spec,
                                              const std::string& baseDir) {
    for (const auto& def : spec.synths) {
        InstrumentProgram p;
        p.family = def.kind == "AM" ? InstrumentProgram::Family::Am
                                    : InstrumentProgram::Family::Fm;
        p.synth = def;
        register_program(def.name, p);
    }
    for (const auto& def : spec.waves) {
        InstrumentProgram p;
        p.family = InstrumentProgram::Family::Wave;
        p.wave = def;
        register_program(def.name, p);
    }
    for (const auto& def : spec.samplings) {
        std::filesystem::path path(def.url);
        if (path.is_relative() && !baseDir.empty())
            path = std::filesystem::path(baseDir) / path;
        InstrumentProgram p;
        p.family = InstrumentProgram::Family::Sample;
        p.sample = std::make_shared<PcmBuffer>(read_wav(path.string()));
        p.basePitch = def.basePitch;
        register_program(def.name, p);
    }
}

void InstrumentRegistry::load_sample_pack(const std::string& dir) {
    std::filesystem::path root(dir);
    std::ifstream manifest(root / "manifest.json");
    if (!manifest)
        throw Error(Error::Kind::Io, "sample pack manifest not found in " + dir);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(manifest);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(Error::Kind::Io, std::string("bad sample pack manifest: ") + e.what());
    }
    const nlohmann::json& instruments = doc.contains("instruments") ? doc.at("instruments") : doc;
    for (auto it = instruments.begin(); it != instruments.end(); ++it) {
        std::string file = it.value().value("file", it.key() + ".wav");
        InstrumentProgram p;
        p.family = InstrumentProgram::Family::Sample;
        p.sample = std::make_shared<PcmBuffer>(read_wav((root / file).string()));
        p.basePitch = it.value().value("basePitch", 523.25);
        p.pitchless = it.value().value("pitchless", false);
        programs_.erase(it.key());  // pack overrides the synthetic fallback
        programs_.emplace(it.key(), std::move(p));
    }
}

void synth_program(const ToneEvent& event, const InstrumentProgram& program,
                   const SynthContext& ctx, std::vector<double>& out) {
    out.assign(event_samples(event, ctx.sampleRate), 0.0);
    if (out.empty()) return;
    switch (program.family) {
        case InstrumentProgram::Family::Oscillator: {
            double f = effective_freq(event);
            for (std::size_t i = 0; i < out.size(); ++i)
                out[i] = osc_sample(program.shape, f * static_cast<double>(i) / ctx.sampleRate);
            break;
        }
        case InstrumentProgram::Family::Wave:
            synth_wave(event, program.wave, ctx, out);
            break;
        case InstrumentProgram::Family::Fm:
            synth_fm(event, program.synth, ctx, out);
            break;
        case InstrumentProgram::Family::Am:
            synth_am(event, program.synth, ctx, out);
            break;
        case InstrumentProgram::Family::Noise:
            synth_noise(event, program.color, ctx, out);
            break;
        case InstrumentProgram::Family::Sample:
            synth_sample(event, program, ctx, out);
            break;
        case InstrumentProgram::Family::Percussive:
            if (program.preset == "piano")
                synth_piano(event, ctx, out, false);
            else if (program.preset == "pianoElec")
                synth_piano(event, ctx, out, true);
            else if (program.preset == "violin")
                synth_violin(event, ctx, out);
            else if (program.preset == "guitar")
                synth_plucked(event, ctx, out, false);
            else if (program.preset == "metalGuitar")
                synth_plucked(event, ctx, out, true);
            else if (program.preset == "clap")
                synth_clap(ctx, out);
            else if (program.preset == "hihat")
                synth_hihat(ctx, out);
            else if (program.preset == "highKick")
                synth_kick(ctx, out, true);
            else if (program.preset == "lowKick")
                synth_kick(ctx, out, false);
            break;
        case InstrumentProgram::Family::Custom:
            break;
    }
}

}  // namespace erie
