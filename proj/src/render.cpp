#include "erie/render.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <mutex>
#include <sstream>

#include "erie/error.hpp"

namespace erie {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kMicroEnvSeconds = 0.005;  // 5 ms attack/release declick
constexpr double kReverbWet = 0.35;

std::size_t to_frames(double seconds, int sampleRate) {
    return static_cast<std::size_t>(std::llround(std::max(0.0, seconds) * sampleRate));
}

void micro_envelope(std::vector<double>& samples, int sampleRate, std::size_t from,
                    std::size_t to) {
    if (to <= from) return;
    std::size_t n = to - from;
    std::size_t ramp = std::min<std::size_t>(to_frames(kMicroEnvSeconds, sampleRate), n / 2);
    if (ramp == 0) return;
    for (std::size_t i = 0; i < ramp; ++i) {
        double g = static_cast<double>(i + 1) / static_cast<double>(ramp);
        samples[from + i] *= g;
        samples[to - 1 - i] *= g;
    }
}

void apply_tap_gate(std::vector<double>& samples, const TapPattern& tap, int sampleRate) {
    std::size_t pos = 0;
    for (const auto& seg : tap.segments) {
        std::size_t len = to_frames(seg.duration, sampleRate);
        std::size_t end = std::min(samples.size(), pos + len);
        if (!seg.sound)
            for (std::size_t i = pos; i < end; ++i) samples[i] = 0.0;
        else
            micro_envelope(samples, sampleRate, pos, end);
        pos = end;
        if (pos >= samples.size()) break;
    }
    for (std::size_t i = pos; i < samples.size(); ++i) samples[i] = 0.0;
}

// Schroeder reverberator: 4 parallel combs into 2 series allpasses. The tail
// length (RT60) equals the event's postReverb value.
void add_reverb_tail(std::vector<double>& samples, double rt60, int sampleRate) {
    if (rt60 <= 0 || samples.empty()) return;
    static const std::array<double, 4> combDelays = {0.0297, 0.0371, 0.0411, 0.0437};
    static const std::array<double, 2> allpassDelays = {0.005, 0.0017};

    std::size_t drySize = samples.size();
    std::size_t tail = to_frames(rt60, sampleRate);
    std::vector<double> wet(drySize + tail, 0.0);

    std::array<std::vector<double>, 4> combBuf;
    std::array<std::size_t, 4> combIdx{};
    std::array<double, 4> combGain{};
    for (std::size_t c = 0; c < 4; ++c) {
        combBuf[c].assign(std::max<std::size_t>(1, to_frames(combDelays[c], sampleRate)), 0.0);
        combGain[c] = std::pow(10.0, -3.0 * combDelays[c] / rt60);
    }
    for (std::size_t i = 0; i < wet.size(); ++i) {
        double x = i < drySize ? samples[i] : 0.0;
        double acc = 0;
        for (std::size_t c = 0; c < 4; ++c) {
            double delayed = combBuf[c][combIdx[c]];
            combBuf[c][combIdx[c]] = x + delayed * combGain[c];
            combIdx[c] = (combIdx[c] + 1) % combBuf[c].size();
            acc += delayed;
        }
        wet[i] = acc * 0.25;
    }
    for (double delaySeconds : allpassDelays) {
        std::vector<double> buf(std::max<std::size_t>(1, to_frames(delaySeconds, sampleRate)),
                                0.0);
        std::size_t idx = 0;
        const double g = 0.7;
        for (double& w : wet) {
            double delayed = buf[idx];
            double y = -g * w + delayed;
            buf[idx] = w + g * y;
            idx = (idx + 1) % buf.size();
            w = y;
        }
    }
    samples.resize(drySize + tail, 0.0);
    for (std::size_t i = 0; i < samples.size(); ++i) samples[i] += kReverbWet * wet[i];
}

double ramp_interp(double a, double b, double u, RampMode mode) {
    switch (mode) {
        case RampMode::None: return a;
        case RampMode::Exponential:
            if (a <= 0 || b <= 0)
                throw Error(Error::Kind::Render,
                            "exponential ramp requires positive endpoint values");
            return a * std::pow(b / a, u);
        default: return a + (b - a) * u;
    }
}

// Parallel loop bodies capture their first exception and rethrow it after the
// region; exceptions must not unwind across an OpenMP boundary.
class ParallelGuard {
  public:
    template <typename Fn>
    void run(Fn&& fn) noexcept {
        try {
            fn();
        } catch (...) {
            std::lock_guard<std::mutex> lock(mutex_);
            if (!error_) error_ = std::current_exception();
        }
    }
    void rethrow() const {
        if (error_) std::rethrow_exception(error_);
    }

  private:
    std::mutex mutex_;
    std::exception_ptr error_;
};

struct StereoBuffer {
    std::vector<double> left;
    std::vector<double> right;

    void ensure(std::size_t frames) {
        if (left.size() < frames) {
            left.resize(frames, 0.0);
            right.resize(frames, 0.0);
        }
    }
    void add_at(std::size_t offset, const StereoBuffer& other) {
        ensure(offset + other.left.size());
        for (std::size_t i = 0; i < other.left.size(); ++i) {
            left[offset + i] += other.left[i];
            right[offset + i] += other.right[i];
        }
    }
};

struct Renderer {
    const AudioQueue& queue;
    const RenderConfig& cfg;
    InstrumentRegistry instruments;
    FilterRegistry filters;
    std::vector<std::string>& warnings;
    mutable std::mutex warnMutex;

    void warn(std::string msg) const {
        std::lock_guard<std::mutex> lock(warnMutex);
        warnings.push_back(std::move(msg));
    }

    const InstrumentProgram& program_for(const std::string& name) const {
        const InstrumentProgram* p = instruments.find(name);
        if (!p) throw Error(Error::Kind::Render, "unknown instrument \"" + name + "\"");
        return *p;
    }

    // --- speech -----------------------------------------------------------

    std::optional<PcmBuffer> run_speech_command(const std::string& text) const {
        std::string cmd = cfg.speechCommand;
        auto placeholder = cmd.find("{}");
        if (placeholder != std::string::npos) {
            std::string quoted = "'";
            for (char c : text) {
                if (c == '\'')
                    quoted += "'\\''";
                else
                    quoted += c;
            }
            quoted += "'";
            cmd.replace(placeholder, 2, quoted);
        } else {
            std::string quoted;
            for (char c : text) {
                if (c == '\'')
                    quoted += "'\\''";
                else
                    quoted += c;
            }
            cmd = "printf '%s' '" + quoted + "' | " + cmd;
        }
        FILE* pipe = popen(cmd.c_str(), "r");
        if (!pipe) return std::nullopt;
        std::vector<std::uint8_t> bytes;
        std::uint8_t chunk[4096];
        std::size_t got;
        while ((got = fread(chunk, 1, sizeof(chunk), pipe)) > 0)
            bytes.insert(bytes.end(), chunk, chunk + got);
        int status = pclose(pipe);
        if (status != 0 || bytes.empty()) return std::nullopt;
        try {
            return decode_wav(bytes.data(), bytes.size());
        } catch (const Error&) {
            return std::nullopt;
        }
    }

    StereoBuffer render_speech(const SpeechItem& item) const {
        StereoBuffer out;
        if (cfg.speechPolicy == SpeechPolicy::Omit) return out;
        if (cfg.speechPolicy == SpeechPolicy::ExternalCommand && !cfg.speechCommand.empty()) {
            auto voiced = run_speech_command(item.text);
            if (voiced) {
                // resample to the render rate when the voice differs
                const PcmBuffer& src = *voiced;
                if (src.sampleRate == cfg.sampleRate) {
                    out.left = src.left;
                    out.right = src.right;
                } else {
                    double step = static_cast<double>(src.sampleRate) / cfg.sampleRate;
                    std::size_t frames = static_cast<std::size_t>(src.frames() / step);
                    out.left.resize(frames);
                    out.right.resize(frames);
                    for (std::size_t i = 0; i < frames; ++i) {
                        double pos = i * step;
                        std::size_t i0 = static_cast<std::size_t>(pos);
                        std::size_t i1 = std::min(i0 + 1, src.frames() - 1);
                        double frac = pos - i0;
                        out.left[i] = src.left[i0] * (1 - frac) + src.left[i1] * frac;
                        out.right[i] = src.right[i0] * (1 - frac) + src.right[i1] * frac;
                    }
                }
                return out;
            }
            warn("speech command failed; using silence estimate for \"" + item.text + "\"");
        }
        std::size_t frames = to_frames(speech_duration_estimate(item), cfg.sampleRate);
        out.left.assign(frames, 0.0);
        out.right.assign(frames, 0.0);
        return out;
    }

    // --- tone events ------------------------------------------------------

    std::vector<double> synth_one(const ToneEvent& ev, const std::string& seriesInstrument,
                                  const std::vector<std::string>& chain,
                                  std::uint64_t seed) const {
        const std::string& name = ev.timbre.empty() ? seriesInstrument : ev.timbre;
        SynthContext ctx;
        ctx.sampleRate = cfg.sampleRate;
        ctx.seed = seed;

        std::vector<double> mono;
        if (const SynthFn* custom = instruments.find_custom(name)) {
            mono.assign(to_frames(ev.duration, cfg.sampleRate), 0.0);
            (*custom)(ev, InstrumentProgram{}, ctx, mono);
        } else {
            synth_program(ev, program_for(name), ctx, mono);
        }
        for (double& v : mono) v *= ev.loudness;
        if (ev.tap)
            apply_tap_gate(mono, *ev.tap, cfg.sampleRate);
        else
            micro_envelope(mono, cfg.sampleRate, 0, mono.size());
        if (!chain.empty()) apply_filter_chain(filters, chain, ev, cfg.sampleRate, mono);
        add_reverb_tail(mono, ev.postReverb, cfg.sampleRate);
        return mono;
    }

    StereoBuffer render_discrete_series(const ToneSeries& series, std::uint64_t queueSeed) const {
        StereoBuffer out;
        out.ensure(to_frames(series.duration(), cfg.sampleRate));
        std::vector<std::vector<double>> eventBufs(series.events.size());

        ParallelGuard guard;
#pragma omp parallel for schedule(static) if (cfg.parallel)
        for (long long k = 0; k < static_cast<long long>(series.events.size()); ++k) {
            guard.run([&, k] {
                const ToneEvent& ev = series.events[static_cast<std::size_t>(k)];
                eventBufs[static_cast<std::size_t>(k)] =
                    synth_one(ev, series.instrument, series.filters,
                              mix_seed(queueSeed, 0x51, static_cast<std::uint64_t>(k)));
            });
        }
        guard.rethrow();
        // deterministic summation order regardless of thread count; pan is a
        // per-event constant so it folds into the mix
        for (std::size_t k = 0; k < series.events.size(); ++k) {
            const ToneEvent& ev = series.events[k];
            const std::vector<double>& mono = eventBufs[k];
            auto [lg, rg] = pan_gains(std::clamp(ev.pan, -1.0, 1.0));
            std::size_t offset = to_frames(ev.start, cfg.sampleRate);
            out.ensure(offset + mono.size());
            for (std::size_t i = 0; i < mono.size(); ++i) {
                out.left[offset + i] += mono[i] * lg;
                out.right[offset + i] += mono[i] * rg;
            }
        }
        return out;
    }

    struct ChannelTrack {
        double ToneEvent::*member;
        RampMode mode;
        const char* name;
    };

    StereoBuffer render_continued_series(const ToneSeries& series,
                                         std::uint64_t queueSeed) const {
        const auto& events = series.events;
        StereoBuffer out;
        if (events.empty()) return out;
        if (events.size() == 1) {
            // single breakpoint: no span to sweep
            ToneSeries single = series;
            single.continued = false;
            if (single.events[0].duration <= 0) single.events[0].duration = 0.2;
            return render_discrete_series(single, queueSeed);
        }

        const InstrumentProgram& program = program_for(series.instrument);
        bool rampable = program.family == InstrumentProgram::Family::Oscillator ||
                        program.family == InstrumentProgram::Family::Wave ||
                        program.family == InstrumentProgram::Family::Fm ||
                        program.family == InstrumentProgram::Family::Am ||
                        program.family == InstrumentProgram::Family::Noise;
        if (!rampable) {
            warn("instrument \"" + series.instrument +
                 "\" cannot sweep; rendering discrete events");
            ToneSeries discrete = series;
            discrete.continued = false;
            return render_discrete_series(discrete, queueSeed);
        }

        double total = series.duration();
        std::size_t frames = to_frames(total, cfg.sampleRate);
        std::vector<double> mono(frames, 0.0);
        std::vector<double> pans(frames, 0.0);

        auto mode_for = [&](const char* ch) {
            auto it = series.ramps.find(ch);
            return it == series.ramps.end() ? RampMode::Linear : it->second;
        };
        RampMode pitchMode = mode_for("pitch");
        RampMode loudMode = mode_for("loudness");
        RampMode panMode = mode_for("pan");
        RampMode modMode = mode_for("modulation");
        RampMode harmMode = mode_for("harmonicity");

        SeededRng noiseRng(mix_seed(queueSeed, 0x77, 0));
        PinkState pink(mix_seed(queueSeed, 0x78, 0));
        double brown = 0;
        double phase = 0, modPhase = 0;

        std::size_t seg = 0;
        for (std::size_t i = 0; i < frames; ++i) {
            double t = static_cast<double>(i) / cfg.sampleRate;
            while (seg + 2 < events.size() && t >= events[seg + 1].start) ++seg;
            const ToneEvent& a = events[seg];
            const ToneEvent& b = events[seg + 1];
            double span = b.start - a.start;
            double u = span > 0 ? std::clamp((t - a.start) / span, 0.0, 1.0) : 0.0;

            double pitch = ramp_interp(a.pitch, b.pitch, u, pitchMode);
            double loud = ramp_interp(a.loudness, b.loudness, u, loudMode);
            double pan = ramp_interp(a.pan, b.pan, u, panMode);
            double mod = ramp_interp(a.modulation, b.modulation, u, modMode);
            double harm = ramp_interp(a.harmonicity, b.harmonicity, u, harmMode);
            double detune = a.detune;
            double freq = pitch * std::pow(2.0, detune / 1200.0);

            double sample = 0;
            switch (program.family) {
                case InstrumentProgram::Family::Oscillator: {
                    phase += freq / cfg.sampleRate;
                    sample = osc_sample(program.shape, phase);
                    break;
                }
                case InstrumentProgram::Family::Wave: {
                    phase += freq / cfg.sampleRate;
                    sample = wave_sample(program.wave, phase);
                    break;
                }
                case InstrumentProgram::Family::Fm: {
                    double index = mod * program.synth.modulationIndex;
                    double fm = harm * program.synth.harmonicity * freq;
                    phase += freq / cfg.sampleRate;
                    modPhase += fm / cfg.sampleRate;
                    sample = std::sin(kTwoPi * phase + index * std::sin(kTwoPi * modPhase));
                    break;
                }
                case InstrumentProgram::Family::Am: {
                    double depth = mod * program.synth.modulationIndex;
                    double fm = harm * program.synth.harmonicity * freq;
                    phase += freq / cfg.sampleRate;
                    modPhase += fm / cfg.sampleRate;
                    double m = (1.0 + depth * std::sin(kTwoPi * modPhase)) / (1.0 + depth);
                    sample = std::sin(kTwoPi * phase) * m;
                    break;
                }
                case InstrumentProgram::Family::Noise: {
                    if (program.color == NoiseColor::White)
                        sample = noiseRng.uniform();
                    else if (program.color == NoiseColor::Pink)
                        sample = pink.next();
                    else {
                        brown = 0.98 * brown + noiseRng.uniform() * 0.1;
                        sample = brown;
                    }
                    break;
                }
                default: break;
            }
            mono[i] = sample * loud;
            pans[i] = pan;
        }
        micro_envelope(mono, cfg.sampleRate, 0, mono.size());
        if (!series.filters.empty())
            apply_filter_chain(filters, series.filters, events.front(), cfg.sampleRate, mono);
        if (events.front().postReverb > 0)
            add_reverb_tail(mono, events.front().postReverb, cfg.sampleRate);

        out.left.resize(mono.size());
        out.right.resize(mono.size());
        for (std::size_t i = 0; i < mono.size(); ++i) {
            double pan = i < pans.size() ? pans[i] : pans.empty() ? 0.0 : pans.back();
            auto [lg, rg] = pan_gains(std::clamp(pan, -1.0, 1.0));
            out.left[i] = mono[i] * lg;
            out.right[i] = mono[i] * rg;
        }
        return out;
    }

    StereoBuffer render_series(const ToneSeries& series, std::uint64_t queueSeed) const {
        return series.continued ? render_continued_series(series, queueSeed)
                                : render_discrete_series(series, queueSeed);
    }

    StereoBuffer render_overlay(const std::vector<ToneSeries>& layers,
                                std::uint64_t queueSeed) const {
        StereoBuffer out;
        std::vector<StereoBuffer> rendered(layers.size());
        ParallelGuard guard;
#pragma omp parallel for schedule(dynamic) if (cfg.parallel)
        for (long long l = 0; l < static_cast<long long>(layers.size()); ++l) {
            guard.run([&, l] {
                rendered[static_cast<std::size_t>(l)] = render_series(
                    layers[static_cast<std::size_t>(l)],
                    mix_seed(queueSeed, 0x90 + static_cast<std::uint64_t>(l), 0));
            });
        }
        guard.rethrow();
        for (const auto& layer : rendered) out.add_at(0, layer);
        // soft-normalize: one scale factor keeps inter-layer ratios intact
        double peak = 0;
        for (std::size_t i = 0; i < out.left.size(); ++i)
            peak = std::max({peak, std::abs(out.left[i]), std::abs(out.right[i])});
        if (peak > 1.0) {
            double g = 1.0 / peak;
            for (std::size_t i = 0; i < out.left.size(); ++i) {
                out.left[i] *= g;
                out.right[i] *= g;
            }
        }
        return out;
    }

    // pink-noise state for the continued path
    struct PinkState {
        SeededRng rng;
        double rows[16];
        std::uint32_t counter = 0;
        double sum = 0;
        explicit PinkState(std::uint64_t seed) : rng(seed) {
            for (double& r : rows) {
                r = rng.uniform();
                sum += r;
            }
        }
        double next() {
            ++counter;
            int idx = counter ? __builtin_ctz(counter) : 0;
            if (idx > 15) idx = 15;
            sum -= rows[idx];
            rows[idx] = rng.uniform();
            sum += rows[idx];
            return (sum + rng.uniform()) / 17.0;
        }
    };
};

}  // namespace

std::pair<double, double> pan_gains(double pan) {
    double theta = (pan + 1.0) * M_PI / 4.0;
    return {std::cos(theta), std::sin(theta)};
}

std::string transcript_text(const std::vector<TranscriptEntry>& transcript) {
    std::ostringstream out;
    for (const auto& e : transcript) {
        char num[32];
        std::snprintf(num, sizeof(num), "%.3f", e.start);
        out << num << "\t" << e.text << "\n";
    }
    return out.str();
}

RenderResult render(const AudioQueue& queue, const RenderConfig& config) {
    if (config.sampleRate != 22050 && config.sampleRate != 44100 && config.sampleRate != 48000)
        throw Error(Error::Kind::Render, "sample rate must be 22050, 44100, or 48000");

    RenderResult result;
    result.buffer.sampleRate = config.sampleRate;

    Renderer renderer{queue, config, InstrumentRegistry{}, FilterRegistry{}, result.warnings, {}};
    for (const auto& def : queue.synths) {
        InstrumentProgram p;
        p.family = def.kind == "AM" ? InstrumentProgram::Family::Am
                                    : InstrumentProgram::Family::Fm;
        p.synth = def;
        renderer.instruments.register_program(def.name, p);
    }
    for (const auto& def : queue.waves) {
        InstrumentProgram p;
        p.family = InstrumentProgram::Family::Wave;
        p.wave = def;
        renderer.instruments.register_program(def.name, p);
    }
    for (const auto& ref : queue.samplings) {
        InstrumentProgram p;
        p.family = InstrumentProgram::Family::Sample;
        p.sample = std::make_shared<PcmBuffer>(read_wav(ref.url));
        p.basePitch = ref.basePitch;
        renderer.instruments.register_program(ref.name, p);
    }
    std::string packDir = config.samplePackDir;
    if (packDir.empty())
        if (const char* env = std::getenv("ERIE_SAMPLE_PACK")) packDir = env;
    if (!packDir.empty()) renderer.instruments.load_sample_pack(packDir);

    std::size_t from = 0, to = queue.subQueues.size();
    if (config.subQueueRange) {
        from = config.subQueueRange->first;
        to = config.subQueueRange->second;
        if (from > to || to > queue.subQueues.size())
            throw Error(Error::Kind::Render, "sub-queue range outside queue bounds");
    }

    const bool omit = config.speechPolicy == SpeechPolicy::Omit;

    // pass 1: speech synthesis + layout (external voices determine their own
    // durations, so they must exist before offsets can be fixed)
    struct Slot {
        std::size_t index;
        std::size_t offsetFrames = 0;
        std::size_t durationFrames = 0;
        std::vector<StereoBuffer> speechBufs;   // in item order
        std::vector<std::size_t> innerOffsets;  // per tone-speech item
    };
    std::vector<Slot> slots;
    std::size_t cursor = 0;
    for (std::size_t i = from; i < to; ++i) {
        const SubQueue& q = queue.subQueues[i];
        if (omit && q.role == "scale") continue;  // legend tones go with their speech
        Slot slot;
        slot.index = i;
        slot.offsetFrames = cursor;
        switch (q.kind) {
            case SubQueue::Kind::Speech: {
                result.transcript.push_back(
                    {static_cast<double>(cursor) / config.sampleRate, q.speech.text});
                if (!omit) {
                    slot.speechBufs.push_back(renderer.render_speech(q.speech));
                    slot.durationFrames = slot.speechBufs.back().left.size();
                }
                break;
            }
            case SubQueue::Kind::ToneSeries:
                slot.durationFrames = to_frames(q.series.duration(), config.sampleRate);
                break;
            case SubQueue::Kind::ToneSpeechSeries: {
                std::size_t inner = 0;
                for (const auto& item : q.speechSeries.items) {
                    slot.innerOffsets.push_back(inner);
                    if (item.isSpeech) {
                        result.transcript.push_back(
                            {static_cast<double>(cursor + inner) / config.sampleRate,
                             item.speech.text});
                        if (!omit) {
                            slot.speechBufs.push_back(renderer.render_speech(item.speech));
                            inner += slot.speechBufs.back().left.size();
                        }
                    } else {
                        inner += to_frames(item.tone.duration, config.sampleRate);
                    }
                }
                slot.durationFrames = inner;
                break;
            }
            case SubQueue::Kind::ToneOverlay: {
                double longest = 0;
                for (const auto& layer : q.layers)
                    longest = std::max(longest, layer.duration());
                slot.durationFrames = to_frames(longest, config.sampleRate);
                break;
            }
        }
        cursor = slot.offsetFrames + slot.durationFrames;
        slots.push_back(std::move(slot));
    }
    const std::size_t totalFrames = cursor;

    // pass 2: synthesize tone sub-queues into private buffers
    std::vector<StereoBuffer> rendered(slots.size());
    ParallelGuard guard;
#pragma omp parallel for schedule(dynamic) if (config.parallel)
    for (long long s = 0; s < static_cast<long long>(slots.size()); ++s) {
        guard.run([&, s] {
        Slot& slot = slots[static_cast<std::size_t>(s)];
        const SubQueue& q = queue.subQueues[slot.index];
        StereoBuffer& buf = rendered[static_cast<std::size_t>(s)];
        std::uint64_t seed = mix_seed(config.noiseSeed, slot.index + 1, 0);
        switch (q.kind) {
            case SubQueue::Kind::Speech:
                if (!slot.speechBufs.empty()) buf = std::move(slot.speechBufs[0]);
                break;
            case SubQueue::Kind::ToneSeries:
                buf = renderer.render_series(q.series, seed);
                break;
            case SubQueue::Kind::ToneOverlay:
                buf = renderer.render_overlay(q.layers, seed);
                break;
            case SubQueue::Kind::ToneSpeechSeries: {
                std::size_t speechIdx = 0;
                std::uint64_t k = 0;
                for (std::size_t item = 0; item < q.speechSeries.items.size(); ++item) {
                    const auto& tsi = q.speechSeries.items[item];
                    std::size_t inner = slot.innerOffsets[item];
                    if (tsi.isSpeech) {
                        if (!omit && speechIdx < slot.speechBufs.size())
                            buf.add_at(inner, slot.speechBufs[speechIdx++]);
                    } else {
                        std::vector<double> mono = renderer.synth_one(
                            tsi.tone, q.speechSeries.instrument, q.speechSeries.filters,
                            mix_seed(seed, 0x31, k));
                        auto [lg, rg] = pan_gains(std::clamp(tsi.tone.pan, -1.0, 1.0));
                        StereoBuffer ev;
                        ev.left.resize(mono.size());
                        ev.right.resize(mono.size());
                        for (std::size_t m = 0; m < mono.size(); ++m) {
                            ev.left[m] = mono[m] * lg;
                            ev.right[m] = mono[m] * rg;
                        }
                        buf.add_at(inner, ev);
                    }
                    ++k;
                }
                break;
            }
        }
        });
    }
    guard.rethrow();

    // pass 3: sequential mix in queue order (reverb tails bleed forward but
    // never past the final frame)
    result.buffer.left.assign(totalFrames, 0.0);
    result.buffer.right.assign(totalFrames, 0.0);
    for (std::size_t s = 0; s < slots.size(); ++s) {
        const StereoBuffer& buf = rendered[s];
        std::size_t offset = slots[s].offsetFrames;
        std::size_t n = std::min(buf.left.size(), totalFrames - std::min(totalFrames, offset));
        for (std::size_t i = 0; i < n; ++i) {
            result.buffer.left[offset + i] += buf.left[i];
            result.buffer.right[offset + i] += buf.right[i];
        }
    }

    // overlapping sounds may sum past full scale; one global gain keeps the
    // mix inside [-1, 1] without touching relative levels
    double peak = 0;
    for (std::size_t i = 0; i < totalFrames; ++i)
        peak = std::max({peak, std::abs(result.buffer.left[i]),
                         std::abs(result.buffer.right[i])});
    if (peak > 1.0) {
        double g = 1.0 / peak;
        for (std::size_t i = 0; i < totalFrames; ++i) {
            result.buffer.left[i] *= g;
            result.buffer.right[i] *= g;
        }
        renderer.warn("mix normalized by " + std::to_string(g) + " to stay within full scale");
    }
    return result;
}

std::vector<double> synth_event_samples(const ToneEvent& event,
                                        const InstrumentProgram& program,
                                        const FilterRegistry& filterRegistry,
                                        const std::vector<std::string>& chain,
                                        const SynthContext& ctx) {
    std::vector<double> mono;
    synth_program(event, program, ctx, mono);
    for (double& v : mono) v *= event.loudness;
    if (event.tap)
        apply_tap_gate(mono, *event.tap, ctx.sampleRate);
    else
        micro_envelope(mono, ctx.sampleRate, 0, mono.size());
    if (!chain.empty()) apply_filter_chain(filterRegistry, chain, event, ctx.sampleRate, mono);
    add_reverb_tail(mono, event.postReverb, ctx.sampleRate);
    return mono;
}

}  // namespace erie
