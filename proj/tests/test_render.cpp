#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "erie/render.hpp"
#include "erie/spec.hpp"
#include "fft_oracle.hpp"

using namespace erie;

namespace {

std::string gallery(const std::string& rel) { return std::string(ERIE_GALLERY_DIR) + "/" + rel; }

AudioQueue one_event_queue(const ToneEvent& ev, const std::string& instrument,
                           bool continued = false,
                           std::vector<std::string> filters = {}) {
    AudioQueue q;
    SubQueue sub;
    sub.kind = SubQueue::Kind::ToneSeries;
    sub.series.instrument = instrument;
    sub.series.continued = continued;
    sub.series.filters = std::move(filters);
    sub.series.events.push_back(ev);
    q.subQueues.push_back(std::move(sub));
    return q;
}

RenderConfig quiet() {
    RenderConfig cfg;
    cfg.speechPolicy = SpeechPolicy::Omit;
    return cfg;
}

std::vector<double> mono_of(const PcmBuffer& buf) {
    std::vector<double> out(buf.frames());
    for (std::size_t i = 0; i < buf.frames(); ++i) out[i] = 0.5 * (buf.left[i] + buf.right[i]);
    return out;
}

}  // namespace

TEST_CASE("a one-second sine peaks at its pitch") {
    ToneEvent ev;
    ev.duration = 1.0;
    ev.pitch = 440.0;
    RenderResult r = render(one_event_queue(ev, "sine"), quiet());
    REQUIRE(r.buffer.frames() == 44100);
    double peak = oracle::peak_frequency(mono_of(r.buffer), 0, 32768, 44100);
    CHECK(peak == doctest::Approx(440.0).epsilon(0.005));
}

TEST_CASE("loudness zero renders silence") {
    ToneEvent ev;
    ev.duration = 0.5;
    ev.pitch = 440.0;
    ev.loudness = 0.0;
    RenderResult r = render(one_event_queue(ev, "sine"), quiet());
    for (double v : r.buffer.left) CHECK(v == 0.0);
}

TEST_CASE("FM with zero modulation index degenerates to the carrier sine") {
    ToneEvent ev;
    ev.duration = 0.5;
    ev.pitch = 500.0;
    ev.modulation = 0.0;
    RenderResult fm = render(one_event_queue(ev, "fm"), quiet());
    auto mono = mono_of(fm.buffer);
    double peak = oracle::peak_frequency(mono, 0, 16384, 44100);
    CHECK(peak == doctest::Approx(500.0).epsilon(0.01));
    // sidebands absent: energy near 500 Hz dominates everything else
    double carrier = oracle::band_energy(mono, 44100, 450, 550);
    double rest = oracle::band_energy(mono, 44100, 600, 20000);
    CHECK(carrier > 100 * rest);

    ev.modulation = -1.0;
    CHECK_THROWS_AS(render(one_event_queue(ev, "fm"), quiet()), Error);
}

TEST_CASE("FM with a positive index grows sidebands at the modulator spacing") {
    ToneEvent ev;
    ev.duration = 0.5;
    ev.pitch = 600.0;
    ev.modulation = 2.0;
    ev.harmonicity = 0.5;  // modulator at 300 Hz
    RenderResult r = render(one_event_queue(ev, "fm"), quiet());
    auto mono = mono_of(r.buffer);
    double sideband = oracle::band_energy(mono, 44100, 880, 920);  // 600 + 300 Hz
    CHECK(sideband > 1e-3);
}

TEST_CASE("detune shifts the effective frequency in cents") {
    ToneEvent ev;
    ev.duration = 0.5;
    ev.pitch = 440.0;
    ev.detune = 100.0;  // one semitone up
    RenderResult r = render(one_event_queue(ev, "sine"), quiet());
    double peak = oracle::peak_frequency(mono_of(r.buffer), 0, 16384, 44100);
    CHECK(peak == doctest::Approx(440.0 * std::pow(2.0, 100.0 / 1200.0)).epsilon(0.005));
}

TEST_CASE("periodic waves synthesize their harmonic recipe") {
    AudioQueue q;
    SubQueue sub;
    sub.kind = SubQueue::Kind::ToneSeries;
    sub.series.instrument = "organ";
    ToneEvent ev;
    ev.duration = 0.5;
    ev.pitch = 220.0;
    sub.series.events.push_back(ev);
    q.subQueues.push_back(std::move(sub));
    WaveDef wave;
    wave.name = "organ";
    wave.sine = {1.0, 0.0, 0.5};  // fundamental + 3rd harmonic
    wave.cosine = {0.0, 0.0, 0.0};
    q.waves.push_back(wave);

    RenderResult r = render(q, quiet());
    auto mono = mono_of(r.buffer);
    double fundamental = oracle::band_energy(mono, 44100, 200, 240);
    double third = oracle::band_energy(mono, 44100, 640, 680);
    double second = oracle::band_energy(mono, 44100, 420, 460);
    CHECK(fundamental > 4 * third * 0.9);  // amplitude ratio 2 -> energy ratio 4
    CHECK(third > 100 * second);
}

TEST_CASE("ramp modes: none steps, linear sweeps through the midpoint") {
    ToneSeries series;
    series.instrument = "sine";
    series.continued = true;
    ToneEvent a;
    a.pitch = 220.0;
    ToneEvent b;
    b.start = 1.0;
    b.pitch = 440.0;
    series.events = {a, b};

    AudioQueue q;
    SubQueue sub;
    sub.kind = SubQueue::Kind::ToneSeries;
    sub.series = series;
    q.subQueues.push_back(sub);
    RenderResult swept = render(q, quiet());
    auto mono = mono_of(swept.buffer);
    // instantaneous frequency near t = 0.5 via zero crossings over 60 ms
    std::size_t from = static_cast<std::size_t>(0.47 * 44100);
    std::size_t span = static_cast<std::size_t>(0.06 * 44100);
    int crossings = 0;
    for (std::size_t i = from + 1; i < from + span; ++i)
        if ((mono[i - 1] <= 0 && mono[i] > 0)) ++crossings;
    double estimated = crossings / 0.06;
    CHECK(estimated == doctest::Approx(330.0).epsilon(0.01));  // within ~2 Hz

    q.subQueues[0].series.ramps["pitch"] = RampMode::None;
    RenderResult stepped = render(q, quiet());
    auto monoStep = mono_of(stepped.buffer);
    crossings = 0;
    for (std::size_t i = from + 1; i < from + span; ++i)
        if ((monoStep[i - 1] <= 0 && monoStep[i] > 0)) ++crossings;
    CHECK(crossings / 0.06 == doctest::Approx(220.0).epsilon(0.02));
}

TEST_CASE("continued series have no amplitude discontinuities") {
    SonificationSpec spec = parse_spec_file(gallery("kde-penguins.json"));
    CompileOptions copts;
    copts.baseDir = ERIE_GALLERY_DIR;
    AudioQueue q = compile(spec, copts).queue;
    RenderResult r = render(q, quiet());
    auto mono = mono_of(r.buffer);
    double maxDelta = 0;
    for (std::size_t i = 1; i < mono.size(); ++i)
        maxDelta = std::max(maxDelta, std::abs(mono[i] - mono[i - 1]));
    // a 700 Hz sine at 44.1 kHz moves at most 2*pi*700/44100 ~ 0.0997/sample
    CHECK(maxDelta < 0.12);
}

TEST_CASE("exponential ramps reject non-positive endpoints") {
    ToneSeries series;
    series.instrument = "sine";
    series.continued = true;
    series.ramps["pitch"] = RampMode::Exponential;
    ToneEvent a;
    a.pitch = 0.0;
    ToneEvent b;
    b.start = 0.5;
    b.pitch = 440.0;
    series.events = {a, b};
    AudioQueue q;
    SubQueue sub;
    sub.kind = SubQueue::Kind::ToneSeries;
    sub.series = series;
    q.subQueues.push_back(sub);
    CHECK_THROWS_AS(render(q, quiet()), Error);
}

TEST_CASE("pan law is equal-power with silent opposite endpoints") {
    auto [l0, r0] = pan_gains(-1.0);
    CHECK(l0 == doctest::Approx(1.0));
    CHECK(r0 == doctest::Approx(0.0));
    auto [lc, rc] = pan_gains(0.0);
    CHECK(lc == doctest::Approx(std::sqrt(0.5)));
    CHECK(rc == doctest::Approx(std::sqrt(0.5)));
    CHECK(lc * lc + rc * rc == doctest::Approx(1.0));
    auto [lh, rh] = pan_gains(0.5);
    double expected = 1.0 / std::pow(std::tan(3.0 * M_PI / 8.0), 2.0);  // cot^2(3pi/8)
    CHECK((lh * lh) / (rh * rh) == doctest::Approx(expected));
}

TEST_CASE("lowpass attenuates noise above the cutoff by over 12 dB") {
    ToneEvent ev;
    ev.duration = 1.0;
    ev.extra["biquadFrequency"] = 1000.0;
    RenderResult filtered =
        render(one_event_queue(ev, "whiteNoise", false, {"lowpass"}), quiet());
    auto mono = mono_of(filtered.buffer);
    double pass = oracle::band_energy(mono, 44100, 100, 800);
    double stop = oracle::band_energy(mono, 44100, 2000, 8000);
    // normalize by bandwidth, then compare in dB
    double passDensity = pass / 700.0;
    double stopDensity = stop / 6000.0;
    double attenuation = 10.0 * std::log10(passDensity / stopDensity);
    CHECK(attenuation > 12.0);
}

TEST_CASE("an empty filter chain is the identity; order matters otherwise") {
    ToneEvent ev;
    ev.duration = 0.4;
    ev.pitch = 330.0;
    ev.extra["distortionDrive"] = 8.0;
    ev.extra["envelopeAttack"] = 0.2;
    ev.extra["envelopeSustain"] = 0.4;

    RenderResult plain = render(one_event_queue(ev, "sine"), quiet());
    RenderResult empty = render(one_event_queue(ev, "sine", false, {}), quiet());
    CHECK(plain.buffer.left == empty.buffer.left);

    RenderResult ab = render(one_event_queue(ev, "sine", false, {"envelope", "distortion"}),
                             quiet());
    RenderResult ba = render(one_event_queue(ev, "sine", false, {"distortion", "envelope"}),
                             quiet());
    REQUIRE(ab.buffer.frames() == ba.buffer.frames());
    double diff = 0;
    for (std::size_t i = 0; i < ab.buffer.frames(); ++i)
        diff = std::max(diff, std::abs(ab.buffer.left[i] - ba.buffer.left[i]));
    CHECK(diff > 0.01);
}

TEST_CASE("biquad cutoff outside (0, Nyquist) is an error") {
    ToneEvent ev;
    ev.duration = 0.1;
    ev.extra["biquadFrequency"] = 30000.0;
    CHECK_THROWS_AS(render(one_event_queue(ev, "sine", false, {"lowpass"}), quiet()), Error);
}

TEST_CASE("speech policies: estimate duration, omission, rate scaling") {
    SpeechItem item;
    item.text = "Start playing.";  // 14 characters
    CHECK(speech_duration_estimate(item) == doctest::Approx(14.0 / 15.0));
    item.rate = 2.0;
    CHECK(speech_duration_estimate(item) == doctest::Approx(14.0 / 30.0));

    AudioQueue q;
    SubQueue sub;
    sub.kind = SubQueue::Kind::Speech;
    sub.speech.text = "Start playing.";
    q.subQueues.push_back(sub);

    RenderConfig silence;
    RenderResult est = render(q, silence);
    CHECK(est.buffer.duration() == doctest::Approx(14.0 / 15.0).epsilon(1e-3));
    REQUIRE(est.transcript.size() == 1);
    CHECK(est.transcript[0].text == "Start playing.");
    CHECK(est.transcript[0].start == 0.0);

    RenderResult omit = render(q, quiet());
    CHECK(omit.buffer.frames() == 0);
    CHECK(omit.transcript.size() == 1);  // transcript survives omission
}

TEST_CASE("external speech commands supply audio, failures fall back") {
    // a fake voice: ignores the text, emits a fixed 0.25 s tone WAV
    PcmBuffer voice;
    voice.sampleRate = 44100;
    voice.left.assign(11025, 0.0);
    voice.right.assign(11025, 0.0);
    for (std::size_t i = 0; i < voice.frames(); ++i)
        voice.left[i] = voice.right[i] = 0.3 * std::sin(2.0 * M_PI * 300.0 * i / 44100.0);
    write_wav(voice, "/tmp/erie_test_voice.wav", WavFormat::Pcm16);

    AudioQueue q;
    SubQueue sub;
    sub.kind = SubQueue::Kind::Speech;
    sub.speech.text = "hello";
    q.subQueues.push_back(sub);

    RenderConfig cfg;
    cfg.speechPolicy = SpeechPolicy::ExternalCommand;
    cfg.speechCommand = "cat /tmp/erie_test_voice.wav";
    RenderResult voiced = render(q, cfg);
    CHECK(voiced.buffer.frames() == 11025);
    CHECK(voiced.warnings.empty());

    cfg.speechCommand = "false";
    RenderResult fallback = render(q, cfg);
    CHECK(fallback.buffer.duration() == doctest::Approx(5.0 / 15.0).epsilon(1e-3));
    CHECK_FALSE(fallback.warnings.empty());
}

TEST_CASE("wav writer produces exact chunk sizes and float32 round-trips") {
    PcmBuffer buf;
    buf.sampleRate = 44100;
    buf.left.assign(44100, 0.0);
    buf.right.assign(44100, 0.0);
    for (std::size_t i = 0; i < buf.frames(); ++i) {
        buf.left[i] = 0.5 * std::sin(2.0 * M_PI * 440.0 * i / 44100.0);
        buf.right[i] = -buf.left[i];
    }
    auto bytes = encode_wav(buf, WavFormat::Pcm16);
    // 44-byte header + 44100 frames * 2 ch * 2 bytes
    CHECK(bytes.size() == 44 + 176400);

    PcmBuffer empty;
    auto emptyBytes = encode_wav(empty, WavFormat::Pcm16);
    CHECK(emptyBytes.size() == 44);
    PcmBuffer back = decode_wav(emptyBytes.data(), emptyBytes.size());
    CHECK(back.frames() == 0);

    write_wav(buf, "/tmp/erie_test_f32.wav", WavFormat::Float32);
    PcmBuffer readBack = read_wav("/tmp/erie_test_f32.wav");
    REQUIRE(readBack.frames() == buf.frames());
    for (std::size_t i = 0; i < buf.frames(); i += 997) {
        CHECK(readBack.left[i] == static_cast<float>(buf.left[i]));
        CHECK(readBack.right[i] == static_cast<float>(buf.right[i]));
    }

    WavWriteReport report;
    PcmBuffer hot;
    hot.left = {1.5, -2.0, 0.5};
    hot.right = {0.0, 0.0, 0.0};
    encode_wav(hot, WavFormat::Pcm16, &report);
    CHECK(report.clippedSamples == 2);
}

TEST_CASE("rendering an empty queue yields an empty buffer") {
    AudioQueue q;
    RenderResult r = render(q, quiet());
    CHECK(r.buffer.frames() == 0);
    CHECK(r.transcript.empty());
}

TEST_CASE("sub-queue ranges render only the requested span") {
    AudioQueue q;
    for (double pitch : {220.0, 440.0, 880.0}) {
        SubQueue sub;
        sub.kind = SubQueue::Kind::ToneSeries;
        sub.series.instrument = "sine";
        ToneEvent ev;
        ev.duration = 0.5;
        ev.pitch = pitch;
        sub.series.events.push_back(ev);
        q.subQueues.push_back(std::move(sub));
    }
    RenderConfig cfg = quiet();
    cfg.subQueueRange = {{1, 2}};
    RenderResult r = render(q, cfg);
    CHECK(r.buffer.duration() == doctest::Approx(0.5));
    double peak = oracle::peak_frequency(mono_of(r.buffer), 0, 16384, 44100);
    CHECK(peak == doctest::Approx(440.0).epsilon(0.005));

    cfg.subQueueRange = {{1, 9}};
    CHECK_THROWS_AS(render(q, cfg), Error);
}

TEST_CASE("tap pauses are silent between taps") {
    ToneEvent ev;
    ev.duration = 2.0;
    ev.pitch = 523.25;
    TapPattern tap;
    tap.taps = 4;
    for (int i = 0; i < 4; ++i) {
        tap.segments.push_back({true, 0.19});
        if (i < 3) tap.segments.push_back({false, 0.413333});
    }
    ev.tap = tap;
    RenderResult r = render(one_event_queue(ev, "sine"), quiet());
    auto mono = mono_of(r.buffer);
    // compare RMS inside the first tap and the middle of the first pause
    double soundRms = oracle::rms(mono, static_cast<std::size_t>(0.02 * 44100),
                                  static_cast<std::size_t>(0.14 * 44100));
    double pauseRms = oracle::rms(mono, static_cast<std::size_t>(0.25 * 44100),
                                  static_cast<std::size_t>(0.3 * 44100));
    CHECK(pauseRms < 0.01 * soundRms);
}

TEST_CASE("reverb tails ring past the event and bleed into what follows") {
    ToneEvent ev;
    ev.duration = 0.3;
    ev.pitch = 440.0;
    ev.postReverb = 0.8;
    AudioQueue q = one_event_queue(ev, "sine");
    SubQueue next;
    next.kind = SubQueue::Kind::ToneSeries;
    next.series.instrument = "sine";
    ToneEvent quietEv;
    quietEv.duration = 1.0;
    quietEv.loudness = 0.0;
    next.series.events.push_back(quietEv);
    q.subQueues.push_back(next);

    RenderResult r = render(q, quiet());
    CHECK(r.buffer.duration() == doctest::Approx(1.3));
    auto mono = mono_of(r.buffer);
    double tail = oracle::rms(mono, static_cast<std::size_t>(0.4 * 44100),
                              static_cast<std::size_t>(0.2 * 44100));
    CHECK(tail > 1e-4);
}

TEST_CASE("musical presets synthesize deterministic non-silent audio") {
    for (const char* name :
         {"piano", "pianoElec", "violin", "guitar", "metalGuitar", "clap", "hihat",
          "highKick", "lowKick", "pinkNoise", "brownNoise", "sawtooth", "triangle",
          "square", "am"}) {
        ToneEvent ev;
        ev.duration = 0.3;
        ev.pitch = 261.63;
        RenderConfig cfg = quiet();
        cfg.noiseSeed = 7;
        RenderResult a = render(one_event_queue(ev, name), cfg);
        RenderResult b = render(one_event_queue(ev, name), cfg);
        INFO(name);
        CHECK(a.buffer.left == b.buffer.left);
        CHECK(oracle::rms(mono_of(a.buffer), 0, a.buffer.frames()) > 1e-4);
    }
}

TEST_CASE("unknown instruments and filters are render errors") {
    ToneEvent ev;
    ev.duration = 0.1;
    CHECK_THROWS_AS(render(one_event_queue(ev, "theremin"), quiet()), Error);
    CHECK_THROWS_AS(render(one_event_queue(ev, "sine", false, {"flanger"}), quiet()), Error);
}

TEST_CASE("a sample pack overrides the synthetic fallbacks") {
    std::filesystem::create_directories("/tmp/erie_pack");
    PcmBuffer tone;
    tone.sampleRate = 44100;
    tone.left.assign(22050, 0.0);
    tone.right.assign(22050, 0.0);
    for (std::size_t i = 0; i < tone.frames(); ++i)
        tone.left[i] = tone.right[i] = 0.4 * std::sin(2.0 * M_PI * 261.63 * i / 44100.0);
    write_wav(tone, "/tmp/erie_pack/piano.wav", WavFormat::Pcm16);
    std::ofstream manifest("/tmp/erie_pack/manifest.json");
    manifest << R"({"instruments": {"piano": {"file": "piano.wav", "basePitch": 261.63}}})";
    manifest.close();

    ToneEvent ev;
    ev.duration = 0.4;
    ev.pitch = 523.26;  // one octave above the base: doubles the playback rate
    RenderConfig cfg = quiet();
    cfg.samplePackDir = "/tmp/erie_pack";
    RenderResult r = render(one_event_queue(ev, "piano"), cfg);
    double peak = oracle::peak_frequency(mono_of(r.buffer), 0, 16384, 44100);
    CHECK(peak == doctest::Approx(523.26).epsilon(0.01));
}

TEST_CASE("same seed renders byte-identical; serial equals parallel") {
    SonificationSpec spec = parse_spec_file(gallery("model-fit.json"));
    CompileOptions copts;
    copts.baseDir = ERIE_GALLERY_DIR;
    AudioQueue q = compile(spec, copts).queue;

    RenderConfig cfg;
    cfg.noiseSeed = 99;
    RenderResult a = render(q, cfg);
    RenderResult b = render(q, cfg);
    CHECK(a.buffer.left == b.buffer.left);
    CHECK(a.buffer.right == b.buffer.right);

    cfg.parallel = false;
    RenderResult serial = render(q, cfg);
    CHECK(serial.buffer.left == a.buffer.left);
    CHECK(serial.buffer.right == a.buffer.right);
}

TEST_CASE("overlay mixing normalizes peaks while preserving layer ratios") {
    AudioQueue q;
    SubQueue overlay;
    overlay.kind = SubQueue::Kind::ToneOverlay;
    for (int i = 0; i < 4; ++i) {
        ToneSeries layer;
        layer.instrument = "sine";
        ToneEvent ev;
        ev.duration = 0.5;
        ev.pitch = 200.0 + 100.0 * i;
        layer.events.push_back(ev);
        overlay.layers.push_back(layer);
    }
    q.subQueues.push_back(overlay);
    RenderResult r = render(q, quiet());
    double peak = 0;
    for (double v : r.buffer.left) peak = std::max(peak, std::abs(v));
    for (double v : r.buffer.right) peak = std::max(peak, std::abs(v));
    CHECK(peak <= 1.0 + 1e-9);
    CHECK(peak > 0.5);
}

TEST_CASE("rendered duration equals the queue total within one frame") {
    SonificationSpec spec = parse_spec_file(gallery("walkthrough.json"));
    CompileOptions copts;
    copts.baseDir = ERIE_GALLERY_DIR;
    AudioQueue q = compile(spec, copts).queue;
    RenderConfig cfg = quiet();
    RenderResult r = render(q, cfg);
    // speech omitted: only the nine 0.5 s events remain
    CHECK(std::llabs(static_cast<long long>(r.buffer.frames()) -
                     static_cast<long long>(4.5 * 44100)) <= 1);

    RenderConfig spoken;
    RenderResult full = render(q, spoken);
    CHECK(std::llabs(static_cast<long long>(full.buffer.frames()) -
                     static_cast<long long>(std::llround(q.estimatedDuration * 44100))) <= 1);
}

TEST_CASE("compile-then-render of the IR equals direct render of the spec") {
    SonificationSpec spec = parse_spec_file(gallery("model-fit.json"));
    CompileOptions copts;
    copts.baseDir = ERIE_GALLERY_DIR;
    AudioQueue direct = compile(spec, copts).queue;

    std::string ir = queue_to_json(direct);
    AudioQueue fromIr = queue_from_json(ir);

    RenderConfig cfg;
    cfg.noiseSeed = 5;
    RenderResult a = render(direct, cfg);
    RenderResult b = render(fromIr, cfg);
    CHECK(a.buffer.left == b.buffer.left);
    CHECK(a.buffer.right == b.buffer.right);
}

TEST_CASE("sampling definitions play external audio resampled by pitch") {
    PcmBuffer src;
    src.sampleRate = 44100;
    src.left.assign(44100, 0.0);
    src.right.assign(44100, 0.0);
    for (std::size_t i = 0; i < src.frames(); ++i)
        src.left[i] = src.right[i] = 0.5 * std::sin(2.0 * M_PI * 200.0 * i / 44100.0);
    write_wav(src, "/tmp/erie_sample_src.wav", WavFormat::Pcm16);

    std::string doc = R"({
        "stream": {
            "data": {"values": [{"p": 400, "t": 0}]},
            "tone": {"type": "loop1"},
            "encoding": {
                "time": {"field": "t", "type": "quantitative",
                         "scale": {"band": 0.5, "description": "skip"}},
                "pitch": {"field": "p", "type": "quantitative",
                          "scale": {"domain": [0, 400], "range": [0, 400],
                                    "description": "skip"}}
            },
            "config": {"skipStartSpeech": true, "skipFinishSpeech": true}
        },
        "sampling": [{"name": "loop1", "url": "/tmp/erie_sample_src.wav",
                      "basePitch": 200}]
    })";
    SonificationSpec spec = parse_spec(doc);
    REQUIRE(validate(spec).ok());
    AudioQueue q = compile(spec).queue;
    RenderResult r = render(q, quiet());
    // pitch 400 over base 200 doubles the playback rate
    double peak = oracle::peak_frequency(mono_of(r.buffer), 0, 16384, 44100);
    CHECK(peak == doctest::Approx(400.0).epsilon(0.01));

    // the queue IR carries the sampling reference for standalone rendering
    AudioQueue back = queue_from_json(queue_to_json(q));
    REQUIRE(back.samplings.size() == 1);
    CHECK(back.samplings[0].basePitch == 200.0);
    RenderResult viaIr = render(back, quiet());
    CHECK(viaIr.buffer.left == r.buffer.left);
}
