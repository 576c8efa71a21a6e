// Acceptance suite: runs every shipped conformance criterion end to end and
// prints one pass/fail line per criterion, with its runtime budget enforced.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "erie/channels.hpp"
#include "erie/expr.hpp"
#include "erie/queue.hpp"
#include "erie/render.hpp"
#include "erie/scale.hpp"
#include "erie/spec.hpp"
#include "erie/transform.hpp"
#include "fft_oracle.hpp"

using namespace erie;

namespace {

struct Criterion {
    int number;
    std::string name;
    double budgetSeconds;
    std::function<void(std::vector<std::string>&)> run;
};

#define REQUIRE_MSG(cond, ...)                                      \
    do {                                                            \
        if (!(cond)) {                                              \
            char buf_[512];                                         \
            std::snprintf(buf_, sizeof(buf_), __VA_ARGS__);         \
            failures.push_back(buf_);                               \
        }                                                           \
    } while (0)

std::string gallery(const std::string& rel) { return std::string(ERIE_GALLERY_DIR) + "/" + rel; }

CompileOptions gallery_options() {
    CompileOptions opts;
    opts.baseDir = ERIE_GALLERY_DIR;
    return opts;
}

const ToneSeries* nth_body_series(const AudioQueue& q, int n) {
    int seen = 0;
    for (const auto& sub : q.subQueues)
        if (sub.kind == SubQueue::Kind::ToneSeries && sub.role == "body")
            if (seen++ == n) return &sub.series;
    return nullptr;
}

std::vector<double> mono_of(const PcmBuffer& buf) {
    std::vector<double> out(buf.frames());
    for (std::size_t i = 0; i < buf.frames(); ++i) out[i] = 0.5 * (buf.left[i] + buf.right[i]);
    return out;
}

// --------------------------------------------------------------------------

void criterion1_transform_fidelity(std::vector<std::string>& failures) {
    DataTable cars = load_table_file(gallery("data/cars.json"));
    BinOptions opts;
    DataTable binned = transform_bin(cars, "miles-per-gallon", opts, "bin", "bin_end");
    DataTable counts = transform_aggregate(binned, {{"count", std::nullopt, "count"}}, {"bin"});

    const double expected[9] = {1, 52, 98, 78, 77, 56, 27, 8, 1};
    REQUIRE_MSG(counts.row_count() == 9, "expected 9 bins, got %zu", counts.row_count());
    if (counts.row_count() != 9) return;

    std::vector<std::pair<double, double>> rows;
    for (std::size_t r = 0; r < counts.row_count(); ++r)
        rows.push_back({as_number(counts.at(r, "bin")), as_number(counts.at(r, "count"))});
    std::sort(rows.begin(), rows.end());
    for (int i = 0; i < 9; ++i) {
        REQUIRE_MSG(rows[static_cast<std::size_t>(i)].first == 5.0 + 5.0 * i,
                    "bin %d start %.1f != %.1f", i, rows[static_cast<std::size_t>(i)].first,
                    5.0 + 5.0 * i);
        REQUIRE_MSG(rows[static_cast<std::size_t>(i)].second == expected[i],
                    "bin %d count %.0f != %.0f", i, rows[static_cast<std::size_t>(i)].second,
                    expected[i]);
    }
}

void criterion2_walkthrough_queue(std::vector<std::string>& failures) {
    SonificationSpec spec = parse_spec_file(gallery("walkthrough.json"));
    AudioQueue q = compile(spec, gallery_options()).queue;
    const ToneSeries* body = nth_body_series(q, 0);
    REQUIRE_MSG(body != nullptr, "no body tone-series in the walkthrough queue");
    if (!body) return;
    REQUIRE_MSG(body->events.size() == 9, "expected 9 events, got %zu", body->events.size());
    if (body->events.size() != 9) return;

    const double counts[9] = {1, 52, 98, 78, 77, 56, 27, 8, 1};
    // published table values; the count-98 row prints 652.2 upstream while
    // the stated linear scale yields 651.2, a documented 1.0 Hz discrepancy
    const double printed[9] = {224.4, 448.8, 652.2, 563.2, 558.8, 466.4, 338.8, 255.2, 224.4};
    int printedMatches = 0;
    for (int i = 0; i < 9; ++i) {
        const ToneEvent& ev = body->events[static_cast<std::size_t>(i)];
        REQUIRE_MSG(std::abs(ev.start - 0.5 * i) < 1e-9, "event %d start %.4f != %.1f", i,
                    ev.start, 0.5 * i);
        REQUIRE_MSG(std::abs(ev.duration - 0.5) < 1e-9, "event %d duration %.4f != 0.5", i,
                    ev.duration);
        double formula = 220.0 + 440.0 * counts[i] / 100.0;
        REQUIRE_MSG(std::abs(ev.pitch - formula) <= 0.05,
                    "event %d pitch %.3f departs from the formula value %.3f", i, ev.pitch,
                    formula);
        if (std::abs(ev.pitch - printed[i]) <= 0.1) ++printedMatches;
    }
    REQUIRE_MSG(printedMatches == 8, "expected 8 of 9 printed pitches to match, got %d",
                printedMatches);
}

void criterion3_tap_patterns(std::vector<std::string>& failures) {
    SonificationSpec spec = parse_spec_file(gallery("sparsity.json"));
    AudioQueue q = compile(spec, gallery_options()).queue;
    const ToneSpeechSeries* body = nullptr;
    for (const auto& sub : q.subQueues)
        if (sub.kind == SubQueue::Kind::ToneSpeechSeries) body = &sub.speechSeries;
    REQUIRE_MSG(body != nullptr, "sparsity did not compile to a tone-speech-series");
    if (!body) return;

    struct Expected {
        int taps;
        std::vector<double> segments;  // sound/pause durations in order
    };
    // [.19, .41] x 4 style patterns from the published sparsity table
    const std::vector<Expected> expected = {
        {6, {0.19, 0.172}},
        {4, {0.19, 0.413333}},
        {8, {0.19, 0.0685714}},
        {10, {0.19, 0.0111111}},
        {1, {0.905, 0.19, 0.905}},
    };

    std::size_t toneIdx = 0;
    for (const auto& item : body->items) {
        if (item.isSpeech) continue;
        REQUIRE_MSG(toneIdx < expected.size(), "more tones than expected");
        if (toneIdx >= expected.size()) return;
        const Expected& want = expected[toneIdx];
        REQUIRE_MSG(item.tone.tap.has_value(), "tone %zu lacks a tap pattern", toneIdx);
        if (!item.tone.tap) return;
        const TapPattern& tap = *item.tone.tap;
        REQUIRE_MSG(tap.taps == want.taps, "tone %zu taps %d != %d", toneIdx, tap.taps,
                    want.taps);
        if (want.taps == 1) {
            REQUIRE_MSG(tap.segments.size() == 3, "single tap should sit between pauses");
            for (std::size_t s = 0; s < std::min<std::size_t>(3, tap.segments.size()); ++s)
                REQUIRE_MSG(std::abs(tap.segments[s].duration - want.segments[s]) <= 0.02,
                            "tone %zu segment %zu duration %.4f != %.4f", toneIdx, s,
                            tap.segments[s].duration, want.segments[s]);
            REQUIRE_MSG(!tap.segments[0].sound && tap.segments[1].sound,
                        "single tap must be centered");
        } else {
            for (std::size_t s = 0; s < tap.segments.size(); ++s) {
                double want_d = tap.segments[s].sound ? want.segments[0] : want.segments[1];
                REQUIRE_MSG(std::abs(tap.segments[s].duration - want_d) <= 0.02,
                            "tone %zu segment %zu duration %.4f != %.4f", toneIdx, s,
                            tap.segments[s].duration, want_d);
            }
        }
        double total = tap.total_duration();
        REQUIRE_MSG(std::abs(total - 2.0) <= 0.02, "tone %zu pattern total %.4f != band 2",
                    toneIdx, total);
        ++toneIdx;
    }
    REQUIRE_MSG(toneIdx == 5, "expected 5 tap tones, got %zu", toneIdx);
}

void criterion4_repeat_semantics(std::vector<std::string>& failures) {
    SonificationSpec seqSpec = parse_spec_file(gallery("repeat-cars.json"));
    std::vector<SubQueue> subs = expand_repeat(seqSpec, seqSpec.stream, gallery_options());
    REQUIRE_MSG(subs.size() == 30, "all-sequence repeat yielded %zu sub-queues, not 30",
                subs.size());
    if (subs.size() == 30) {
        std::vector<std::string> expected;
        for (const char* origin : {"U.S.A.", "Japan", "Europe"})
            for (const char* cyl : {"3", "4", "5", "6", "8"})
                expected.push_back(std::string(origin) + ", " + cyl);
        for (std::size_t i = 0; i < 15; ++i) {
            const SubQueue& speech = subs[2 * i];
            const SubQueue& tone = subs[2 * i + 1];
            REQUIRE_MSG(speech.kind == SubQueue::Kind::Speech, "sub-queue %zu is not speech",
                        2 * i);
            REQUIRE_MSG(speech.speech.text == expected[i], "sub-queue %zu says \"%s\" not \"%s\"",
                        2 * i, speech.speech.text.c_str(), expected[i].c_str());
            REQUIRE_MSG(tone.kind == SubQueue::Kind::ToneSeries,
                        "sub-queue %zu is not a tone-series", 2 * i + 1);
        }
    }

    SonificationSpec ovSpec = parse_spec_file(gallery("repeat-cars-overlay.json"));
    std::vector<SubQueue> ovSubs = expand_repeat(ovSpec, ovSpec.stream, gallery_options());
    REQUIRE_MSG(ovSubs.size() == 6, "sequence+overlay repeat yielded %zu sub-queues, not 6",
                ovSubs.size());
    if (ovSubs.size() == 6) {
        const char* origins[] = {"U.S.A.", "Japan", "Europe"};
        for (int i = 0; i < 3; ++i) {
            const SubQueue& speech = ovSubs[static_cast<std::size_t>(2 * i)];
            const SubQueue& overlay = ovSubs[static_cast<std::size_t>(2 * i + 1)];
            REQUIRE_MSG(speech.speech.text == origins[i], "overlay part %d announces \"%s\"", i,
                        speech.speech.text.c_str());
            REQUIRE_MSG(overlay.kind == SubQueue::Kind::ToneOverlay,
                        "overlay part %d is not a tone-overlay", i);
            REQUIRE_MSG(overlay.layers.size() == 5, "overlay part %d has %zu layers, not 5", i,
                        overlay.layers.size());
        }
    }
}

void criterion5_beats_config(std::vector<std::string>& failures) {
    ConfigSpec cfg;
    cfg.timeUnit = "beats";
    cfg.bpm = 100.0;
    REQUIRE_MSG(beats_to_seconds(1.0, cfg) == 0.6, "one beat at bpm 100 must be exactly 0.6 s");
    REQUIRE_MSG(beats_to_seconds(3.0, cfg) == 1.8, "beat quantities scale by exactly 0.6");
    cfg.roundBeats = true;
    REQUIRE_MSG(beats_to_seconds(3.224, cfg) == 1.8,
                "roundBeats must map 3.224 beats to 3 beats");

    // end to end: a queue compiled under beats lands on the exact grid
    std::string doc = R"({
        "data": {"values": [{"b": 0, "p": 1}, {"b": 3, "p": 2}]},
        "encoding": {
            "time": {"field": "b", "type": "quantitative",
                     "scale": {"timing": "absolute", "domain": [0, 4],
                               "range": [0, 4], "band": 1}},
            "pitch": {"field": "p", "type": "quantitative"}
        },
        "config": {"timeUnit": "beats", "bpm": 100, "skipScaleSpeech": true,
                   "skipStartSpeech": true, "skipFinishSpeech": true}
    })";
    AudioQueue q = compile(parse_spec(doc)).queue;
    const ToneSeries* body = nth_body_series(q, 0);
    REQUIRE_MSG(body && body->events.size() == 2, "beats queue missing its two events");
    if (body && body->events.size() == 2) {
        REQUIRE_MSG(body->events[1].start == 1.8, "event at beat 3 starts at %.6f, not 1.8",
                    body->events[1].start);
        REQUIRE_MSG(body->events[0].duration == 0.6, "one-beat band renders %.6f s, not 0.6",
                    body->events[0].duration);
    }
}

void criterion6_scale_description(std::vector<std::string>& failures) {
    SonificationSpec spec = parse_spec_file(gallery("walkthrough.json"));
    AudioQueue q = compile(spec, gallery_options()).queue;

    int at = -1;
    for (std::size_t i = 0; i + 3 < q.subQueues.size(); ++i)
        if (q.subQueues[i].kind == SubQueue::Kind::Speech &&
            q.subQueues[i].speech.text ==
                "The count is mapped to pitch. The minimum domain value 0 is mapped to")
            at = static_cast<int>(i);
    REQUIRE_MSG(at >= 0, "minimum-domain legend sentence missing or not verbatim");
    if (at < 0) return;
    std::size_t i = static_cast<std::size_t>(at);

    REQUIRE_MSG(q.subQueues[i + 1].kind == SubQueue::Kind::ToneSeries,
                "legend tone missing after the minimum sentence");
    const ToneEvent& lo = q.subQueues[i + 1].series.events.at(0);
    REQUIRE_MSG(std::abs(lo.pitch - 220.0) < 1e-9, "minimum legend tone pitch %.3f != 220",
                lo.pitch);
    REQUIRE_MSG(std::abs(lo.duration - 0.3) < 1e-9, "legend tone duration %.3f != 0.3",
                lo.duration);

    REQUIRE_MSG(q.subQueues[i + 2].kind == SubQueue::Kind::Speech &&
                    q.subQueues[i + 2].speech.text ==
                        "and the maximum domain value 100 is mapped to",
                "maximum-domain legend sentence missing or not verbatim");
    const ToneEvent& hi = q.subQueues[i + 3].series.events.at(0);
    REQUIRE_MSG(std::abs(hi.pitch - 660.0) < 1e-9, "maximum legend tone pitch %.3f != 660",
                hi.pitch);
    REQUIRE_MSG(std::abs(hi.duration - 0.3) < 1e-9, "legend tone duration %.3f != 0.3",
                hi.duration);
}

void criterion7_kde_properties(std::vector<std::string>& failures) {
    DataTable penguins = load_table_file(gallery("data/penguins.json"));
    DensityOptions opts;
    opts.extent = {{2500.0, 6500.0}};
    opts.groupby = {"species", "island"};
    DataTable kde = transform_density(penguins, "bodyMass", opts);

    // five groups on the default 81-point grid
    REQUIRE_MSG(kde.row_count() % 81 == 0, "grid is not 81 points per group");
    std::size_t groups = kde.row_count() / 81;
    REQUIRE_MSG(groups == 5, "expected 5 groups, got %zu", groups);

    for (std::size_t r = 0; r < kde.row_count(); ++r) {
        double d = as_number(kde.at(r, "density"));
        if (!(d >= 0.0) || !std::isfinite(d)) {
            REQUIRE_MSG(false, "density at row %zu is %.6g", r, d);
            return;
        }
    }
    for (std::size_t g = 0; g < groups; ++g) {
        double integral = 0;
        for (std::size_t i = 1; i < 81; ++i) {
            std::size_t r0 = g * 81 + i - 1;
            std::size_t r1 = g * 81 + i;
            double dx = as_number(kde.at(r1, "value")) - as_number(kde.at(r0, "value"));
            integral += 0.5 * dx *
                        (as_number(kde.at(r0, "density")) + as_number(kde.at(r1, "density")));
        }
        REQUIRE_MSG(integral >= 0.9 && integral <= 1.0 + 1e-9,
                    "group %zu mass %.4f outside [0.9, 1.0]", g, integral);
    }
}

void criterion8_render_fidelity(std::vector<std::string>& failures) {
    // randomized 100-event series: non-overlapping events with varied pitch,
    // pan endpoints, and a few tap patterns
    std::mt19937 rng(2024);
    std::uniform_real_distribution<double> pitchDist(300.0, 3000.0);
    std::uniform_real_distribution<double> durDist(0.25, 0.6);
    std::uniform_real_distribution<double> panDist(-1.0, 1.0);

    AudioQueue q;
    SubQueue sub;
    sub.kind = SubQueue::Kind::ToneSeries;
    sub.series.instrument = "sine";
    double t = 0;
    std::vector<int> tapEvents;
    for (int i = 0; i < 100; ++i) {
        ToneEvent ev;
        ev.start = t;
        ev.duration = durDist(rng);
        ev.pitch = pitchDist(rng);
        if (i % 10 == 3)
            ev.pan = -1.0;
        else if (i % 10 == 7)
            ev.pan = 1.0;
        else
            ev.pan = panDist(rng);
        if (i % 25 == 11) {
            ev.duration = 2.0;
            ev.tap = tap_pattern(4, 2.0, 0.19, "start");
            tapEvents.push_back(i);
        }
        t += ev.duration;
        sub.series.events.push_back(ev);
    }
    q.subQueues.push_back(std::move(sub));

    RenderConfig cfg;
    cfg.speechPolicy = SpeechPolicy::Omit;
    RenderResult r = render(q, cfg);

    // total length within one frame of the queue duration
    const ToneSeries& series = q.subQueues[0].series;
    long long wantFrames = std::llround(series.duration() * cfg.sampleRate);
    REQUIRE_MSG(std::llabs(static_cast<long long>(r.buffer.frames()) - wantFrames) <= 1,
                "rendered %zu frames, queue implies %lld", r.buffer.frames(), wantFrames);

    auto mono = mono_of(r.buffer);
    int checkedPitch = 0;
    for (const ToneEvent& ev : series.events) {
        if (ev.duration < 0.25 || ev.tap) continue;
        std::size_t from = static_cast<std::size_t>(ev.start * cfg.sampleRate);
        std::size_t count = static_cast<std::size_t>(ev.duration * cfg.sampleRate);
        double peak = oracle::peak_frequency(mono, from, count, cfg.sampleRate);
        if (std::abs(peak - ev.pitch) > 0.01 * ev.pitch) {
            REQUIRE_MSG(false, "event at %.2f s: FFT peak %.2f vs pitch %.2f (>1%%)", ev.start,
                        peak, ev.pitch);
            if (failures.size() > 4) return;
        }
        ++checkedPitch;
    }
    REQUIRE_MSG(checkedPitch > 80, "only %d events were long enough to verify", checkedPitch);

    // pan endpoints silence the opposite channel below -40 dB
    for (const ToneEvent& ev : series.events) {
        if (ev.tap || (ev.pan != -1.0 && ev.pan != 1.0)) continue;
        std::size_t from = static_cast<std::size_t>((ev.start + 0.02) * cfg.sampleRate);
        std::size_t count = static_cast<std::size_t>((ev.duration - 0.04) * cfg.sampleRate);
        double loud = oracle::rms(ev.pan < 0 ? r.buffer.left : r.buffer.right, from, count);
        double quietSide = oracle::rms(ev.pan < 0 ? r.buffer.right : r.buffer.left, from, count);
        double db = 20.0 * std::log10((quietSide + 1e-12) / (loud + 1e-12));
        REQUIRE_MSG(db < -40.0, "pan %.0f leaks at %.1f dB", ev.pan, db);
    }

    // tap pauses carry under 1% of the neighboring sound RMS
    for (int idx : tapEvents) {
        const ToneEvent& ev = series.events[static_cast<std::size_t>(idx)];
        std::size_t base = static_cast<std::size_t>(ev.start * cfg.sampleRate);
        double cursor = 0;
        double soundRms = 0, pauseRms = 0;
        int soundSpans = 0, pauseSpans = 0;
        for (const auto& seg : ev.tap->segments) {
            std::size_t from = base + static_cast<std::size_t>((cursor + 0.02) * cfg.sampleRate);
            std::size_t count =
                static_cast<std::size_t>(std::max(0.0, seg.duration - 0.04) * cfg.sampleRate);
            if (count > 64) {
                double v = oracle::rms(mono, from, count);
                if (seg.sound) {
                    soundRms += v;
                    ++soundSpans;
                } else {
                    pauseRms += v;
                    ++pauseSpans;
                }
            }
            cursor += seg.duration;
        }
        if (soundSpans && pauseSpans) {
            soundRms /= soundSpans;
            pauseRms /= pauseSpans;
            REQUIRE_MSG(pauseRms < 0.01 * soundRms, "tap pauses carry %.4f%% of sound RMS",
                        100.0 * pauseRms / soundRms);
        }
    }
}

void criterion9_determinism(std::vector<std::string>& failures) {
    SonificationSpec spec = parse_spec_file(gallery("model-fit.json"));
    AudioQueue q = compile(spec, gallery_options()).queue;

    // the published three-point scales resolve with their endpoint values
    const ToneSeries* residuals = nth_body_series(q, 0);
    REQUIRE_MSG(residuals != nullptr, "residual stream missing");
    if (residuals) {
        REQUIRE_MSG(residuals->instrument == "fm1", "residual stream instrument is %s",
                    residuals->instrument.c_str());
        double panLo = 1e9, panHi = -1e9, modAtZero = 1e9, modHi = -1e9;
        for (const auto& ev : residuals->events) {
            panLo = std::min(panLo, ev.pan);
            panHi = std::max(panHi, ev.pan);
            modAtZero = std::min(modAtZero, ev.modulation);
            modHi = std::max(modHi, ev.modulation);
        }
        // data hits the +-2.477/2.495 extremes inside the +-2.5 domain
        REQUIRE_MSG(panLo <= -0.98 && panHi >= 0.98, "pan span [%.3f, %.3f] misses +-1", panLo,
                    panHi);
        REQUIRE_MSG(modHi <= 4.0 + 1e-9 && modHi >= 3.9, "modulation max %.4f misses 4", modHi);
        REQUIRE_MSG(modAtZero >= 0.001 - 1e-9 && modAtZero <= 0.05,
                    "modulation floor %.4f misses 0.001", modAtZero);
    }
    bool legendZero = false;
    for (std::size_t i = 0; i + 1 < q.subQueues.size(); ++i)
        if (q.subQueues[i].kind == SubQueue::Kind::Speech &&
            q.subQueues[i].speech.text == "0 (zero)" &&
            q.subQueues[i + 1].kind == SubQueue::Kind::ToneSeries &&
            std::abs(q.subQueues[i + 1].series.events.at(0).modulation - 0.001) < 1e-9)
            legendZero = true;
    REQUIRE_MSG(legendZero, "modulation legend does not play 0.001 at the zero breakpoint");

    RenderConfig cfg;
    cfg.noiseSeed = 42;
    RenderResult a = render(q, cfg);
    RenderResult b = render(q, cfg);
    auto bytesA = encode_wav(a.buffer, WavFormat::Pcm16);
    auto bytesB = encode_wav(b.buffer, WavFormat::Pcm16);
    REQUIRE_MSG(bytesA == bytesB, "same-seed renders differ");
}

double ref_eval(const Expr& e, double a, double b) {
    using Op = Expr::Op;
    switch (e.op) {
        case Op::Literal: return as_number(e.literal);
        case Op::Field: return e.field == "a" ? a : b;
        case Op::Neg: return -ref_eval(*e.lhs, a, b);
        case Op::Add: return ref_eval(*e.lhs, a, b) + ref_eval(*e.rhs, a, b);
        case Op::Sub: return ref_eval(*e.lhs, a, b) - ref_eval(*e.rhs, a, b);
        case Op::Mul: return ref_eval(*e.lhs, a, b) * ref_eval(*e.rhs, a, b);
        case Op::Div: return ref_eval(*e.lhs, a, b) / ref_eval(*e.rhs, a, b);
        default: return std::nan("");
    }
}

ExprPtr random_tree(std::mt19937& rng, int depth) {
    std::uniform_int_distribution<int> pick(0, depth <= 0 ? 2 : 6);
    switch (pick(rng)) {
        case 0: {
            std::uniform_real_distribution<double> lit(-5.0, 5.0);
            return Expr::make_literal(lit(rng));
        }
        case 1: return Expr::make_field("a");
        case 2: return Expr::make_field("b");
        case 3:
            return Expr::make_binary(Expr::Op::Add, random_tree(rng, depth - 1),
                                     random_tree(rng, depth - 1));
        case 4:
            return Expr::make_binary(Expr::Op::Sub, random_tree(rng, depth - 1),
                                     random_tree(rng, depth - 1));
        case 5:
            return Expr::make_binary(Expr::Op::Mul, random_tree(rng, depth - 1),
                                     random_tree(rng, depth - 1));
        default:
            return Expr::make_unary(Expr::Op::Neg, random_tree(rng, depth - 1));
    }
}

void criterion10_property_suites(std::vector<std::string>& failures) {
    // scale monotonicity / endpoint exactness / clamping over 1000 random scales
    {
        std::mt19937 rng(7);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        const char* channels[] = {"pitch", "pan", "loudness", "modulation", "detune"};
        for (int trial = 0; trial < 1000 && failures.size() < 5; ++trial) {
            const char* channelName = channels[trial % 5];
            const ChannelInfo* info = channel_info(channelName);
            double d0 = unit(rng) * 50.0;
            double d1 = d0 + 0.5 + unit(rng) * 100.0;
            double span = info->capMax - info->capMin;
            double r0 = info->capMin + unit(rng) * span;
            double r1 = info->capMin + unit(rng) * span;

            ChannelSpec ch;
            ch.kind = ChannelSpec::Kind::Dynamic;
            ch.channel = channelName;
            ch.field = "x";
            ch.encType = EncodingType::Quantitative;
            ch.encTypeExplicit = true;
            ch.scale.domain = {{Value{d0}, Value{d1}}};
            ch.scale.range = {{Value{r0}, Value{r1}}};
            bool negative = trial % 3 == 0;
            ch.scale.polarity = negative ? Polarity::Negative : Polarity::Positive;
            ResolvedScale scale = resolve_scale(ch, *ch.scale.domain);

            double lo = map_value(scale, Value{d0});
            double hi = map_value(scale, Value{d1});
            REQUIRE_MSG(std::abs(lo - (negative ? r1 : r0)) <= 1e-9,
                        "trial %d: f(domain.min) %.12f != %.12f", trial, lo, negative ? r1 : r0);
            REQUIRE_MSG(std::abs(hi - (negative ? r0 : r1)) <= 1e-9,
                        "trial %d: f(domain.max) %.12f != %.12f", trial, hi, negative ? r0 : r1);

            double prev = lo;
            bool increasing = hi >= lo;
            for (int step = 1; step <= 8; ++step) {
                double x = d0 + (d1 - d0) * step / 8.0;
                double y = map_value(scale, Value{x});
                REQUIRE_MSG(increasing ? y >= prev - 1e-9 : y <= prev + 1e-9,
                            "trial %d: not monotone at step %d", trial, step);
                REQUIRE_MSG(y >= info->capMin - 1e-9 && y <= info->capMax + 1e-9,
                            "trial %d: value %.4f escapes caps", trial, y);
                prev = y;
            }
            REQUIRE_MSG(std::abs(map_value(scale, Value{d0 - 10.0}) - lo) <= 1e-9,
                        "trial %d: below-domain values must clamp", trial);
            REQUIRE_MSG(std::abs(map_value(scale, Value{d1 + 10.0}) - hi) <= 1e-9,
                        "trial %d: above-domain values must clamp", trial);
        }
    }

    // normalize idempotence across the gallery corpus
    for (const char* name :
         {"walkthrough.json", "sparsity.json", "kde-penguins.json", "model-fit.json",
          "repeat-cars.json", "audio-narrative.json", "nine-rounds.json"}) {
        SonificationSpec spec = parse_spec_file(gallery(name));
        SonificationSpec once = normalize(spec);
        SonificationSpec twice = normalize(once);
        REQUIRE_MSG(serialize(once) == serialize(twice), "normalize is not idempotent on %s",
                    name);
    }

    // queue flatness: nesting never exceeds tone-overlay, whose layers are
    // plain tone series
    for (const char* name : {"kde-penguins.json", "model-fit.json",
                             "repeat-cars-overlay.json", "nine-rounds.json"}) {
        SonificationSpec spec = parse_spec_file(gallery(name));
        AudioQueue q = compile(spec, gallery_options()).queue;
        for (const auto& sub : q.subQueues) {
            if (sub.kind == SubQueue::Kind::ToneOverlay)
                REQUIRE_MSG(!sub.layers.empty(), "%s: overlay without layers", name);
            else
                REQUIRE_MSG(sub.layers.empty(), "%s: non-overlay holds layers", name);
        }
    }

    // expression evaluator vs the reference tree-walker on 1000 random trees
    {
        std::mt19937 rng(4242);
        std::uniform_real_distribution<double> val(-10.0, 10.0);
        int checked = 0;
        for (int i = 0; i < 1000 && failures.size() < 5; ++i) {
            ExprPtr tree = random_tree(rng, 4);
            double a = val(rng), b = val(rng);
            double expected = ref_eval(*tree, a, b);
            ExprPtr reparsed = parse_expr(expr_to_string(*tree));
            DataTable row;
            row.add_column("a", ColumnType::Number);
            row.add_column("b", ColumnType::Number);
            row.add_row({a, b});
            double got;
            try {
                got = as_number(eval_expr(*reparsed, Datum(row, 0)));
            } catch (const Error&) {
                continue;  // division-by-zero guard path
            }
            ++checked;
            REQUIRE_MSG(got == expected,
                        "expression %d: engine %.17g vs reference %.17g", i, got, expected);
        }
        REQUIRE_MSG(checked > 900, "only %d expressions were evaluable", checked);
    }
}

}  // namespace

int main() {
    std::vector<Criterion> criteria = {
        {1, "transform fidelity: cars histogram counts", 1.0, criterion1_transform_fidelity},
        {2, "walkthrough queue: nine events on the stated scales", 1.0,
         criterion2_walkthrough_queue},
        {3, "tap patterns: sparsity table reproduced", 1.0, criterion3_tap_patterns},
        {4, "repeat semantics: 30 nested and 6 overlaid sub-queues", 1.0,
         criterion4_repeat_semantics},
        {5, "beats config: x0.6 conversion and roundBeats", 1.0, criterion5_beats_config},
        {6, "scale description: walkthrough legend verbatim", 1.0,
         criterion6_scale_description},
        {7, "KDE properties: five groups, non-negative, near-unit mass", 2.0,
         criterion7_kde_properties},
        {8, "render fidelity: FFT peaks, pan endpoints, tap gating, length", 30.0,
         criterion8_render_fidelity},
        {9, "determinism: byte-identical renders, model-fit scale endpoints", 10.0,
         criterion9_determinism},
        {10, "property suites: scales, normalize, flatness, expressions", 60.0,
         criterion10_property_suites},
    };

    int failed = 0;
    for (const auto& criterion : criteria) {
        std::vector<std::string> failures;
        auto start = std::chrono::steady_clock::now();
        try {
            criterion.run(failures);
        } catch (const std::exception& e) {
            failures.push_back(std::string("exception: ") + e.what());
        }
        double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                             .count();
        if (elapsed > criterion.budgetSeconds) {
            std::ostringstream msg;
            msg << "runtime " << elapsed << " s exceeds the " << criterion.budgetSeconds
                << " s budget";
            failures.push_back(msg.str());
        }
        if (failures.empty()) {
            std::printf("[PASS] criterion %2d (%.2fs) %s\n", criterion.number, elapsed,
                        criterion.name.c_str());
        } else {
            ++failed;
            std::printf("[FAIL] criterion %2d (%.2fs) %s\n", criterion.number, elapsed,
                        criterion.name.c_str());
            for (const auto& f : failures) std::printf("       - %s\n", f.c_str());
        }
    }
    if (failed) std::printf("%d of %zu criteria failed\n", failed, criteria.size());
    return failed ? 1 : 0;
}
