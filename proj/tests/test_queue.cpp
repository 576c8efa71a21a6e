#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "erie/queue.hpp"

using namespace erie;

namespace {

std::string gallery(const std::string& rel) { return std::string(ERIE_GALLERY_DIR) + "/" + rel; }

CompileOptions gallery_options() {
    CompileOptions opts;
    opts.baseDir = ERIE_GALLERY_DIR;
    return opts;
}

AudioQueue compile_gallery(const std::string& name) {
    SonificationSpec spec = parse_spec_file(gallery(name));
    return compile(spec, gallery_options()).queue;
}

std::vector<std::string> speech_texts(const AudioQueue& q) {
    std::vector<std::string> out;
    for (const auto& sub : q.subQueues)
        if (sub.kind == SubQueue::Kind::Speech) out.push_back(sub.speech.text);
    return out;
}

const SubQueue* first_body_series(const AudioQueue& q) {
    for (const auto& sub : q.subQueues)
        if (sub.kind == SubQueue::Kind::ToneSeries && sub.role == "body") return &sub;
    return nullptr;
}

}  // namespace

TEST_CASE("walkthrough compiles to the published core sub-queues") {
    AudioQueue q = compile_gallery("walkthrough.json");

    auto texts = speech_texts(q);
    REQUIRE(texts.size() >= 2);
    CHECK(texts[texts.size() - 2] == "Start playing.");
    CHECK(texts.back() == "Finished.");

    const SubQueue* body = first_body_series(q);
    REQUIRE(body);
    REQUIRE(body->series.events.size() == 9);
    const double pitches[9] = {224.4, 448.8, 651.2, 563.2, 558.8, 466.4, 338.8, 255.2, 224.4};
    for (int i = 0; i < 9; ++i) {
        const ToneEvent& ev = body->series.events[static_cast<std::size_t>(i)];
        CHECK(ev.start == doctest::Approx(0.5 * i).epsilon(1e-9));
        CHECK(ev.duration == doctest::Approx(0.5).epsilon(1e-9));
        CHECK(ev.pitch == doctest::Approx(pitches[i]).epsilon(1e-6));
    }
}

TEST_CASE("walkthrough legend speaks the published sentences with 0.3 s tones") {
    AudioQueue q = compile_gallery("walkthrough.json");

    int found = -1;
    for (std::size_t i = 0; i + 3 < q.subQueues.size(); ++i)
        if (q.subQueues[i].kind == SubQueue::Kind::Speech &&
            q.subQueues[i].speech.text ==
                "The count is mapped to pitch. The minimum domain value 0 is mapped to")
            found = static_cast<int>(i);
    REQUIRE(found >= 0);
    std::size_t at = static_cast<std::size_t>(found);

    REQUIRE(q.subQueues[at + 1].kind == SubQueue::Kind::ToneSeries);
    const ToneEvent& lo = q.subQueues[at + 1].series.events.at(0);
    CHECK(lo.pitch == doctest::Approx(220.0));
    CHECK(lo.duration == doctest::Approx(0.3));
    CHECK(lo.loudness == doctest::Approx(1.0));

    CHECK(q.subQueues[at + 2].speech.text == "and the maximum domain value 100 is mapped to");
    const ToneEvent& hi = q.subQueues[at + 3].series.events.at(0);
    CHECK(hi.pitch == doctest::Approx(660.0));
    CHECK(hi.duration == doctest::Approx(0.3));

    // the time description precedes the pitch legend
    bool timeDesc = false;
    for (const auto& t : speech_texts(q))
        if (t == "The miles-per-gallon is mapped to time. The duration of the stream is 4.5 "
                 "seconds.")
            timeDesc = true;
    CHECK(timeDesc);
}

TEST_CASE("skip flags and skipped descriptions strip all framing") {
    SonificationSpec spec = parse_spec_file(gallery("walkthrough.json"));
    spec.config.skipStartSpeech = true;
    spec.config.skipFinishSpeech = true;
    spec.config.skipScaleSpeech = true;
    AudioQueue q = compile(spec, gallery_options()).queue;
    REQUIRE(q.subQueues.size() == 1);
    CHECK(q.subQueues[0].kind == SubQueue::Kind::ToneSeries);
}

TEST_CASE("KDE compiles to five announced parts with shared scales") {
    AudioQueue q = compile_gallery("kde-penguins.json");
    auto texts = speech_texts(q);

    bool intro = false;
    for (const auto& t : texts)
        if (t == "This sonification sequence consists of 5 parts.") intro = true;
    CHECK(intro);

    std::vector<std::string> announcements;
    for (const auto& t : texts)
        if (t.rfind("Stream ", 0) == 0) announcements.push_back(t);
    REQUIRE(announcements.size() == 5);
    CHECK(announcements[0] == "Stream 1. Adelie and Torgersen.");
    CHECK(announcements[1] == "Stream 2. Adelie and Biscoe.");
    CHECK(announcements[2] == "Stream 3. Adelie and Dream.");
    CHECK(announcements[3] == "Stream 4. Chinstrap and Dream.");
    CHECK(announcements[4] == "Stream 5. Gentoo and Biscoe.");

    // one shared description block: the mapping header appears exactly once
    int headers = 0;
    for (const auto& t : texts)
        if (t.find("sound mappings") != std::string::npos) ++headers;
    CHECK(headers == 1);

    // five body series, each a continued sweep over the 81-point grid
    int bodies = 0;
    for (const auto& sub : q.subQueues)
        if (sub.kind == SubQueue::Kind::ToneSeries && sub.role == "body") {
            ++bodies;
            CHECK(sub.series.continued);
            CHECK(sub.series.events.size() == 81);
            CHECK(sub.series.events.front().pan == doctest::Approx(-1.0));
            CHECK(sub.series.events.back().pan == doctest::Approx(1.0));
            CHECK(sub.series.events.back().start == doctest::Approx(3.0));
        }
    CHECK(bodies == 5);
}

TEST_CASE("KDE pitch legend renders the domain through the .4 format") {
    AudioQueue q = compile_gallery("kde-penguins.json");
    bool found = false;
    for (const auto& t : speech_texts(q))
        if (t.find("is mapped to pitch. The domains values from ") != std::string::npos) {
            found = true;
            // .4 keeps at most four significant digits
            CHECK(t.find("The kernel density is mapped to pitch") == 0);
        }
    CHECK(found);
}

TEST_CASE("all-sequence repeat expands to thirty sub-queues in nested order") {
    SonificationSpec spec = parse_spec_file(gallery("repeat-cars.json"));
    std::vector<SubQueue> subs = expand_repeat(spec, spec.stream, gallery_options());

    REQUIRE(subs.size() == 30);
    CHECK(subs[0].kind == SubQueue::Kind::Speech);
    CHECK(subs[0].speech.text == "U.S.A., 3");
    CHECK(subs[1].kind == SubQueue::Kind::ToneSeries);
    CHECK(subs[28].speech.text == "Europe, 8");
    CHECK(subs[29].kind == SubQueue::Kind::ToneSeries);

    std::vector<std::string> labels;
    for (const auto& sub : subs)
        if (sub.kind == SubQueue::Kind::Speech) labels.push_back(sub.speech.text);
    std::vector<std::string> expected;
    for (const char* origin : {"U.S.A.", "Japan", "Europe"})
        for (const char* cyl : {"3", "4", "5", "6", "8"})
            expected.push_back(std::string(origin) + ", " + cyl);
    CHECK(labels == expected);
}

TEST_CASE("sequence+overlay repeat yields six sub-queues with five layers") {
    SonificationSpec spec = parse_spec_file(gallery("repeat-cars-overlay.json"));
    std::vector<SubQueue> subs = expand_repeat(spec, spec.stream, gallery_options());

    REQUIRE(subs.size() == 6);
    const char* origins[] = {"U.S.A.", "Japan", "Europe"};
    for (int i = 0; i < 3; ++i) {
        const SubQueue& speech = subs[static_cast<std::size_t>(2 * i)];
        const SubQueue& overlay = subs[static_cast<std::size_t>(2 * i + 1)];
        CHECK(speech.kind == SubQueue::Kind::Speech);
        CHECK(speech.speech.text == origins[i]);
        REQUIRE(overlay.kind == SubQueue::Kind::ToneOverlay);
        CHECK(overlay.layers.size() == 5);
        for (const auto& layer : overlay.layers) CHECK_FALSE(layer.events.empty());
    }
}

TEST_CASE("repeat on a single-valued field is the stream plus one value speech") {
    std::string doc = R"({
        "data": {"values": [{"g": "only", "x": 1}, {"g": "only", "x": 2}]},
        "encoding": {
            "time": {"field": "x", "type": "quantitative",
                     "scale": {"length": 1, "band": 0.5}},
            "pitch": {"field": "x", "type": "quantitative"},
            "repeat": {"field": ["g"], "type": "nominal", "speech": true}
        }
    })";
    SonificationSpec spec = parse_spec(doc);
    std::vector<SubQueue> subs = expand_repeat(spec, spec.stream);
    REQUIRE(subs.size() == 2);
    CHECK(subs[0].speech.text == "only");
    CHECK(subs[1].series.events.size() == 2);
}

TEST_CASE("speech-per-value cannot ride an outer overlay repeat") {
    std::string doc = R"({
        "data": {"values": [{"g": "a", "h": "x", "v": 1}, {"g": "b", "h": "y", "v": 2}]},
        "encoding": {
            "time": {"field": "v", "type": "quantitative", "scale": {"band": 0.3}},
            "repeat": {"field": ["g", "h"], "by": ["overlay", "sequence"], "speech": true}
        }
    })";
    SonificationSpec spec = parse_spec(doc);
    CHECK_THROWS_AS(expand_repeat(spec, spec.stream), Error);
}

TEST_CASE("model-fit sequence announces named streams with ordinal headers") {
    AudioQueue q = compile_gallery("model-fit.json");
    auto texts = speech_texts(q);

    CHECK(texts[0] ==
          "The residuals of a linear regression model of Sepal Length on Petal Length.");
    bool two = false, s1 = false, s2 = false, h1 = false, h2 = false, zero = false;
    for (const auto& t : texts) {
        if (t == "This sonification sequence consists of 2 parts.") two = true;
        if (t == "Stream 1. Residual plot.") s1 = true;
        if (t == "Stream 2. QQ plot.") s2 = true;
        if (t == "The first stream has the following sound mappings.") h1 = true;
        if (t == "The second stream has the following sound mappings.") h2 = true;
        if (t == "0 (zero)") zero = true;
    }
    CHECK(two);
    CHECK(s1);
    CHECK(s2);
    CHECK(h1);
    CHECK(h2);
    CHECK(zero);  // piecewise legends speak the zero breakpoint

    // the modulation legend plays 4 / 0.001 / 4 on the fm1 timbre
    bool modLegend = false;
    for (std::size_t i = 0; i + 1 < q.subQueues.size(); ++i) {
        if (q.subQueues[i].kind != SubQueue::Kind::Speech) continue;
        if (q.subQueues[i].speech.text.find("is mapped to modulation") == std::string::npos)
            continue;
        const SubQueue& tone = q.subQueues[i + 1];
        REQUIRE(tone.kind == SubQueue::Kind::ToneSeries);
        CHECK(tone.series.instrument == "fm1");
        CHECK(tone.series.events.at(0).modulation == doctest::Approx(4.0));
        modLegend = true;
    }
    CHECK(modLegend);
}

TEST_CASE("model-fit body events carry the three-point scale outputs") {
    AudioQueue q = compile_gallery("model-fit.json");
    const SubQueue* body = first_body_series(q);
    REQUIRE(body);
    CHECK(body->series.instrument == "fm1");
    REQUIRE(body->series.events.size() == 150);
    for (const auto& ev : body->series.events) {
        CHECK(ev.duration == doctest::Approx(0.15));
        CHECK(ev.pitch == doctest::Approx(523.25));  // unencoded default
        CHECK(ev.pan >= -1.0);
        CHECK(ev.pan <= 1.0);
        CHECK(ev.modulation >= 0.001 - 1e-12);
        CHECK(ev.modulation <= 4.0 + 1e-12);
    }
    CHECK(body->series.events.back().end() == doctest::Approx(5.0));
}

TEST_CASE("conditioned channels take the first matching case") {
    std::string doc = R"json({
        "data": {"values": [{"count": 98, "t": 0}, {"count": 40, "t": 1}]},
        "encoding": {
            "time": {"field": "t", "type": "quantitative",
                     "scale": {"length": 2, "band": 1}},
            "pitch": {"field": "count", "type": "quantitative",
                      "scale": {"domain": [0, 100], "range": [220, 660]}},
            "loudness": {"value": 0.5,
                         "condition": [{"test": "(datum.count>80)", "value": 1}]}
        }
    })json";
    AudioQueue q = compile(parse_spec(doc)).queue;
    const SubQueue* body = first_body_series(q);
    REQUIRE(body);
    REQUIRE(body->series.events.size() == 2);
    CHECK(body->series.events[0].loudness == doctest::Approx(1.0));
    CHECK(body->series.events[1].loudness == doctest::Approx(0.5));
}

TEST_CASE("beats config converts every time quantity by 60/bpm") {
    std::string doc = R"({
        "data": {"values": [{"b": 0, "p": 1}, {"b": 3, "p": 2}]},
        "encoding": {
            "time": {"field": "b", "type": "quantitative",
                     "scale": {"timing": "absolute", "domain": [0, 4],
                               "range": [0, 4], "band": 1}},
            "pitch": {"field": "p", "type": "quantitative"}
        },
        "config": {"timeUnit": "beats", "bpm": 100,
                   "skipScaleSpeech": true, "skipStartSpeech": true,
                   "skipFinishSpeech": true}
    })";
    AudioQueue q = compile(parse_spec(doc)).queue;
    const SubQueue* body = first_body_series(q);
    REQUIRE(body);
    CHECK(body->series.events[0].start == doctest::Approx(0.0));
    CHECK(body->series.events[0].duration == doctest::Approx(0.6));  // one beat
    CHECK(body->series.events[1].start == doctest::Approx(1.8));     // beat 3
}

TEST_CASE("apply_config on a queue: beats scaling and roundBeats") {
    AudioQueue q;
    SubQueue sub;
    sub.kind = SubQueue::Kind::ToneSeries;
    ToneEvent ev;
    ev.start = 3.224;
    ev.duration = 1.0;
    sub.series.events.push_back(ev);
    q.subQueues.push_back(sub);

    ConfigSpec cfg;
    cfg.timeUnit = "beats";
    cfg.bpm = 100.0;
    AudioQueue scaled = q;
    apply_config(scaled, cfg);
    CHECK(scaled.subQueues[0].series.events[0].start == doctest::Approx(3.224 * 0.6));

    cfg.roundBeats = true;  // 3.224 beats round to 3 before conversion
    AudioQueue rounded = q;
    apply_config(rounded, cfg);
    CHECK(rounded.subQueues[0].series.events[0].start == doctest::Approx(1.8));
}

TEST_CASE("forceSequenceScaleConsistency unions domains across streams") {
    std::string doc = R"({
        "sequence": [
            {"data": {"values": [{"x": 0, "t": 0}, {"x": 10, "t": 1}]},
             "encoding": {
                "time": {"field": "t", "type": "quantitative", "scale": {"band": 0.2}},
                "pitch": {"field": "x", "type": "quantitative",
                          "scale": {"range": [100, 200]}}}},
            {"data": {"values": [{"x": 5, "t": 0}, {"x": 20, "t": 1}]},
             "encoding": {
                "time": {"field": "t", "type": "quantitative", "scale": {"band": 0.2}},
                "pitch": {"field": "x", "type": "quantitative",
                          "scale": {"range": [100, 200]}}}}
        ],
        "config": {"forceSequenceScaleConsistency": {"pitch": true},
                   "skipScaleSpeech": true}
    })";
    AudioQueue q = compile(parse_spec(doc)).queue;
    std::vector<const ToneSeries*> bodies;
    for (const auto& sub : q.subQueues)
        if (sub.kind == SubQueue::Kind::ToneSeries && sub.role == "body")
            bodies.push_back(&sub.series);
    REQUIRE(bodies.size() == 2);
    // shared domain [0, 20] onto [100, 200]
    CHECK(bodies[0]->events[0].pitch == doctest::Approx(100.0));  // x = 0
    CHECK(bodies[0]->events[1].pitch == doctest::Approx(150.0));  // x = 10
    CHECK(bodies[1]->events[0].pitch == doctest::Approx(125.0));  // x = 5
    CHECK(bodies[1]->events[1].pitch == doctest::Approx(200.0));  // x = 20
}

TEST_CASE("tick layers overlay the stream at each interval") {
    TickDef tick;
    tick.name = "t";
    tick.interval = 1.0;
    ToneSeries ticks = emit_ticks(tick, 4.5);
    REQUIRE(ticks.events.size() == 5);  // 0, 1, 2, 3, 4
    CHECK(ticks.events[4].start == doctest::Approx(4.0));

    TickDef sparse;
    sparse.name = "s";
    sparse.interval = 10.0;
    ToneSeries one = emit_ticks(sparse, 4.5);
    REQUIRE(one.events.size() == 1);
    CHECK(one.events[0].start == 0.0);

    TickDef custom;
    custom.name = "c";
    custom.interval = 1.0;
    custom.pitch = 880.0;
    ToneSeries pitched = emit_ticks(custom, 2.0);
    for (const auto& ev : pitched.events) CHECK(ev.pitch == doctest::Approx(880.0));

    // a tick on the time channel wraps the body into a tone-overlay
    std::string doc = R"({
        "stream": {
            "data": {"values": [{"x": 0}, {"x": 2}]},
            "encoding": {
                "time": {"field": "x", "type": "quantitative",
                         "scale": {"timing": "absolute", "length": 3, "band": 1,
                                   "tick": "beat"}},
                "pitch": {"field": "x", "type": "quantitative"}
            }
        },
        "tick": [{"name": "beat", "interval": 1}]
    })";
    AudioQueue q = compile(parse_spec(doc)).queue;
    bool overlay = false;
    for (const auto& sub : q.subQueues)
        if (sub.kind == SubQueue::Kind::ToneOverlay && sub.role == "body") {
            overlay = true;
            CHECK(sub.layers.size() == 2);
        }
    CHECK(overlay);
}

TEST_CASE("queue nesting never exceeds tone-overlay depth") {
    for (const char* name :
         {"walkthrough.json", "sparsity.json", "kde-penguins.json", "model-fit.json",
          "repeat-cars-overlay.json", "nine-rounds.json", "audio-narrative.json"}) {
        AudioQueue q = compile_gallery(name);
        INFO(name);
        for (const auto& sub : q.subQueues) {
            if (sub.kind == SubQueue::Kind::ToneOverlay) {
                CHECK_FALSE(sub.layers.empty());
                // layers are plain series by type; nothing further to descend
            }
            if (sub.kind != SubQueue::Kind::ToneOverlay) CHECK(sub.layers.empty());
        }
    }
}

TEST_CASE("identical spec and data produce a byte-identical serialized queue") {
    AudioQueue a = compile_gallery("model-fit.json");
    AudioQueue b = compile_gallery("model-fit.json");
    CHECK(queue_to_json(a) == queue_to_json(b));
}

TEST_CASE("queue JSON round-trips through parse") {
    for (const char* name : {"walkthrough.json", "sparsity.json", "model-fit.json"}) {
        AudioQueue q = compile_gallery(name);
        std::string json = queue_to_json(q);
        AudioQueue back = queue_from_json(json);
        INFO(name);
        CHECK(queue_to_json(back) == json);
    }
}

TEST_CASE("sparsity compiles to a tone-speech-series with published taps") {
    AudioQueue q = compile_gallery("sparsity.json");
    const ToneSpeechSeries* body = nullptr;
    for (const auto& sub : q.subQueues)
        if (sub.kind == SubQueue::Kind::ToneSpeechSeries) body = &sub.speechSeries;
    REQUIRE(body);

    std::vector<std::string> names;
    std::vector<int> taps;
    for (const auto& item : body->items) {
        if (item.isSpeech)
            names.push_back(item.speech.text);
        else {
            REQUIRE(item.tone.tap.has_value());
            taps.push_back(item.tone.tap->taps);
            CHECK(item.tone.duration == doctest::Approx(2.0));
            CHECK(item.tone.pitch == doctest::Approx(523.25));
        }
    }
    CHECK(names == std::vector<std::string>{"A", "B", "C", "D", "E"});
    CHECK(taps == std::vector<int>{6, 4, 8, 10, 1});
}

TEST_CASE("interactive player mode prepends the stop instruction") {
    SonificationSpec spec = parse_spec_file(gallery("sparsity.json"));
    CompileOptions opts = gallery_options();
    opts.interactivePlayer = true;
    AudioQueue q = compile(spec, opts).queue;
    REQUIRE_FALSE(q.subQueues.empty());
    CHECK(q.subQueues[0].speech.text ==
          "To stop playing the sonification, press the X key.");

    AudioQueue offline = compile(spec, gallery_options()).queue;
    CHECK(offline.subQueues[0].speech.text != q.subQueues[0].speech.text);
}

TEST_CASE("custom scale description markup expands its tokens") {
    std::string doc = R"({
        "data": {"values": [{"x": 1, "t": 0}, {"x": 9, "t": 1}]},
        "encoding": {
            "time": {"field": "t", "type": "quantitative",
                     "scale": {"band": 0.2, "description": "skip"}},
            "pitch": {"field": "x", "type": "quantitative", "scale": {
                "description": "Values run from <domain.min> <sound> up to <domain.max> <sound> on <channel>."
            }}
        },
        "config": {"skipStartSpeech": true, "skipFinishSpeech": true}
    })";
    AudioQueue q = compile(parse_spec(doc)).queue;
    REQUIRE(q.subQueues.size() >= 5);
    // header, speech, tone, speech, tone, speech, body
    CHECK(q.subQueues[1].speech.text == "Values run from 1");
    CHECK(q.subQueues[2].kind == SubQueue::Kind::ToneSeries);
    CHECK(q.subQueues[3].speech.text == "up to 9");
    CHECK(q.subQueues[4].kind == SubQueue::Kind::ToneSeries);
    bool trailing = false;
    for (const auto& t : speech_texts(q))
        if (t == "on pitch.") trailing = true;
    CHECK(trailing);

    std::string bad = doc;
    bad.replace(bad.find("<channel>"), 9, "<nonsense>");
    CHECK_THROWS_AS(compile(parse_spec(bad)), Error);
}

TEST_CASE("repeat cardinality: sequence repeats multiply out distinct values") {
    SonificationSpec spec = parse_spec_file(gallery("repeat-cars.json"));
    std::vector<SubQueue> subs = expand_repeat(spec, spec.stream, gallery_options());
    std::size_t toneCount = 0;
    for (const auto& sub : subs)
        if (sub.kind == SubQueue::Kind::ToneSeries) ++toneCount;
    CHECK(toneCount == 3 * 5);
}

TEST_CASE("a dynamic timbre channel maps categories to instrument names") {
    std::string doc = R"({
        "data": {"values": [{"kind": "low", "t": 0}, {"kind": "high", "t": 1}]},
        "encoding": {
            "time": {"field": "t", "type": "quantitative",
                     "scale": {"timing": "absolute", "length": 2, "band": 1}},
            "timbre": {"field": "kind", "type": "nominal",
                       "scale": {"range": ["lowKick", "hihat"]}}
        },
        "config": {"skipScaleSpeech": true, "skipStartSpeech": true,
                   "skipFinishSpeech": true}
    })";
    AudioQueue q = compile(parse_spec(doc)).queue;
    const SubQueue* body = first_body_series(q);
    REQUIRE(body);
    REQUIRE(body->series.events.size() == 2);
    CHECK(body->series.events[0].timbre == "lowKick");
    CHECK(body->series.events[1].timbre == "hihat");
}

TEST_CASE("a duration channel supplies per-event extents") {
    std::string doc = R"({
        "data": {"values": [{"t": 0, "d": 0}, {"t": 2, "d": 10}]},
        "encoding": {
            "time": {"field": "t", "type": "quantitative",
                     "scale": {"timing": "absolute", "domain": [0, 4], "range": [0, 4]}},
            "duration": {"field": "d", "type": "quantitative",
                         "scale": {"domain": [0, 10], "range": [0.2, 1.0]}},
            "pitch": {"field": "t", "type": "quantitative"}
        },
        "config": {"skipScaleSpeech": true, "skipStartSpeech": true,
                   "skipFinishSpeech": true}
    })";
    AudioQueue q = compile(parse_spec(doc)).queue;
    const SubQueue* body = first_body_series(q);
    REQUIRE(body);
    REQUIRE(body->series.events.size() == 2);
    CHECK(body->series.events[0].duration == doctest::Approx(0.2));
    CHECK(body->series.events[1].duration == doctest::Approx(1.0));
    CHECK(body->series.events[1].start == doctest::Approx(2.0));
}

TEST_CASE("speechAfter interleaves behind each tone") {
    std::string doc = R"({
        "data": {"values": [{"name": "A", "v": 1}, {"name": "B", "v": 2}]},
        "encoding": {
            "time": {"field": "name", "type": "nominal",
                     "scale": {"timing": "relative", "band": 0.5}},
            "pitch": {"field": "v", "type": "quantitative"},
            "speechAfter": {"field": "name", "type": "nominal",
                            "scale": {"description": "skip"}}
        },
        "config": {"skipScaleSpeech": true, "skipStartSpeech": true,
                   "skipFinishSpeech": true}
    })";
    AudioQueue q = compile(parse_spec(doc)).queue;
    REQUIRE(q.subQueues.size() == 1);
    const auto& items = q.subQueues[0].speechSeries.items;
    REQUIRE(items.size() == 4);
    CHECK_FALSE(items[0].isSpeech);
    CHECK(items[1].isSpeech);
    CHECK(items[1].speech.text == "A");
    CHECK_FALSE(items[2].isSpeech);
    CHECK(items[3].speech.text == "B");
}

TEST_CASE("an overlay root compiles to one tone-overlay sub-queue") {
    std::string doc = R"({
        "overlay": [
            {"data": {"values": [{"t": 0, "p": 10}, {"t": 1, "p": 20}]},
             "encoding": {
                "time": {"field": "t", "type": "quantitative",
                         "scale": {"timing": "absolute", "length": 2, "band": 1,
                                   "description": "skip"}},
                "pitch": {"field": "p", "type": "quantitative",
                          "scale": {"description": "skip"}}}},
            {"data": {"values": [{"t": 0, "p": 90}, {"t": 1, "p": 70}]},
             "encoding": {
                "time": {"field": "t", "type": "quantitative",
                         "scale": {"timing": "absolute", "length": 2, "band": 1,
                                   "description": "skip"}},
                "pitch": {"field": "p", "type": "quantitative",
                          "scale": {"description": "skip"}}}}
        ],
        "config": {"skipStartSpeech": true, "skipFinishSpeech": true}
    })";
    AudioQueue q = compile(parse_spec(doc)).queue;
    REQUIRE(q.subQueues.size() == 1);
    REQUIRE(q.subQueues[0].kind == SubQueue::Kind::ToneOverlay);
    CHECK(q.subQueues[0].layers.size() == 2);
    CHECK(q.subQueues[0].layers[0].events.size() == 2);
}

TEST_CASE("tapCount maps the scaled value to a whole number of taps") {
    std::string doc = R"({
        "data": {"values": [{"n": 0, "g": "a"}, {"n": 7, "g": "b"}]},
        "encoding": {
            "time": {"field": "g", "type": "nominal",
                     "scale": {"timing": "relative"}},
            "tapCount": {"field": "n", "type": "quantitative",
                         "scale": {"domain": [0, 10], "range": [0, 10], "band": 1.5}}
        },
        "config": {"skipScaleSpeech": true, "skipStartSpeech": true,
                   "skipFinishSpeech": true}
    })";
    AudioQueue q = compile(parse_spec(doc)).queue;
    const SubQueue* body = first_body_series(q);
    REQUIRE(body);
    REQUIRE(body->series.events.size() == 2);
    REQUIRE(body->series.events[0].tap.has_value());
    CHECK(body->series.events[0].tap->taps == 0);
    CHECK(body->series.events[1].tap->taps == 7);
    CHECK(body->series.events[1].tap->total_duration() == doctest::Approx(1.5).epsilon(0.02));
}
