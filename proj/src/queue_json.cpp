#include <iomanip>
#include <sstream>

#include "erie/queue.hpp"
#include "json.hpp"

namespace erie {

using ojson = nlohmann::ordered_json;

namespace {

const char* kind_name(SubQueue::Kind k) {
    switch (k) {
        case SubQueue::Kind::Speech: return "speech";
        case SubQueue::Kind::ToneSeries: return "tone-series";
        case SubQueue::Kind::ToneSpeechSeries: return "tone-speech-series";
        case SubQueue::Kind::ToneOverlay: return "tone-overlay";
    }
    return "?";
}

const char* ramp_name(RampMode r) {
    switch (r) {
        case RampMode::None: return "none";
        case RampMode::Linear: return "linear";
        case RampMode::Exponential: return "exponential";
        case RampMode::Default: return "default";
    }
    return "?";
}

ojson event_to_json(const ToneEvent& ev) {
    ojson j = ojson::object();
    j["start"] = ev.start;
    j["duration"] = ev.duration;
    j["pitch"] = ev.pitch;
    if (ev.detune != 0) j["detune"] = ev.detune;
    j["loudness"] = ev.loudness;
    j["pan"] = ev.pan;
    if (ev.modulation != 1) j["modulation"] = ev.modulation;
    if (ev.harmonicity != 1) j["harmonicity"] = ev.harmonicity;
    if (ev.postReverb != 0) j["postReverb"] = ev.postReverb;
    if (!ev.timbre.empty()) j["timbre"] = ev.timbre;
    if (ev.tap) {
        ojson segs = ojson::array();
        for (const auto& s : ev.tap->segments)
            segs.push_back({{"sound", s.sound}, {"duration", s.duration}});
        j["tap"] = {{"taps", ev.tap->taps}, {"segments", std::move(segs)}};
    }
    if (!ev.extra.empty()) {
        ojson extra = ojson::object();
        for (const auto& [k, v] : ev.extra) extra[k] = v;
        j["others"] = std::move(extra);
    }
    return j;
}

ToneEvent event_from_json(const ojson& j) {
    ToneEvent ev;
    ev.start = j.value("start", 0.0);
    ev.duration = j.value("duration", 0.0);
    ev.pitch = j.value("pitch", 523.25);
    ev.detune = j.value("detune", 0.0);
    ev.loudness = j.value("loudness", 1.0);
    ev.pan = j.value("pan", 0.0);
    ev.modulation = j.value("modulation", 1.0);
    ev.harmonicity = j.value("harmonicity", 1.0);
    ev.postReverb = j.value("postReverb", 0.0);
    ev.timbre = j.value("timbre", std::string());
    if (j.contains("tap")) {
        TapPattern tap;
        tap.taps = j.at("tap").value("taps", 0);
        for (const auto& s : j.at("tap").at("segments"))
            tap.segments.push_back({s.value("sound", false), s.value("duration", 0.0)});
        ev.tap = std::move(tap);
    }
    if (j.contains("others"))
        for (auto it = j.at("others").begin(); it != j.at("others").end(); ++it)
            ev.extra[it.key()] = it.value().get<double>();
    return ev;
}

ojson series_to_json(const ToneSeries& s) {
    ojson j = ojson::object();
    j["instrument"] = s.instrument;
    j["continued"] = s.continued;
    if (!s.filters.empty()) j["filters"] = s.filters;
    if (!s.ramps.empty()) {
        ojson r = ojson::object();
        for (const auto& [ch, mode] : s.ramps) r[ch] = ramp_name(mode);
        j["ramp"] = std::move(r);
    }
    ojson events = ojson::array();
    for (const auto& ev : s.events) events.push_back(event_to_json(ev));
    j["events"] = std::move(events);
    return j;
}

ToneSeries series_from_json(const ojson& j) {
    ToneSeries s;
    s.instrument = j.value("instrument", std::string("sine"));
    s.continued = j.value("continued", false);
    if (j.contains("filters"))
        for (const auto& f : j.at("filters")) s.filters.push_back(f.get<std::string>());
    if (j.contains("ramp"))
        for (auto it = j.at("ramp").begin(); it != j.at("ramp").end(); ++it) {
            std::string m = it.value().get<std::string>();
            RampMode mode = RampMode::Default;
            if (m == "none") mode = RampMode::None;
            else if (m == "linear") mode = RampMode::Linear;
            else if (m == "exponential") mode = RampMode::Exponential;
            s.ramps[it.key()] = mode;
        }
    if (j.contains("events"))
        for (const auto& e : j.at("events")) s.events.push_back(event_from_json(e));
    return s;
}

}  // namespace

std::string queue_to_json(const AudioQueue& queue, int indent) {
    ojson root = ojson::object();
    ojson items = ojson::array();
    for (const auto& q : queue.subQueues) {
        ojson j = ojson::object();
        j["type"] = kind_name(q.kind);
        if (!q.role.empty()) j["role"] = q.role;
        switch (q.kind) {
            case SubQueue::Kind::Speech:
                j["text"] = q.speech.text;
                j["rate"] = q.speech.rate;
                break;
            case SubQueue::Kind::ToneSeries: {
                ojson s = series_to_json(q.series);
                for (auto it = s.begin(); it != s.end(); ++it) j[it.key()] = it.value();
                break;
            }
            case SubQueue::Kind::ToneSpeechSeries: {
                j["instrument"] = q.speechSeries.instrument;
                if (!q.speechSeries.filters.empty()) j["filters"] = q.speechSeries.filters;
                ojson items2 = ojson::array();
                for (const auto& item : q.speechSeries.items) {
                    if (item.isSpeech)
                        items2.push_back(
                            {{"kind", "speech"}, {"text", item.speech.text}, {"rate", item.speech.rate}});
                    else {
                        ojson t = ojson::object();
                        t["kind"] = "tone";
                        t["event"] = event_to_json(item.tone);
                        items2.push_back(std::move(t));
                    }
                }
                j["items"] = std::move(items2);
                break;
            }
            case SubQueue::Kind::ToneOverlay: {
                ojson layers = ojson::array();
                for (const auto& layer : q.layers) layers.push_back(series_to_json(layer));
                j["layers"] = std::move(layers);
                break;
            }
        }
        items.push_back(std::move(j));
    }
    root["queue"] = std::move(items);
    ojson meta = ojson::object();
    if (!queue.title.empty()) meta["title"] = queue.title;
    meta["estimatedDuration"] = queue.estimatedDuration;
    if (!queue.synths.empty()) {
        ojson defs = ojson::array();
        for (const auto& s : queue.synths) {
            ojson d = {{"name", s.name}, {"type", s.kind}};
            d["carrierType"] = s.carrierWave;
            d["modulatorType"] = s.modulatorWave;
            d["modulationIndex"] = s.modulationIndex;
            d["harmonicity"] = s.harmonicity;
            defs.push_back(std::move(d));
        }
        meta["synth"] = std::move(defs);
    }
    if (!queue.waves.empty()) {
        ojson defs = ojson::array();
        for (const auto& w : queue.waves)
            defs.push_back({{"name", w.name}, {"sine", w.sine}, {"cosine", w.cosine}});
        meta["wave"] = std::move(defs);
    }
    if (!queue.samplings.empty()) {
        ojson defs = ojson::array();
        for (const auto& s : queue.samplings)
            defs.push_back({{"name", s.name}, {"url", s.url}, {"basePitch", s.basePitch}});
        meta["sampling"] = std::move(defs);
    }
    root["metadata"] = std::move(meta);
    return indent >= 0 ? root.dump(indent) + "\n" : root.dump();
}

AudioQueue queue_from_json(const std::string& jsonText) {
    ojson root;
    try {
        root = ojson::parse(jsonText);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(Error::Kind::Parse, std::string("queue JSON syntax error: ") + e.what());
    }
    if (!root.is_object() || !root.contains("queue"))
        throw Error(Error::Kind::Parse, "queue document needs a top-level \"queue\" list");
    AudioQueue out;
    for (const auto& j : root.at("queue")) {
        SubQueue q;
        std::string type = j.value("type", std::string());
        q.role = j.value("role", std::string());
        if (type == "speech") {
            q.kind = SubQueue::Kind::Speech;
            q.speech.text = j.value("text", std::string());
            q.speech.rate = j.value("rate", 1.0);
        } else if (type == "tone-series") {
            q.kind = SubQueue::Kind::ToneSeries;
            q.series = series_from_json(j);
        } else if (type == "tone-speech-series") {
            q.kind = SubQueue::Kind::ToneSpeechSeries;
            q.speechSeries.instrument = j.value("instrument", std::string("sine"));
            if (j.contains("filters"))
                for (const auto& f : j.at("filters"))
                    q.speechSeries.filters.push_back(f.get<std::string>());
            for (const auto& item : j.at("items")) {
                ToneSpeechItem tsi;
                if (item.value("kind", std::string()) == "speech") {
                    tsi.isSpeech = true;
                    tsi.speech.text = item.value("text", std::string());
                    tsi.speech.rate = item.value("rate", 1.0);
                } else {
                    tsi.tone = event_from_json(item.at("event"));
                }
                q.speechSeries.items.push_back(std::move(tsi));
            }
        } else if (type == "tone-overlay") {
            q.kind = SubQueue::Kind::ToneOverlay;
            for (const auto& layer : j.at("layers")) q.layers.push_back(series_from_json(layer));
        } else {
            throw Error(Error::Kind::Parse, "unknown sub-queue type \"" + type + "\"");
        }
        out.subQueues.push_back(std::move(q));
    }
    if (root.contains("metadata")) {
        const ojson& meta = root.at("metadata");
        out.title = meta.value("title", std::string());
        out.estimatedDuration = meta.value("estimatedDuration", 0.0);
        if (meta.contains("synth"))
            for (const auto& s : meta.at("synth")) {
                SynthDef def;
                def.name = s.value("name", std::string());
                def.kind = s.value("type", std::string("FM"));
                def.carrierWave = s.value("carrierType", std::string("sine"));
                def.modulatorWave = s.value("modulatorType", std::string("sine"));
                def.modulationIndex = s.value("modulationIndex", 1.0);
                def.harmonicity = s.value("harmonicity", 1.0);
                out.synths.push_back(std::move(def));
            }
        if (meta.contains("wave"))
            for (const auto& w : meta.at("wave")) {
                WaveDef def;
                def.name = w.value("name", std::string());
                for (const auto& c : w.at("sine")) def.sine.push_back(c.get<double>());
                for (const auto& c : w.at("cosine")) def.cosine.push_back(c.get<double>());
                out.waves.push_back(std::move(def));
            }
        if (meta.contains("sampling"))
            for (const auto& s : meta.at("sampling"))
                out.samplings.push_back({s.value("name", std::string()),
                                         s.value("url", std::string()),
                                         s.value("basePitch", 523.25)});
    }
    return out;
}

bool looks_like_queue_json(const std::string& jsonText) {
    auto doc = nlohmann::json::parse(jsonText, nullptr, false);
    return doc.is_object() && doc.contains("queue");
}

namespace {

std::string fmt(double v) {
    std::ostringstream out;
    out << std::setprecision(6) << v;
    return out.str();
}

std::string tap_text(const TapPattern& tap) {
    if (tap.taps == 0) return "No tapping";
    // [sound, pause] x n, or the single centered [pause, sound, pause]
    if (tap.segments.size() == 3 && !tap.segments[0].sound && tap.segments[1].sound) {
        return "[" + fmt(tap.segments[0].duration) + ", " + fmt(tap.segments[1].duration) +
               ", " + fmt(tap.segments[2].duration) + "]";
    }
    double sound = 0, pause = 0;
    for (const auto& s : tap.segments)
        if (s.sound)
            sound = s.duration;
        else
            pause = s.duration;
    return "[" + fmt(sound) + ", " + fmt(pause) + "] x " + std::to_string(tap.taps);
}

std::string event_text(const ToneEvent& ev, const std::string& instrument) {
    std::ostringstream out;
    out << "Start " << fmt(ev.start) << " | End " << fmt(ev.end()) << " | Duration "
        << fmt(ev.duration) << " | Timbre " << (ev.timbre.empty() ? instrument : ev.timbre)
        << " | Pitch " << fmt(ev.pitch) << " | Loudness " << fmt(ev.loudness) << " | Pan "
        << fmt(ev.pan);
    if (ev.modulation != 1) out << " | Modulation " << fmt(ev.modulation);
    if (ev.harmonicity != 1) out << " | Harmonicity " << fmt(ev.harmonicity);
    if (ev.detune != 0) out << " | Detune " << fmt(ev.detune);
    if (ev.postReverb != 0) out << " | Reverb " << fmt(ev.postReverb);
    if (ev.tap) out << " | Tapping " << tap_text(*ev.tap);
    for (const auto& [k, v] : ev.extra) out << " | " << k << " " << fmt(v);
    return out.str();
}

void print_series(std::ostringstream& out, const ToneSeries& series, const char* indent) {
    for (const auto& ev : series.events)
        out << indent << event_text(ev, series.instrument) << "\n";
}

}  // namespace

std::string queue_table(const AudioQueue& queue) {
    std::ostringstream out;
    out << "Q   Type                Sound\n";
    out << "--- ------------------- "
           "------------------------------------------------------------\n";
    for (std::size_t i = 0; i < queue.subQueues.size(); ++i) {
        const SubQueue& q = queue.subQueues[i];
        char num[16];
        std::snprintf(num, sizeof(num), "%-3zu ", i + 1);
        out << num;
        switch (q.kind) {
            case SubQueue::Kind::Speech:
                out << "Speech              " << q.speech.text << "\n";
                break;
            case SubQueue::Kind::ToneSeries:
                out << "Tone\n";
                print_series(out, q.series, "      ");
                break;
            case SubQueue::Kind::ToneSpeechSeries:
                out << "Tone-Speech\n";
                for (const auto& item : q.speechSeries.items) {
                    if (item.isSpeech)
                        out << "      Speech \"" << item.speech.text << "\"\n";
                    else
                        out << "      " << event_text(item.tone, q.speechSeries.instrument)
                            << "\n";
                }
                break;
            case SubQueue::Kind::ToneOverlay:
                out << "Tone-Overlay        (" << q.layers.size() << " layers)\n";
                for (std::size_t l = 0; l < q.layers.size(); ++l) {
                    out << "      Layer " << l + 1 << ":\n";
                    print_series(out, q.layers[l], "        ");
                }
                break;
        }
    }
    return out.str();
}

}  // namespace erie
