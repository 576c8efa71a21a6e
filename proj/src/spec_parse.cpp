#include <fstream>
#include <sstream>

#include "erie/channels.hpp"
#include "erie/spec.hpp"
#include "json.hpp"

namespace erie {

using json = nlohmann::ordered_json;

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& msg) {
    throw Error(Error::Kind::Parse, where.empty() ? msg : where + ": " + msg);
}

Value json_to_value(const json& j) {
    if (j.is_null()) return Value{};
    if (j.is_number()) return j.get<double>();
    if (j.is_boolean()) return j.get<bool>();
    if (j.is_string()) return j.get<std::string>();
    throw Error(Error::Kind::Parse, "expected a scalar value, got " + j.dump());
}

double expect_number(const json& j, const std::string& where) {
    if (!j.is_number()) fail(where, "expected a number, got " + j.dump());
    return j.get<double>();
}

bool expect_bool(const json& j, const std::string& where) {
    if (!j.is_boolean()) fail(where, "expected a boolean, got " + j.dump());
    return j.get<bool>();
}

std::string expect_string(const json& j, const std::string& where) {
    if (!j.is_string()) fail(where, "expected a string, got " + j.dump());
    return j.get<std::string>();
}

std::vector<std::string> string_list(const json& j, const std::string& where) {
    std::vector<std::string> out;
    if (j.is_string()) {
        out.push_back(j.get<std::string>());
        return out;
    }
    if (!j.is_array()) fail(where, "expected a string or list of strings");
    for (const auto& item : j) out.push_back(expect_string(item, where));
    return out;
}

std::vector<Value> value_list(const json& j, const std::string& where) {
    if (!j.is_array()) fail(where, "expected a list");
    std::vector<Value> out;
    for (const auto& item : j) out.push_back(json_to_value(item));
    return out;
}

// camelCase key with hyphen/underscore spellings accepted
std::string camel_key(const std::string& key) {
    std::string out;
    bool up = false;
    for (char c : key) {
        if (c == '-' || c == '_') {
            up = true;
            continue;
        }
        out += up ? static_cast<char>(std::toupper(static_cast<unsigned char>(c))) : c;
        up = false;
    }
    return out;
}

struct SpecParser {
    ValidationReport* warnings;

    void warn(const std::string& path, const std::string& msg) {
        if (warnings) warnings->warn(path, msg);
    }

    DataSource parse_data(const json& j, const std::string& where) {
        DataSource src;
        if (j.is_string()) {  // shorthand: dataset name
            src.kind = DataSource::Kind::Named;
            src.name = j.get<std::string>();
            return src;
        }
        if (j.is_array()) {  // shorthand: inline rows
            src.kind = DataSource::Kind::Inline;
            src.inlineValues = load_json_table(j.dump());
            return src;
        }
        if (!j.is_object()) fail(where, "data must be an object, name, or row list");
        if (j.contains("url")) {
            src.kind = DataSource::Kind::Url;
            src.url = expect_string(j.at("url"), where + ".url");
        } else if (j.contains("values")) {
            src.kind = DataSource::Kind::Inline;
            src.inlineValues = load_json_table(j.at("values").dump());
        } else if (j.contains("name")) {
            src.kind = DataSource::Kind::Named;
            src.name = expect_string(j.at("name"), where + ".name");
        } else {
            fail(where, "data needs one of url / values / name");
        }
        return src;
    }

    TransformStep parse_transform(const json& j, const std::string& where) {
        if (!j.is_object()) fail(where, "transform step must be an object");
        TransformStep step;
        if (j.contains("bin")) {
            step.kind = TransformStep::Kind::Bin;
            step.field = expect_string(j.at("bin"), where + ".bin");
            step.as = j.contains("as") ? expect_string(j.at("as"), where + ".as")
                                       : step.field + "__bin";
            step.end = j.contains("end") ? expect_string(j.at("end"), where + ".end")
                                         : step.as + "_end";
            if (j.contains("nice")) step.nice = expect_bool(j.at("nice"), where + ".nice");
            if (j.contains("auto")) step.nice = expect_bool(j.at("auto"), where + ".auto");
            if (j.contains("step")) step.step = expect_number(j.at("step"), where + ".step");
            if (j.contains("maxbins"))
                step.maxbins = static_cast<int>(expect_number(j.at("maxbins"), where));
        } else if (j.contains("aggregate")) {
            step.kind = TransformStep::Kind::Aggregate;
            const json& ops = j.at("aggregate");
            if (!ops.is_array()) fail(where, "aggregate must be a list of ops");
            for (const auto& op : ops) {
                AggregateOp a;
                a.op = expect_string(op.at("op"), where + ".op");
                if (op.contains("field"))
                    a.field = expect_string(op.at("field"), where + ".field");
                a.as = op.contains("as") ? expect_string(op.at("as"), where + ".as") : a.op;
                step.aggregateOps.push_back(std::move(a));
            }
            if (j.contains("groupby"))
                step.groupby = string_list(j.at("groupby"), where + ".groupby");
        } else if (j.contains("filter")) {
            step.kind = TransformStep::Kind::Filter;
            step.expr = expect_string(j.at("filter"), where + ".filter");
        } else if (j.contains("calculate")) {
            step.kind = TransformStep::Kind::Calculate;
            step.expr = expect_string(j.at("calculate"), where + ".calculate");
            step.as = expect_string(j.at("as"), where + ".as");
        } else if (j.contains("density")) {
            step.kind = TransformStep::Kind::Density;
            step.field = expect_string(j.at("density"), where + ".density");
            if (j.contains("extent")) {
                auto ext = value_list(j.at("extent"), where + ".extent");
                if (ext.size() != 2 || !is_number(ext[0]) || !is_number(ext[1]))
                    fail(where, "density extent must be [min, max]");
                step.extent = {std::get<double>(ext[0]), std::get<double>(ext[1])};
            }
            if (j.contains("bandwidth"))
                step.bandwidth = expect_number(j.at("bandwidth"), where + ".bandwidth");
            if (j.contains("steps"))
                step.steps = static_cast<int>(expect_number(j.at("steps"), where + ".steps"));
            if (j.contains("groupby"))
                step.groupby = string_list(j.at("groupby"), where + ".groupby");
        } else if (j.contains("fold")) {
            step.kind = TransformStep::Kind::Fold;
            step.foldFields = string_list(j.at("fold"), where + ".fold");
            if (j.contains("as")) {
                auto names = string_list(j.at("as"), where + ".as");
                if (names.size() != 2) fail(where, "fold \"as\" must name [key, value]");
                step.keyName = names[0];
                step.valueName = names[1];
            }
        } else {
            fail(where, "unrecognized transform step: " + j.dump());
        }
        return step;
    }

    std::vector<TransformStep> parse_transforms(const json& j, const std::string& where) {
        if (!j.is_array()) fail(where, "transform must be a list");
        std::vector<TransformStep> out;
        for (std::size_t i = 0; i < j.size(); ++i)
            out.push_back(parse_transform(j[i], where + "[" + std::to_string(i) + "]"));
        return out;
    }

    ToneSpec parse_tone(const json& j, const std::string& where) {
        ToneSpec tone;
        if (!j.is_object()) fail(where, "tone must be an object");
        for (auto it = j.begin(); it != j.end(); ++it) {
            const std::string key = camel_key(it.key());
            if (key == "type")
                tone.type = expect_string(it.value(), where + ".type");
            else if (key == "continued")
                tone.continued = expect_bool(it.value(), where + ".continued");
            else if (key == "filter" || key == "filters")
                tone.filters = string_list(it.value(), where + ".filter");
            else
                fail(where, "unknown tone key \"" + it.key() + "\"");
        }
        if (tone.type == "default") tone.type = "sine";
        return tone;
    }

    TickDef parse_tick(const json& j, const std::string& where, bool needName) {
        TickDef tick;
        if (!j.is_object()) fail(where, "tick must be an object");
        for (auto it = j.begin(); it != j.end(); ++it) {
            const std::string key = camel_key(it.key());
            if (key == "name")
                tick.name = expect_string(it.value(), where + ".name");
            else if (key == "interval")
                tick.interval = expect_number(it.value(), where + ".interval");
            else if (key == "pitch")
                tick.pitch = expect_number(it.value(), where + ".pitch");
            else if (key == "duration")
                tick.duration = expect_number(it.value(), where + ".duration");
            else if (key == "loudness")
                tick.loudness = expect_number(it.value(), where + ".loudness");
            else if (key == "type" || key == "instrument")
                tick.instrument = expect_string(it.value(), where + ".type");
            else
                fail(where, "unknown tick key \"" + it.key() + "\"");
        }
        if (needName && tick.name.empty()) fail(where, "tick needs a name");
        return tick;
    }

    ScaleSpec parse_scale(const json& j, const std::string& where) {
        ScaleSpec scale;
        if (!j.is_object()) fail(where, "scale must be an object");
        for (auto it = j.begin(); it != j.end(); ++it) {
            const std::string key = camel_key(it.key());
            const json& v = it.value();
            if (key == "domain")
                scale.domain = value_list(v, where + ".domain");
            else if (key == "range")
                scale.range = value_list(v, where + ".range");
            else if (key == "maxDistinct")
                scale.maxDistinct = expect_bool(v, where + ".maxDistinct");
            else if (key == "times")
                scale.times = expect_number(v, where + ".times");
            else if (key == "description")
                scale.description = expect_string(v, where + ".description");
            else if (key == "polarity") {
                std::string p = expect_string(v, where + ".polarity");
                if (p == "positive")
                    scale.polarity = Polarity::Positive;
                else if (p == "negative")
                    scale.polarity = Polarity::Negative;
                else
                    fail(where, "polarity must be positive or negative, got \"" + p + "\"");
            } else if (key == "scaleType") {
                std::string t = expect_string(v, where + ".scaleType");
                if (t == "linear")
                    scale.scaleType = CurveType::Linear;
                else if (t == "log")
                    scale.scaleType = CurveType::Log;
                else if (t == "pow" || t == "exp" || t == "exponential")
                    scale.scaleType = CurveType::Pow;
                else if (t == "sqrt" || t == "squareRoot")
                    scale.scaleType = CurveType::Sqrt;
                else if (t == "symlog")
                    scale.scaleType = CurveType::Symlog;
                else
                    fail(where, "unknown scale type \"" + t + "\"");
            } else if (key == "exponent")
                scale.exponent = expect_number(v, where + ".exponent");
            else if (key == "constant")
                scale.constant = expect_number(v, where + ".constant");
            else if (key == "zero")
                scale.zero = expect_bool(v, where + ".zero");
            else if (key == "timing") {
                std::string t = expect_string(v, where + ".timing");
                if (t == "absolute")
                    scale.timing = Timing::Absolute;
                else if (t == "relative")
                    scale.timing = Timing::Relative;
                else if (t == "simultaneous")
                    scale.timing = Timing::Simultaneous;
                else
                    fail(where, "unknown timing \"" + t + "\"");
            } else if (key == "length")
                scale.length = expect_number(v, where + ".length");
            else if (key == "band")
                scale.band = expect_number(v, where + ".band");
            else if (key == "title")
                scale.title = expect_string(v, where + ".title");
            else if (key == "roundToNote")
                scale.roundToNote = expect_bool(v, where + ".roundToNote");
            else if (key == "singleTappingPosition") {
                std::string p = expect_string(v, where + ".singleTappingPosition");
                if (p != "start" && p != "middle" && p != "end")
                    fail(where, "singleTappingPosition must be start/middle/end");
                scale.singleTappingPosition = p;
            } else if (key == "tapDuration")
                scale.tapDuration = expect_number(v, where + ".tapDuration");
            else if (key == "tick") {
                if (v.is_string())
                    scale.tickName = v.get<std::string>();
                else
                    scale.tickInline = parse_tick(v, where + ".tick", false);
            } else
                fail(where, "unknown scale key \"" + it.key() + "\"");
        }
        return scale;
    }

    ChannelSpec parse_channel(const std::string& rawName, const json& j,
                              const std::string& where) {
        auto canonical = canonical_channel_name(rawName);
        if (!canonical) {
            std::string valid;
            for (const auto& n : known_channel_names()) {
                if (!valid.empty()) valid += ", ";
                valid += n;
            }
            fail(where, "unknown channel \"" + rawName + "\"; valid channels: " + valid);
        }
        ChannelSpec ch;
        ch.channel = *canonical;
        if (!j.is_object()) fail(where, "channel must be an object");

        bool hasField = false, hasValue = false, hasCondition = false;
        for (auto it = j.begin(); it != j.end(); ++it) {
            const std::string key = camel_key(it.key());
            const json& v = it.value();
            if (key == "field") {
                hasField = true;
                if (ch.channel == "repeat")
                    ch.repeatFields = string_list(v, where + ".field");
                else
                    ch.field = expect_string(v, where + ".field");
            } else if (key == "type") {
                std::string t = expect_string(v, where + ".type");
                ch.encTypeExplicit = true;
                if (t == "quantitative")
                    ch.encType = EncodingType::Quantitative;
                else if (t == "ordinal")
                    ch.encType = EncodingType::Ordinal;
                else if (t == "nominal")
                    ch.encType = EncodingType::Nominal;
                else if (t == "temporal")
                    ch.encType = EncodingType::Temporal;
                else
                    fail(where, "unknown encoding type \"" + t + "\"");
            } else if (key == "scale")
                ch.scale = parse_scale(v, where + ".scale");
            else if (key == "ramp") {
                std::string r = expect_string(v, where + ".ramp");
                if (r == "none" || r == "abrupt")
                    ch.ramp = RampMode::None;
                else if (r == "linear")
                    ch.ramp = RampMode::Linear;
                else if (r == "exponential")
                    ch.ramp = RampMode::Exponential;
                else
                    fail(where, "unknown ramp \"" + r + "\"");
            } else if (key == "value") {
                hasValue = true;
                ch.value = json_to_value(v);
                ch.fallback = ch.value;
            } else if (key == "condition") {
                hasCondition = true;
                if (!v.is_array()) fail(where, "condition must be a list");
                for (const auto& c : v) {
                    ConditionCase cc;
                    cc.test = expect_string(c.at("test"), where + ".condition.test");
                    cc.value = json_to_value(c.at("value"));
                    ch.conditions.push_back(std::move(cc));
                }
            } else if (key == "format")
                ch.format = expect_string(v, where + ".format");
            else if (key == "speech")
                ch.repeatSpeech = expect_bool(v, where + ".speech");
            else if (key == "by")
                ch.repeatBy = string_list(v, where + ".by");
            else if (key == "aggregate")
                ch.aggregateInline = expect_string(v, where + ".aggregate");
            else if (key == "bin") {
                if (v.is_boolean())
                    ch.binInline = v.get<bool>();
                else if (v.is_object()) {
                    ch.binInline = true;
                    if (v.contains("step"))
                        ch.binStep = expect_number(v.at("step"), where + ".bin.step");
                } else
                    fail(where, "bin must be true/false or an options object");
            } else
                fail(where, "unknown channel key \"" + it.key() + "\"");
        }

        if (hasCondition)
            ch.kind = ChannelSpec::Kind::Conditioned;
        else if (hasValue && !hasField)
            ch.kind = ChannelSpec::Kind::Static;
        else
            ch.kind = ChannelSpec::Kind::Dynamic;
        return ch;
    }

    ConfigSpec parse_config(const json& j, const std::string& where) {
        ConfigSpec cfg;
        if (!j.is_object()) fail(where, "config must be an object");
        for (auto it = j.begin(); it != j.end(); ++it) {
            const std::string key = camel_key(it.key());
            const json& v = it.value();
            if (key == "timeUnit")
                cfg.timeUnit = expect_string(v, where + ".timeUnit");
            else if (key == "bpm")
                cfg.bpm = expect_number(v, where + ".bpm");
            else if (key == "roundBeats")
                cfg.roundBeats = expect_bool(v, where + ".roundBeats");
            else if (key == "speechRate")
                cfg.speechRate = expect_number(v, where + ".speechRate");
            else if (key == "skipTitle")
                cfg.skipTitle = expect_bool(v, where + ".skipTitle");
            else if (key == "skipDescription")
                cfg.skipDescription = expect_bool(v, where + ".skipDescription");
            else if (key == "skipScaleSpeech")
                cfg.skipScaleSpeech = expect_bool(v, where + ".skipScaleSpeech");
            else if (key == "skipStartSpeech")
                cfg.skipStartSpeech = expect_bool(v, where + ".skipStartSpeech");
            else if (key == "skipFinishSpeech")
                cfg.skipFinishSpeech = expect_bool(v, where + ".skipFinishSpeech");
            else if (key == "forceSequenceScaleConsistency") {
                if (!v.is_object()) fail(where, "forceSequenceScaleConsistency must map channels to booleans");
                for (auto f = v.begin(); f != v.end(); ++f) {
                    auto name = canonical_channel_name(f.key());
                    if (!name) fail(where, "unknown channel in forceSequenceScaleConsistency: " + f.key());
                    cfg.forceSequenceScaleConsistency[*name] =
                        expect_bool(f.value(), where + ".forceSequenceScaleConsistency");
                }
            } else
                warn(where, "unknown config key \"" + it.key() + "\" ignored");
        }
        if (cfg.timeUnit && *cfg.timeUnit != "seconds" && *cfg.timeUnit != "beats")
            fail(where, "timeUnit must be seconds or beats");
        return cfg;
    }

    Stream parse_stream(const json& j, const std::string& where) {
        Stream s;
        if (!j.is_object()) fail(where, "stream must be an object");
        for (auto it = j.begin(); it != j.end(); ++it) {
            const std::string& key = it.key();
            const json& v = it.value();
            if (key == "data")
                s.data = parse_data(v, where + ".data");
            else if (key == "transform")
                s.transforms = parse_transforms(v, where + ".transform");
            else if (key == "tone")
                s.tone = parse_tone(v, where + ".tone");
            else if (key == "encoding") {
                if (!v.is_object()) fail(where, "encoding must be an object");
                for (auto ch = v.begin(); ch != v.end(); ++ch) {
                    ChannelSpec channel =
                        parse_channel(ch.key(), ch.value(), where + ".encoding." + ch.key());
                    for (const auto& existing : s.encoding)
                        if (existing.channel == channel.channel)
                            fail(where, "duplicate channel \"" + channel.channel + "\"");
                    s.encoding.push_back(std::move(channel));
                }
            } else if (key == "name")
                s.name = expect_string(v, where + ".name");
            else if (key == "title")
                s.title = expect_string(v, where + ".title");
            else if (key == "description")
                s.description = expect_string(v, where + ".description");
            else if (key == "config")
                s.config = parse_config(v, where + ".config");
            else
                fail(where, "unknown stream key \"" + key + "\"");
        }
        return s;
    }

    Overlay parse_overlay(const json& j, const std::string& where) {
        Overlay o;
        if (j.is_array()) {
            for (std::size_t i = 0; i < j.size(); ++i)
                o.streams.push_back(parse_stream(j[i], where + "[" + std::to_string(i) + "]"));
            return o;
        }
        if (j.is_object() && j.contains("overlay")) {
            if (j.contains("name")) o.name = expect_string(j.at("name"), where + ".name");
            return parse_overlay_into(j.at("overlay"), where, std::move(o));
        }
        fail(where, "overlay must be a list of streams");
    }

    Overlay parse_overlay_into(const json& j, const std::string& where, Overlay o) {
        if (!j.is_array()) fail(where, "overlay must be a list of streams");
        for (std::size_t i = 0; i < j.size(); ++i)
            o.streams.push_back(parse_stream(j[i], where + "[" + std::to_string(i) + "]"));
        return o;
    }

    SeqItem parse_seq_item(const json& j, const std::string& where) {
        SeqItem item;
        if (j.is_object() && j.contains("overlay")) {
            item.kind = SeqItem::Kind::Overlay;
            item.overlay = parse_overlay(j, where);
            return item;
        }
        if (j.is_object() && j.contains("sequence")) {
            item.kind = SeqItem::Kind::Sequence;
            const json& inner = j.at("sequence");
            if (!inner.is_array()) fail(where, "sequence must be a list");
            for (std::size_t i = 0; i < inner.size(); ++i)
                item.sequence.push_back(
                    parse_seq_item(inner[i], where + "[" + std::to_string(i) + "]"));
            return item;
        }
        item.kind = SeqItem::Kind::Stream;
        item.stream = parse_stream(j, where);
        return item;
    }

    SonificationSpec parse_root(const json& doc) {
        SonificationSpec spec;
        if (!doc.is_object())
            fail("", "spec document must be a JSON object");

        bool hasStream = doc.contains("stream");
        bool hasSequence = doc.contains("sequence");
        bool hasOverlay = doc.contains("overlay");
        bool inlineStream = doc.contains("encoding") || doc.contains("data") || doc.contains("tone");
        int rootCount = (hasStream ? 1 : 0) + (hasSequence ? 1 : 0) + (hasOverlay ? 1 : 0);
        if (rootCount > 1) fail("", "spec must have exactly one of stream/sequence/overlay");
        if (rootCount == 0 && !inlineStream)
            fail("", "missing root stream/sequence/overlay");
        if (rootCount == 1 && inlineStream)
            fail("", "stream keys (data/tone/encoding) cannot sit beside a stream/sequence/overlay root");

        static const std::vector<std::string> streamKeys = {
            "data", "transform", "tone", "encoding", "name", "title", "description", "config"};
        static const std::vector<std::string> resourceKeys = {
            "dataset", "datasets", "synth", "synths", "wave", "waves",
            "sampling", "samplings", "tick", "ticks"};

        for (auto it = doc.begin(); it != doc.end(); ++it) {
            const std::string& key = it.key();
            const json& v = it.value();
            if (key == "stream") {
                spec.rootKind = SonificationSpec::RootKind::Stream;
                spec.stream = parse_stream(v, "stream");
            } else if (key == "sequence") {
                spec.rootKind = SonificationSpec::RootKind::Sequence;
                if (!v.is_array()) fail("sequence", "sequence must be a list");
                for (std::size_t i = 0; i < v.size(); ++i)
                    spec.sequence.push_back(
                        parse_seq_item(v[i], "sequence[" + std::to_string(i) + "]"));
            } else if (key == "overlay") {
                spec.rootKind = SonificationSpec::RootKind::Overlay;
                spec.overlay = parse_overlay_into(v, "overlay", Overlay{});
            } else if (key == "dataset" || key == "datasets") {
                if (!v.is_array()) fail(key, "dataset must be a list");
                for (const auto& d : v) {
                    DatasetDef def;
                    def.name = expect_string(d.at("name"), key + ".name");
                    def.source = parse_data(d, key + "." + def.name);
                    if (def.source.kind == DataSource::Kind::Named)
                        fail(key, "dataset \"" + def.name + "\" needs url or values");
                    spec.datasets.push_back(std::move(def));
                }
            } else if (key == "synth" || key == "synths") {
                if (!v.is_array()) fail(key, "synth must be a list");
                for (const auto& s : v) {
                    SynthDef def;
                    for (auto f = s.begin(); f != s.end(); ++f) {
                        const std::string fk = camel_key(f.key());
                        if (fk == "name")
                            def.name = expect_string(f.value(), key + ".name");
                        else if (fk == "type") {
                            def.kind = expect_string(f.value(), key + ".type");
                            if (def.kind != "FM" && def.kind != "AM")
                                fail(key, "synth type must be FM or AM");
                        } else if (fk == "carrierType" || fk == "carrierWave")
                            def.carrierWave = expect_string(f.value(), key);
                        else if (fk == "modulatorType" || fk == "modulatorWave")
                            def.modulatorWave = expect_string(f.value(), key);
                        else if (fk == "modulationIndex" || fk == "modulation")
                            def.modulationIndex = expect_number(f.value(), key);
                        else if (fk == "harmonicity")
                            def.harmonicity = expect_number(f.value(), key);
                        else
                            fail(key, "unknown synth key \"" + f.key() + "\"");
                    }
                    if (def.name.empty()) fail(key, "synth needs a name");
                    spec.synths.push_back(std::move(def));
                }
            } else if (key == "wave" || key == "waves") {
                if (!v.is_array()) fail(key, "wave must be a list");
                for (const auto& w : v) {
                    WaveDef def;
                    def.name = expect_string(w.at("name"), key + ".name");
                    const char* sineKey = w.contains("sine") ? "sine" : "imag";
                    const char* cosKey = w.contains("cosine") ? "cosine" : "real";
                    if (w.contains(sineKey))
                        for (const auto& c : w.at(sineKey))
                            def.sine.push_back(expect_number(c, key + ".sine"));
                    if (w.contains(cosKey))
                        for (const auto& c : w.at(cosKey))
                            def.cosine.push_back(expect_number(c, key + ".cosine"));
                    if (def.sine.empty() && !def.cosine.empty())
                        def.sine.assign(def.cosine.size(), 0.0);
                    if (def.cosine.empty() && !def.sine.empty())
                        def.cosine.assign(def.sine.size(), 0.0);
                    spec.waves.push_back(std::move(def));
                }
            } else if (key == "sampling" || key == "samplings") {
                if (!v.is_array()) fail(key, "sampling must be a list");
                for (const auto& s : v) {
                    SamplingDef def;
                    def.name = expect_string(s.at("name"), key + ".name");
                    def.url = expect_string(s.at("url"), key + ".url");
                    if (s.contains("basePitch"))
                        def.basePitch = expect_number(s.at("basePitch"), key + ".basePitch");
                    if (s.contains("base-pitch"))
                        def.basePitch = expect_number(s.at("base-pitch"), key + ".basePitch");
                    spec.samplings.push_back(std::move(def));
                }
            } else if (key == "tick" || key == "ticks") {
                if (!v.is_array()) fail(key, "tick must be a list");
                for (const auto& t : v)
                    spec.ticks.push_back(parse_tick(t, key, true));
            } else if (key == "transform" && rootCount == 1) {
                spec.globalTransform = parse_transforms(v, "transform");
            } else if (key == "title" && rootCount == 1) {
                spec.title = expect_string(v, "title");
            } else if (key == "description" && rootCount == 1) {
                spec.description = expect_string(v, "description");
            } else if (key == "config" && rootCount == 1) {
                spec.config = parse_config(v, "config");
            } else if (key == "$schema") {
                // tolerated for editor tooling
            } else if (rootCount == 0 &&
                       (std::find(streamKeys.begin(), streamKeys.end(), key) != streamKeys.end())) {
                // handled below as part of the inline stream
            } else if (std::find(resourceKeys.begin(), resourceKeys.end(), key) !=
                       resourceKeys.end()) {
                // handled above
            } else {
                fail("", "unknown top-level key \"" + key + "\"");
            }
        }

        if (rootCount == 0) {
            // whole document is a single stream (the walkthrough shape)
            spec.rootKind = SonificationSpec::RootKind::Stream;
            json streamDoc = json::object();
            for (auto it = doc.begin(); it != doc.end(); ++it)
                if (std::find(streamKeys.begin(), streamKeys.end(), it.key()) != streamKeys.end())
                    streamDoc[it.key()] = it.value();
            spec.stream = parse_stream(streamDoc, "stream");
            spec.title = spec.stream.title;
            spec.description = spec.stream.description;
            spec.config = spec.stream.config;
        }
        return spec;
    }
};

}  // namespace

ConfigSpec ConfigSpec::merged_over(const ConfigSpec& base) const {
    ConfigSpec out = base;
    if (timeUnit) out.timeUnit = timeUnit;
    if (bpm) out.bpm = bpm;
    if (roundBeats) out.roundBeats = roundBeats;
    if (speechRate) out.speechRate = speechRate;
    if (skipTitle) out.skipTitle = skipTitle;
    if (skipDescription) out.skipDescription = skipDescription;
    if (skipScaleSpeech) out.skipScaleSpeech = skipScaleSpeech;
    if (skipStartSpeech) out.skipStartSpeech = skipStartSpeech;
    if (skipFinishSpeech) out.skipFinishSpeech = skipFinishSpeech;
    for (const auto& [k, v] : forceSequenceScaleConsistency)
        out.forceSequenceScaleConsistency[k] = v;
    return out;
}

const ChannelSpec* Stream::find_channel(const std::string& canonicalName) const {
    for (const auto& ch : encoding)
        if (ch.channel == canonicalName) return &ch;
    return nullptr;
}

const DatasetDef* SonificationSpec::find_dataset(const std::string& name) const {
    for (const auto& d : datasets)
        if (d.name == name) return &d;
    return nullptr;
}
const SynthDef* SonificationSpec::find_synth(const std::string& name) const {
    for (const auto& s : synths)
        if (s.name == name) return &s;
    return nullptr;
}
const WaveDef* SonificationSpec::find_wave(const std::string& name) const {
    for (const auto& w : waves)
        if (w.name == name) return &w;
    return nullptr;
}
const SamplingDef* SonificationSpec::find_sampling(const std::string& name) const {
    for (const auto& s : samplings)
        if (s.name == name) return &s;
    return nullptr;
}
const TickDef* SonificationSpec::find_tick(const std::string& name) const {
    for (const auto& t : ticks)
        if (t.name == name) return &t;
    return nullptr;
}

std::string encoding_type_name(EncodingType t) {
    switch (t) {
        case EncodingType::Quantitative: return "quantitative";
        case EncodingType::Ordinal: return "ordinal";
        case EncodingType::Nominal: return "nominal";
        case EncodingType::Temporal: return "temporal";
    }
    return "?";
}

SonificationSpec parse_spec(const std::string& jsonText, ValidationReport* warnings) {
    json doc;
    try {
        doc = json::parse(jsonText);
    } catch (const json::parse_error& e) {
        throw Error(Error::Kind::Parse, std::string("spec JSON syntax error: ") + e.what());
    }
    SpecParser parser{warnings};
    return parser.parse_root(doc);
}

SonificationSpec parse_spec_file(const std::string& path, ValidationReport* warnings) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Error::Kind::Io, "cannot open spec file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_spec(buf.str(), warnings);
}

}  // namespace erie
