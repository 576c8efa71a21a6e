#include "erie/channels.hpp"
#include "erie/spec.hpp"
#include "json.hpp"

namespace erie {

using ojson = nlohmann::ordered_json;

namespace {

ojson value_to_json(const Value& v) {
    if (is_null(v)) return nullptr;
    if (auto* d = std::get_if<double>(&v)) return *d;
    if (auto* b = std::get_if<bool>(&v)) return *b;
    return std::get<std::string>(v);
}

ojson table_to_json(const DataTable& table) {
    ojson rows = ojson::array();
    for (std::size_t r = 0; r < table.row_count(); ++r) {
        ojson row = ojson::object();
        for (std::size_t c = 0; c < table.column_count(); ++c) {
            const auto& col = table.columns()[c];
            const Value& v = table.at(r, c);
            if (col.type == ColumnType::Datetime && is_number(v))
                row[col.name] = epoch_ms_to_iso(std::get<double>(v));
            else
                row[col.name] = value_to_json(v);
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

ojson data_to_json(const DataSource& src) {
    ojson j = ojson::object();
    switch (src.kind) {
        case DataSource::Kind::Url: j["url"] = src.url; break;
        case DataSource::Kind::Inline: j["values"] = table_to_json(src.inlineValues); break;
        case DataSource::Kind::Named: j["name"] = src.name; break;
        case DataSource::Kind::None: break;
    }
    return j;
}

ojson transform_to_json(const TransformStep& t) {
    ojson j = ojson::object();
    using Kind = TransformStep::Kind;
    switch (t.kind) {
        case Kind::Bin:
            j["bin"] = t.field;
            j["as"] = t.as;
            j["end"] = t.end;
            if (t.step)
                j["step"] = *t.step;
            else
                j["nice"] = t.nice;
            if (t.maxbins) j["maxbins"] = *t.maxbins;
            break;
        case Kind::Aggregate: {
            ojson ops = ojson::array();
            for (const auto& op : t.aggregateOps) {
                ojson o = ojson::object();
                o["op"] = op.op;
                if (op.field) o["field"] = *op.field;
                o["as"] = op.as;
                ops.push_back(std::move(o));
            }
            j["aggregate"] = std::move(ops);
            if (!t.groupby.empty()) j["groupby"] = t.groupby;
            break;
        }
        case Kind::Filter: j["filter"] = t.expr; break;
        case Kind::Calculate:
            j["calculate"] = t.expr;
            j["as"] = t.as;
            break;
        case Kind::Density:
            j["density"] = t.field;
            if (t.extent) j["extent"] = {t.extent->first, t.extent->second};
            if (t.bandwidth) j["bandwidth"] = *t.bandwidth;
            if (t.steps) j["steps"] = *t.steps;
            if (!t.groupby.empty()) j["groupby"] = t.groupby;
            break;
        case Kind::Fold:
            j["fold"] = t.foldFields;
            j["as"] = {t.keyName, t.valueName};
            break;
    }
    return j;
}

const char* timing_name(Timing t) {
    switch (t) {
        case Timing::Absolute: return "absolute";
        case Timing::Relative: return "relative";
        case Timing::Simultaneous: return "simultaneous";
    }
    return "?";
}

const char* curve_name(CurveType c) {
    switch (c) {
        case CurveType::Linear: return "linear";
        case CurveType::Log: return "log";
        case CurveType::Pow: return "pow";
        case CurveType::Sqrt: return "sqrt";
        case CurveType::Symlog: return "symlog";
    }
    return "?";
}

ojson tick_to_json(const TickDef& t, bool withName) {
    ojson j = ojson::object();
    if (withName) j["name"] = t.name;
    j["interval"] = t.interval;
    if (t.pitch) j["pitch"] = *t.pitch;
    if (t.duration) j["duration"] = *t.duration;
    if (t.loudness) j["loudness"] = *t.loudness;
    if (t.instrument) j["type"] = *t.instrument;
    return j;
}

ojson scale_to_json(const ScaleSpec& sc) {
    ojson j = ojson::object();
    if (sc.domain) {
        ojson d = ojson::array();
        for (const auto& v : *sc.domain) d.push_back(value_to_json(v));
        j["domain"] = std::move(d);
    }
    if (sc.range) {
        ojson r = ojson::array();
        for (const auto& v : *sc.range) r.push_back(value_to_json(v));
        j["range"] = std::move(r);
    }
    if (sc.maxDistinct) j["maxDistinct"] = *sc.maxDistinct;
    if (sc.times) j["times"] = *sc.times;
    if (sc.polarity)
        j["polarity"] = *sc.polarity == Polarity::Positive ? "positive" : "negative";
    if (sc.scaleType) j["scaleType"] = curve_name(*sc.scaleType);
    if (sc.exponent) j["exponent"] = *sc.exponent;
    if (sc.constant) j["constant"] = *sc.constant;
    if (sc.zero) j["zero"] = *sc.zero;
    if (sc.timing) j["timing"] = timing_name(*sc.timing);
    if (sc.length) j["length"] = *sc.length;
    if (sc.band) j["band"] = *sc.band;
    if (sc.title) j["title"] = *sc.title;
    if (sc.roundToNote) j["roundToNote"] = *sc.roundToNote;
    if (sc.singleTappingPosition) j["singleTappingPosition"] = *sc.singleTappingPosition;
    if (sc.tapDuration) j["tapDuration"] = *sc.tapDuration;
    if (sc.tickName) j["tick"] = *sc.tickName;
    if (sc.tickInline) j["tick"] = tick_to_json(*sc.tickInline, false);
    if (sc.description) j["description"] = *sc.description;
    return j;
}

ojson channel_to_json(const ChannelSpec& ch) {
    ojson j = ojson::object();
    if (ch.channel == "repeat") {
        j["field"] = ch.repeatFields;
        if (!ch.repeatBy.empty()) j["by"] = ch.repeatBy;
        if (ch.repeatSpeech) j["speech"] = true;
        ojson sc = scale_to_json(ch.scale);
        if (!sc.empty()) j["scale"] = std::move(sc);
        return j;
    }
    switch (ch.kind) {
        case ChannelSpec::Kind::Dynamic: {
            j["field"] = ch.field;
            if (ch.encTypeExplicit) j["type"] = encoding_type_name(ch.encType);
            ojson sc = scale_to_json(ch.scale);
            if (!sc.empty()) j["scale"] = std::move(sc);
            if (ch.binInline) j["bin"] = ch.binStep ? ojson{{"step", *ch.binStep}} : ojson(true);
            if (ch.aggregateInline) j["aggregate"] = *ch.aggregateInline;
            break;
        }
        case ChannelSpec::Kind::Conditioned: {
            ojson conds = ojson::array();
            for (const auto& c : ch.conditions)
                conds.push_back({{"test", c.test}, {"value", value_to_json(c.value)}});
            j["condition"] = std::move(conds);
            j["value"] = value_to_json(ch.fallback);
            break;
        }
        case ChannelSpec::Kind::Static:
            j["value"] = value_to_json(ch.value);
            break;
    }
    if (ch.ramp != RampMode::Default)
        j["ramp"] = ch.ramp == RampMode::None
                        ? "none"
                        : (ch.ramp == RampMode::Linear ? "linear" : "exponential");
    if (!ch.format.empty()) j["format"] = ch.format;
    return j;
}

ojson config_to_json(const ConfigSpec& cfg) {
    ojson j = ojson::object();
    if (cfg.timeUnit) j["timeUnit"] = *cfg.timeUnit;
    if (cfg.bpm) j["bpm"] = *cfg.bpm;
    if (cfg.roundBeats) j["roundBeats"] = *cfg.roundBeats;
    if (cfg.speechRate) j["speechRate"] = *cfg.speechRate;
    if (cfg.skipTitle) j["skipTitle"] = *cfg.skipTitle;
    if (cfg.skipDescription) j["skipDescription"] = *cfg.skipDescription;
    if (cfg.skipScaleSpeech) j["skipScaleSpeech"] = *cfg.skipScaleSpeech;
    if (cfg.skipStartSpeech) j["skipStartSpeech"] = *cfg.skipStartSpeech;
    if (cfg.skipFinishSpeech) j["skipFinishSpeech"] = *cfg.skipFinishSpeech;
    if (!cfg.forceSequenceScaleConsistency.empty()) {
        ojson f = ojson::object();
        for (const auto& [k, v] : cfg.forceSequenceScaleConsistency) f[k] = v;
        j["forceSequenceScaleConsistency"] = std::move(f);
    }
    return j;
}

ojson stream_to_json(const Stream& s) {
    ojson j = ojson::object();
    if (s.name) j["name"] = *s.name;
    if (s.title) j["title"] = *s.title;
    if (s.description) j["description"] = *s.description;
    j["data"] = data_to_json(s.data);
    if (!s.transforms.empty()) {
        ojson t = ojson::array();
        for (const auto& step : s.transforms) t.push_back(transform_to_json(step));
        j["transform"] = std::move(t);
    }
    ojson tone = ojson::object();
    if (s.tone.type != "sine") tone["type"] = s.tone.type;
    if (s.tone.continued) tone["continued"] = true;
    if (!s.tone.filters.empty()) tone["filter"] = s.tone.filters;
    if (!tone.empty()) j["tone"] = std::move(tone);
    ojson enc = ojson::object();
    for (const auto& ch : s.encoding) enc[ch.channel] = channel_to_json(ch);
    j["encoding"] = std::move(enc);
    ojson cfg = config_to_json(s.config);
    if (!cfg.empty()) j["config"] = std::move(cfg);
    return j;
}

ojson seq_item_to_json(const SeqItem& item) {
    switch (item.kind) {
        case SeqItem::Kind::Stream: return stream_to_json(item.stream);
        case SeqItem::Kind::Overlay: {
            ojson j = ojson::object();
            if (item.overlay.name) j["name"] = *item.overlay.name;
            ojson layers = ojson::array();
            for (const auto& s : item.overlay.streams) layers.push_back(stream_to_json(s));
            j["overlay"] = std::move(layers);
            return j;
        }
        case SeqItem::Kind::Sequence: {
            ojson j = ojson::object();
            ojson inner = ojson::array();
            for (const auto& sub : item.sequence) inner.push_back(seq_item_to_json(sub));
            j["sequence"] = std::move(inner);
            return j;
        }
    }
    return ojson::object();
}

}  // namespace

std::string serialize(const SonificationSpec& spec) {
    ojson j = ojson::object();
    if (spec.title) j["title"] = *spec.title;
    if (spec.description) j["description"] = *spec.description;
    switch (spec.rootKind) {
        case SonificationSpec::RootKind::Stream:
            j["stream"] = stream_to_json(spec.stream);
            break;
        case SonificationSpec::RootKind::Sequence: {
            ojson seq = ojson::array();
            for (const auto& item : spec.sequence) seq.push_back(seq_item_to_json(item));
            j["sequence"] = std::move(seq);
            break;
        }
        case SonificationSpec::RootKind::Overlay: {
            ojson layers = ojson::array();
            for (const auto& s : spec.overlay.streams) layers.push_back(stream_to_json(s));
            j["overlay"] = std::move(layers);
            break;
        }
    }
    if (!spec.globalTransform.empty()) {
        ojson t = ojson::array();
        for (const auto& step : spec.globalTransform) t.push_back(transform_to_json(step));
        j["transform"] = std::move(t);
    }
    if (!spec.datasets.empty()) {
        ojson d = ojson::array();
        for (const auto& def : spec.datasets) {
            ojson e = data_to_json(def.source);
            ojson withName = ojson::object();
            withName["name"] = def.name;
            for (auto it = e.begin(); it != e.end(); ++it) withName[it.key()] = it.value();
            d.push_back(std::move(withName));
        }
        j["dataset"] = std::move(d);
    }
    if (!spec.synths.empty()) {
        ojson s = ojson::array();
        for (const auto& def : spec.synths) {
            ojson e = ojson::object();
            e["name"] = def.name;
            e["type"] = def.kind;
            if (def.carrierWave != "sine") e["carrierType"] = def.carrierWave;
            if (def.modulatorWave != "sine") e["modulatorType"] = def.modulatorWave;
            if (def.modulationIndex != 1.0) e["modulationIndex"] = def.modulationIndex;
            if (def.harmonicity != 1.0) e["harmonicity"] = def.harmonicity;
            s.push_back(std::move(e));
        }
        j["synth"] = std::move(s);
    }
    if (!spec.waves.empty()) {
        ojson w = ojson::array();
        for (const auto& def : spec.waves)
            w.push_back({{"name", def.name}, {"sine", def.sine}, {"cosine", def.cosine}});
        j["wave"] = std::move(w);
    }
    if (!spec.samplings.empty()) {
        ojson s = ojson::array();
        for (const auto& def : spec.samplings)
            s.push_back({{"name", def.name}, {"url", def.url}, {"basePitch", def.basePitch}});
        j["sampling"] = std::move(s);
    }
    if (!spec.ticks.empty()) {
        ojson t = ojson::array();
        for (const auto& def : spec.ticks) t.push_back(tick_to_json(def, true));
        j["tick"] = std::move(t);
    }
    ojson cfg = config_to_json(spec.config);
    if (!cfg.empty()) j["config"] = std::move(cfg);
    return j.dump(2) + "\n";
}

}  // namespace erie
