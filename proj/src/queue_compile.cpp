#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <set>

#include "erie/channels.hpp"
#include "erie/expr.hpp"
#include "erie/format.hpp"
#include "erie/queue.hpp"

namespace erie {

namespace {

constexpr double kLegendToneDuration = 0.3;
constexpr double kLegendToneGap = 0.3;
constexpr double kDefaultTapDuration = 0.19;
constexpr double kDefaultBand = 0.2;
constexpr double kDefaultTickPitch = 1000.0;
constexpr double kDefaultTickDuration = 0.05;
constexpr double kDefaultTickLoudness = 0.4;

std::string ordinal_word(std::size_t k) {
    static const char* words[] = {"first", "second", "third",   "fourth", "fifth",
                                  "sixth", "seventh", "eighth", "ninth",  "tenth"};
    if (k >= 1 && k <= 10) return words[k - 1];
    return std::to_string(k) + "th";
}

std::string capitalized(std::string text) {
    if (!text.empty())
        text[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(text[0])));
    return text;
}

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

SubQueue make_speech(std::string text, const ConfigSpec& cfg, std::string role) {
    SubQueue q;
    q.kind = SubQueue::Kind::Speech;
    q.role = std::move(role);
    q.speech.text = std::move(text);
    q.speech.rate = cfg.speech_rate();
    return q;
}

std::string spoken_channel(const std::string& channel) {
    const ChannelInfo* info = channel_info(channel);
    return info ? info->spoken : channel;
}

std::string format_domain_value(const ResolvedScale& scale, const Value& v) {
    return format_value(v, scale.format, scale.isDatetime);
}

ToneEvent legend_tone(const ResolvedScale& scale, std::size_t breakpointIdx,
                      std::vector<std::string>* warnings) {
    ToneEvent ev;
    ev.duration = kLegendToneDuration;
    ev.loudness = 1.0;
    if (scale.channel == "tapSpeed" || scale.channel == "tapCount") {
        double band = scale.band.value_or(2.0);
        double tapDur = scale.tapDuration.value_or(kDefaultTapDuration);
        double v = map_value(scale, scale.domainValues[breakpointIdx], warnings);
        int taps = scale.channel == "tapSpeed" ? taps_from_speed(v, band)
                                               : static_cast<int>(std::floor(v + 0.5));
        ev.tap = tap_pattern(taps, band, tapDur, scale.singleTapPosition, warnings);
        ev.duration = band;
        return ev;
    }
    double v = map_value(scale, scale.domainValues[breakpointIdx], warnings);
    if (scale.channel == "pitch")
        ev.pitch = v;
    else if (scale.channel == "pan")
        ev.pan = v;
    else if (scale.channel == "loudness")
        ev.loudness = v;
    else if (scale.channel == "detune")
        ev.detune = v;
    else if (scale.channel == "modulation")
        ev.modulation = v;
    else if (scale.channel == "harmonicity")
        ev.harmonicity = v;
    else if (scale.channel == "postReverb")
        ev.postReverb = v;
    else if (const FilterChannelInfo* fc = filter_channel_info(scale.channel))
        ev.extra[fc->name] = v;
    else if (scale.channel == "duration")
        ev.duration = v;
    return ev;
}

SubQueue legend_tone_queue(const ResolvedScale& scale, std::size_t breakpointIdx,
                           const ToneSpec& tone, std::vector<std::string>* warnings) {
    SubQueue q;
    q.kind = SubQueue::Kind::ToneSeries;
    q.role = "scale";
    q.series.instrument = tone.type;
    q.series.continued = false;
    q.series.events.push_back(legend_tone(scale, breakpointIdx, warnings));
    return q;
}

std::string speech_breakpoint(const ResolvedScale& scale, std::size_t idx) {
    const Value& v = scale.domainValues[idx];
    if (is_number(v) && std::get<double>(v) == 0.0) return "0 (zero)";
    return format_domain_value(scale, v);
}

// Custom markup: literal text plus <sound>, <list>, <domain.min>, <domain.max>,
// <field>, <channel>, <title> tokens. The k-th <sound> plays the k-th domain
// breakpoint's legend tone.
void expand_markup(std::vector<SubQueue>& out, const ResolvedScale& scale,
                   const std::string& markup, const ToneSpec& tone, const ConfigSpec& cfg,
                   std::vector<std::string>* warnings) {
    std::string pending;
    std::size_t soundIdx = 0;
    std::size_t i = 0;
    auto flush = [&] {
        while (!pending.empty() && pending.front() == ' ') pending.erase(pending.begin());
        while (!pending.empty() && pending.back() == ' ') pending.pop_back();
        if (!pending.empty()) out.push_back(make_speech(pending, cfg, "scale"));
        pending.clear();
    };
    while (i < markup.size()) {
        if (markup[i] != '<') {
            pending += markup[i++];
            continue;
        }
        auto close = markup.find('>', i);
        if (close == std::string::npos)
            throw Error(Error::Kind::Compile, "unterminated markup token in scale description");
        std::string token = markup.substr(i + 1, close - i - 1);
        i = close + 1;
        if (token == "sound") {
            flush();
            std::size_t idx = scale.domainValues.empty()
                                  ? 0
                                  : std::min(soundIdx, scale.domainValues.size() - 1);
            ++soundIdx;
            out.push_back(legend_tone_queue(scale, idx, tone, warnings));
        } else if (token == "list") {
            std::vector<std::string> items;
            for (const auto& v : scale.domainValues)
                items.push_back(format_domain_value(scale, v));
            pending += join(items, ", ");
        } else if (token == "domain.min") {
            pending += scale.domainValues.empty()
                           ? ""
                           : format_domain_value(scale, scale.domainValues.front());
        } else if (token == "domain.max") {
            pending += scale.domainValues.empty()
                           ? ""
                           : format_domain_value(scale, scale.domainValues.back());
        } else if (token == "field") {
            pending += scale.field;
        } else if (token == "channel") {
            pending += spoken_channel(scale.channel);
        } else if (token == "title") {
            pending += scale.title.empty() ? scale.field : scale.title;
        } else {
            throw Error(Error::Kind::Compile, "unknown markup token <" + token + ">");
        }
    }
    flush();
}

void describe_scale(std::vector<SubQueue>& out, const ResolvedScale& scale,
                    const ToneSpec& tone, const ConfigSpec& cfg,
                    std::vector<std::string>* warnings) {
    if (scale.description && *scale.description == "skip") return;
    const std::string title = scale.title.empty() ? scale.field : scale.title;

    if (scale.description) {
        expand_markup(out, scale, *scale.description, tone, cfg, warnings);
        return;
    }

    if (scale.channel == "time") {
        std::string text;
        if (scale.categorical)
            text = "The category is mapped to time.";
        else if (scale.length)
            text = "The " + title + " is mapped to time. The duration of the stream is " +
                   number_to_text(beats_to_seconds(*scale.length, cfg)) + " seconds.";
        else
            text = "The " + title + " is mapped to time.";
        out.push_back(make_speech(std::move(text), cfg, "scale"));
        return;
    }

    const std::string spoken = spoken_channel(scale.channel);
    if (scale.categorical || scale.domainValues.empty()) {
        out.push_back(
            make_speech("The " + title + " is mapped to " + spoken + ".", cfg, "scale"));
        return;
    }

    if (scale.domainValues.size() >= 3) {
        // piecewise: enumerate every breakpoint with its legend tone
        std::string head = "The " + title + " is mapped to " + spoken + ". " +
                           capitalized(title) + " values are mapped as " +
                           speech_breakpoint(scale, 0);
        out.push_back(make_speech(std::move(head), cfg, "scale"));
        out.push_back(legend_tone_queue(scale, 0, tone, warnings));
        for (std::size_t k = 1; k < scale.domainValues.size(); ++k) {
            out.push_back(make_speech(speech_breakpoint(scale, k), cfg, "scale"));
            out.push_back(legend_tone_queue(scale, k, tone, warnings));
        }
        return;
    }

    if (tone.continued) {
        // swept legend: both endpoints inside one tone-series
        std::string head = "The " + title + " is mapped to " + spoken +
                           ". The domains values from " +
                           format_domain_value(scale, scale.domainValues.front()) + " to " +
                           format_domain_value(scale, scale.domainValues.back()) +
                           " are mapped to";
        out.push_back(make_speech(std::move(head), cfg, "scale"));
        SubQueue q;
        q.kind = SubQueue::Kind::ToneSeries;
        q.role = "scale";
        q.series.instrument = tone.type;
        ToneEvent lo = legend_tone(scale, 0, warnings);
        ToneEvent hi = legend_tone(scale, scale.domainValues.size() - 1, warnings);
        hi.start = kLegendToneDuration + kLegendToneGap;
        q.series.events.push_back(std::move(lo));
        q.series.events.push_back(std::move(hi));
        out.push_back(std::move(q));
        return;
    }

    out.push_back(make_speech("The " + title + " is mapped to " + spoken +
                                  ". The minimum domain value " +
                                  format_domain_value(scale, scale.domainValues.front()) +
                                  " is mapped to",
                              cfg, "scale"));
    out.push_back(legend_tone_queue(scale, 0, tone, warnings));
    out.push_back(make_speech("and the maximum domain value " +
                                  format_domain_value(scale, scale.domainValues.back()) +
                                  " is mapped to",
                              cfg, "scale"));
    out.push_back(legend_tone_queue(scale, scale.domainValues.size() - 1, tone, warnings));
}

// ---------------------------------------------------------------------------

struct Compiler {
    const SonificationSpec& spec;
    const CompileOptions& options;
    std::vector<std::string>& warnings;

    // One (possibly repeat-filtered) stream with its table and scales.
    struct Instance {
        const Stream* stream = nullptr;
        DataTable table;
        ConfigSpec config;
        std::map<std::string, ResolvedScale> scales;
        double effectiveBand = kDefaultBand;
        Timeline timeline;
    };

    using DomainOverrides = std::map<std::string, std::vector<Value>>;

    DataTable load_stream_data(const Stream& s) const {
        const DataSource* src = &s.data;
        if (src->kind == DataSource::Kind::Named) {
            const DatasetDef* def = spec.find_dataset(src->name);
            if (!def)
                throw Error(Error::Kind::Compile,
                            "dataset \"" + src->name + "\" is not defined");
            src = &def->source;
        }
        switch (src->kind) {
            case DataSource::Kind::Inline: return src->inlineValues;
            case DataSource::Kind::Url: {
                std::filesystem::path p(src->url);
                if (p.is_relative() && !options.baseDir.empty())
                    p = std::filesystem::path(options.baseDir) / p;
                return load_table_file(p.string());
            }
            default:
                throw Error(Error::Kind::Compile, "stream has no usable data source");
        }
    }

    // Channel domain for one stream instance; time spans its time2 field too.
    std::vector<Value> instance_domain(const Stream& s, const ChannelSpec& ch,
                                       const DataTable& table) const {
        std::vector<Value> domain = infer_domain(ch, table);
        if (ch.channel == "time") {
            const ChannelSpec* time2 = s.find_channel("time2");
            if (time2 && !ch.scale.domain && domain.size() == 2 && is_number(domain[0])) {
                auto values = table.column_values(time2->field);
                for (const auto& v : values) {
                    double d = as_number(v);
                    if (d < as_number(domain[0])) domain[0] = d;
                    if (d > as_number(domain[1])) domain[1] = d;
                }
            }
        }
        return domain;
    }

    void resolve_instance(Instance& inst, const DomainOverrides& overrides) const {
        const Stream& s = *inst.stream;
        inst.config = s.config.merged_over(spec.config);

        for (const auto& ch : s.encoding) {
            if (ch.channel == "repeat" || ch.kind != ChannelSpec::Kind::Dynamic) continue;
            if (ch.channel == "speechBefore" || ch.channel == "speechAfter") continue;
            if (ch.channel == "time2") continue;  // shares the time scale
            std::vector<Value> domain;
            auto ov = overrides.find(ch.channel);
            if (ov != overrides.end())
                domain = ov->second;
            else
                domain = instance_domain(s, ch, inst.table);
            ResolvedScale scale = resolve_scale(ch, domain, &warnings);
            if (!ch.field.empty() && inst.table.has_column(ch.field))
                scale.isDatetime = inst.table.column_type(ch.field) == ColumnType::Datetime;
            inst.scales.emplace(ch.channel, std::move(scale));
        }

        // the tap pattern's band doubles as the row extent when time has none
        const ChannelSpec* time = s.find_channel("time");
        inst.effectiveBand = kDefaultBand;
        if (time && time->scale.band)
            inst.effectiveBand = *time->scale.band;
        else
            for (const char* tapCh : {"tapSpeed", "tapCount"}) {
                const ChannelSpec* tap = s.find_channel(tapCh);
                if (tap && tap->scale.band) inst.effectiveBand = *tap->scale.band;
            }

        TimeLayoutInput layout;
        layout.timeChannel = time;
        layout.time2Channel = s.find_channel("time2");
        layout.durationChannel = s.find_channel("duration");
        layout.continued = s.tone.continued;
        layout.defaultBand = inst.effectiveBand;
        if ((s.find_channel("speechBefore") || s.find_channel("speechAfter")) &&
            inst.scales.count("time") &&
            inst.scales.at("time").timing == Timing::Absolute && time &&
            time->scale.timing.has_value() && *time->scale.timing == Timing::Absolute) {
            warnings.push_back("speech channels force relative timing");
            inst.scales.at("time").timing = Timing::Relative;
        } else if ((s.find_channel("speechBefore") || s.find_channel("speechAfter")) &&
                   inst.scales.count("time") && time && !time->scale.timing.has_value()) {
            // speech interleaving only works back-to-back
            inst.scales.at("time").timing = Timing::Relative;
        }
        auto timeIt = inst.scales.find("time");
        if (timeIt != inst.scales.end()) layout.timeScale = &timeIt->second;
        auto durIt = inst.scales.find("duration");
        if (durIt != inst.scales.end()) layout.durationScale = &durIt->second;
        inst.timeline = assign_times(layout, inst.table, &warnings);
    }

    double channel_value(const Instance& inst, const ChannelSpec& ch, std::size_t row,
                         const std::vector<ExprPtr>* conditionExprs) const {
        switch (ch.kind) {
            case ChannelSpec::Kind::Dynamic: {
                const ResolvedScale& scale = inst.scales.at(ch.channel);
                return map_value(scale, inst.table.at(row, ch.field), &warnings);
            }
            case ChannelSpec::Kind::Conditioned: {
                for (std::size_t i = 0; i < ch.conditions.size(); ++i) {
                    Value hit = eval_expr(*(*conditionExprs)[i], Datum(inst.table, row));
                    if (truthy(hit)) return as_number(ch.conditions[i].value);
                }
                return as_number(ch.fallback);
            }
            case ChannelSpec::Kind::Static:
                return as_number(ch.value);
        }
        return 0;
    }

    ToneEvent build_event(const Instance& inst, const TimeAssignment& slot,
                          const std::map<std::string, std::vector<ExprPtr>>& conditions) const {
        const Stream& s = *inst.stream;
        ToneEvent ev;
        ev.start = slot.start;
        ev.duration = std::max(0.0, slot.end - slot.start);

        for (const auto& ch : s.encoding) {
            if (ch.channel == "time" || ch.channel == "time2" || ch.channel == "duration" ||
                ch.channel == "repeat" || ch.channel == "speechBefore" ||
                ch.channel == "speechAfter" || ch.channel == "tapSpeed" ||
                ch.channel == "tapCount")
                continue;
            if (ch.channel == "timbre") {
                if (ch.kind == ChannelSpec::Kind::Static)
                    ev.timbre = value_to_text(ch.value);
                else if (ch.kind == ChannelSpec::Kind::Dynamic)
                    ev.timbre = map_level_name(inst.scales.at("timbre"),
                                               inst.table.at(slot.row, ch.field));
                continue;
            }
            auto itCond = conditions.find(ch.channel);
            double v = channel_value(inst, ch, slot.row,
                                     itCond == conditions.end() ? nullptr : &itCond->second);
            if (const ChannelInfo* info = channel_info(ch.channel);
                info && info->capMax > info->capMin)
                v = std::clamp(v, info->capMin, info->capMax);

            if (ch.channel == "pitch")
                ev.pitch = v;
            else if (ch.channel == "detune")
                ev.detune = v;
            else if (ch.channel == "loudness")
                ev.loudness = v;
            else if (ch.channel == "pan")
                ev.pan = v;
            else if (ch.channel == "modulation")
                ev.modulation = v;
            else if (ch.channel == "harmonicity")
                ev.harmonicity = v;
            else if (ch.channel == "postReverb")
                ev.postReverb = v;
            else
                ev.extra[ch.channel] = v;  // filter channel
        }

        for (const char* tapName : {"tapSpeed", "tapCount"}) {
            const ChannelSpec* tap = s.find_channel(tapName);
            if (!tap) continue;
            auto itCond = conditions.find(tapName);
            double v = channel_value(inst, *tap, slot.row,
                                     itCond == conditions.end() ? nullptr : &itCond->second);
            const ResolvedScale* scale = nullptr;
            auto scIt = inst.scales.find(tapName);
            if (scIt != inst.scales.end()) scale = &scIt->second;
            double band = scale && scale->band ? *scale->band : inst.effectiveBand;
            double tapDur =
                scale && scale->tapDuration ? *scale->tapDuration : kDefaultTapDuration;
            int taps = std::string(tapName) == "tapSpeed"
                           ? taps_from_speed(v, band)
                           : static_cast<int>(std::floor(v + 0.5));
            ev.tap = tap_pattern(taps, band, tapDur,
                                 scale ? scale->singleTapPosition : "start", &warnings);
            if (ev.duration <= 0) ev.duration = band;
        }
        return ev;
    }

    std::map<std::string, std::vector<ExprPtr>> parse_conditions(const Stream& s) const {
        std::map<std::string, std::vector<ExprPtr>> out;
        for (const auto& ch : s.encoding) {
            if (ch.kind != ChannelSpec::Kind::Conditioned) continue;
            std::vector<ExprPtr> exprs;
            for (const auto& c : ch.conditions) exprs.push_back(parse_expr(c.test));
            out.emplace(ch.channel, std::move(exprs));
        }
        return out;
    }

    ToneSeries build_series(const Instance& inst,
                            const std::map<std::string, std::vector<ExprPtr>>& conditions) const {
        const Stream& s = *inst.stream;
        ToneSeries series;
        series.instrument = s.tone.type;
        series.continued = s.tone.continued;
        series.filters = s.tone.filters;
        for (const auto& ch : s.encoding)
            if (ch.ramp != RampMode::Default) series.ramps[ch.channel] = ch.ramp;
        for (const auto& slot : inst.timeline.items)
            series.events.push_back(build_event(inst, slot, conditions));
        std::stable_sort(
            series.events.begin(), series.events.end(),
            [](const ToneEvent& a, const ToneEvent& b) { return a.start < b.start; });
        return series;
    }

    // beats -> seconds per the owning stream's config
    void apply_beats(SubQueue& q, const ConfigSpec& cfg) const {
        if (!cfg.beats()) return;
        auto convert = [&](double v) { return beats_to_seconds(v, cfg); };
        auto convertEvent = [&](ToneEvent& ev) {
            double end = convert(ev.start + ev.duration);
            ev.start = convert(ev.start);
            ev.duration = std::max(0.0, end - ev.start);
            if (ev.tap)
                for (auto& seg : ev.tap->segments) seg.duration = convert(seg.duration);
            ev.postReverb = convert(ev.postReverb);
        };
        switch (q.kind) {
            case SubQueue::Kind::ToneSeries:
                for (auto& ev : q.series.events) convertEvent(ev);
                break;
            case SubQueue::Kind::ToneOverlay:
                for (auto& layer : q.layers)
                    for (auto& ev : layer.events) convertEvent(ev);
                break;
            case SubQueue::Kind::ToneSpeechSeries:
                for (auto& item : q.speechSeries.items)
                    if (!item.isSpeech) convertEvent(item.tone);
                break;
            case SubQueue::Kind::Speech: break;
        }
    }

    std::vector<SubQueue> compile_instance(Instance& inst) const {
        const Stream& s = *inst.stream;
        auto conditions = parse_conditions(s);
        const ChannelSpec* speechBefore = s.find_channel("speechBefore");
        const ChannelSpec* speechAfter = s.find_channel("speechAfter");

        std::vector<SubQueue> out;
        if (speechBefore || speechAfter) {
            SubQueue q;
            q.kind = SubQueue::Kind::ToneSpeechSeries;
            q.role = "body";
            q.speechSeries.instrument = s.tone.type;
            q.speechSeries.continued = s.tone.continued;
            q.speechSeries.filters = s.tone.filters;
            for (const auto& slot : inst.timeline.items) {
                if (speechBefore) {
                    ToneSpeechItem item;
                    item.isSpeech = true;
                    item.speech.text = format_value(
                        inst.table.at(slot.row, speechBefore->field), speechBefore->format);
                    item.speech.rate = inst.config.speech_rate();
                    q.speechSeries.items.push_back(std::move(item));
                }
                ToneSpeechItem toneItem;
                toneItem.tone = build_event(inst, slot, conditions);
                q.speechSeries.items.push_back(std::move(toneItem));
                if (speechAfter) {
                    ToneSpeechItem item;
                    item.isSpeech = true;
                    item.speech.text = format_value(
                        inst.table.at(slot.row, speechAfter->field), speechAfter->format);
                    item.speech.rate = inst.config.speech_rate();
                    q.speechSeries.items.push_back(std::move(item));
                }
            }
            out.push_back(std::move(q));
        } else {
            SubQueue q;
            q.kind = SubQueue::Kind::ToneSeries;
            q.role = "body";
            q.series = build_series(inst, conditions);
            out.push_back(std::move(q));
        }

        const ChannelSpec* time = s.find_channel("time");
        if (time && (time->scale.tickName || time->scale.tickInline)) {
            TickDef tick;
            if (time->scale.tickName) {
                const TickDef* def = spec.find_tick(*time->scale.tickName);
                if (!def)
                    throw Error(Error::Kind::Compile,
                                "tick \"" + *time->scale.tickName + "\" is not defined");
                tick = *def;
            } else {
                tick = *time->scale.tickInline;
            }
            ToneSeries ticks = emit_ticks(tick, inst.timeline.totalLength);
            SubQueue& body = out.back();
            if (body.kind == SubQueue::Kind::ToneSeries) {
                SubQueue wrapped;
                wrapped.kind = SubQueue::Kind::ToneOverlay;
                wrapped.role = "body";
                wrapped.layers.push_back(std::move(body.series));
                wrapped.layers.push_back(std::move(ticks));
                out.back() = std::move(wrapped);
            } else {
                warnings.push_back("tick dropped: tone-speech-series cannot be overlaid");
            }
        }

        for (auto& q : out) apply_beats(q, inst.config);
        return out;
    }

    // -----------------------------------------------------------------------
    // repeat expansion

    struct RepeatPart {
        std::vector<std::string> seqLabels;  // values spoken for this part
        std::vector<Instance> layers;        // > 1 layer = tone-overlay
        bool speech = false;
    };

    std::vector<Value> distinct_values(const DataTable& table, const std::string& field) const {
        std::vector<Value> out;
        for (const auto& v : table.column_values(field)) {
            bool seen = false;
            for (const auto& existing : out)
                if (value_equal(existing, v)) {
                    seen = true;
                    break;
                }
            if (!seen) out.push_back(v);
        }
        return out;
    }

    DataTable filter_equal(const DataTable& in, const std::string& field,
                           const Value& value) const {
        DataTable out;
        for (const auto& col : in.columns()) out.add_column(col.name, col.type);
        std::size_t c = in.column_index(field);
        for (const auto& row : in.rows())
            if (value_equal(row[c], value)) out.add_row(row);
        return out;
    }

    std::vector<RepeatPart> expand_repeat_parts(const Stream& stream,
                                                const DataTable& rawTable,
                                                const DomainOverrides& overrides) const {
        const ChannelSpec* repeat = stream.find_channel("repeat");
        if (!repeat) throw Error(Error::Kind::Compile, "stream has no repeat channel");
        const auto& fields = repeat->repeatFields;
        std::vector<std::string> by = repeat->repeatBy;
        by.resize(fields.size(), "sequence");
        if (!by.empty() && by[0] == "overlay" && repeat->repeatSpeech &&
            std::count(by.begin(), by.end(), "sequence") > 0)
            throw Error(Error::Kind::Compile,
                        "speech per inner value cannot overlap an outer overlay; "
                        "use by=sequence for the outermost repeat field");

        std::vector<std::vector<Value>> valueLists;
        for (const auto& f : fields) {
            auto vals = distinct_values(rawTable, f);
            if (vals.empty())
                throw Error(Error::Kind::Compile, "repeat field " + f + " has no values");
            valueLists.push_back(std::move(vals));
        }

        struct Combo {
            std::vector<std::string> seqLabels;
            DataTable table;
        };
        std::vector<Combo> combos{{{}, rawTable}};
        std::vector<RepeatPart> parts;

        // fields expand outermost-first; an overlay field merges its values
        // into layers of every open combo
        std::size_t firstOverlay = fields.size();
        for (std::size_t i = 0; i < fields.size(); ++i)
            if (by[i] == "overlay") {
                firstOverlay = i;
                break;
            }
        for (std::size_t i = firstOverlay; i < fields.size(); ++i)
            if (by[i] == "sequence")
                throw Error(Error::Kind::Compile,
                            "sequence repetition cannot nest inside an overlay repeat");

        // combinations with no data rows are skipped, so a nested repeat over
        // sparse pairings plays only the observed combinations
        for (std::size_t i = 0; i < firstOverlay; ++i) {
            std::vector<Combo> next;
            for (const auto& combo : combos)
                for (const auto& v : valueLists[i]) {
                    Combo c;
                    c.seqLabels = combo.seqLabels;
                    c.seqLabels.push_back(value_to_text(v));
                    c.table = filter_equal(combo.table, fields[i], v);
                    if (c.table.row_count() > 0) next.push_back(std::move(c));
                }
            combos = std::move(next);
        }

        for (auto& combo : combos) {
            RepeatPart part;
            part.seqLabels = combo.seqLabels;
            part.speech = repeat->repeatSpeech;

            std::vector<DataTable> layerTables{combo.table};
            for (std::size_t i = firstOverlay; i < fields.size(); ++i) {
                std::vector<DataTable> next;
                for (const auto& t : layerTables)
                    for (const auto& v : valueLists[i]) {
                        DataTable filtered = filter_equal(t, fields[i], v);
                        if (filtered.row_count() > 0) next.push_back(std::move(filtered));
                    }
                layerTables = std::move(next);
            }
            for (auto& t : layerTables) {
                Instance inst;
                inst.stream = &stream;
                inst.table = apply_transforms(std::move(t), stream.transforms, options.parallel);
                part.layers.push_back(std::move(inst));
            }
            if (!part.layers.empty()) parts.push_back(std::move(part));
        }

        // every repetition plays one stream design, so the parts share scales:
        // each dynamic channel's domain is the union across all instances
        DomainOverrides shared = overrides;
        for (const auto& ch : stream.encoding) {
            if (ch.kind != ChannelSpec::Kind::Dynamic || ch.channel == "repeat" ||
                ch.channel == "time2" || ch.channel == "speechBefore" ||
                ch.channel == "speechAfter")
                continue;
            if (shared.count(ch.channel)) continue;
            std::vector<Value> unionDomain;
            bool numeric = true;
            for (const auto& part : parts)
                for (const auto& inst : part.layers) {
                    auto domain = instance_domain(stream, ch, inst.table);
                    for (const auto& v : domain)
                        if (!is_number(v)) numeric = false;
                    if (numeric && domain.size() == 2 && unionDomain.size() == 2) {
                        if (as_number(domain[0]) < as_number(unionDomain[0]))
                            unionDomain[0] = domain[0];
                        if (as_number(domain[1]) > as_number(unionDomain[1]))
                            unionDomain[1] = domain[1];
                    } else if (unionDomain.empty() && numeric && domain.size() == 2) {
                        unionDomain = domain;
                    } else {
                        for (const auto& v : domain) {
                            bool seen = false;
                            for (const auto& u : unionDomain)
                                if (value_equal(u, v)) seen = true;
                            if (!seen) unionDomain.push_back(v);
                        }
                    }
                }
            if (!unionDomain.empty()) shared[ch.channel] = std::move(unionDomain);
        }
        for (auto& part : parts)
            for (auto& inst : part.layers) resolve_instance(inst, shared);
        return parts;
    }

    // -----------------------------------------------------------------------
    // full assembly

    struct Part {
        std::optional<std::string> name;       // explicit stream name
        std::vector<std::string> repeatLabels; // repeat values for speech
        bool repeatSpeech = false;
        std::vector<Instance> layers;          // 1 = plain stream, >1 = overlay
        std::vector<SubQueue> body;
    };

    Instance make_instance(const Stream& s, const DomainOverrides& overrides) const {
        Instance inst;
        inst.stream = &s;
        inst.table =
            apply_transforms(load_stream_data(s), s.transforms, options.parallel);
        resolve_instance(inst, overrides);
        return inst;
    }

    std::vector<Part> build_parts(const SonificationSpec& normalized,
                                  const DomainOverrides& overrides) const {
        std::vector<Part> parts;
        auto add_stream = [&](const Stream& s) {
            if (s.find_channel("repeat")) {
                DataTable raw = load_stream_data(s);
                for (auto& rp : expand_repeat_parts(s, raw, overrides)) {
                    Part part;
                    part.repeatLabels = rp.seqLabels;
                    part.repeatSpeech = rp.speech;
                    part.name = s.name;
                    part.layers = std::move(rp.layers);
                    parts.push_back(std::move(part));
                }
            } else {
                Part part;
                part.name = s.name;
                part.layers.push_back(make_instance(s, overrides));
                parts.push_back(std::move(part));
            }
        };
        auto add_overlay = [&](const Overlay& o) {
            Part part;
            part.name = o.name;
            for (const auto& s : o.streams) {
                if (s.find_channel("repeat"))
                    throw Error(Error::Kind::Compile,
                                "repeat channels are not supported inside an overlay");
                part.layers.push_back(make_instance(s, overrides));
            }
            parts.push_back(std::move(part));
        };

        switch (normalized.rootKind) {
            case SonificationSpec::RootKind::Stream:
                add_stream(normalized.stream);
                break;
            case SonificationSpec::RootKind::Sequence:
                for (const auto& item : normalized.sequence) {
                    if (item.kind == SeqItem::Kind::Stream)
                        add_stream(item.stream);
                    else if (item.kind == SeqItem::Kind::Overlay)
                        add_overlay(item.overlay);
                }
                break;
            case SonificationSpec::RootKind::Overlay:
                add_overlay(normalized.overlay);
                break;
        }
        return parts;
    }

    void compile_part_bodies(std::vector<Part>& parts) const {
        for (auto& part : parts) {
            if (part.layers.size() == 1) {
                part.body = compile_instance(part.layers[0]);
                continue;
            }
            SubQueue q;
            q.kind = SubQueue::Kind::ToneOverlay;
            q.role = "body";
            for (auto& inst : part.layers) {
                auto sub = compile_instance(inst);
                if (sub.size() != 1 || sub[0].kind != SubQueue::Kind::ToneSeries)
                    throw Error(Error::Kind::Compile,
                                "overlay layers must compile to plain tone series");
                q.layers.push_back(std::move(sub[0].series));
            }
            part.body.push_back(std::move(q));
        }
    }

    // Union of inferred domains for channels under forceSequenceScaleConsistency.
    DomainOverrides consistency_overrides(const SonificationSpec& normalized) const {
        DomainOverrides overrides;
        std::vector<std::string> channels;
        for (const auto& [name, on] : normalized.config.forceSequenceScaleConsistency)
            if (on) channels.push_back(name);
        if (channels.empty() || normalized.rootKind != SonificationSpec::RootKind::Sequence)
            return overrides;

        for (const auto& chName : channels) {
            std::optional<double> lo, hi;
            for (const auto& item : normalized.sequence) {
                std::vector<const Stream*> streams;
                if (item.kind == SeqItem::Kind::Stream)
                    streams.push_back(&item.stream);
                else if (item.kind == SeqItem::Kind::Overlay)
                    for (const auto& s : item.overlay.streams) streams.push_back(&s);
                for (const Stream* s : streams) {
                    const ChannelSpec* ch = s->find_channel(chName);
                    if (!ch || ch->kind != ChannelSpec::Kind::Dynamic) continue;
                    DataTable table =
                        apply_transforms(load_stream_data(*s), s->transforms, options.parallel);
                    auto domain = infer_domain(*ch, table);
                    for (const auto& v : domain) {
                        double d = as_number(v);
                        if (std::isnan(d)) continue;
                        if (!lo || d < *lo) lo = d;
                        if (!hi || d > *hi) hi = d;
                    }
                }
            }
            if (lo && hi) overrides[chName] = {Value{*lo}, Value{*hi}};
        }
        return overrides;
    }

    bool scales_shared(const SonificationSpec& normalized, const std::vector<Part>& parts) const {
        if (parts.size() <= 1) return true;
        // repeat expansion reuses one stream design; explicit sequences do not
        const Stream* first = parts[0].layers.empty() ? nullptr : parts[0].layers[0].stream;
        for (const auto& part : parts)
            for (const auto& inst : part.layers)
                if (inst.stream != first) return false;
        (void)normalized;
        return true;
    }

    AudioQueue assemble(const SonificationSpec& normalized) const {
        DomainOverrides overrides = consistency_overrides(normalized);
        std::vector<Part> parts = build_parts(normalized, overrides);
        compile_part_bodies(parts);
        const ConfigSpec& cfg = normalized.config;

        AudioQueue queue;
        queue.title = normalized.title.value_or("");
        queue.synths = normalized.synths;
        queue.waves = normalized.waves;
        for (const auto& def : normalized.samplings) {
            std::filesystem::path p(def.url);
            if (p.is_relative() && !options.baseDir.empty())
                p = std::filesystem::path(options.baseDir) / p;
            queue.samplings.push_back({def.name, p.string(), def.basePitch});
        }

        if (options.interactivePlayer)
            queue.subQueues.push_back(make_speech(
                "To stop playing the sonification, press the X key.", cfg, "frame"));
        if (normalized.title && !cfg.skip(cfg.skipTitle))
            queue.subQueues.push_back(make_speech(*normalized.title, cfg, "title"));
        if (normalized.description && !cfg.skip(cfg.skipDescription))
            queue.subQueues.push_back(make_speech(*normalized.description, cfg, "description"));

        bool shared = scales_shared(normalized, parts);
        bool skipScales = cfg.skip(cfg.skipScaleSpeech);

        if (shared && !skipScales && !parts.empty() && !parts[0].layers.empty()) {
            std::vector<SubQueue> descs;
            const Instance& inst = parts[0].layers[0];
            for (const auto& ch : inst.stream->encoding) {
                auto it = inst.scales.find(ch.channel);
                if (it == inst.scales.end()) continue;
                describe_scale(descs, it->second, inst.stream->tone, inst.config, &warnings);
            }
            if (!descs.empty()) {
                queue.subQueues.push_back(make_speech(
                    "This stream has the following sound mappings.", cfg, "frame"));
                for (auto& d : descs) queue.subQueues.push_back(std::move(d));
            }
        }

        if (parts.size() > 1)
            queue.subQueues.push_back(make_speech(
                "This sonification sequence consists of " + std::to_string(parts.size()) +
                    " parts.",
                cfg, "frame"));

        for (std::size_t k = 0; k < parts.size(); ++k) {
            Part& part = parts[k];
            if (parts.size() > 1) {
                std::string label;
                if (part.name)
                    label = *part.name;
                else if (part.repeatSpeech && !part.repeatLabels.empty())
                    label = join(part.repeatLabels, " and ");
                if (!label.empty())
                    queue.subQueues.push_back(make_speech(
                        "Stream " + std::to_string(k + 1) + ". " + label + ".", cfg,
                        "announcement"));
            } else if (part.repeatSpeech && !part.repeatLabels.empty()) {
                queue.subQueues.push_back(
                    make_speech(join(part.repeatLabels, ", "), cfg, "announcement"));
            }

            if (!shared && !skipScales && !part.layers.empty()) {
                std::vector<SubQueue> descs;
                const Instance& inst = part.layers[0];
                for (const auto& ch : inst.stream->encoding) {
                    auto it = inst.scales.find(ch.channel);
                    if (it == inst.scales.end()) continue;
                    describe_scale(descs, it->second, inst.stream->tone, inst.config, &warnings);
                }
                if (!descs.empty()) {
                    queue.subQueues.push_back(make_speech(
                        "The " + ordinal_word(k + 1) + " stream has the following sound mappings.",
                        cfg, "frame"));
                    for (auto& d : descs) queue.subQueues.push_back(std::move(d));
                }
            }

            if (!cfg.skip(cfg.skipStartSpeech))
                queue.subQueues.push_back(make_speech("Start playing.", cfg, "frame"));
            for (auto& q : part.body) queue.subQueues.push_back(std::move(q));
        }

        if (!cfg.skip(cfg.skipFinishSpeech))
            queue.subQueues.push_back(make_speech("Finished.", cfg, "frame"));

        double t = 0;
        for (const auto& q : queue.subQueues) {
            switch (q.kind) {
                case SubQueue::Kind::Speech: t += speech_duration_estimate(q.speech); break;
                case SubQueue::Kind::ToneSeries: t += q.series.duration(); break;
                case SubQueue::Kind::ToneSpeechSeries:
                    for (const auto& item : q.speechSeries.items)
                        t += item.isSpeech ? speech_duration_estimate(item.speech)
                                           : item.tone.duration;
                    break;
                case SubQueue::Kind::ToneOverlay: {
                    double longest = 0;
                    for (const auto& layer : q.layers)
                        longest = std::max(longest, layer.duration());
                    t += longest;
                    break;
                }
            }
        }
        queue.estimatedDuration = t;
        return queue;
    }
};

}  // namespace

double ToneSeries::duration() const {
    double end = 0;
    for (const auto& ev : events) end = std::max(end, ev.end());
    return end;
}

double speech_duration_estimate(const SpeechItem& item) {
    double rate = item.rate > 0 ? item.rate : 1.0;
    return static_cast<double>(item.text.size()) / (15.0 * rate);
}

CompileResult compile(const SonificationSpec& spec, const CompileOptions& options) {
    CompileResult result;
    SonificationSpec normalized = normalize(spec);
    Compiler compiler{normalized, options, result.warnings};
    result.queue = compiler.assemble(normalized);
    return result;
}

std::vector<SubQueue> expand_repeat(const SonificationSpec& spec, const Stream& stream,
                                    const CompileOptions& options) {
    std::vector<std::string> warnings;
    SonificationSpec normalized = normalize(spec);
    Compiler compiler{normalized, options, warnings};

    Stream streamCopy = stream;  // normalize desugars in place on copies
    {
        SonificationSpec wrapper = spec;
        wrapper.rootKind = SonificationSpec::RootKind::Stream;
        wrapper.stream = stream;
        wrapper = normalize(wrapper);
        streamCopy = wrapper.stream;
    }

    DataTable raw = compiler.load_stream_data(streamCopy);
    auto parts = compiler.expand_repeat_parts(streamCopy, raw, {});

    std::vector<SubQueue> out;
    for (auto& part : parts) {
        if (part.speech && !part.seqLabels.empty()) {
            SubQueue q;
            q.kind = SubQueue::Kind::Speech;
            q.role = "announcement";
            q.speech.text = "";
            for (std::size_t i = 0; i < part.seqLabels.size(); ++i) {
                if (i) q.speech.text += ", ";
                q.speech.text += part.seqLabels[i];
            }
            q.speech.rate = streamCopy.config.merged_over(normalized.config).speech_rate();
            out.push_back(std::move(q));
        }
        if (part.layers.size() == 1) {
            auto body = compiler.compile_instance(part.layers[0]);
            for (auto& q : body) out.push_back(std::move(q));
        } else {
            SubQueue q;
            q.kind = SubQueue::Kind::ToneOverlay;
            q.role = "body";
            for (auto& inst : part.layers) {
                auto sub = compiler.compile_instance(inst);
                if (sub.size() != 1 || sub[0].kind != SubQueue::Kind::ToneSeries)
                    throw Error(Error::Kind::Compile,
                                "overlay layers must compile to plain tone series");
                q.layers.push_back(std::move(sub[0].series));
            }
            out.push_back(std::move(q));
        }
    }
    return out;
}

void apply_config(AudioQueue& queue, const ConfigSpec& config) {
    if (!config.beats()) return;
    auto convert = [&](double v) { return beats_to_seconds(v, config); };
    auto convertEvent = [&](ToneEvent& ev) {
        double end = convert(ev.start + ev.duration);
        ev.start = convert(ev.start);
        ev.duration = std::max(0.0, end - ev.start);
        if (ev.tap)
            for (auto& seg : ev.tap->segments) seg.duration = convert(seg.duration);
        ev.postReverb = convert(ev.postReverb);
    };
    for (auto& q : queue.subQueues) {
        switch (q.kind) {
            case SubQueue::Kind::ToneSeries:
                for (auto& ev : q.series.events) convertEvent(ev);
                break;
            case SubQueue::Kind::ToneOverlay:
                for (auto& layer : q.layers)
                    for (auto& ev : layer.events) convertEvent(ev);
                break;
            case SubQueue::Kind::ToneSpeechSeries:
                for (auto& item : q.speechSeries.items)
                    if (!item.isSpeech) convertEvent(item.tone);
                break;
            case SubQueue::Kind::Speech: break;
        }
    }
}

ToneSeries emit_ticks(const TickDef& tick, double length) {
    if (tick.interval <= 0)
        throw Error(Error::Kind::Compile, "tick interval must be positive");
    ToneSeries series;
    series.instrument = tick.instrument.value_or("sine");
    double pitch = tick.pitch.value_or(kDefaultTickPitch);
    double dur = tick.duration.value_or(kDefaultTickDuration);
    double loud = tick.loudness.value_or(kDefaultTickLoudness);
    for (double t = 0; t <= length + 1e-9; t += tick.interval) {
        ToneEvent ev;
        ev.start = t;
        ev.duration = dur;
        ev.pitch = pitch;
        ev.loudness = loud;
        series.events.push_back(ev);
        if (length <= 0) break;
    }
    return series;
}

}  // namespace erie
