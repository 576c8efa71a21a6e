#include <algorithm>
#include <set>

#include "erie/channels.hpp"
#include "erie/instruments.hpp"
#include "erie/expr.hpp"
#include "erie/spec.hpp"

namespace erie {

namespace {

void check_unique_names(ValidationReport& report, const std::string& what,
                        const std::vector<std::string>& names) {
    std::set<std::string> seen;
    for (const auto& n : names)
        if (!seen.insert(n).second)
            report.error(what, "duplicate " + what + " name \"" + n + "\"");
}

bool domain_is_numeric(const std::vector<Value>& domain) {
    for (const auto& v : domain)
        if (!is_number(v)) return false;
    return true;
}

struct Validator {
    const SonificationSpec& spec;
    ValidationReport& report;

    bool instrument_resolves(const std::string& name) const {
        if (is_preset_instrument(name)) return true;
        return spec.find_synth(name) || spec.find_wave(name) || spec.find_sampling(name);
    }

    void check_scale(const ChannelSpec& ch, const std::string& path) {
        const ScaleSpec& sc = ch.scale;
        int shortcuts = (sc.range ? 1 : 0) + (sc.maxDistinct && *sc.maxDistinct ? 1 : 0) +
                        (sc.times ? 1 : 0);
        if (shortcuts > 1)
            report.error(path, "at most one of range / maxDistinct / times may be set");
        if (sc.domain && sc.range && domain_is_numeric(*sc.domain) &&
            sc.domain->size() != sc.range->size())
            report.error(path, "domain and range lengths differ (" +
                                   std::to_string(sc.domain->size()) + " vs " +
                                   std::to_string(sc.range->size()) + ")");
        if (sc.domain && domain_is_numeric(*sc.domain) && sc.scaleType) {
            if (*sc.scaleType == CurveType::Log) {
                for (const auto& v : *sc.domain)
                    if (as_number(v) <= 0) {
                        report.error(path, "log scale rejects domains crossing zero or below");
                        break;
                    }
            }
            if (*sc.scaleType == CurveType::Sqrt) {
                for (const auto& v : *sc.domain)
                    if (as_number(v) < 0) {
                        report.error(path, "sqrt scale requires a non-negative domain");
                        break;
                    }
            }
        }
        if (sc.band && *sc.band <= 0) report.error(path, "band must be positive");
        if (sc.length && *sc.length <= 0) report.error(path, "length must be positive");
        if (sc.range && !ch.channel.empty() && ch.channel != "timbre") {
            const ChannelInfo* info = channel_info(ch.channel);
            if (info && info->capMax > info->capMin) {
                for (const auto& v : *sc.range) {
                    if (!is_number(v)) {
                        report.error(path, "range values for " + ch.channel + " must be numbers");
                        break;
                    }
                    double d = std::get<double>(v);
                    if (d < info->capMin || d > info->capMax) {
                        report.error(path, "range value " + number_to_text(d) + " outside " +
                                               ch.channel + " caps [" +
                                               number_to_text(info->capMin) + ", " +
                                               number_to_text(info->capMax) + "]");
                        break;
                    }
                }
            }
        }
        if (sc.tickName && !spec.find_tick(*sc.tickName))
            report.error(path, "tick \"" + *sc.tickName + "\" is not defined");
    }

    void check_stream(const Stream& s, const std::string& path) {
        if (s.data.kind == DataSource::Kind::None)
            report.error(path, "stream has no data source");
        if (s.data.kind == DataSource::Kind::Named && !spec.find_dataset(s.data.name))
            report.error(path, "dataset \"" + s.data.name + "\" is not defined");

        if (!instrument_resolves(s.tone.type))
            report.error(path + ".tone", "unknown instrument \"" + s.tone.type + "\"");
        for (const auto& f : s.tone.filters)
            if (!is_preset_filter(f))
                report.error(path + ".tone", "unknown filter \"" + f + "\"");

        const ChannelSpec* time = s.find_channel("time");
        const ChannelSpec* time2 = s.find_channel("time2");
        if (time2) {
            if (!time)
                report.error(path, "time2 requires a time channel");
            else {
                Timing timing = time->scale.timing.value_or(Timing::Absolute);
                if (timing != Timing::Absolute)
                    report.error(path, "time2 requires absolute timing");
            }
            if (time && time->scale.band)
                report.warn(path, "band is ignored when time2 supplies end times");
        }

        for (const auto& ch : s.encoding) {
            std::string chPath = path + ".encoding." + ch.channel;
            if (ch.channel == "repeat") {
                if (ch.repeatFields.empty())
                    report.error(chPath, "repeat requires at least one field");
                for (const auto& by : ch.repeatBy)
                    if (by != "sequence" && by != "overlay")
                        report.error(chPath, "repeat \"by\" entries must be sequence or overlay");
                if (ch.repeatBy.size() > ch.repeatFields.size())
                    report.error(chPath, "repeat \"by\" list longer than field list");
                if (!ch.repeatBy.empty() && ch.repeatBy[0] == "overlay" && ch.repeatSpeech &&
                    ch.repeatBy.size() > 1 &&
                    std::find(ch.repeatBy.begin() + 1, ch.repeatBy.end(), "sequence") !=
                        ch.repeatBy.end())
                    report.error(chPath,
                                 "sequence nested inside an overlay repeat is not playable; "
                                 "use by=sequence for the outer field");
                check_scale(ch, chPath);
                continue;
            }
            switch (ch.kind) {
                case ChannelSpec::Kind::Dynamic:
                    if (ch.field.empty())
                        report.error(chPath, "dynamic channel requires a field");
                    break;
                case ChannelSpec::Kind::Conditioned:
                    if (ch.conditions.empty())
                        report.error(chPath, "conditioned channel requires at least one condition");
                    for (const auto& c : ch.conditions) {
                        try {
                            parse_expr(c.test);
                        } catch (const Error& e) {
                            report.error(chPath, e.what());
                        }
                    }
                    break;
                case ChannelSpec::Kind::Static:
                    break;
            }
            if (ch.channel == "timbre" && ch.kind == ChannelSpec::Kind::Dynamic &&
                !ch.scale.range)
                report.error(chPath, "dynamic timbre requires an explicit range of instrument names");
            if (ch.channel == "timbre" && ch.scale.range)
                for (const auto& v : *ch.scale.range)
                    if (is_text(v) && !instrument_resolves(std::get<std::string>(v)))
                        report.error(chPath, "unknown instrument \"" +
                                                 std::get<std::string>(v) + "\" in timbre range");
            check_scale(ch, chPath);
        }

        ConfigSpec merged = s.config.merged_over(spec.config);
        if (merged.beats() && merged.bpm_or_default() <= 0)
            report.error(path + ".config", "bpm must be positive when timeUnit is beats");
    }

    void check_overlay(const Overlay& o, const std::string& path) {
        if (o.streams.empty()) report.error(path, "overlay has no streams");
        for (std::size_t i = 0; i < o.streams.size(); ++i) {
            const Stream& s = o.streams[i];
            std::string p = path + "[" + std::to_string(i) + "]";
            if (s.find_channel("speechBefore") || s.find_channel("speechAfter"))
                report.error(p, "speech channels cannot be used inside an overlay");
            check_stream(s, p);
        }
    }

    void check_seq_items(const std::vector<SeqItem>& items, const std::string& path) {
        if (items.empty()) report.error(path, "sequence has no entries");
        for (std::size_t i = 0; i < items.size(); ++i) {
            std::string p = path + "[" + std::to_string(i) + "]";
            switch (items[i].kind) {
                case SeqItem::Kind::Stream: check_stream(items[i].stream, p); break;
                case SeqItem::Kind::Overlay: check_overlay(items[i].overlay, p); break;
                case SeqItem::Kind::Sequence: check_seq_items(items[i].sequence, p); break;
            }
        }
    }

    void run() {
        std::vector<std::string> names;
        for (const auto& d : spec.datasets) names.push_back(d.name);
        check_unique_names(report, "dataset", names);
        names.clear();
        for (const auto& s : spec.synths) names.push_back(s.name);
        check_unique_names(report, "synth", names);
        names.clear();
        for (const auto& w : spec.waves) names.push_back(w.name);
        check_unique_names(report, "wave", names);
        names.clear();
        for (const auto& s : spec.samplings) names.push_back(s.name);
        check_unique_names(report, "sampling", names);
        names.clear();
        for (const auto& t : spec.ticks) names.push_back(t.name);
        check_unique_names(report, "tick", names);

        for (const auto& w : spec.waves) {
            if (w.sine.size() != w.cosine.size() || w.sine.empty())
                report.error("wave." + w.name,
                             "wave coefficient lists must have equal length >= 1");
        }
        for (const auto& t : spec.ticks)
            if (t.interval <= 0)
                report.error("tick." + t.name, "tick interval must be positive");

        switch (spec.rootKind) {
            case SonificationSpec::RootKind::Stream: check_stream(spec.stream, "stream"); break;
            case SonificationSpec::RootKind::Sequence:
                check_seq_items(spec.sequence, "sequence");
                break;
            case SonificationSpec::RootKind::Overlay: check_overlay(spec.overlay, "overlay"); break;
        }
    }
};

}  // namespace

ValidationReport validate(const SonificationSpec& spec) {
    ValidationReport report;
    Validator{spec, report}.run();
    return report;
}

}  // namespace erie
