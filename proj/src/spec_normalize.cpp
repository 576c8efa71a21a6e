#include <algorithm>
#include <set>

#include "erie/spec.hpp"

namespace erie {

namespace {

std::set<std::string> produced_names(const std::vector<TransformStep>& steps) {
    std::set<std::string> out;
    for (const auto& t : steps) {
        using Kind = TransformStep::Kind;
        switch (t.kind) {
            case Kind::Bin:
                out.insert(t.as);
                out.insert(t.end);
                break;
            case Kind::Calculate:
                out.insert(t.as);
                break;
            case Kind::Aggregate:
                for (const auto& op : t.aggregateOps) out.insert(op.as);
                break;
            case Kind::Fold:
                out.insert(t.keyName);
                out.insert(t.valueName);
                break;
            case Kind::Density:
                out.insert("value");
                out.insert("density");
                break;
            case Kind::Filter:
                break;
        }
    }
    return out;
}

void desugar_inline(Stream& s) {
    std::set<std::string> taken = produced_names(s.transforms);

    // bins first, then aggregates, appended after explicit transforms
    std::vector<TransformStep> bins;
    std::vector<TransformStep> aggs;

    for (auto& ch : s.encoding) {
        if (!ch.binInline) continue;
        TransformStep bin;
        bin.kind = TransformStep::Kind::Bin;
        bin.field = ch.field;
        bin.as = ch.field + "__bin";
        bin.end = ch.field + "__bin_end";
        bin.nice = !ch.binStep.has_value();
        bin.step = ch.binStep;
        if (taken.count(bin.as) || taken.count(bin.end))
            throw Error(Error::Kind::Compile,
                        "inline bin output \"" + bin.as + "\" collides with an existing column");
        taken.insert(bin.as);
        taken.insert(bin.end);
        ch.field = bin.as;
        ch.binInline = false;
        ch.binStep.reset();
        bins.push_back(std::move(bin));
    }

    for (auto& ch : s.encoding) {
        if (!ch.aggregateInline) continue;
        const std::string op = *ch.aggregateInline;
        std::string base = ch.field.empty() ? "all" : ch.field;
        TransformStep agg;
        agg.kind = TransformStep::Kind::Aggregate;
        AggregateOp a;
        a.op = op;
        if (!ch.field.empty() && op != "count") a.field = ch.field;
        a.as = base + "__agg_" + op;
        if (taken.count(a.as))
            throw Error(Error::Kind::Compile,
                        "inline aggregate output \"" + a.as + "\" collides with an existing column");
        taken.insert(a.as);
        // group by every other dynamic channel's field
        for (const auto& other : s.encoding) {
            if (&other == &ch || other.kind != ChannelSpec::Kind::Dynamic) continue;
            if (other.channel == "repeat" || other.aggregateInline) continue;
            if (other.field.empty()) continue;
            if (std::find(agg.groupby.begin(), agg.groupby.end(), other.field) ==
                agg.groupby.end())
                agg.groupby.push_back(other.field);
        }
        ch.field = a.as;
        ch.aggregateInline.reset();
        agg.aggregateOps.push_back(std::move(a));
        aggs.push_back(std::move(agg));
    }

    for (auto& b : bins) s.transforms.push_back(std::move(b));
    for (auto& a : aggs) s.transforms.push_back(std::move(a));
}

void normalize_stream(Stream& s, const std::vector<TransformStep>& globalTransform,
                      const ConfigSpec& topConfig) {
    std::vector<TransformStep> merged = globalTransform;
    for (auto& t : s.transforms) merged.push_back(std::move(t));
    s.transforms = std::move(merged);
    desugar_inline(s);
    s.config = s.config.merged_over(topConfig);
}

void flatten_sequence(const std::vector<SeqItem>& in, std::vector<SeqItem>& out) {
    for (const auto& item : in) {
        if (item.kind == SeqItem::Kind::Sequence)
            flatten_sequence(item.sequence, out);
        else
            out.push_back(item);
    }
}

}  // namespace

SonificationSpec normalize(const SonificationSpec& spec) {
    SonificationSpec out = spec;
    out.globalTransform.clear();

    switch (out.rootKind) {
        case SonificationSpec::RootKind::Stream:
            normalize_stream(out.stream, spec.globalTransform, spec.config);
            break;
        case SonificationSpec::RootKind::Sequence: {
            std::vector<SeqItem> flat;
            flatten_sequence(out.sequence, flat);
            out.sequence = std::move(flat);
            for (auto& item : out.sequence) {
                if (item.kind == SeqItem::Kind::Stream)
                    normalize_stream(item.stream, spec.globalTransform, spec.config);
                else
                    for (auto& s : item.overlay.streams)
                        normalize_stream(s, spec.globalTransform, spec.config);
            }
            break;
        }
        case SonificationSpec::RootKind::Overlay:
            for (auto& s : out.overlay.streams)
                normalize_stream(s, spec.globalTransform, spec.config);
            break;
    }
    return out;
}

}  // namespace erie
