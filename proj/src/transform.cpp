#include "erie/transform.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "erie/error.hpp"
#include "erie/expr.hpp"

namespace erie {

namespace {

struct ValueKey {
    std::vector<Value> parts;
    bool operator<(const ValueKey& o) const {
        for (std::size_t i = 0; i < std::min(parts.size(), o.parts.size()); ++i) {
            const Value& a = parts[i];
            const Value& b = o.parts[i];
            if (a.index() != b.index()) return a.index() < o.parts[i].index();
            if (a < b) return true;
            if (b < a) return false;
        }
        return parts.size() < o.parts.size();
    }
};

double aggregate_one(const std::string& op, std::vector<double>& vals) {
    if (vals.empty()) return std::nan("");
    if (op == "sum") {
        double s = 0;
        for (double v : vals) s += v;
        return s;
    }
    if (op == "mean") {
        double s = 0;
        for (double v : vals) s += v;
        return s / static_cast<double>(vals.size());
    }
    if (op == "median") {
        std::sort(vals.begin(), vals.end());
        std::size_t n = vals.size();
        return n % 2 ? vals[n / 2] : 0.5 * (vals[n / 2 - 1] + vals[n / 2]);
    }
    if (op == "min") return *std::min_element(vals.begin(), vals.end());
    if (op == "max") return *std::max_element(vals.begin(), vals.end());
    throw Error(Error::Kind::Data, "unknown aggregate op: " + op);
}

}  // namespace

DataTable transform_aggregate(const DataTable& in, const std::vector<AggregateOp>& ops,
                              const std::vector<std::string>& groupby) {
    for (const auto& op : ops) {
        if (op.op != "count" && op.op != "sum" && op.op != "mean" && op.op != "median" &&
            op.op != "min" && op.op != "max")
            throw Error(Error::Kind::Data, "unknown aggregate op: " + op.op);
        if (op.op != "count") {
            if (!op.field)
                throw Error(Error::Kind::Data, "aggregate op " + op.op + " requires a field");
            if (in.column_type(*op.field) != ColumnType::Number &&
                in.column_type(*op.field) != ColumnType::Datetime)
                throw Error(Error::Kind::Data,
                            "aggregate op " + op.op + " requires a numeric field, got " +
                                column_type_name(in.column_type(*op.field)) + " " + *op.field);
        }
    }
    std::vector<std::size_t> groupCols;
    for (const auto& g : groupby) groupCols.push_back(in.column_index(g));

    // group rows, first-appearance order
    std::vector<ValueKey> order;
    std::map<ValueKey, std::vector<std::size_t>> groups;
    for (std::size_t r = 0; r < in.row_count(); ++r) {
        ValueKey key;
        bool skip = false;
        for (std::size_t c : groupCols) {
            const Value& v = in.at(r, c);
            if (is_null(v)) skip = true;  // null group keys are excluded
            key.parts.push_back(v);
        }
        if (skip) continue;
        auto [it, inserted] = groups.try_emplace(key);
        if (inserted) order.push_back(key);
        it->second.push_back(r);
    }
    if (groupby.empty() && order.empty()) {
        order.push_back(ValueKey{});
        groups[ValueKey{}] = {};
        for (std::size_t r = 0; r < in.row_count(); ++r) groups[ValueKey{}].push_back(r);
    }

    // columns constant within every group ride along (bin ends stay paired
    // with their bin starts through a grouped count)
    std::vector<std::size_t> carryCols;
    for (std::size_t c = 0; c < in.column_count(); ++c) {
        if (std::find(groupCols.begin(), groupCols.end(), c) != groupCols.end()) continue;
        bool taken = false;
        for (const auto& op : ops)
            if (op.as == in.columns()[c].name) taken = true;
        if (taken) continue;
        bool constant = true;
        for (const auto& key : order) {
            const Value* first = nullptr;
            for (std::size_t r : groups[key]) {
                const Value& v = in.at(r, c);
                if (is_null(v)) continue;
                if (!first)
                    first = &v;
                else if (!value_equal(*first, v)) {
                    constant = false;
                    break;
                }
            }
            if (!constant) break;
        }
        if (constant) carryCols.push_back(c);
    }

    DataTable out;
    for (std::size_t i = 0; i < groupby.size(); ++i)
        out.add_column(groupby[i], in.columns()[groupCols[i]].type);
    for (std::size_t c : carryCols) out.add_column(in.columns()[c].name, in.columns()[c].type);
    for (const auto& op : ops) out.add_column(op.as, ColumnType::Number);

    for (const auto& key : order) {
        const auto& rows = groups[key];
        std::vector<Value> outRow = key.parts;
        for (std::size_t c : carryCols) {
            Value carried;
            for (std::size_t r : rows)
                if (!is_null(in.at(r, c))) {
                    carried = in.at(r, c);
                    break;
                }
            outRow.push_back(std::move(carried));
        }
        for (const auto& op : ops) {
            if (op.op == "count") {
                if (op.field) {
                    std::size_t c = in.column_index(*op.field);
                    std::size_t n = 0;
                    for (std::size_t r : rows)
                        if (!is_null(in.at(r, c))) ++n;
                    outRow.push_back(static_cast<double>(n));
                } else {
                    outRow.push_back(static_cast<double>(rows.size()));
                }
            } else {
                std::size_t c = in.column_index(*op.field);
                std::vector<double> vals;
                for (std::size_t r : rows)
                    if (!is_null(in.at(r, c))) vals.push_back(as_number(in.at(r, c)));
                double v = aggregate_one(op.op, vals);
                outRow.push_back(std::isnan(v) ? Value{} : Value{v});
            }
        }
        out.add_row(std::move(outRow));
    }
    return out;
}

double nice_bin_step(double extent, int maxbins) {
    if (maxbins < 1) maxbins = 1;
    if (extent <= 0) return 1.0;
    double raw = extent / static_cast<double>(maxbins);
    double mag = std::pow(10.0, std::floor(std::log10(raw)));
    for (double base : {1.0, 2.0, 2.5, 5.0, 10.0}) {
        double candidate = base * mag;
        if (candidate >= raw - 1e-12) return candidate;
    }
    return 10.0 * mag;
}

DataTable transform_bin(const DataTable& in, const std::string& field, const BinOptions& opts,
                        const std::string& as, const std::string& end) {
    ColumnType t = in.column_type(field);
    if (t != ColumnType::Number && t != ColumnType::Datetime)
        throw Error(Error::Kind::Data, "bin requires a numeric field, got " +
                                           column_type_name(t) + " " + field);
    std::size_t c = in.column_index(field);

    double step;
    if (opts.step) {
        if (*opts.step <= 0) throw Error(Error::Kind::Data, "bin step must be positive");
        step = *opts.step;
    } else {
        double lo = 0, hi = 0;
        bool any = false;
        for (const auto& row : in.rows()) {
            if (is_null(row[c])) continue;
            double v = as_number(row[c]);
            if (!any) {
                lo = hi = v;
                any = true;
            } else {
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
        }
        if (!any)
            step = 1.0;
        else
            step = nice_bin_step(hi - lo, opts.maxbins);
    }

    DataTable out;
    for (const auto& col : in.columns()) out.add_column(col.name, col.type);
    out.add_column(as, t);
    out.add_column(end, t);
    for (const auto& row : in.rows()) {
        std::vector<Value> r = row;
        if (is_null(row[c])) {
            r.emplace_back();
            r.emplace_back();
        } else {
            double v = as_number(row[c]);
            double start = std::floor(v / step) * step;
            r.emplace_back(start);
            r.emplace_back(start + step);
        }
        out.add_row(std::move(r));
    }
    return out;
}

DataTable transform_filter(const DataTable& in, const std::string& expr) {
    auto ast = parse_expr(expr);
    DataTable out;
    for (const auto& col : in.columns()) out.add_column(col.name, col.type);
    for (std::size_t r = 0; r < in.row_count(); ++r)
        if (truthy(eval_expr(*ast, Datum(in, r)))) out.add_row(in.rows()[r]);
    return out;
}

DataTable transform_calculate(const DataTable& in, const std::string& expr,
                              const std::string& as) {
    auto ast = parse_expr(expr);
    std::vector<Value> results(in.row_count());
    bool allNumeric = true;
    for (std::size_t r = 0; r < in.row_count(); ++r) {
        results[r] = eval_expr(*ast, Datum(in, r));
        if (!is_null(results[r]) && !is_number(results[r]) && !is_bool(results[r]))
            allNumeric = false;
        if (is_text(results[r])) allNumeric = false;
    }
    DataTable out;
    for (const auto& col : in.columns()) out.add_column(col.name, col.type);
    out.add_column(as, allNumeric ? ColumnType::Number : ColumnType::Text);
    for (std::size_t r = 0; r < in.row_count(); ++r) {
        std::vector<Value> row = in.rows()[r];
        Value v = results[r];
        if (allNumeric && is_bool(v)) v = as_number(v);
        row.push_back(std::move(v));
        out.add_row(std::move(row));
    }
    return out;
}

DataTable transform_fold(const DataTable& in, const std::vector<std::string>& fields,
                         const std::string& keyName, const std::string& valueName) {
    if (fields.empty()) throw Error(Error::Kind::Data, "fold requires at least one field");
    std::vector<std::size_t> foldCols;
    for (const auto& f : fields) foldCols.push_back(in.column_index(f));

    DataTable out;
    std::vector<std::size_t> keepCols;
    for (std::size_t c = 0; c < in.column_count(); ++c) {
        if (std::find(foldCols.begin(), foldCols.end(), c) != foldCols.end()) continue;
        keepCols.push_back(c);
        out.add_column(in.columns()[c].name, in.columns()[c].type);
    }
    ColumnType valueType = in.columns()[foldCols[0]].type;
    for (std::size_t c : foldCols)
        if (in.columns()[c].type != valueType) valueType = ColumnType::Text;
    out.add_column(keyName, ColumnType::Text);
    out.add_column(valueName, valueType);

    for (const auto& row : in.rows()) {
        for (std::size_t i = 0; i < foldCols.size(); ++i) {
            std::vector<Value> r;
            for (std::size_t c : keepCols) r.push_back(row[c]);
            r.emplace_back(fields[i]);
            r.push_back(row[foldCols[i]]);
            out.add_row(std::move(r));
        }
    }
    return out;
}

double silverman_bandwidth(const std::vector<double>& values) {
    std::size_t n = values.size();
    if (n < 2) return 1.0;
    double mean = 0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(n);
    double var = 0;
    for (double v : values) var += (v - mean) * (v - mean);
    var /= static_cast<double>(n - 1);
    double sd = std::sqrt(var);

    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    auto quantile = [&](double q) {
        double idx = q * static_cast<double>(n - 1);
        std::size_t lo = static_cast<std::size_t>(std::floor(idx));
        std::size_t hi = std::min(lo + 1, n - 1);
        double frac = idx - static_cast<double>(lo);
        return sorted[lo] * (1 - frac) + sorted[hi] * frac;
    };
    double iqr = quantile(0.75) - quantile(0.25);
    double spread = sd;
    if (iqr > 0) spread = std::min(sd, iqr / 1.34);
    if (spread <= 0) spread = sd > 0 ? sd : 1.0;
    return 0.9 * spread * std::pow(static_cast<double>(n), -0.2);
}

DataTable transform_density(const DataTable& in, const std::string& field,
                            const DensityOptions& opts) {
    ColumnType t = in.column_type(field);
    if (t != ColumnType::Number && t != ColumnType::Datetime)
        throw Error(Error::Kind::Data, "density requires a numeric field, got " +
                                           column_type_name(t) + " " + field);
    std::size_t fieldCol = in.column_index(field);
    std::vector<std::size_t> groupCols;
    for (const auto& g : opts.groupby) groupCols.push_back(in.column_index(g));

    std::vector<ValueKey> order;
    std::map<ValueKey, std::vector<double>> groups;
    for (std::size_t r = 0; r < in.row_count(); ++r) {
        if (is_null(in.at(r, fieldCol))) continue;
        ValueKey key;
        bool skip = false;
        for (std::size_t c : groupCols) {
            if (is_null(in.at(r, c))) skip = true;
            key.parts.push_back(in.at(r, c));
        }
        if (skip) continue;
        auto [it, inserted] = groups.try_emplace(key);
        if (inserted) order.push_back(key);
        it->second.push_back(as_number(in.at(r, fieldCol)));
    }
    if (order.empty()) throw Error(Error::Kind::Data, "density: no non-null values in " + field);

    int steps = opts.steps > 1 ? opts.steps : 81;

    DataTable out;
    out.add_column("value", ColumnType::Number);
    out.add_column("density", ColumnType::Number);
    for (std::size_t i = 0; i < opts.groupby.size(); ++i)
        out.add_column(opts.groupby[i], in.columns()[groupCols[i]].type);

    for (const auto& key : order) {
        const auto& vals = groups[key];
        if (vals.empty()) throw Error(Error::Kind::Data, "density: empty group");
        double lo, hi;
        if (opts.extent) {
            lo = opts.extent->first;
            hi = opts.extent->second;
            if (!(lo < hi)) throw Error(Error::Kind::Data, "density: extent min must be < max");
        } else {
            lo = *std::min_element(vals.begin(), vals.end());
            hi = *std::max_element(vals.begin(), vals.end());
            if (lo == hi) {  // degenerate extent, widen by one bandwidth unit
                lo -= 1.0;
                hi += 1.0;
            }
        }
        double h = opts.bandwidth ? *opts.bandwidth : silverman_bandwidth(vals);
        if (h <= 0) h = (hi - lo) / 20.0;
        if (h <= 0) h = 1.0;

        const double norm = 1.0 / (static_cast<double>(vals.size()) * h * std::sqrt(2.0 * M_PI));
        std::vector<double> grid(static_cast<std::size_t>(steps));
        std::vector<double> density(static_cast<std::size_t>(steps));
        double dx = (hi - lo) / static_cast<double>(steps - 1);

        // Each grid point accumulates over all samples independently, so the
        // parallel and serial paths produce identical sums.
#pragma omp parallel for schedule(static) if (opts.parallel)
        for (int gi = 0; gi < steps; ++gi) {
            double x = lo + dx * gi;
            double acc = 0.0;
            for (double v : vals) {
                double u = (x - v) / h;
                acc += std::exp(-0.5 * u * u);
            }
            grid[static_cast<std::size_t>(gi)] = x;
            density[static_cast<std::size_t>(gi)] = acc * norm;
        }

        for (int gi = 0; gi < steps; ++gi) {
            std::vector<Value> row;
            row.emplace_back(grid[static_cast<std::size_t>(gi)]);
            row.emplace_back(density[static_cast<std::size_t>(gi)]);
            for (const auto& part : key.parts) row.push_back(part);
            out.add_row(std::move(row));
        }
    }
    return out;
}

DataTable apply_transform(const DataTable& in, const TransformStep& step, bool parallel) {
    using Kind = TransformStep::Kind;
    switch (step.kind) {
        case Kind::Aggregate:
            return transform_aggregate(in, step.aggregateOps, step.groupby);
        case Kind::Bin: {
            BinOptions opts;
            opts.nice = step.nice;
            opts.step = step.step;
            if (step.maxbins) opts.maxbins = *step.maxbins;
            return transform_bin(in, step.field, opts, step.as, step.end);
        }
        case Kind::Filter:
            return transform_filter(in, step.expr);
        case Kind::Calculate:
            return transform_calculate(in, step.expr, step.as);
        case Kind::Density: {
            DensityOptions opts;
            opts.extent = step.extent;
            opts.bandwidth = step.bandwidth;
            if (step.steps) opts.steps = *step.steps;
            opts.groupby = step.groupby;
            opts.parallel = parallel;
            return transform_density(in, step.field, opts);
        }
        case Kind::Fold:
            return transform_fold(in, step.foldFields, step.keyName, step.valueName);
    }
    throw Error(Error::Kind::Data, "bad transform step");
}

DataTable apply_transforms(DataTable table, const std::vector<TransformStep>& steps,
                           bool parallel) {
    for (const auto& step : steps) table = apply_transform(table, step, parallel);
    return table;
}

}  // namespace erie
