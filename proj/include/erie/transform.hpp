#pragma once

#include <optional>
#include <string>
#include <vector>

#include "erie/data_table.hpp"

namespace erie {

// One step of a stream's transform pipeline. Steps compose left to right.
struct AggregateOp {
    std::string op;                  // count | sum | mean | median | min | max
    std::optional<std::string> field;  // required for all but count
    std::string as;
};

struct TransformStep {
    enum class Kind { Aggregate, Bin, Filter, Calculate, Density, Fold };
    Kind kind = Kind::Filter;

    // aggregate
    std::vector<AggregateOp> aggregateOps;
    std::vector<std::string> groupby;

    // bin
    std::string field;
    bool nice = true;                    // auto step selection
    std::optional<double> step;
    std::optional<int> maxbins;
    std::string as;                      // also calculate output name
    std::string end;                     // bin end column

    // filter / calculate
    std::string expr;

    // density
    std::optional<std::pair<double, double>> extent;
    std::optional<double> bandwidth;
    std::optional<int> steps;            // grid point count, default 81

    // fold
    std::vector<std::string> foldFields;
    std::string keyName = "key";
    std::string valueName = "value";
};

struct BinOptions {
    bool nice = true;
    std::optional<double> step;
    int maxbins = 10;
};

// Chooses a step of the form {1, 2, 2.5, 5, 10} * 10^k, the smallest one
// that yields at most maxbins buckets over the extent.
double nice_bin_step(double extent, int maxbins);

DataTable transform_aggregate(const DataTable& in, const std::vector<AggregateOp>& ops,
                              const std::vector<std::string>& groupby);
DataTable transform_bin(const DataTable& in, const std::string& field, const BinOptions& opts,
                        const std::string& as, const std::string& end);
DataTable transform_filter(const DataTable& in, const std::string& expr);
DataTable transform_calculate(const DataTable& in, const std::string& expr,
                              const std::string& as);
DataTable transform_fold(const DataTable& in, const std::vector<std::string>& fields,
                         const std::string& keyName, const std::string& valueName);

struct DensityOptions {
    std::optional<std::pair<double, double>> extent;
    std::optional<double> bandwidth;   // default: Silverman per group
    int steps = 81;                    // grid points, inclusive endpoints
    std::vector<std::string> groupby;
    bool parallel = true;              // OpenMP over the evaluation grid
};

// Gaussian kernel density estimate; emits (value, density, groupby...) rows
// per group, groups in first-appearance order.
DataTable transform_density(const DataTable& in, const std::string& field,
                            const DensityOptions& opts);

double silverman_bandwidth(const std::vector<double>& values);

DataTable apply_transform(const DataTable& in, const TransformStep& step,
                          bool parallel = true);
DataTable apply_transforms(DataTable table, const std::vector<TransformStep>& steps,
                           bool parallel = true);

}  // namespace erie
