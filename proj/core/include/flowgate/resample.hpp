#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "flowgate/dataset.hpp"
#include "flowgate/matrix.hpp"
#include "flowgate/rng.hpp"
#include "flowgate/schema.hpp"

namespace flowgate {

// Per-class target counts for one balancing level.
struct ResamplingPlan {
    std::map<std::string, std::size_t> targets;
    std::size_t k_neighbors = 5;
    std::uint64_t seed = 0;
    // When a class to oversample has n <= k records, use k = n - 1 instead of
    // rejecting the plan.
    bool clamp_k = true;
};

struct DoubleBalanceSpec {
    std::map<std::string, std::size_t> level1_targets;  // sub-class -> count
    std::map<std::string, std::size_t> level2_targets;  // category -> count
    ClassSchema schema;
    std::size_t k_neighbors = 5;
    std::uint64_t seed = 0;
    bool clamp_k = true;
};

// Sink for non-fatal notices (k clamping); defaults to stderr.
using WarningSink = std::function<void(const std::string&)>;
void set_warning_sink(WarningSink sink);

// Neighbour lists sorted by ascending Euclidean distance, ties by ascending
// index; a point is never its own neighbour. Throws KTooLarge unless k < rows.
std::vector<std::vector<std::size_t>> knn_indices(const Matrix& points, std::size_t k);

// Originals first, then (target - n) synthetic rows x + u * (x' - x) with x' one
// of x's k nearest same-class neighbours and u uniform in [0, 1).
Matrix smote_oversample(const Matrix& class_points, std::size_t target, std::size_t k, std::uint64_t seed);

// Sorted row indices of a uniform sample without replacement.
std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t target, Rng& rng);
Matrix random_undersample(const Matrix& class_points, std::size_t target, std::uint64_t seed);

// Throws InvalidPlan naming the violated invariant.
void validate_plan(const ResamplingPlan& plan, const FlowDataset& d);

// Classes listed in the plan end up with exactly their target count; unlisted
// classes pass through. Output is grouped by class name, originals before
// synthetics.
FlowDataset balance_to_level(const FlowDataset& d, const ResamplingPlan& plan);

// Single-pass edited-nearest-neighbour cleaning over the original
// neighbourhoods. A record is removed when a label other than its own holds a
// strict majority (> k/2) of its k neighbours.
FlowDataset enn_clean(const FlowDataset& d, std::size_t k);

FlowDataset categorize(const FlowDataset& d, const ClassSchema& schema);

// Level-1 only: balances sub-classes listed in level1_targets; labels stay leaf classes.
FlowDataset level1_balance(const FlowDataset& d, const DoubleBalanceSpec& spec);

// level1_balance, then categorize, then balance categories to level2_targets.
FlowDataset double_balance(const FlowDataset& d, const DoubleBalanceSpec& spec);

// Level-1 targets default to the largest member count of every multi-class
// non-terminal category; level-2 targets default to `level2` for every category.
DoubleBalanceSpec default_double_balance_spec(const FlowDataset& d, const ClassSchema& schema,
                                              std::size_t level2 = 250'000);

void to_json(nlohmann::json& j, const ResamplingPlan& p);
void from_json(const nlohmann::json& j, ResamplingPlan& p);
// The schema is not part of the serialized form; callers attach it.
void to_json(nlohmann::json& j, const DoubleBalanceSpec& s);
void from_json(const nlohmann::json& j, DoubleBalanceSpec& s);

} // namespace flowgate
