#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "flowgate/dataset.hpp"
#include "flowgate/eval.hpp"
#include "flowgate/mlp.hpp"
#include "flowgate/resample.hpp"
#include "flowgate/schema.hpp"

namespace flowgate {

inline const std::string kBenignLabel = "Benign";
inline const std::string kAttackLabel = "Attack";

// Class order of the binary unit: index 0 benign, index 1 attack.
std::vector<std::string> binary_classes();

// Relabels every record to Benign / Attack.
FlowDataset to_binary(const FlowDataset& d, const ClassSchema& schema);
FlowDataset without_benign(const FlowDataset& d, const ClassSchema& schema);
// Records whose label is one of `classes`, in original order.
FlowDataset restrict_to(const FlowDataset& d, std::span<const std::string> classes);

// Output space of the categorizer: category_order, then unmapped classes when
// the policy keeps them as their own category.
std::vector<std::string> ids2_categories(const ClassSchema& schema);
// Leaf classes an IDS2 bundle can emit.
std::vector<std::string> ids2_leaf_classes(const ClassSchema& schema);
// Non-terminal categories, which each get a sub-classifier.
std::vector<std::string> ids2_routed_categories(const ClassSchema& schema);
// Manifest unit name of a category's sub-classifier: "DoS" -> "dos",
// "Web Attack" -> "web".
std::string unit_name_for(std::string_view category);

// Architecture and optimizer settings shared by every unit of a topology.
struct UnitConfig {
    std::vector<std::size_t> hidden = kDefaultHidden;
    double dropout_rate = 0.2;
    TrainConfig train;
};

// Encodes labels against `classes`, initializes a 64/32 network and trains it.
TrainResult train_unit(const FlowDataset& data, const std::vector<std::string>& classes, Head head,
                       const UnitConfig& config, std::uint64_t seed);

// ---------------------------------------------------------------------------
// IDS1: binary unit (BU), benign+attack classifier (BAC), attack classifier (AC)

struct Ids1Bundle {
    MlpModel bu;
    MlpModel bac;
    MlpModel ac;
    ClassSchema schema;
    ScalerParams scaler;
};

struct Ids1Targets {
    std::size_t bu_target = 600'000;
    std::size_t attack_target = 250'000;
    std::size_t k_neighbors = 5;
    std::uint64_t seed = 0;
    bool clamp_k = true;
};

struct Ids1Sets {
    FlowDataset binary;
    FlowDataset full;
    FlowDataset attacks;
};

// Balances the binary view to bu_target per side and every class to
// attack_target; the attack-only set is the balanced full set minus benign.
Ids1Sets prepare_ids1_sets(const FlowDataset& d, const ClassSchema& schema, const Ids1Targets& targets);

struct Ids1Training {
    Ids1Bundle bundle;
    std::map<std::string, TrainHistory> history;  // keyed by unit name
};

// Sets must already be standardized with `scaler`. Every set is validated
// before any unit is trained.
Ids1Training train_ids1(const Ids1Sets& sets, const ClassSchema& schema, const ScalerParams& scaler,
                        const UnitConfig& config);

// Routing on unit decisions: BU says attack -> AC's class; BU says benign ->
// BAC's verdict, which either confirms benign or recovers a missed attack.
std::string route_ids1(const ClassSchema& schema, std::size_t bu, std::size_t bac, std::size_t ac);

using UnitPredictor = std::function<std::vector<std::size_t>(const Matrix&)>;

struct Ids1Units {
    UnitPredictor bu;
    UnitPredictor bac;
    UnitPredictor ac;
};

std::vector<std::string> infer_ids1(const Ids1Units& units, const ClassSchema& schema, const Matrix& flows);
std::vector<std::string> infer_ids1(const Ids1Bundle& b, const Matrix& flows);
std::string infer_ids1(const Ids1Bundle& b, std::span<const double> flow);

struct CompositionInputs {
    double bu_acc = 0.0;
    double bac_acc = 0.0;
    double au_acc = 0.0;
};

// literal: the printed 0.01 constant. measured: 1 - bu_acc in its place.
enum class ResidualMode { literal, measured };

struct Composed {
    double value = 0.0;  // clamped to [0, 1]
    double raw = 0.0;
};

// bu + bac * 0.01
Composed compose_ids1_detection(const CompositionInputs& c, ResidualMode mode = ResidualMode::literal);
// bu * au + bu * bac * 0.01
Composed compose_ids1_subclass(const CompositionInputs& c, ResidualMode mode = ResidualMode::literal);

// ---------------------------------------------------------------------------
// IDS2: categorizer plus one sub-classifier per non-terminal category

struct Ids2Bundle {
    MlpModel cat;
    std::map<std::string, MlpModel> sub;  // category -> sub-classifier
    ClassSchema schema;
    ScalerParams scaler;
};

struct Ids2Sets {
    FlowDataset categorized;                  // double-balanced, category labels
    std::map<std::string, FlowDataset> sub;   // level-1 balanced member classes
};

Ids2Sets prepare_ids2_sets(const FlowDataset& d, const DoubleBalanceSpec& spec);

struct Ids2Training {
    Ids2Bundle bundle;
    std::map<std::string, TrainHistory> history;
};

// Sets must already be standardized with `scaler`. Categories without
// training records get no sub-classifier.
Ids2Training train_ids2(const Ids2Sets& sets, const ClassSchema& schema, const ScalerParams& scaler,
                        const UnitConfig& config);

// Double-balances `d`, fits the scaler on the categorized set, then trains.
Ids2Training train_ids2(const FlowDataset& d, const DoubleBalanceSpec& spec, const UnitConfig& config);

struct Ids2Units {
    UnitPredictor cat;
    std::map<std::string, UnitPredictor> sub;
};

// Terminal categories are answered directly; routed categories defer to their
// sub-classifier. Throws MissingSubModel when it is absent.
std::vector<std::string> infer_ids2(const Ids2Units& units, const ClassSchema& schema, const Matrix& flows);
std::vector<std::string> infer_ids2(const Ids2Bundle& b, const Matrix& flows);
std::string infer_ids2(const Ids2Bundle& b, std::span<const double> flow);

// ---------------------------------------------------------------------------
// Bundles on disk: <dir>/bundle.json plus one model file per unit.

struct SingleBundle {
    MlpModel model;
    std::vector<std::string> classes;
    ClassSchema schema;
    ScalerParams scaler;
};

using Bundle = std::variant<SingleBundle, Ids1Bundle, Ids2Bundle>;

std::string_view topology_name(const Bundle& b);
const ClassSchema& bundle_schema(const Bundle& b);
const ScalerParams& bundle_scaler(const Bundle& b);
std::size_t bundle_input_width(const Bundle& b);

// Labels the end-to-end classifier can emit.
std::vector<std::string> bundle_classes(const Bundle& b);
// Unit names in manifest order ("model"; "bu","bac","ac"; "cat", sub-units).
std::vector<std::string> unit_names(const Bundle& b);
const MlpModel& bundle_unit(const Bundle& b, std::string_view name);
std::vector<std::string> unit_classes(const Bundle& b, std::string_view name);
// Rewrites leaf labels into the unit's label space and drops records outside it.
FlowDataset unit_view(const Bundle& b, std::string_view name, const FlowDataset& leaf_labelled);

// Expects standardized flows.
std::vector<std::string> classify(const Bundle& b, const Matrix& flows);
LabelPredictor label_predictor(const Bundle& b);
LabelPredictor label_predictor(const MlpModel& m, std::vector<std::string> classes);

// `test` is standardized; its labels must be leaf classes of the bundle.
EvalReport evaluate(const Bundle& b, const FlowDataset& test);
EvalReport evaluate(const MlpModel& m, const FlowDataset& test, const std::vector<std::string>& classes);
ContrastReport contrast(const Bundle& b, const FlowDataset& balanced_test, const FlowDataset& original_test);

void save_bundle(const Bundle& b, const std::filesystem::path& dir, std::uint64_t seed);
Bundle load_bundle(const std::filesystem::path& dir);

} // namespace flowgate
