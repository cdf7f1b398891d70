#include "flowgate/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>

#include "flowgate/error.hpp"

namespace flowgate {

namespace {

Matrix gather(const Matrix& m, std::span<const std::size_t> rows) {
    Matrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        out.row(static_cast<Eigen::Index>(r)) = m.row(static_cast<Eigen::Index>(rows[r]));
    }
    return out;
}

UnitPredictor predictor_of(const MlpModel& m) {
    return [&m](const Matrix& flows) { return predict(m, flows).indices; };
}

Matrix single_row(std::span<const double> flow) {
    Matrix m(1, static_cast<Eigen::Index>(flow.size()));
    std::copy(flow.begin(), flow.end(), m.data());
    return m;
}

void require_labels_in(const FlowDataset& d, const std::vector<std::string>& classes, const std::string& what) {
    const std::set<std::string> allowed(classes.begin(), classes.end());
    for (const auto& [label, _] : d.class_counts()) {
        if (!allowed.contains(label)) {
            throw Error(Errc::unknown_label, what + " contains label '" + label + "'");
        }
    }
}

void require_nonempty(const FlowDataset& d, const std::string& what) {
    if (d.empty()) throw Error(Errc::empty_dataset, what + " is empty");
}

double check_unit_interval(double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) throw Error(Errc::invalid_config, std::string(name) + " must lie in [0, 1]");
    return v;
}

Composed clamped(double raw) { return {std::clamp(raw, 0.0, 1.0), raw}; }

// Leaf class answered for a terminal (or own-category) output.
std::string terminal_leaf(const ClassSchema& schema, const std::string& category) {
    if (schema.contains(category) && schema.category_of(category) == nullptr) return category;
    const auto members = schema.members(category);
    if (members.size() != 1) {
        throw Error(Errc::invalid_config, "terminal category '" + category + "' must have exactly one member class");
    }
    return members.front();
}

} // namespace

std::vector<std::string> binary_classes() { return {kBenignLabel, kAttackLabel}; }

FlowDataset to_binary(const FlowDataset& d, const ClassSchema& schema) {
    FlowDataset out = d;
    for (std::size_t i = 0; i < out.size(); ++i) {
        out.set_label(i, out.label(i) == schema.benign_class ? kBenignLabel : kAttackLabel);
    }
    return out;
}

FlowDataset restrict_to(const FlowDataset& d, std::span<const std::string> classes) {
    const std::set<std::string_view> allowed(classes.begin(), classes.end());
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (allowed.contains(d.label(i))) keep.push_back(i);
    }
    return d.subset(keep);
}

FlowDataset without_benign(const FlowDataset& d, const ClassSchema& schema) {
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (d.label(i) != schema.benign_class) keep.push_back(i);
    }
    return d.subset(keep);
}

std::vector<std::string> ids2_categories(const ClassSchema& schema) {
    std::vector<std::string> out = schema.category_order;
    if (schema.unmapped_policy == UnmappedPolicy::own_category) {
        for (const auto& c : schema.classes) {
            if (schema.category_of(c) == nullptr) out.push_back(c);
        }
    }
    return out;
}

std::vector<std::string> ids2_leaf_classes(const ClassSchema& schema) {
    std::vector<std::string> out;
    for (const auto& c : schema.classes) {
        if (schema.category_of(c) || schema.unmapped_policy == UnmappedPolicy::own_category) out.push_back(c);
    }
    return out;
}

std::vector<std::string> ids2_routed_categories(const ClassSchema& schema) {
    std::vector<std::string> out;
    for (const auto& c : schema.category_order) {
        if (!schema.is_terminal(c)) out.push_back(c);
    }
    return out;
}

std::string unit_name_for(std::string_view category) {
    const auto end = category.find(' ');
    std::string name(category.substr(0, end));
    std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return std::tolower(c); });
    return name;
}

TrainResult train_unit(const FlowDataset& data, const std::vector<std::string>& classes, Head head,
                       const UnitConfig& config, std::uint64_t seed) {
    require_nonempty(data, "training set");
    const auto enc = encode_labels(data, classes);
    const std::size_t out_width = head == Head::sigmoid ? 1 : classes.size();
    MlpModel model = init_model(data.width(), config.hidden, out_width, head, config.dropout_rate, seed);
    const Matrix targets = targets_for(model, enc.indices);
    TrainConfig tc = config.train;
    tc.seed = seed;
    return train(std::move(model), data.feature_matrix(), targets, tc);
}

// ---------------------------------------------------------------------------

Ids1Sets prepare_ids1_sets(const FlowDataset& d, const ClassSchema& schema, const Ids1Targets& targets) {
    Ids1Sets sets;
    const FlowDataset binary = to_binary(d, schema);
    ResamplingPlan bu_plan{{}, targets.k_neighbors, derive_seed(targets.seed, 0), targets.clamp_k};
    for (const auto& [label, _] : binary.class_counts()) bu_plan.targets[label] = targets.bu_target;
    sets.binary = balance_to_level(binary, bu_plan);

    ResamplingPlan full_plan{{}, targets.k_neighbors, derive_seed(targets.seed, 1), targets.clamp_k};
    for (const auto& [label, _] : d.class_counts()) full_plan.targets[label] = targets.attack_target;
    sets.full = balance_to_level(d, full_plan);
    sets.attacks = without_benign(sets.full, schema);
    return sets;
}

Ids1Training train_ids1(const Ids1Sets& sets, const ClassSchema& schema, const ScalerParams& scaler,
                        const UnitConfig& config) {
    require_nonempty(sets.binary, "binary set");
    require_nonempty(sets.full, "benign+attack set");
    require_nonempty(sets.attacks, "attack-only set");
    const auto attacks = schema.attack_classes();
    if (attacks.empty()) throw Error(Errc::invalid_config, "schema has no attack classes");
    require_labels_in(sets.binary, binary_classes(), "binary set");
    require_labels_in(sets.full, schema.classes, "benign+attack set");
    require_labels_in(sets.attacks, attacks, "attack-only set");
    const std::size_t width = sets.full.width();
    if (sets.binary.width() != width || sets.attacks.width() != width || scaler.means.size() != width) {
        throw Error(Errc::width_mismatch, "IDS1 training sets and scaler disagree on feature width");
    }

    const std::uint64_t seed = config.train.seed;
    auto bu = train_unit(sets.binary, binary_classes(), Head::sigmoid, config, derive_seed(seed, 0));
    auto bac = train_unit(sets.full, schema.classes, Head::softmax, config, derive_seed(seed, 1));
    auto ac = train_unit(sets.attacks, attacks, Head::softmax, config, derive_seed(seed, 2));

    Ids1Training out{{std::move(bu.model), std::move(bac.model), std::move(ac.model), schema, scaler}, {}};
    out.history["bu"] = std::move(bu.history);
    out.history["bac"] = std::move(bac.history);
    out.history["ac"] = std::move(ac.history);
    return out;
}

std::string route_ids1(const ClassSchema& schema, std::size_t bu, std::size_t bac, std::size_t ac) {
    if (bu == 1) {
        const auto attacks = schema.attack_classes();
        if (ac >= attacks.size()) throw Error(Errc::index_out_of_range, "AC index " + std::to_string(ac));
        return attacks[ac];
    }
    if (bu != 0) throw Error(Errc::index_out_of_range, "BU index " + std::to_string(bu));
    if (bac >= schema.classes.size()) throw Error(Errc::index_out_of_range, "BAC index " + std::to_string(bac));
    return schema.classes[bac];
}

std::vector<std::string> infer_ids1(const Ids1Units& units, const ClassSchema& schema, const Matrix& flows) {
    const auto n = static_cast<std::size_t>(flows.rows());
    const auto bu = units.bu(flows);
    std::vector<std::size_t> benign_rows;
    std::vector<std::size_t> attack_rows;
    for (std::size_t i = 0; i < n; ++i) (bu[i] == 1 ? attack_rows : benign_rows).push_back(i);

    std::vector<std::string> out(n);
    if (!attack_rows.empty()) {
        const auto ac = units.ac(gather(flows, attack_rows));
        for (std::size_t r = 0; r < attack_rows.size(); ++r) out[attack_rows[r]] = route_ids1(schema, 1, 0, ac[r]);
    }
    if (!benign_rows.empty()) {
        const auto bac = units.bac(gather(flows, benign_rows));
        for (std::size_t r = 0; r < benign_rows.size(); ++r) out[benign_rows[r]] = route_ids1(schema, 0, bac[r], 0);
    }
    return out;
}

std::vector<std::string> infer_ids1(const Ids1Bundle& b, const Matrix& flows) {
    return infer_ids1(Ids1Units{predictor_of(b.bu), predictor_of(b.bac), predictor_of(b.ac)}, b.schema, flows);
}

std::string infer_ids1(const Ids1Bundle& b, std::span<const double> flow) {
    return infer_ids1(b, single_row(flow)).front();
}

Composed compose_ids1_detection(const CompositionInputs& c, ResidualMode mode) {
    const double bu = check_unit_interval(c.bu_acc, "bu_acc");
    const double bac = check_unit_interval(c.bac_acc, "bac_acc");
    const double residual = mode == ResidualMode::literal ? 0.01 : 1.0 - bu;
    return clamped(bu + bac * residual);
}

Composed compose_ids1_subclass(const CompositionInputs& c, ResidualMode mode) {
    const double bu = check_unit_interval(c.bu_acc, "bu_acc");
    const double bac = check_unit_interval(c.bac_acc, "bac_acc");
    const double au = check_unit_interval(c.au_acc, "au_acc");
    const double residual = mode == ResidualMode::literal ? 0.01 : 1.0 - bu;
    return clamped(bu * au + bu * bac * residual);
}

// ---------------------------------------------------------------------------

Ids2Sets prepare_ids2_sets(const FlowDataset& d, const DoubleBalanceSpec& spec) {
    Ids2Sets sets;
    const FlowDataset level1 = level1_balance(d, spec);
    ResamplingPlan plan{spec.level2_targets, spec.k_neighbors, derive_seed(spec.seed, 2), spec.clamp_k};
    sets.categorized = balance_to_level(categorize(level1, spec.schema), plan);
    for (const auto& category : ids2_routed_categories(spec.schema)) {
        const auto members = spec.schema.members(category);
        FlowDataset part = restrict_to(level1, members);
        if (!part.empty()) sets.sub.emplace(category, std::move(part));
    }
    return sets;
}

Ids2Training train_ids2(const Ids2Sets& sets, const ClassSchema& schema, const ScalerParams& scaler,
                        const UnitConfig& config) {
    require_nonempty(sets.categorized, "categorized set");
    const auto categories = ids2_categories(schema);
    require_labels_in(sets.categorized, categories, "categorized set");
    for (const auto& category : categories) {
        if (schema.is_terminal(category)) terminal_leaf(schema, category);
    }
    const std::size_t width = sets.categorized.width();
    if (scaler.means.size() != width) throw Error(Errc::width_mismatch, "scaler width differs from training data");
    const auto routed = ids2_routed_categories(schema);
    for (const auto& [category, data] : sets.sub) {
        if (std::find(routed.begin(), routed.end(), category) == routed.end()) {
            throw Error(Errc::invalid_config, "'" + category + "' is not a routed category");
        }
        if (data.width() != width) throw Error(Errc::width_mismatch, "sub-class set for '" + category + "'");
        require_labels_in(data, schema.members(category), "sub-class set for '" + category + "'");
    }

    const std::uint64_t seed = config.train.seed;
    Ids2Training out;
    out.bundle.schema = schema;
    out.bundle.scaler = scaler;
    auto cat = train_unit(sets.categorized, categories, Head::softmax, config, derive_seed(seed, 0));
    out.bundle.cat = std::move(cat.model);
    out.history["cat"] = std::move(cat.history);
    for (std::size_t r = 0; r < routed.size(); ++r) {
        auto it = sets.sub.find(routed[r]);
        if (it == sets.sub.end()) continue;
        auto unit = train_unit(it->second, schema.members(routed[r]), Head::softmax, config, derive_seed(seed, r + 1));
        out.bundle.sub.emplace(routed[r], std::move(unit.model));
        out.history[unit_name_for(routed[r])] = std::move(unit.history);
    }
    return out;
}

Ids2Training train_ids2(const FlowDataset& d, const DoubleBalanceSpec& spec, const UnitConfig& config) {
    Ids2Sets sets = prepare_ids2_sets(d, spec);
    const ScalerParams scaler = fit_scaler(sets.categorized);
    sets.categorized = apply_scaler(sets.categorized, scaler);
    for (auto& [_, data] : sets.sub) data = apply_scaler(data, scaler);
    return train_ids2(sets, spec.schema, scaler, config);
}

std::vector<std::string> infer_ids2(const Ids2Units& units, const ClassSchema& schema, const Matrix& flows) {
    const auto categories = ids2_categories(schema);
    const auto n = static_cast<std::size_t>(flows.rows());
    const auto cat = units.cat(flows);
    std::vector<std::string> out(n);
    std::map<std::string, std::vector<std::size_t>> routed_rows;
    for (std::size_t i = 0; i < n; ++i) {
        if (cat[i] >= categories.size()) throw Error(Errc::index_out_of_range, "categorizer index " + std::to_string(cat[i]));
        const auto& category = categories[cat[i]];
        const bool routed = !schema.is_terminal(category) &&
                            std::find(schema.category_order.begin(), schema.category_order.end(), category) !=
                                schema.category_order.end();
        if (routed) {
            routed_rows[category].push_back(i);
        } else {
            out[i] = terminal_leaf(schema, category);
        }
    }
    for (const auto& [category, rows] : routed_rows) {
        auto it = units.sub.find(category);
        if (it == units.sub.end() || !it->second) {
            throw Error(Errc::missing_sub_model, "no sub-classifier loaded for category '" + category + "'");
        }
        const auto members = schema.members(category);
        const auto picks = it->second(gather(flows, rows));
        for (std::size_t r = 0; r < rows.size(); ++r) {
            if (picks[r] >= members.size()) {
                throw Error(Errc::index_out_of_range, "sub-classifier index for '" + category + "'");
            }
            out[rows[r]] = members[picks[r]];
        }
    }
    return out;
}

std::vector<std::string> infer_ids2(const Ids2Bundle& b, const Matrix& flows) {
    Ids2Units units{predictor_of(b.cat), {}};
    for (const auto& [category, model] : b.sub) units.sub.emplace(category, predictor_of(model));
    return infer_ids2(units, b.schema, flows);
}

std::string infer_ids2(const Ids2Bundle& b, std::span<const double> flow) {
    return infer_ids2(b, single_row(flow)).front();
}

// ---------------------------------------------------------------------------

std::string_view topology_name(const Bundle& b) {
    switch (b.index()) {
    case 0: return "single";
    case 1: return "ids1";
    default: return "ids2";
    }
}

const ClassSchema& bundle_schema(const Bundle& b) {
    return std::visit([](const auto& x) -> const ClassSchema& { return x.schema; }, b);
}

const ScalerParams& bundle_scaler(const Bundle& b) {
    return std::visit([](const auto& x) -> const ScalerParams& { return x.scaler; }, b);
}

std::size_t bundle_input_width(const Bundle& b) {
    if (const auto* s = std::get_if<SingleBundle>(&b)) return s->model.input_width();
    if (const auto* s = std::get_if<Ids1Bundle>(&b)) return s->bu.input_width();
    return std::get<Ids2Bundle>(b).cat.input_width();
}

std::vector<std::string> bundle_classes(const Bundle& b) {
    if (const auto* s = std::get_if<SingleBundle>(&b)) return s->classes;
    if (const auto* s = std::get_if<Ids1Bundle>(&b)) return s->schema.classes;
    return ids2_leaf_classes(std::get<Ids2Bundle>(b).schema);
}

std::vector<std::string> unit_names(const Bundle& b) {
    if (std::holds_alternative<SingleBundle>(b)) return {"model"};
    if (std::holds_alternative<Ids1Bundle>(b)) return {"bu", "bac", "ac"};
    const auto& ids2 = std::get<Ids2Bundle>(b);
    std::vector<std::string> out{"cat"};
    for (const auto& category : ids2_routed_categories(ids2.schema)) {
        if (ids2.sub.contains(category)) out.push_back(unit_name_for(category));
    }
    return out;
}

namespace {

const std::string* category_for_unit(const Ids2Bundle& b, std::string_view name) {
    for (const auto& [category, _] : b.sub) {
        if (unit_name_for(category) == name) return &category;
    }
    return nullptr;
}

[[noreturn]] void unknown_unit(const Bundle& b, std::string_view name) {
    throw Error(Errc::invalid_config,
                "bundle topology " + std::string(topology_name(b)) + " has no unit '" + std::string(name) + "'");
}

} // namespace

const MlpModel& bundle_unit(const Bundle& b, std::string_view name) {
    if (const auto* s = std::get_if<SingleBundle>(&b)) {
        if (name == "model") return s->model;
    } else if (const auto* s = std::get_if<Ids1Bundle>(&b)) {
        if (name == "bu") return s->bu;
        if (name == "bac") return s->bac;
        if (name == "ac") return s->ac;
    } else {
        const auto& ids2 = std::get<Ids2Bundle>(b);
        if (name == "cat") return ids2.cat;
        if (const auto* category = category_for_unit(ids2, name)) return ids2.sub.at(*category);
    }
    unknown_unit(b, name);
}

std::vector<std::string> unit_classes(const Bundle& b, std::string_view name) {
    if (const auto* s = std::get_if<SingleBundle>(&b)) {
        if (name == "model") return s->classes;
    } else if (const auto* s = std::get_if<Ids1Bundle>(&b)) {
        if (name == "bu") return binary_classes();
        if (name == "bac") return s->schema.classes;
        if (name == "ac") return s->schema.attack_classes();
    } else {
        const auto& ids2 = std::get<Ids2Bundle>(b);
        if (name == "cat") return ids2_categories(ids2.schema);
        if (const auto* category = category_for_unit(ids2, name)) return ids2.schema.members(*category);
    }
    unknown_unit(b, name);
}

FlowDataset unit_view(const Bundle& b, std::string_view name, const FlowDataset& leaf_labelled) {
    const auto classes = unit_classes(b, name);
    // Rows already labelled in the unit's own classes pass through unchanged.
    bool own_labels = true;
    for (const auto& label : leaf_labelled.labels()) {
        if (std::find(classes.begin(), classes.end(), label) == classes.end()) {
            own_labels = false;
            break;
        }
    }
    if (own_labels) return leaf_labelled;
    if (std::holds_alternative<Ids1Bundle>(b) && name == "bu") {
        const auto& schema = bundle_schema(b);
        return to_binary(restrict_to(leaf_labelled, schema.classes), schema);
    }
    if (std::holds_alternative<Ids2Bundle>(b) && name == "cat") {
        ClassSchema schema = bundle_schema(b);
        if (schema.unmapped_policy == UnmappedPolicy::error) schema.unmapped_policy = UnmappedPolicy::drop;
        return restrict_to(categorize(restrict_to(leaf_labelled, schema.classes), schema), classes);
    }
    return restrict_to(leaf_labelled, classes);
}

std::vector<std::string> classify(const Bundle& b, const Matrix& flows) {
    if (static_cast<std::size_t>(flows.cols()) != bundle_input_width(b)) {
        throw Error(Errc::width_mismatch, "flows have " + std::to_string(flows.cols()) + " features, bundle expects " +
                                              std::to_string(bundle_input_width(b)));
    }
    if (const auto* s = std::get_if<SingleBundle>(&b)) {
        std::vector<std::string> out;
        for (auto idx : predict(s->model, flows).indices) out.push_back(s->classes.at(idx));
        return out;
    }
    if (const auto* s = std::get_if<Ids1Bundle>(&b)) return infer_ids1(*s, flows);
    return infer_ids2(std::get<Ids2Bundle>(b), flows);
}

LabelPredictor label_predictor(const Bundle& b) {
    return [&b](const FlowDataset& d) { return classify(b, d.feature_matrix()); };
}

LabelPredictor label_predictor(const MlpModel& m, std::vector<std::string> classes) {
    return [&m, classes = std::move(classes)](const FlowDataset& d) {
        const auto indices = predict(m, d.feature_matrix()).indices;
        std::vector<std::string> out;
        out.reserve(indices.size());
        for (auto idx : indices) out.push_back(classes.at(idx));
        return out;
    };
}

EvalReport evaluate(const Bundle& b, const FlowDataset& test) {
    return evaluate(label_predictor(b), test, bundle_classes(b));
}

EvalReport evaluate(const MlpModel& m, const FlowDataset& test, const std::vector<std::string>& classes) {
    return evaluate(label_predictor(m, classes), test, classes);
}

ContrastReport contrast(const Bundle& b, const FlowDataset& balanced_test, const FlowDataset& original_test) {
    return contrast(label_predictor(b), balanced_test, original_test, bundle_classes(b));
}

// ---------------------------------------------------------------------------

namespace {

constexpr int kBundleFormatVersion = 1;

void write_json(const std::filesystem::path& path, const nlohmann::json& j, int indent) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Errc::sink_unwritable, "cannot write '" + path.string() + "'");
    out << j.dump(indent) << '\n';
}

nlohmann::json unit_entry(const std::string& file, const std::vector<std::string>& classes) {
    return {{"file", file}, {"classes", classes}};
}

MlpModel load_unit(const std::filesystem::path& dir, const nlohmann::json& units, const std::string& name,
                   std::size_t expected_width) {
    if (!units.contains(name)) throw Error(Errc::corrupt_model, "bundle manifest lacks unit '" + name + "'");
    MlpModel m = load_model_file((dir / units.at(name).at("file").get<std::string>()).string());
    if (m.output_width() != expected_width) {
        throw Error(Errc::corrupt_model, "unit '" + name + "' has head width " + std::to_string(m.output_width()) +
                                             ", expected " + std::to_string(expected_width));
    }
    return m;
}

} // namespace

void save_bundle(const Bundle& b, const std::filesystem::path& dir, std::uint64_t seed) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(Errc::sink_unwritable, "cannot create '" + dir.string() + "'");
    nlohmann::json units = nlohmann::json::object();
    auto put = [&](const std::string& name, const MlpModel& m, const std::vector<std::string>& classes) {
        const std::string file = name + ".model.json";
        save_model_file(m, (dir / file).string(), seed);
        units[name] = unit_entry(file, classes);
    };
    for (const auto& name : unit_names(b)) put(name, bundle_unit(b, name), unit_classes(b, name));
    if (const auto* s = std::get_if<Ids2Bundle>(&b)) {
        for (const auto& [category, _] : s->sub) units[unit_name_for(category)]["category"] = category;
    }
    nlohmann::json manifest{
        {"format", "flowgate-bundle"},
        {"version", kBundleFormatVersion},
        {"topology", std::string(topology_name(b))},
        {"seed", seed},
        {"schema", bundle_schema(b)},
        {"scaler", bundle_scaler(b)},
        {"units", std::move(units)},
    };
    write_json(dir / "bundle.json", manifest, 2);
}

Bundle load_bundle(const std::filesystem::path& dir) {
    std::ifstream in(dir / "bundle.json", std::ios::binary);
    if (!in) throw Error(Errc::io_error, "cannot open '" + (dir / "bundle.json").string() + "'");
    try {
        const auto manifest = nlohmann::json::parse(in);
        if (manifest.at("version").get<int>() != kBundleFormatVersion) {
            throw Error(Errc::corrupt_model, "unsupported bundle version");
        }
        const auto topology = manifest.at("topology").get<std::string>();
        const auto schema = manifest.at("schema").get<ClassSchema>();
        const auto scaler = manifest.at("scaler").get<ScalerParams>();
        const auto& units = manifest.at("units");
        if (topology == "single") {
            SingleBundle s;
            s.classes = units.at("model").at("classes").get<std::vector<std::string>>();
            s.model = load_model_file((dir / units.at("model").at("file").get<std::string>()).string());
            s.schema = schema;
            s.scaler = scaler;
            return s;
        }
        if (topology == "ids1") {
            Ids1Bundle s;
            s.bu = load_unit(dir, units, "bu", 1);
            s.bac = load_unit(dir, units, "bac", schema.classes.size());
            s.ac = load_unit(dir, units, "ac", schema.attack_classes().size());
            s.schema = schema;
            s.scaler = scaler;
            return s;
        }
        if (topology == "ids2") {
            Ids2Bundle s;
            s.cat = load_unit(dir, units, "cat", ids2_categories(schema).size());
            for (const auto& category : ids2_routed_categories(schema)) {
                const auto name = unit_name_for(category);
                if (!units.contains(name)) continue;
                s.sub.emplace(category, load_unit(dir, units, name, schema.members(category).size()));
            }
            s.schema = schema;
            s.scaler = scaler;
            return s;
        }
        throw Error(Errc::corrupt_model, "unknown topology '" + topology + "'");
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::corrupt_model, std::string("bundle manifest: ") + e.what());
    }
}

} // namespace flowgate
