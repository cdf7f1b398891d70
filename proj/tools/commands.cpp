#include "commands.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <stdexcept>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "flowgate/dataset.hpp"
#include "flowgate/error.hpp"
#include "flowgate/eval.hpp"
#include "flowgate/mlp.hpp"
#include "flowgate/pipeline.hpp"
#include "flowgate/resample.hpp"
#include "flowgate/rng.hpp"
#include "flowgate/schema.hpp"
#include "synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace flowgate::cli {

namespace {

constexpr std::string_view kVersion = "0.1.0";

// Failures raised while fitting networks map to exit code 3.
class TrainingFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

json read_json_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::io_error, "cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw Error(Errc::invalid_config, "'" + path + "': " + e.what());
    }
}

void write_text_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Errc::sink_unwritable, "cannot write '" + path.string() + "'");
    out << text;
}

void write_json_file(const fs::path& path, const json& j) { write_text_file(path, j.dump(2) + "\n"); }

void make_out_dir(const std::string& out) {
    if (out.empty()) throw Error(Errc::invalid_config, "--out is required");
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) throw Error(Errc::sink_unwritable, "cannot create '" + out + "': " + ec.message());
}

void require_file(const std::string& path) {
    if (!fs::is_regular_file(path)) throw Error(Errc::io_error, "input '" + path + "' does not exist");
}

ClassSchema load_schema(const json& source) {
    if (source.is_string()) {
        const auto s = source.get<std::string>();
        if (s == "cicids2017") return ClassSchema::cicids2017();
        return read_json_file(s).get<ClassSchema>();
    }
    return source.get<ClassSchema>();
}

json counts_json(const FlowDataset& d) { return d.class_counts(); }

std::string counts_csv(const std::map<std::string, std::size_t>& before,
                       const std::map<std::string, std::size_t>* after = nullptr) {
    std::size_t total = 0;
    for (const auto& [_, n] : before) total += n;
    std::ostringstream out;
    out << (after ? "class,before,after\n" : "class,count,share\n");
    std::map<std::string, std::pair<std::size_t, std::size_t>> rows;
    for (const auto& [c, n] : before) rows[c].first = n;
    if (after) {
        for (const auto& [c, n] : *after) rows[c].second = n;
    }
    for (const auto& [c, pair] : rows) {
        out << (c.find(',') == std::string::npos ? c : "\"" + c + "\"") << ',' << pair.first << ',';
        if (after) {
            out << pair.second;
        } else {
            out << (total == 0 ? 0.0 : static_cast<double>(pair.first) / static_cast<double>(total));
        }
        out << '\n';
    }
    return out.str();
}

FlowDataset unscale(const FlowDataset& d, const ScalerParams& p) {
    FlowDataset out = d;
    for (std::size_t i = 0; i < out.size(); ++i) {
        auto r = out.row(i);
        for (std::size_t j = 0; j < r.size(); ++j) r[j] = p.stds[j] == 0.0 ? p.means[j] : r[j] * p.stds[j] + p.means[j];
    }
    return out;
}

template <typename Fn>
int guarded(const char* command, Fn&& fn) {
    try {
        return fn();
    } catch (const TrainingFailure& e) {
        std::cerr << "flowgate " << command << ": training failed: " << e.what() << '\n';
        return kExitRuntime;
    } catch (const Error& e) {
        std::cerr << "flowgate " << command << ": " << e.what() << '\n';
        return kExitUsage;
    } catch (const json::exception& e) {
        std::cerr << "flowgate " << command << ": invalid configuration: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "flowgate " << command << ": " << e.what() << '\n';
        return kExitRuntime;
    }
}

template <typename Fn>
auto training_phase(Fn&& fn) {
    try {
        return fn();
    } catch (const std::exception& e) {
        throw TrainingFailure(e.what());
    }
}

json run_record(std::string_view command, const CommonArgs& c) {
    json j{{"command", command}, {"flowgate_version", kVersion}, {"out", c.out}};
    if (c.config) j["config_path"] = *c.config;
    if (c.seed) j["seed"] = *c.seed;
    return j;
}

} // namespace

// ---------------------------------------------------------------------------

int cmd_ingest(const IngestArgs& args) {
    return guarded("ingest", [&] {
        std::vector<std::string> inputs = args.inputs;
        std::optional<json> schema_source;
        if (args.common.config) {
            const json cfg = read_json_file(*args.common.config);
            if (cfg.contains("inputs")) {
                for (const auto& p : cfg.at("inputs")) inputs.push_back(p.get<std::string>());
            }
            if (cfg.contains("schema")) schema_source = cfg.at("schema");
        }
        if (args.schema) schema_source = json(*args.schema);
        if (inputs.empty()) throw Error(Errc::invalid_config, "no input files given");
        for (const auto& p : inputs) require_file(p);

        std::vector<FlowDataset> parts;
        json files = json::array();
        for (const auto& p : inputs) {
            parts.push_back(read_csv_file(p));
            files.push_back({{"path", p}, {"rows", parts.back().size()}});
        }
        const FlowDataset merged = merge(parts);
        const CleanResult cleaned = clean(merged);

        const auto counts = cleaned.data.class_counts();
        json share = json::object();
        for (const auto& [c, n] : counts) {
            share[c] = cleaned.data.empty() ? 0.0 : static_cast<double>(n) / static_cast<double>(cleaned.data.size());
        }
        json summary{
            {"files", files},
            {"rows_in", merged.size()},
            {"rows_out", cleaned.data.size()},
            {"removed", cleaned.removed},
            {"feature_width", cleaned.data.width()},
            {"per_class", counts},
            {"per_class_share", share},
        };
        if (schema_source) {
            const ClassSchema schema = load_schema(*schema_source);
            json unknown = json::array();
            for (const auto& [c, _] : counts) {
                if (!schema.contains(c)) unknown.push_back(c);
            }
            summary["unknown_labels"] = unknown;
        }

        make_out_dir(args.common.out);
        const fs::path out(args.common.out);
        write_csv_file(cleaned.data, (out / "clean.csv").string());
        write_json_file(out / "summary.json", summary);
        write_text_file(out / "class_counts.csv", counts_csv(counts));
        json run = run_record("ingest", args.common);
        run["inputs"] = inputs;
        write_json_file(out / "run.json", run);
        std::cout << "ingest: " << merged.size() << " rows in, " << cleaned.data.size() << " rows out, "
                  << cleaned.removed << " removed\n";
        return kExitOk;
    });
}

int cmd_balance(const BalanceArgs& args) {
    return guarded("balance", [&] {
        if (!args.common.config) throw Error(Errc::invalid_config, "--config PLAN.json is required");
        require_file(args.input);
        const json cfg = read_json_file(*args.common.config);
        const FlowDataset d = read_csv_file(args.input);
        const bool clamp = args.clamp_k || cfg.value("clamp_k", false);

        FlowDataset balanced;
        json resolved;
        if (cfg.contains("level2_targets")) {
            DoubleBalanceSpec spec;
            spec.schema = args.schema ? load_schema(json(*args.schema))
                          : cfg.contains("schema") ? load_schema(cfg.at("schema"))
                                                   : ClassSchema::cicids2017();
            from_json(cfg, spec);
            if (args.common.seed) spec.seed = *args.common.seed;
            spec.clamp_k = clamp;
            balanced = double_balance(d, spec);
            resolved = spec;
            resolved["schema"] = spec.schema;
        } else {
            ResamplingPlan plan = cfg.get<ResamplingPlan>();
            if (args.common.seed) plan.seed = *args.common.seed;
            plan.clamp_k = clamp;
            balanced = balance_to_level(d, plan);
            resolved = plan;
        }
        if (cfg.contains("enn_k")) {
            const auto k = cfg.at("enn_k").get<std::size_t>();
            balanced = enn_clean(balanced, k);
            resolved["enn_k"] = k;
        }

        make_out_dir(args.common.out);
        const fs::path out(args.common.out);
        write_csv_file(balanced, (out / "balanced.csv").string());
        const auto before = d.class_counts();
        const auto after = balanced.class_counts();
        write_json_file(out / "counts.json", json{{"before", before}, {"after", after}});
        write_text_file(out / "class_counts.csv", counts_csv(before, &after));
        json run = run_record("balance", args.common);
        run["input"] = args.input;
        run["plan"] = resolved;
        write_json_file(out / "run.json", run);
        std::cout << "balance: " << d.size() << " rows -> " << balanced.size() << " rows\n";
        return kExitOk;
    });
}

// ---------------------------------------------------------------------------

namespace {

struct RunConfig {
    std::string input;
    std::string topology = "single";
    std::uint64_t seed = 0;
    SplitSpec split;
    SplitSpec test_split;
    std::string order = "balance-then-standardize";
    json schema_source;
    json balance = json::object();
    UnitConfig unit;
    std::vector<std::string> classes;
};

RunConfig parse_run_config(const json& cfg, const TrainArgs& args) {
    RunConfig rc;
    if (cfg.contains("input")) cfg.at("input").get_to(rc.input);
    if (args.input) rc.input = *args.input;
    if (rc.input.empty()) throw Error(Errc::invalid_config, "no input dataset (set \"input\" or --input)");
    if (cfg.contains("topology")) cfg.at("topology").get_to(rc.topology);
    if (rc.topology != "single" && rc.topology != "ids1" && rc.topology != "ids2") {
        throw Error(Errc::invalid_config, "topology must be single, ids1 or ids2");
    }
    if (cfg.contains("seed")) cfg.at("seed").get_to(rc.seed);
    if (args.common.seed) rc.seed = *args.common.seed;
    if (cfg.contains("split")) rc.split = cfg.at("split").get<SplitSpec>();
    if (cfg.contains("test_split")) rc.test_split = cfg.at("test_split").get<SplitSpec>();
    rc.split.seed = derive_seed(rc.seed, 101);
    rc.test_split.seed = derive_seed(rc.seed, 102);
    if (cfg.contains("order")) cfg.at("order").get_to(rc.order);
    if (rc.order != "balance-then-standardize" && rc.order != "standardize-then-balance") {
        throw Error(Errc::invalid_config, "order must be balance-then-standardize or standardize-then-balance");
    }
    rc.schema_source = cfg.value("schema", json("cicids2017"));
    if (cfg.contains("balance")) rc.balance = cfg.at("balance");
    if (cfg.contains("model")) {
        const auto& m = cfg.at("model");
        if (m.contains("hidden")) m.at("hidden").get_to(rc.unit.hidden);
        if (m.contains("dropout_rate")) m.at("dropout_rate").get_to(rc.unit.dropout_rate);
    }
    if (cfg.contains("train")) rc.unit.train = cfg.at("train").get<TrainConfig>();
    rc.unit.train.seed = derive_seed(rc.seed, 104);
    if (cfg.contains("classes")) cfg.at("classes").get_to(rc.classes);
    return rc;
}

json resolved_json(const RunConfig& rc) {
    return {
        {"command", "train"},
        {"flowgate_version", kVersion},
        {"input", rc.input},
        {"topology", rc.topology},
        {"seed", rc.seed},
        {"split", rc.split},
        {"test_split", rc.test_split},
        {"order", rc.order},
        {"schema", rc.schema_source},
        {"balance", rc.balance},
        {"model", {{"hidden", rc.unit.hidden}, {"dropout_rate", rc.unit.dropout_rate}}},
        {"train", rc.unit.train},
        {"classes", rc.classes},
        {"derived_seeds",
         {{"split", rc.split.seed}, {"test_split", rc.test_split.seed}, {"balance", derive_seed(rc.seed, 103)},
          {"train", rc.unit.train.seed}}},
    };
}

ResamplingPlan uniform_plan(const FlowDataset& d, std::size_t level, const json& b, std::uint64_t seed) {
    ResamplingPlan plan;
    for (const auto& [c, _] : d.class_counts()) plan.targets[c] = level;
    plan.k_neighbors = b.value("k_neighbors", std::size_t{5});
    plan.clamp_k = b.value("clamp_k", true);
    plan.seed = seed;
    return plan;
}

} // namespace

int cmd_train(const TrainArgs& args) {
    return guarded("train", [&] {
        if (!args.common.config) throw Error(Errc::invalid_config, "--config RUN.json is required");
        const RunConfig rc = parse_run_config(read_json_file(*args.common.config), args);
        require_file(rc.input);

        const CleanResult cleaned = clean(read_csv_file(rc.input));
        if (cleaned.removed > 0) {
            std::cerr << "train: dropped " << cleaned.removed << " records with non-finite features\n";
        }
        const FlowDataset& d = cleaned.data;
        const SplitResult original = split(d, rc.split);
        const bool standardize_first = rc.order == "standardize-then-balance";
        std::optional<ScalerParams> pre_scaler;
        FlowDataset base = original.train;
        if (standardize_first) {
            pre_scaler = fit_scaler(base);
            base = apply_scaler(base, *pre_scaler);
        }
        const std::uint64_t balance_seed = derive_seed(rc.seed, 103);

        // Scaler used by the bundle: fitted on the balanced training split, or
        // on the original training split when standardizing first.
        auto choose_scaler = [&](const FlowDataset& balanced_train) {
            return pre_scaler ? *pre_scaler : fit_scaler(balanced_train);
        };
        auto standardized = [&](const FlowDataset& part, const ScalerParams& s) {
            return pre_scaler ? part : apply_scaler(part, s);
        };

        Bundle bundle;
        std::map<std::string, TrainHistory> history;
        std::map<std::string, FlowDataset> balanced_tests;
        json balance_counts = json::object();

        if (rc.topology == "single") {
            ResamplingPlan plan;
            if (rc.balance.contains("targets")) {
                plan = rc.balance.get<ResamplingPlan>();
                plan.seed = balance_seed;
            } else {
                plan = uniform_plan(base, rc.balance.value("level", std::size_t{1000}), rc.balance, balance_seed);
            }
            const FlowDataset bal = balance_to_level(base, plan);
            balance_counts["model"] = counts_json(bal);
            const SplitResult parts = split(bal, rc.test_split);
            std::vector<std::string> classes = rc.classes;
            if (classes.empty()) {
                for (const auto& [c, _] : d.class_counts()) classes.push_back(c);
            }
            const ScalerParams scaler = choose_scaler(parts.train);
            const FlowDataset train_set = standardized(parts.train, scaler);
            auto result = training_phase(
                [&] { return train_unit(train_set, classes, Head::softmax, rc.unit, rc.unit.train.seed); });
            ClassSchema schema;
            schema.classes = classes;
            schema.benign_class.clear();
            bundle = SingleBundle{std::move(result.model), classes, schema, scaler};
            history["model"] = std::move(result.history);
            balanced_tests["balanced_test.csv"] = parts.test;
        } else if (rc.topology == "ids1") {
            const ClassSchema schema = load_schema(rc.schema_source);
            Ids1Targets targets;
            targets.bu_target = rc.balance.value("bu_target", targets.bu_target);
            targets.attack_target = rc.balance.value("attack_target", targets.attack_target);
            targets.k_neighbors = rc.balance.value("k_neighbors", targets.k_neighbors);
            targets.clamp_k = rc.balance.value("clamp_k", true);
            targets.seed = balance_seed;
            const Ids1Sets sets = prepare_ids1_sets(base, schema, targets);
            balance_counts["bu"] = counts_json(sets.binary);
            balance_counts["bac"] = counts_json(sets.full);
            const SplitResult bin = split(sets.binary, rc.test_split);
            const SplitResult full = split(sets.full, rc.test_split);
            const ScalerParams scaler = choose_scaler(full.train);
            const Ids1Sets train_sets{standardized(bin.train, scaler), standardized(full.train, scaler),
                                      standardized(without_benign(full.train, schema), scaler)};
            auto trained = training_phase([&] { return train_ids1(train_sets, schema, scaler, rc.unit); });
            bundle = std::move(trained.bundle);
            history = std::move(trained.history);
            balanced_tests["balanced_test.csv"] = full.test;
            balanced_tests["balanced_test_bu.csv"] = bin.test;
            balanced_tests["balanced_test_ac.csv"] = without_benign(full.test, schema);
        } else {
            const ClassSchema schema = load_schema(rc.schema_source);
            DoubleBalanceSpec spec =
                default_double_balance_spec(base, schema, rc.balance.value("level2_target", std::size_t{250'000}));
            if (rc.balance.contains("level1_targets")) rc.balance.at("level1_targets").get_to(spec.level1_targets);
            if (rc.balance.contains("level2_targets")) rc.balance.at("level2_targets").get_to(spec.level2_targets);
            spec.k_neighbors = rc.balance.value("k_neighbors", spec.k_neighbors);
            spec.clamp_k = rc.balance.value("clamp_k", true);
            spec.seed = balance_seed;
            const Ids2Sets sets = prepare_ids2_sets(base, spec);
            balance_counts["level1_targets"] = spec.level1_targets;
            balance_counts["level2_targets"] = spec.level2_targets;
            balance_counts["cat"] = counts_json(sets.categorized);
            const SplitResult cat = split(sets.categorized, rc.test_split);
            const ScalerParams scaler = choose_scaler(cat.train);
            Ids2Sets train_sets;
            train_sets.categorized = standardized(cat.train, scaler);
            balanced_tests["balanced_test_cat.csv"] = cat.test;
            for (const auto& [category, data] : sets.sub) {
                const SplitResult parts = split(data, rc.test_split);
                train_sets.sub.emplace(category, standardized(parts.train, scaler));
                balanced_tests["balanced_test_" + unit_name_for(category) + ".csv"] = parts.test;
                balance_counts[unit_name_for(category)] = counts_json(data);
            }
            auto trained = training_phase([&] { return train_ids2(train_sets, schema, scaler, rc.unit); });
            bundle = std::move(trained.bundle);
            history = std::move(trained.history);
        }

        make_out_dir(args.common.out);
        const fs::path out(args.common.out);
        save_bundle(bundle, out / "bundle", rc.seed);
        json hist = json::object();
        for (const auto& [unit, h] : history) hist[unit] = h;
        write_json_file(out / "history.json", json{{"seed", rc.seed}, {"units", hist}});
        write_json_file(out / "counts.json", json{{"seed", rc.seed}, {"balanced", balance_counts},
                                                  {"original_train", counts_json(original.train)},
                                                  {"original_test", counts_json(original.test)}});
        fs::create_directories(out / "data");
        write_csv_file(original.test, (out / "data" / "original_test.csv").string());
        for (const auto& [file, data] : balanced_tests) {
            write_csv_file(pre_scaler ? unscale(data, *pre_scaler) : data, (out / "data" / file).string());
        }
        write_json_file(out / "run.json", resolved_json(rc));
        std::cout << "train: " << rc.topology << " bundle written to " << (out / "bundle").string() << '\n';
        return kExitOk;
    });
}

// ---------------------------------------------------------------------------

int cmd_evaluate(const EvaluateArgs& args) {
    return guarded("evaluate", [&] {
        const Bundle bundle = load_bundle(args.bundle);
        require_file(args.test);
        if (args.original) require_file(*args.original);
        const ScalerParams& scaler = bundle_scaler(bundle);

        auto prepare = [&](const std::string& path) {
            FlowDataset raw = read_csv_file(path);
            if (raw.width() != bundle_input_width(bundle)) {
                throw Error(Errc::width_mismatch, "'" + path + "' has " + std::to_string(raw.width()) +
                                                      " features, bundle expects " +
                                                      std::to_string(bundle_input_width(bundle)));
            }
            FlowDataset scaled = apply_scaler(clean(raw).data, scaler);
            if (args.unit) return unit_view(bundle, *args.unit, scaled);
            const auto classes = bundle_classes(bundle);
            FlowDataset kept = restrict_to(scaled, classes);
            if (kept.size() != scaled.size()) {
                std::cerr << "evaluate: skipped " << scaled.size() - kept.size() << " records of '" << path
                          << "' whose class the bundle cannot emit\n";
            }
            return kept;
        };

        LabelPredictor predictor;
        std::vector<std::string> classes;
        if (args.unit) {
            classes = unit_classes(bundle, *args.unit);
            predictor = label_predictor(bundle_unit(bundle, *args.unit), classes);
        } else {
            classes = bundle_classes(bundle);
            predictor = label_predictor(bundle);
        }

        const FlowDataset test = prepare(args.test);
        std::optional<FlowDataset> original;
        if (args.original) original = prepare(*args.original);

        make_out_dir(args.common.out);
        const fs::path out(args.common.out);
        const std::string label = args.unit ? *args.unit : std::string(topology_name(bundle));
        json summary{{"topology", topology_name(bundle)}, {"unit", args.unit ? json(*args.unit) : json(nullptr)}};
        if (original) {
            const ContrastReport report = contrast(predictor, test, *original, classes);
            write_report(report, (out / "report").string());
            write_text_file(out / "heatmap_balanced.svg", render_heatmap(report.balanced.confusion, label + " (balanced)"));
            write_text_file(out / "heatmap_original.svg", render_heatmap(report.original.confusion, label + " (original)"));
            summary["accuracy_balanced"] = report.balanced.accuracy;
            summary["accuracy_original"] = report.original.accuracy;
            std::cout << "evaluate: accuracy balanced " << report.balanced.accuracy << ", original "
                      << report.original.accuracy << '\n';
        } else {
            const EvalReport report = evaluate(predictor, test, classes);
            write_report(report, (out / "report").string());
            write_text_file(out / "heatmap.svg", render_heatmap(report.confusion, label));
            summary["accuracy"] = report.accuracy;
            std::cout << "evaluate: accuracy " << report.accuracy << ", macro-F1 " << report.macro_f1 << '\n';
        }

        // IDS1 composed accuracies next to the measured end-to-end accuracy.
        if (!args.unit && std::holds_alternative<Ids1Bundle>(bundle)) {
            auto unit_acc = [&](const char* name) {
                const FlowDataset view = unit_view(bundle, name, test);
                if (view.empty()) return 0.0;
                const auto cls = unit_classes(bundle, name);
                return evaluate(label_predictor(bundle_unit(bundle, name), cls), view, cls).accuracy;
            };
            const CompositionInputs in{unit_acc("bu"), unit_acc("bac"), unit_acc("ac")};
            auto composed = [&](ResidualMode mode) {
                const Composed det = compose_ids1_detection(in, mode);
                const Composed sub = compose_ids1_subclass(in, mode);
                return json{{"detection", {{"value", det.value}, {"raw", det.raw}}},
                            {"subclass", {{"value", sub.value}, {"raw", sub.raw}}}};
            };
            write_json_file(out / "composition.json",
                            json{{"bu_acc", in.bu_acc},
                                 {"bac_acc", in.bac_acc},
                                 {"au_acc", in.au_acc},
                                 {"literal", composed(ResidualMode::literal)},
                                 {"measured", composed(ResidualMode::measured)},
                                 {"end_to_end_accuracy", evaluate(predictor, test, classes).accuracy}});
        }

        json run = run_record("evaluate", args.common);
        run["bundle"] = args.bundle;
        run["test"] = args.test;
        if (args.original) run["original"] = *args.original;
        if (args.unit) run["unit"] = *args.unit;
        run["summary"] = summary;
        write_json_file(out / "run.json", run);
        return kExitOk;
    });
}

int cmd_synth(const SynthArgs& args) {
    return guarded("synth", [&] {
        if (!args.common.config) throw Error(Errc::invalid_config, "--config SPEC.json is required");
        SynthSpec spec = read_json_file(*args.common.config).get<SynthSpec>();
        if (args.common.seed) spec.seed = *args.common.seed;
        const FlowDataset d = synthesize(spec);
        make_out_dir(args.common.out);
        const fs::path out(args.common.out);
        write_csv_file(d, (out / args.name).string());
        json run = run_record("synth", args.common);
        run["spec"] = spec;
        run["counts"] = d.class_counts();
        write_json_file(out / "run.json", run);
        std::cout << "synth: " << d.size() << " rows written to " << (out / args.name).string() << '\n';
        return kExitOk;
    });
}

// ---------------------------------------------------------------------------

namespace {

void add_common(CLI::App* cmd, CommonArgs& c, bool config_required) {
    auto* opt = cmd->add_option("--config", c.config, "JSON configuration file");
    if (config_required) opt->required();
    cmd->add_option("--seed", c.seed, "Override the configured seed");
    cmd->add_option("--out", c.out, "Output directory")->required();
}

} // namespace

int run(int argc, char** argv) {
    CLI::App app{"flowgate: imbalanced flow-classification toolkit"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    IngestArgs ingest;
    auto* ingest_cmd = app.add_subcommand("ingest", "Merge, clean and summarize flow CSV files");
    add_common(ingest_cmd, ingest.common, false);
    ingest_cmd->add_option("inputs", ingest.inputs, "Input CSV files");
    ingest_cmd->add_option("--schema", ingest.schema, "Class schema JSON (or 'cicids2017')");

    BalanceArgs balance;
    auto* balance_cmd = app.add_subcommand("balance", "Rebalance classes with SMOTE / undersampling");
    add_common(balance_cmd, balance.common, true);
    balance_cmd->add_option("--input", balance.input, "Cleaned dataset CSV")->required();
    balance_cmd->add_option("--schema", balance.schema, "Class schema JSON for double balancing");
    balance_cmd->add_flag("--clamp-k", balance.clamp_k, "Clamp k to n-1 for classes with too few records");

    TrainArgs train_args;
    auto* train_cmd = app.add_subcommand("train", "Train a single unit or an IDS1/IDS2 bundle");
    add_common(train_cmd, train_args.common, true);
    train_cmd->add_option("--input", train_args.input, "Override the configured input dataset");

    EvaluateArgs eval_args;
    auto* eval_cmd = app.add_subcommand("evaluate", "Evaluate a bundle, optionally contrasting two test sets");
    add_common(eval_cmd, eval_args.common, false);
    eval_cmd->add_option("--bundle", eval_args.bundle, "Bundle directory")->required();
    eval_cmd->add_option("--test", eval_args.test, "Test CSV (balanced test when --original is given)")->required();
    eval_cmd->add_option("--original", eval_args.original, "Original-distribution test CSV");
    eval_cmd->add_option("--unit", eval_args.unit, "Evaluate one unit (model, bu, bac, ac, cat, dos, ...)");

    SynthArgs synth_args;
    auto* synth_cmd = app.add_subcommand("synth", "Generate a Gaussian-cluster flow dataset");
    add_common(synth_cmd, synth_args.common, true);
    synth_cmd->add_option("--name", synth_args.name, "Output file name");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    if (*ingest_cmd) return cmd_ingest(ingest);
    if (*balance_cmd) return cmd_balance(balance);
    if (*train_cmd) return cmd_train(train_args);
    if (*eval_cmd) return cmd_evaluate(eval_args);
    return cmd_synth(synth_args);
}

} // namespace flowgate::cli
