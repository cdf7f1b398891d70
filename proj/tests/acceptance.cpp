// One line per acceptance criterion; exit status is non-zero if any fails.

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "flowgate/dataset.hpp"
#include "flowgate/eval.hpp"
#include "flowgate/mlp.hpp"
#include "flowgate/pipeline.hpp"
#include "flowgate/resample.hpp"
#include "oracles.hpp"
#include "synth.hpp"

namespace fs = std::filesystem;
using namespace flowgate;
using nlohmann::json;

namespace {

struct Outcome {
    enum Kind { pass, fail, skip } kind = pass;
    std::string detail;
};

class Stopwatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(double v, int digits = 6) {
    std::ostringstream s;
    s.precision(digits);
    s << v;
    return s.str();
}

Outcome verdict(bool ok, std::string detail) { return {ok ? Outcome::pass : Outcome::fail, std::move(detail)}; }

// 1 ---------------------------------------------------------------------------
Outcome metric_oracle() {
    Stopwatch clock;
    Rng rng(1);
    std::size_t mismatches = 0;
    double worst = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t c = 1 + rng.below(6);
        const std::size_t n = rng.below(1001);
        std::vector<std::size_t> truth(n), pred(n);
        for (std::size_t i = 0; i < n; ++i) {
            truth[i] = rng.below(c);
            pred[i] = rng.uniform() < 0.5 ? truth[i] : rng.below(c);
        }
        std::vector<std::string> names;
        for (std::size_t k = 0; k < c; ++k) names.push_back(std::to_string(k));
        const auto r = metrics(confusion(truth, pred, names));
        std::size_t hits = 0;
        for (std::size_t i = 0; i < n; ++i) hits += truth[i] == pred[i];
        worst = std::max(worst, std::abs(r.accuracy - oracle::safe_ratio(double(hits), double(n))));
        for (std::size_t k = 0; k < c; ++k) {
            const auto o = oracle::recount(truth, pred, k);
            const auto& m = r.per_class[k];
            if (m.tp != o.tp || m.fp != o.fp || m.fn != o.fn || m.tn != o.tn) ++mismatches;
            const double p = oracle::safe_ratio(double(o.tp), double(o.tp + o.fp));
            const double rc = oracle::safe_ratio(double(o.tp), double(o.tp + o.fn));
            const double f = oracle::safe_ratio(2 * p * rc, p + rc);
            worst = std::max({worst, std::abs(m.precision - p), std::abs(m.recall - rc), std::abs(m.f1 - f)});
        }
    }
    const double t = clock.seconds();
    return verdict(mismatches == 0 && worst <= 1e-12 && t < 5.0,
                   "200 pairs, count mismatches " + std::to_string(mismatches) + ", max ratio error " + fmt(worst) +
                       ", " + fmt(t, 3) + " s");
}

// 2 ---------------------------------------------------------------------------
Outcome substitution() {
    const ConfusionMatrix cm{{"positive", "negative"}, {50, 10, 10, 30}};
    const auto r = metrics(cm);
    const auto& p = r.per_class[0];
    const bool ok = std::abs(r.accuracy - 0.80) < 1e-12 && std::abs(p.f1 - 0.8333) <= 1e-4 &&
                    std::abs(p.precision - 0.8333) <= 1e-4 && std::abs(p.recall - 0.8333) <= 1e-4;
    return verdict(ok, "accuracy " + fmt(r.accuracy) + ", precision " + fmt(p.precision) + ", recall " +
                           fmt(p.recall) + ", F1 " + fmt(p.f1));
}

// 3 ---------------------------------------------------------------------------
Outcome smote_geometry() {
    Stopwatch clock;
    set_warning_sink([](const std::string&) {});
    const auto d = oracle::blobs({{"major", 150}, {"minor", 50}}, 2, 4.0, 1.0, 3);
    ResamplingPlan plan{{{"major", 120}, {"minor", 400}}, 5, 9, true};
    const auto out = balance_to_level(d, plan);
    set_warning_sink(nullptr);

    const auto groups = d.group_by_label();
    const auto& minor_idx = groups.at("minor");
    const Matrix minor = d.subset(minor_idx).feature_matrix();
    const auto nn = oracle::brute_knn(minor, 5);
    std::set<std::vector<double>> originals;
    for (Eigen::Index i = 0; i < minor.rows(); ++i) originals.insert({minor(i, 0), minor(i, 1)});
    const double lo0 = minor.col(0).minCoeff(), hi0 = minor.col(0).maxCoeff();
    const double lo1 = minor.col(1).minCoeff(), hi1 = minor.col(1).maxCoeff();

    std::size_t synthetic = 0, off_segment = 0, outside = 0;
    double worst = 0;
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (out.label(i) != "minor") continue;
        const auto s = out.row(i);
        if (originals.count({s[0], s[1]})) continue;
        ++synthetic;
        double best = 1e300;
        for (Eigen::Index a = 0; a < minor.rows(); ++a) {
            std::span<const double> x(minor.row(a).data(), 2);
            for (auto b : nn[static_cast<std::size_t>(a)]) {
                std::span<const double> y(minor.row(static_cast<Eigen::Index>(b)).data(), 2);
                const auto [res, u] = oracle::segment_fit(s, x, y);
                if (u >= -1e-12 && u <= 1 + 1e-12) best = std::min(best, res);
            }
        }
        worst = std::max(worst, best);
        if (best >= 1e-9) ++off_segment;
        if (s[0] < lo0 || s[0] > hi0 || s[1] < lo1 || s[1] > hi1) ++outside;
    }
    const auto counts = out.class_counts();
    const bool counts_ok = counts == plan.targets;
    const double t = clock.seconds();
    return verdict(synthetic == 350 && off_segment == 0 && outside == 0 && counts_ok && t < 5.0,
                   std::to_string(synthetic) + " synthetic points, max residual " + fmt(worst) + ", " +
                       std::to_string(outside) + " outside bounding box, counts " +
                       (counts_ok ? "match" : "differ") + " plan, " + fmt(t, 3) + " s");
}

// 4 ---------------------------------------------------------------------------
Outcome composition() {
    const auto det = compose_ids1_detection({0.99, 0.94, 0.0});
    const auto sub = compose_ids1_subclass({0.99, 0.94, 0.94});
    return verdict(det.value == 0.9994 && sub.value == 0.939906,
                   "detection " + fmt(det.value, 17) + " (reference 99.94%), subclass " + fmt(sub.value, 17) +
                       " (reference 94.48%; the literal product gives 93.99%)");
}

// 5 ---------------------------------------------------------------------------
Outcome gradient_check() {
    Stopwatch clock;
    const std::array<std::size_t, 1> hidden{8};
    auto m = init_model(5, hidden, 3, Head::softmax, 0.0, 21);
    m.set_mode(Mode::train);
    Rng rng(22);
    Matrix x(32, 5);
    Matrix y = Matrix::Zero(32, 3);
    for (Eigen::Index i = 0; i < 32; ++i) {
        for (Eigen::Index j = 0; j < 5; ++j) x(i, j) = rng.normal();
        y(i, static_cast<Eigen::Index>(rng.below(3))) = 1.0;
    }
    const auto analytic = m.loss_and_gradients(x, y).flatten();
    auto params = m.parameters();
    const double h = 1e-5;
    std::size_t good = 0;
    double worst = 0;
    for (std::size_t p = 0; p < params.size(); ++p) {
        const double keep = params[p];
        params[p] = keep + h;
        m.set_parameters(params);
        const double up = m.loss_and_gradients(x, y).loss;
        params[p] = keep - h;
        m.set_parameters(params);
        const double down = m.loss_and_gradients(x, y).loss;
        params[p] = keep;
        m.set_parameters(params);
        const double numeric = (up - down) / (2 * h);
        const double scale = std::max(std::abs(numeric), std::abs(analytic[p]));
        const double e = scale < 1e-10 ? 0.0 : std::abs(numeric - analytic[p]) / scale;
        good += e < 1e-4;
        worst = std::max(worst, e);
    }
    const double share = double(good) / double(params.size());
    const double t = clock.seconds();
    return verdict(share >= 0.95 && worst < 1e-2 && t < 10.0,
                   std::to_string(params.size()) + " parameters, " + fmt(100 * share, 4) + "% under 1e-4, max " +
                       fmt(worst, 3) + ", " + fmt(t, 3) + " s");
}

// 6 ---------------------------------------------------------------------------
Outcome trainability() {
    Stopwatch clock;
    Rng rng(31);
    Matrix x(2000, 2);
    std::vector<std::size_t> labels(2000);
    for (Eigen::Index i = 0; i < 2000; ++i) {
        const std::size_t c = static_cast<std::size_t>(i % 2);
        x(i, 0) = (c ? 2.5 : -2.5) + 0.6 * rng.normal();
        x(i, 1) = 0.6 * rng.normal();
        labels[static_cast<std::size_t>(i)] = c;
    }
    const auto model = init_model(2, kDefaultHidden, 2, Head::softmax, 0.2, 32);
    TrainConfig cfg;
    cfg.seed = 33;
    const auto r = train(model, x, targets_for(model, labels), cfg);
    std::size_t reached = 0;
    for (std::size_t e = 0; e < r.history.train_accuracy.size(); ++e) {
        if (r.history.train_accuracy[e] >= 0.99) {
            reached = e + 1;
            break;
        }
    }
    const double final_acc = r.history.train_accuracy.back();
    const double t = clock.seconds();
    return verdict(reached > 0 && reached <= 30 && t < 30.0,
                   "64/32 net, 2000 points: accuracy " + fmt(final_acc, 4) + " after 30 epochs, >= 0.99 from epoch " +
                       std::to_string(reached) + ", " + fmt(t, 3) + " s");
}

// 7 ---------------------------------------------------------------------------
Outcome overfitting() {
    set_warning_sink([](const std::string&) {});
    const auto spec = json::parse(R"({
        "total": 4040, "feature_width": 4, "seed": 41, "center_range": 5,
        "classes": [
            {"name": "majority", "count": 4000, "scale": 1.0},
            {"name": "minority", "count": 40, "scale": 0.35, "overlap_with": "majority", "overlap_spread": 0.3}
        ]})").get<cli::SynthSpec>();
    const auto d = cli::synthesize(spec);
    const auto original = split(d, SplitSpec{0.8, true, 42});
    ResamplingPlan plan{{{"majority", 1000}, {"minority", 1000}}, 5, 43, true};
    const auto balanced = balance_to_level(original.train, plan);
    const auto parts = split(balanced, SplitSpec{0.8, true, 44});
    const auto scaler = fit_scaler(parts.train);
    UnitConfig cfg;
    cfg.train.batch_size = 64;
    cfg.train.seed = 45;
    const std::vector<std::string> classes{"majority", "minority"};
    const auto r = train_unit(apply_scaler(parts.train, scaler), classes, Head::softmax, cfg, 46);
    const auto report = contrast(label_predictor(r.model, classes), apply_scaler(parts.test, scaler),
                                 apply_scaler(original.test, scaler), classes);
    set_warning_sink(nullptr);
    const double fb = report.balanced.per_class[1].f1;
    const double fo = report.original.per_class[1].f1;
    return verdict(fb - fo >= 0.2, "minority F1 balanced test " + fmt(fb, 4) + ", original test " + fmt(fo, 4) +
                                       ", delta " + fmt(fb - fo, 4) + "; accuracy " +
                                       fmt(report.balanced.accuracy, 4) + " vs " + fmt(report.original.accuracy, 4));
}

// 8 ---------------------------------------------------------------------------
UnitPredictor column_unit(Eigen::Index col) {
    return [col](const Matrix& flows) {
        std::vector<std::size_t> out;
        for (Eigen::Index i = 0; i < flows.rows(); ++i) out.push_back(static_cast<std::size_t>(flows(i, col)));
        return out;
    };
}

Outcome routing() {
    const auto schema = ClassSchema::cicids2017();
    const auto attacks = schema.attack_classes();
    std::size_t branches = 0, wrong = 0;

    Matrix f1(2 * 15 * 14, 3);
    Eigen::Index row = 0;
    for (std::size_t bu = 0; bu < 2; ++bu) {
        for (std::size_t bac = 0; bac < 15; ++bac) {
            for (std::size_t ac = 0; ac < 14; ++ac) f1.row(row++) << double(bu), double(bac), double(ac);
        }
    }
    const auto out1 = infer_ids1(Ids1Units{column_unit(0), column_unit(1), column_unit(2)}, schema, f1);
    for (Eigen::Index i = 0; i < f1.rows(); ++i) {
        const auto bu = std::size_t(f1(i, 0)), bac = std::size_t(f1(i, 1)), ac = std::size_t(f1(i, 2));
        wrong += out1[std::size_t(i)] != (bu == 1 ? attacks[ac] : schema.classes[bac]);
        ++branches;
    }

    const auto categories = ids2_categories(schema);
    Ids2Units u2{column_unit(0), {}};
    for (const auto& c : ids2_routed_categories(schema)) u2.sub[c] = column_unit(1);
    std::vector<std::pair<std::size_t, std::size_t>> combos;
    for (std::size_t c = 0; c < categories.size(); ++c) {
        const auto members = schema.members(categories[c]);
        const std::size_t fan = schema.is_terminal(categories[c]) ? 1 : members.size();
        for (std::size_t s = 0; s < fan; ++s) combos.emplace_back(c, s);
    }
    Matrix f2(static_cast<Eigen::Index>(combos.size()), 2);
    for (std::size_t i = 0; i < combos.size(); ++i) f2.row(Eigen::Index(i)) << double(combos[i].first), double(combos[i].second);
    const auto out2 = infer_ids2(u2, schema, f2);
    for (std::size_t i = 0; i < combos.size(); ++i) {
        wrong += out2[i] != schema.members(categories[combos[i].first])[combos[i].second];
        ++branches;
    }

    // perfect units: every unit reads the true label through the row id
    Rng rng(51);
    FlowDataset test({"id"});
    std::vector<std::string> truth;
    for (std::size_t i = 0; i < 2000; ++i) {
        std::string label;
        do {
            label = schema.classes[rng.below(schema.classes.size())];
        } while (!schema.category_of(label));
        const double v[1] = {double(i)};
        test.append(v, label);
        truth.push_back(label);
    }
    auto perfect = [&](const std::vector<std::string>& classes, std::function<std::string(const std::string&)> view) {
        return UnitPredictor([&truth, classes, view](const Matrix& flows) {
            std::vector<std::size_t> out;
            for (Eigen::Index i = 0; i < flows.rows(); ++i) {
                const auto l = view(truth[std::size_t(flows(i, 0))]);
                out.push_back(std::size_t(std::find(classes.begin(), classes.end(), l) - classes.begin()));
            }
            return out;
        });
    };
    const auto id = [](const std::string& s) { return s; };
    const Ids1Units p1{perfect(binary_classes(), [&](const std::string& s) { return s == schema.benign_class ? std::string("Benign") : std::string("Attack"); }),
                       perfect(schema.classes, id), perfect(attacks, id)};
    Ids2Units p2{perfect(categories, [&](const std::string& s) { return *schema.category_of(s); }), {}};
    for (const auto& c : ids2_routed_categories(schema)) p2.sub[c] = perfect(schema.members(c), id);
    const double acc1 = evaluate([&](const FlowDataset& d) { return infer_ids1(p1, schema, d.feature_matrix()); }, test,
                                 schema.classes).accuracy;
    const double acc2 = evaluate([&](const FlowDataset& d) { return infer_ids2(p2, schema, d.feature_matrix()); }, test,
                                 schema.classes).accuracy;
    return verdict(wrong == 0 && acc1 == 1.0 && acc2 == 1.0,
                   std::to_string(branches) + " branches, " + std::to_string(wrong) + " wrong; perfect-unit accuracy IDS1 " +
                       fmt(acc1) + ", IDS2 " + fmt(acc2));
}

// 9 ---------------------------------------------------------------------------
Outcome determinism() {
    const auto root = oracle::fresh_dir("acceptance_determinism");
    oracle::spit(root / "synth.json", R"({"total": 1500, "feature_width": 5, "seed": 61, "classes": [
        {"name": "BENIGN", "proportion": 0.85}, {"name": "DDoS", "proportion": 0.15},
        {"name": "PortScan", "count": 25, "overlap_with": "BENIGN"}]})");
    oracle::spit(root / "plan.json", R"({"targets": {"BENIGN": 600, "DDoS": 400, "PortScan": 300}, "seed": 62})");
    const json run = {
        {"input", (root / "b" / "balanced.csv").string()},
        {"topology", "ids1"},
        {"seed", 63},
        {"schema", json::parse(R"({"classes": ["BENIGN", "DDoS", "PortScan"],
            "categories": {"Benign": ["BENIGN"], "DDoS": ["DDoS"], "PortScan": ["PortScan"]},
            "category_order": ["Benign", "DDoS", "PortScan"],
            "terminal_categories": ["Benign", "DDoS", "PortScan"], "benign_class": "BENIGN"})")},
        {"balance", {{"bu_target", 500}, {"attack_target", 300}}},
        {"train", {{"epochs", 5}, {"batch_size", 64}}},
    };
    oracle::spit(root / "run.json", run.dump(2));
    const std::string env = "FLOWGATE_THREADS=1";
    auto pass = [&](const std::string& tag) {
        const auto out = root / tag;
        int rc = 0;
        rc |= oracle::run_cli("synth --config " + (root / "synth.json").string() + " --out " + (root / "s").string(), env);
        rc |= oracle::run_cli("balance --input " + (root / "s" / "synth.csv").string() + " --config " +
                                  (root / "plan.json").string() + " --out " + (root / "b").string(), env);
        rc |= oracle::run_cli("train --config " + (root / "run.json").string() + " --out " + (out / "t").string(), env);
        rc |= oracle::run_cli("evaluate --bundle " + (out / "t" / "bundle").string() + " --test " +
                                  (out / "t" / "data" / "balanced_test.csv").string() + " --original " +
                                  (out / "t" / "data" / "original_test.csv").string() + " --out " + (out / "e").string(), env);
        return rc;
    };
    if (pass("one") != 0) return {Outcome::fail, "first pipeline run failed"};
    const std::string synth_a = oracle::slurp(root / "s" / "synth.csv");
    const std::string balanced_a = oracle::slurp(root / "b" / "balanced.csv");
    if (pass("two") != 0) return {Outcome::fail, "second pipeline run failed"};
    std::size_t compared = 2, differing = 0;
    differing += synth_a != oracle::slurp(root / "s" / "synth.csv");
    differing += balanced_a != oracle::slurp(root / "b" / "balanced.csv");
    for (const fs::path rel : {"t/bundle/bundle.json", "t/bundle/bu.model.json", "t/bundle/bac.model.json",
                               "t/bundle/ac.model.json", "t/history.json", "t/data/balanced_test.csv",
                               "t/data/original_test.csv", "e/report.json", "e/report_balanced.csv",
                               "e/report_original.csv", "e/heatmap_balanced.svg", "e/heatmap_original.svg",
                               "e/composition.json"}) {
        ++compared;
        const auto a = root / "one" / rel;
        const auto b = root / "two" / rel;
        if (!fs::exists(a) || oracle::slurp(a) != oracle::slurp(b)) ++differing;
    }
    return verdict(differing == 0, std::to_string(compared) + " artifacts compared across two runs, " +
                                       std::to_string(differing) + " differ");
}

// 10 --------------------------------------------------------------------------
Outcome cicids() {
    const char* dir = std::getenv("FLOWGATE_CICIDS_DIR");
    if (!dir || !fs::is_directory(dir)) return {Outcome::skip, "FLOWGATE_CICIDS_DIR not set; dataset absent"};
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.path().extension() == ".csv") files.push_back(e.path());
    }
    if (files.empty()) return {Outcome::skip, "no CSV files under FLOWGATE_CICIDS_DIR"};
    std::sort(files.begin(), files.end());
    std::vector<FlowDataset> parts;
    for (const auto& f : files) parts.push_back(clean(read_csv_file(f.string())).data);
    const auto all = merge(parts);
    const auto counts = all.class_counts();
    const double benign = counts.count("BENIGN") ? double(counts.at("BENIGN")) / double(all.size()) : 0.0;
    const bool ok = all.size() > 2'800'000 && std::abs(benign - 0.8032) <= 0.005 && all.width() == 78 &&
                    counts.size() == 15;
    return verdict(ok, std::to_string(files.size()) + " files, " + std::to_string(all.size()) + " records, Benign " +
                           fmt(100 * benign, 4) + "%, " + std::to_string(all.width()) + " features, " +
                           std::to_string(counts.size()) + " labels");
}

} // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"metric oracle equivalence", metric_oracle},
        {"binary formula substitution", substitution},
        {"SMOTE geometry", smote_geometry},
        {"composition formulas", composition},
        {"gradient check", gradient_check},
        {"trainability", trainability},
        {"overfitting reproduction", overfitting},
        {"routing truth tables", routing},
        {"pipeline determinism", determinism},
        {"CICIDS-2017 ingest", cicids},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {Outcome::fail, std::string("exception: ") + e.what()};
        }
        const char* tag = o.kind == Outcome::pass ? "PASS" : o.kind == Outcome::fail ? "FAIL" : "SKIP";
        failures += o.kind == Outcome::fail;
        std::cout << "criterion " << (i + 1) << " [" << tag << "] " << criteria[i].first << ": " << o.detail << std::endl;
    }
    return failures == 0 ? 0 : 1;
}
