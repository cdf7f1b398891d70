#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "flowgate/dataset.hpp"

namespace flowgate {

// counts[i * C + j]: records of true class i predicted as class j.
struct ConfusionMatrix {
    std::vector<std::string> class_names;
    std::vector<std::uint64_t> counts;

    std::size_t classes() const { return class_names.size(); }
    std::uint64_t at(std::size_t truth, std::size_t predicted) const { return counts[truth * classes() + predicted]; }
    std::uint64_t total() const;
};

struct ClassMetrics {
    std::uint64_t tp = 0, fp = 0, fn = 0, tn = 0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::uint64_t support() const { return tp + fn; }
};

struct EvalReport {
    double accuracy = 0.0;
    double macro_f1 = 0.0;
    std::vector<ClassMetrics> per_class;  // aligned with confusion.class_names
    ConfusionMatrix confusion;
};

struct ContrastReport {
    EvalReport balanced;
    EvalReport original;
    std::map<std::string, double> f1_delta;  // balanced.F1 - original.F1
};

ConfusionMatrix confusion(std::span<const std::size_t> y_true, std::span<const std::size_t> y_pred,
                          std::vector<std::string> class_names);

// One-vs-rest counts per class; accuracy = trace / total. Ratios whose
// denominator is zero are 0.
EvalReport metrics(const ConfusionMatrix& cm);

// Maps predicted labels back through class_names. Throws EmptyDataset on an
// empty test set and UnknownLabel for labels outside class_names.
using LabelPredictor = std::function<std::vector<std::string>(const FlowDataset&)>;
EvalReport evaluate(const LabelPredictor& predictor, const FlowDataset& test,
                    const std::vector<std::string>& class_names);

ContrastReport contrast(const LabelPredictor& predictor, const FlowDataset& balanced_test,
                        const FlowDataset& original_test, const std::vector<std::string>& class_names);
ContrastReport contrast(EvalReport balanced, EvalReport original);

// Standalone SVG 1.1 heat map, row-normalized colour ramp.
std::string render_heatmap(const ConfusionMatrix& cm, const std::string& title = "");

nlohmann::json report_to_json(const EvalReport& r);
nlohmann::json report_to_json(const ContrastReport& r);

// Header row and column hold class names.
std::string confusion_csv(const ConfusionMatrix& cm);

// Writes <stem>.json plus <stem>.csv (or <stem>_balanced.csv and
// <stem>_original.csv for a contrast). Throws SinkUnwritable.
void write_report(const EvalReport& r, const std::string& stem);
void write_report(const ContrastReport& r, const std::string& stem);

} // namespace flowgate
