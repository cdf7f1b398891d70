#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "flowgate/matrix.hpp"
#include "flowgate/schema.hpp"

namespace flowgate {

// Flow records stored column-contiguous per row: values[i * width() + j] is
// feature j of record i.
class FlowDataset {
public:
    FlowDataset() = default;
    explicit FlowDataset(std::vector<std::string> feature_names)
        : feature_names_(std::move(feature_names)) {}

    std::size_t width() const noexcept { return feature_names_.size(); }
    std::size_t size() const noexcept { return labels_.size(); }
    bool empty() const noexcept { return labels_.empty(); }

    const std::vector<std::string>& feature_names() const noexcept { return feature_names_; }
    const std::vector<std::string>& labels() const noexcept { return labels_; }
    const std::vector<double>& values() const noexcept { return values_; }

    std::span<const double> row(std::size_t i) const {
        return {values_.data() + i * width(), width()};
    }
    std::span<double> row(std::size_t i) { return {values_.data() + i * width(), width()}; }
    const std::string& label(std::size_t i) const { return labels_[i]; }
    void set_label(std::size_t i, std::string label) { labels_[i] = std::move(label); }

    // Throws WidthMismatch when features.size() != width().
    void append(std::span<const double> features, std::string label);
    void reserve(std::size_t rows);

    // Zero-copy view of the feature block.
    MatrixMap features() const { return MatrixMap(values_.data(), static_cast<Eigen::Index>(size()),
                                                  static_cast<Eigen::Index>(width())); }
    Matrix feature_matrix() const { return features(); }

    // Records at the given positions, in the given order.
    FlowDataset subset(std::span<const std::size_t> indices) const;

    // Row indices of every record per label.
    std::map<std::string, std::vector<std::size_t>> group_by_label() const;
    std::map<std::string, std::size_t> class_counts() const;

private:
    std::vector<std::string> feature_names_;
    std::vector<double> values_;
    std::vector<std::string> labels_;
};

struct ScalerParams {
    std::vector<double> means;
    std::vector<double> stds;  // population convention
};

struct SplitSpec {
    double train_fraction = 0.8;
    bool stratified = true;
    std::uint64_t seed = 0;
};

struct CleanResult {
    FlowDataset data;
    std::size_t removed = 0;
};

struct LabelEncoding {
    std::vector<std::size_t> indices;
    Matrix one_hot;
};

struct SplitResult {
    FlowDataset train;
    FlowDataset test;
};

inline constexpr std::string_view kLabelColumn = "Label";

// Reads a header-led CSV whose label column is named "Label". Header names are
// whitespace-trimmed. Infinity / -Infinity / NaN cells become IEEE values and
// empty cells become NaN; clean() removes both.
FlowDataset parse_csv(std::istream& source);
FlowDataset read_csv_file(const std::string& path);

// Inverse of parse_csv: shortest round-trip decimal for every value, label last.
void write_csv(const FlowDataset& d, std::ostream& sink);
void write_csv_file(const FlowDataset& d, const std::string& path);

FlowDataset merge(std::span<const FlowDataset> datasets);

CleanResult clean(const FlowDataset& d);

ScalerParams fit_scaler(const FlowDataset& d);
FlowDataset apply_scaler(const FlowDataset& d, const ScalerParams& p);
void apply_scaler_inplace(std::span<double> row, const ScalerParams& p);

LabelEncoding encode_labels(const FlowDataset& d, std::span<const std::string> classes);
inline LabelEncoding encode_labels(const FlowDataset& d, const ClassSchema& schema) {
    return encode_labels(d, schema.classes);
}

SplitResult split(const FlowDataset& d, const SplitSpec& spec);

void to_json(nlohmann::json& j, const ScalerParams& p);
void from_json(const nlohmann::json& j, ScalerParams& p);
void to_json(nlohmann::json& j, const SplitSpec& s);
void from_json(const nlohmann::json& j, SplitSpec& s);

} // namespace flowgate
