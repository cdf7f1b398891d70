#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "flowgate/matrix.hpp"
#include "flowgate/rng.hpp"

namespace flowgate {

enum class Activation { relu, sigmoid, softmax, identity };
enum class Head { sigmoid, softmax };
enum class Mode { train, infer };
enum class Loss { binary_cross_entropy, categorical_cross_entropy };
enum class Optimizer { sgd, adam };

std::string_view to_string(Activation a);
Activation activation_from_string(std::string_view s);
std::string_view to_string(Head h);
Head head_from_string(std::string_view s);

struct LayerSpec {
    std::size_t units = 0;
    Activation activation = Activation::relu;
};

// y = act(x * weights + bias); weights is inputs x outputs.
struct DenseLayer {
    Matrix weights;
    RowVector bias;
    Activation activation = Activation::relu;

    std::size_t inputs() const { return static_cast<std::size_t>(weights.rows()); }
    std::size_t outputs() const { return static_cast<std::size_t>(weights.cols()); }
};

struct LayerGradient {
    Matrix weights;
    RowVector bias;
};

struct LossAndGradients {
    double loss = 0.0;
    std::vector<LayerGradient> gradients;

    // Same ordering as MlpModel::parameters().
    std::vector<double> flatten() const;
};

// Per-layer values of one forward pass. activations[0] is the input batch;
// activations[l + 1] is the output of layer l after dropout. masks[l] is empty
// unless dropout was applied after layer l.
struct ForwardTrace {
    std::vector<Matrix> activations;
    std::vector<Matrix> masks;
};

// Dense network with one inverted-dropout stage after the last hidden layer.
// forward() is always the inference path; trace() and loss_and_gradients()
// draw dropout masks from the model's own stream while in train mode.
class MlpModel {
public:
    MlpModel() = default;
    // Throws BadDimension for non-chaining shapes, a softmax/identity hidden
    // layer placement violation, or dropout outside [0, 1).
    MlpModel(std::vector<DenseLayer> layers, double dropout_rate, std::uint64_t seed = 0);

    std::size_t input_width() const { return layers_.front().inputs(); }
    std::size_t output_width() const { return layers_.back().outputs(); }
    Head head() const;
    double dropout_rate() const { return dropout_rate_; }
    Mode mode() const { return mode_; }
    void set_mode(Mode m) { mode_ = m; }
    void reseed_dropout(std::uint64_t seed) { rng_ = Rng(seed); }

    std::size_t layer_count() const { return layers_.size(); }
    const DenseLayer& layer(std::size_t i) const { return layers_.at(i); }
    // Values may be edited freely; shapes must stay as they are.
    DenseLayer& layer(std::size_t i) { return layers_.at(i); }

    Matrix forward(const Matrix& batch) const;
    ForwardTrace trace(const Matrix& batch);
    LossAndGradients loss_and_gradients(const Matrix& batch, const Matrix& targets);

    std::size_t parameter_count() const;
    // Layer by layer: weights row-major, then bias.
    std::vector<double> parameters() const;
    void set_parameters(std::span<const double> values);

private:
    void check_width(const Matrix& batch) const;

    std::vector<DenseLayer> layers_;
    double dropout_rate_ = 0.0;
    Mode mode_ = Mode::infer;
    Rng rng_;
};

inline const std::vector<std::size_t> kDefaultHidden = {64, 32};

// input -> hidden ReLU layers (He-uniform) -> head (Glorot-uniform), zero biases.
MlpModel init_model(std::size_t input_width, std::span<const std::size_t> hidden, std::size_t output_width,
                    Head head, double dropout_rate, std::uint64_t seed);

struct TrainConfig {
    std::size_t epochs = 30;
    std::size_t batch_size = 512;
    double learning_rate = 1e-3;
    Optimizer optimizer = Optimizer::adam;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::uint64_t seed = 0;
    // Defaults to the loss that matches the model head.
    std::optional<Loss> loss;
};

struct TrainHistory {
    std::vector<double> train_loss;
    std::vector<double> train_accuracy;
    std::vector<double> validation_loss;
    std::vector<double> validation_accuracy;
};

struct TrainResult {
    MlpModel model;
    TrainHistory history;
};

struct Validation {
    const Matrix& features;
    const Matrix& targets;
};

// Mini-batch training, reshuffled every epoch. Per-epoch metrics are measured
// with the inference path after the epoch's updates. The returned model is in
// infer mode.
TrainResult train(MlpModel model, const Matrix& features, const Matrix& targets, const TrainConfig& config,
                  std::optional<Validation> validation = std::nullopt);

// Target matrix for a head: one column of 0/1 for a width-1 sigmoid head,
// one-hot rows otherwise.
Matrix targets_for(const MlpModel& m, std::span<const std::size_t> indices);

struct Prediction {
    std::vector<std::size_t> indices;
    Matrix probabilities;
};

// Argmax per row with ties to the lowest index; a width-1 sigmoid head
// predicts class 1 when p >= 0.5.
Prediction predict(const MlpModel& m, const Matrix& batch);
std::vector<std::size_t> decide(const Matrix& probabilities, Head head);

inline constexpr int kModelFormatVersion = 1;

nlohmann::json model_to_json(const MlpModel& m, std::optional<std::uint64_t> seed = std::nullopt);
MlpModel model_from_json(const nlohmann::json& j);
void save_model(const MlpModel& m, std::ostream& sink, std::optional<std::uint64_t> seed = std::nullopt);
MlpModel load_model(std::istream& source);
void save_model_file(const MlpModel& m, const std::string& path, std::optional<std::uint64_t> seed = std::nullopt);
MlpModel load_model_file(const std::string& path);

void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);
void to_json(nlohmann::json& j, const TrainHistory& h);

} // namespace flowgate
