#include "flowgate/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>

#include "flowgate/error.hpp"

namespace flowgate {

namespace {

constexpr double kProbFloor = 1e-12;

void activate(Matrix& z, Activation a) {
    switch (a) {
    case Activation::relu:
        z = z.cwiseMax(0.0);
        break;
    case Activation::sigmoid:
        z = z.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
        break;
    case Activation::softmax:
        for (Eigen::Index r = 0; r < z.rows(); ++r) {
            auto row = z.row(r);
            const double peak = row.maxCoeff();
            row = (row.array() - peak).exp().matrix();
            row /= row.sum();
        }
        break;
    case Activation::identity:
        break;
    }
}

// Derivative of the activation expressed through its output (relu, sigmoid, identity).
Matrix derivative_from_output(const Matrix& out, Activation a) {
    switch (a) {
    case Activation::relu:
        return out.unaryExpr([](double v) { return v > 0.0 ? 1.0 : 0.0; });
    case Activation::sigmoid:
        return out.array() * (1.0 - out.array());
    default:
        return Matrix::Ones(out.rows(), out.cols());
    }
}

double clamp_prob(double p) { return std::clamp(p, kProbFloor, 1.0 - kProbFloor); }

double cross_entropy(const Matrix& probs, const Matrix& targets, Loss loss) {
    double total = 0.0;
    for (Eigen::Index r = 0; r < probs.rows(); ++r) {
        for (Eigen::Index c = 0; c < probs.cols(); ++c) {
            const double p = clamp_prob(probs(r, c));
            const double y = targets(r, c);
            if (loss == Loss::binary_cross_entropy) {
                total -= y * std::log(p) + (1.0 - y) * std::log(1.0 - p);
            } else if (y != 0.0) {
                total -= y * std::log(p);
            }
        }
    }
    return probs.rows() == 0 ? 0.0 : total / static_cast<double>(probs.rows());
}

Loss default_loss(Head h) {
    return h == Head::sigmoid ? Loss::binary_cross_entropy : Loss::categorical_cross_entropy;
}

Matrix gather_rows(const Matrix& m, std::span<const std::size_t> order) {
    Matrix out(static_cast<Eigen::Index>(order.size()), m.cols());
    for (std::size_t r = 0; r < order.size(); ++r) {
        out.row(static_cast<Eigen::Index>(r)) = m.row(static_cast<Eigen::Index>(order[r]));
    }
    return out;
}

double accuracy_of(const Matrix& probs, const Matrix& targets, Head head) {
    if (probs.rows() == 0) return 0.0;
    const auto predicted = decide(probs, head);
    const auto truth = decide(targets, head);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < predicted.size(); ++i) hits += predicted[i] == truth[i];
    return static_cast<double>(hits) / static_cast<double>(predicted.size());
}

} // namespace

std::string_view to_string(Activation a) {
    switch (a) {
    case Activation::relu: return "relu";
    case Activation::sigmoid: return "sigmoid";
    case Activation::softmax: return "softmax";
    case Activation::identity: return "identity";
    }
    return "identity";
}

Activation activation_from_string(std::string_view s) {
    if (s == "relu") return Activation::relu;
    if (s == "sigmoid") return Activation::sigmoid;
    if (s == "softmax") return Activation::softmax;
    if (s == "identity") return Activation::identity;
    throw Error(Errc::invalid_config, "unknown activation '" + std::string(s) + "'");
}

std::string_view to_string(Head h) { return h == Head::sigmoid ? "sigmoid" : "softmax"; }

Head head_from_string(std::string_view s) {
    if (s == "sigmoid") return Head::sigmoid;
    if (s == "softmax") return Head::softmax;
    throw Error(Errc::invalid_config, "unknown head '" + std::string(s) + "'");
}

std::vector<double> LossAndGradients::flatten() const {
    std::vector<double> out;
    for (const auto& g : gradients) {
        out.insert(out.end(), g.weights.data(), g.weights.data() + g.weights.size());
        out.insert(out.end(), g.bias.data(), g.bias.data() + g.bias.size());
    }
    return out;
}

MlpModel::MlpModel(std::vector<DenseLayer> layers, double dropout_rate, std::uint64_t seed)
    : layers_(std::move(layers)), dropout_rate_(dropout_rate), rng_(seed) {
    if (layers_.empty()) throw Error(Errc::bad_dimension, "model needs at least one layer");
    if (!(dropout_rate_ >= 0.0 && dropout_rate_ < 1.0)) {
        throw Error(Errc::bad_dimension, "dropout rate must lie in [0, 1)");
    }
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        const auto& layer = layers_[l];
        if (layer.inputs() == 0 || layer.outputs() == 0) throw Error(Errc::bad_dimension, "layer has a zero dimension");
        if (static_cast<std::size_t>(layer.bias.size()) != layer.outputs()) {
            throw Error(Errc::bad_dimension, "bias length does not match layer outputs");
        }
        if (l > 0 && layers_[l - 1].outputs() != layer.inputs()) {
            throw Error(Errc::bad_dimension, "layer " + std::to_string(l) + " expects " +
                                                 std::to_string(layer.inputs()) + " inputs, previous layer emits " +
                                                 std::to_string(layers_[l - 1].outputs()));
        }
        const bool last = l + 1 == layers_.size();
        if (!last && layer.activation == Activation::softmax) {
            throw Error(Errc::bad_dimension, "softmax is only legal on the final layer");
        }
        if (last && layer.activation != Activation::softmax && layer.activation != Activation::sigmoid) {
            throw Error(Errc::bad_dimension, "final layer must be a sigmoid or softmax head");
        }
    }
}

Head MlpModel::head() const {
    return layers_.back().activation == Activation::sigmoid ? Head::sigmoid : Head::softmax;
}

void MlpModel::check_width(const Matrix& batch) const {
    if (static_cast<std::size_t>(batch.cols()) != input_width()) {
        throw Error(Errc::width_mismatch, "batch width " + std::to_string(batch.cols()) + " != model input width " +
                                              std::to_string(input_width()));
    }
}

Matrix MlpModel::forward(const Matrix& batch) const {
    check_width(batch);
    Matrix a = batch;
    for (const auto& layer : layers_) {
        Matrix z = a * layer.weights;
        z.rowwise() += layer.bias;
        activate(z, layer.activation);
        a = std::move(z);
    }
    return a;
}

ForwardTrace MlpModel::trace(const Matrix& batch) {
    check_width(batch);
    ForwardTrace t;
    t.activations.reserve(layers_.size() + 1);
    t.masks.resize(layers_.size());
    t.activations.push_back(batch);
    const std::size_t dropout_after = layers_.size() >= 2 ? layers_.size() - 2 : layers_.size();
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        const auto& layer = layers_[l];
        Matrix z = t.activations.back() * layer.weights;
        z.rowwise() += layer.bias;
        activate(z, layer.activation);
        if (l == dropout_after && mode_ == Mode::train && dropout_rate_ > 0.0) {
            const double keep = 1.0 - dropout_rate_;
            Matrix mask(z.rows(), z.cols());
            for (Eigen::Index i = 0; i < mask.size(); ++i) {
                mask.data()[i] = rng_.uniform() < keep ? 1.0 / keep : 0.0;
            }
            z = z.cwiseProduct(mask);
            t.masks[l] = std::move(mask);
        }
        t.activations.push_back(std::move(z));
    }
    return t;
}

LossAndGradients MlpModel::loss_and_gradients(const Matrix& batch, const Matrix& targets) {
    if (targets.rows() != batch.rows() || static_cast<std::size_t>(targets.cols()) != output_width()) {
        throw Error(Errc::shape_mismatch, "targets are " + std::to_string(targets.rows()) + "x" +
                                              std::to_string(targets.cols()) + ", expected " +
                                              std::to_string(batch.rows()) + "x" + std::to_string(output_width()));
    }
    const ForwardTrace t = trace(batch);
    const Matrix& probs = t.activations.back();
    const Loss loss = default_loss(head());

    LossAndGradients out;
    out.loss = cross_entropy(probs, targets, loss);
    out.gradients.resize(layers_.size());
    if (batch.rows() == 0) {
        for (std::size_t l = 0; l < layers_.size(); ++l) {
            out.gradients[l] = {Matrix::Zero(layers_[l].weights.rows(), layers_[l].weights.cols()),
                                RowVector::Zero(layers_[l].bias.size())};
        }
        return out;
    }

    // Sigmoid + binary CE and softmax + categorical CE share dL/dz = (p - y) / n.
    Matrix delta = (probs - targets) / static_cast<double>(batch.rows());
    for (std::size_t l = layers_.size(); l-- > 0;) {
        const Matrix& input = t.activations[l];
        out.gradients[l].weights = input.transpose() * delta;
        out.gradients[l].bias = delta.colwise().sum();
        if (l == 0) break;
        Matrix upstream = delta * layers_[l].weights.transpose();
        const Matrix& below = t.activations[l];
        if (t.masks[l - 1].size() != 0) {
            // below is post-dropout; the mask is 0 or 1/keep, so the
            // pre-dropout output is recovered where the unit survived.
            const Matrix& mask = t.masks[l - 1];
            Matrix pre = below.cwiseQuotient(mask.unaryExpr([](double m) { return m == 0.0 ? 1.0 : m; }));
            upstream = upstream.cwiseProduct(mask);
            delta = upstream.cwiseProduct(derivative_from_output(pre, layers_[l - 1].activation));
        } else {
            delta = upstream.cwiseProduct(derivative_from_output(below, layers_[l - 1].activation));
        }
    }
    return out;
}

std::size_t MlpModel::parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers_) n += static_cast<std::size_t>(l.weights.size() + l.bias.size());
    return n;
}

std::vector<double> MlpModel::parameters() const {
    std::vector<double> out;
    out.reserve(parameter_count());
    for (const auto& l : layers_) {
        out.insert(out.end(), l.weights.data(), l.weights.data() + l.weights.size());
        out.insert(out.end(), l.bias.data(), l.bias.data() + l.bias.size());
    }
    return out;
}

void MlpModel::set_parameters(std::span<const double> values) {
    if (values.size() != parameter_count()) {
        throw Error(Errc::shape_mismatch, "expected " + std::to_string(parameter_count()) + " parameters");
    }
    std::size_t pos = 0;
    for (auto& l : layers_) {
        std::copy_n(values.begin() + static_cast<std::ptrdiff_t>(pos), l.weights.size(), l.weights.data());
        pos += static_cast<std::size_t>(l.weights.size());
        std::copy_n(values.begin() + static_cast<std::ptrdiff_t>(pos), l.bias.size(), l.bias.data());
        pos += static_cast<std::size_t>(l.bias.size());
    }
}

MlpModel init_model(std::size_t input_width, std::span<const std::size_t> hidden, std::size_t output_width,
                    Head head, double dropout_rate, std::uint64_t seed) {
    if (input_width == 0 || output_width == 0 ||
        std::any_of(hidden.begin(), hidden.end(), [](std::size_t h) { return h == 0; })) {
        throw Error(Errc::bad_dimension, "all layer widths must be >= 1");
    }
    Rng rng(seed);
    std::vector<DenseLayer> layers;
    std::size_t fan_in = input_width;
    auto make = [&](std::size_t fan_out, Activation act, double limit) {
        DenseLayer layer;
        layer.weights.resize(static_cast<Eigen::Index>(fan_in), static_cast<Eigen::Index>(fan_out));
        for (Eigen::Index i = 0; i < layer.weights.size(); ++i) layer.weights.data()[i] = rng.uniform(-limit, limit);
        layer.bias = RowVector::Zero(static_cast<Eigen::Index>(fan_out));
        layer.activation = act;
        layers.push_back(std::move(layer));
        fan_in = fan_out;
    };
    for (auto width : hidden) make(width, Activation::relu, std::sqrt(6.0 / static_cast<double>(fan_in)));
    make(output_width, head == Head::sigmoid ? Activation::sigmoid : Activation::softmax,
         std::sqrt(6.0 / static_cast<double>(fan_in + output_width)));
    return MlpModel(std::move(layers), dropout_rate, derive_seed(seed, 1));
}

Matrix targets_for(const MlpModel& m, std::span<const std::size_t> indices) {
    const auto width = static_cast<Eigen::Index>(m.output_width());
    Matrix t = Matrix::Zero(static_cast<Eigen::Index>(indices.size()), width);
    const bool binary = m.head() == Head::sigmoid && width == 1;
    for (std::size_t i = 0; i < indices.size(); ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        if (binary) {
            if (indices[i] > 1) throw Error(Errc::index_out_of_range, "binary head expects class index 0 or 1");
            t(r, 0) = static_cast<double>(indices[i]);
        } else {
            if (indices[i] >= m.output_width()) throw Error(Errc::index_out_of_range, "class index beyond head width");
            t(r, static_cast<Eigen::Index>(indices[i])) = 1.0;
        }
    }
    return t;
}

std::vector<std::size_t> decide(const Matrix& probabilities, Head head) {
    std::vector<std::size_t> out(static_cast<std::size_t>(probabilities.rows()));
    for (Eigen::Index r = 0; r < probabilities.rows(); ++r) {
        if (head == Head::sigmoid && probabilities.cols() == 1) {
            out[static_cast<std::size_t>(r)] = probabilities(r, 0) >= 0.5 ? 1 : 0;
            continue;
        }
        Eigen::Index best = 0;
        for (Eigen::Index c = 1; c < probabilities.cols(); ++c) {
            if (probabilities(r, c) > probabilities(r, best)) best = c;
        }
        out[static_cast<std::size_t>(r)] = static_cast<std::size_t>(best);
    }
    return out;
}

Prediction predict(const MlpModel& m, const Matrix& batch) {
    Prediction p;
    p.probabilities = m.forward(batch);
    p.indices = decide(p.probabilities, m.head());
    return p;
}

TrainResult train(MlpModel model, const Matrix& features, const Matrix& targets, const TrainConfig& config,
                  std::optional<Validation> validation) {
    if (config.batch_size == 0) throw Error(Errc::invalid_config, "batch_size must be >= 1");
    if (!(config.learning_rate > 0.0)) throw Error(Errc::invalid_config, "learning_rate must be > 0");
    if (config.loss && *config.loss != default_loss(model.head())) {
        throw Error(Errc::invalid_config, "loss does not match the model head");
    }
    if (features.rows() != targets.rows() || static_cast<std::size_t>(targets.cols()) != model.output_width()) {
        throw Error(Errc::shape_mismatch, "targets do not match features / head width");
    }
    if (static_cast<std::size_t>(features.cols()) != model.input_width()) {
        throw Error(Errc::width_mismatch, "feature width does not match model input width");
    }

    TrainResult result{std::move(model), {}};
    MlpModel& m = result.model;
    m.set_mode(Mode::train);
    m.reseed_dropout(derive_seed(config.seed, 1));
    Rng order_rng(derive_seed(config.seed, 0));

    std::vector<double> params = m.parameters();
    std::vector<double> first(params.size(), 0.0);
    std::vector<double> second(params.size(), 0.0);
    std::uint64_t step = 0;

    const auto n = static_cast<std::size_t>(features.rows());
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    const Loss loss = default_loss(m.head());

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        order_rng.shuffle(std::span(order));
        for (std::size_t begin = 0; begin < n; begin += config.batch_size) {
            const std::size_t end = std::min(n, begin + config.batch_size);
            const std::span<const std::size_t> idx(order.data() + begin, end - begin);
            const auto lg = m.loss_and_gradients(gather_rows(features, idx), gather_rows(targets, idx));
            const auto grad = lg.flatten();
            ++step;
            if (config.optimizer == Optimizer::sgd) {
                for (std::size_t p = 0; p < params.size(); ++p) params[p] -= config.learning_rate * grad[p];
            } else {
                const double bias1 = 1.0 - std::pow(config.beta1, static_cast<double>(step));
                const double bias2 = 1.0 - std::pow(config.beta2, static_cast<double>(step));
                for (std::size_t p = 0; p < params.size(); ++p) {
                    first[p] = config.beta1 * first[p] + (1.0 - config.beta1) * grad[p];
                    second[p] = config.beta2 * second[p] + (1.0 - config.beta2) * grad[p] * grad[p];
                    const double m_hat = first[p] / bias1;
                    const double v_hat = second[p] / bias2;
                    params[p] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
                }
            }
            m.set_parameters(params);
        }
        const Matrix probs = m.forward(features);
        result.history.train_loss.push_back(cross_entropy(probs, targets, loss));
        result.history.train_accuracy.push_back(accuracy_of(probs, targets, m.head()));
        if (validation) {
            const Matrix vp = m.forward(validation->features);
            result.history.validation_loss.push_back(cross_entropy(vp, validation->targets, loss));
            result.history.validation_accuracy.push_back(accuracy_of(vp, validation->targets, m.head()));
        }
    }
    m.set_mode(Mode::infer);
    return result;
}

nlohmann::json model_to_json(const MlpModel& m, std::optional<std::uint64_t> seed) {
    nlohmann::json layers = nlohmann::json::array();
    for (std::size_t l = 0; l < m.layer_count(); ++l) {
        const auto& layer = m.layer(l);
        layers.push_back({
            {"rows", layer.inputs()},
            {"cols", layer.outputs()},
            {"weights", std::vector<double>(layer.weights.data(), layer.weights.data() + layer.weights.size())},
            {"bias", std::vector<double>(layer.bias.data(), layer.bias.data() + layer.bias.size())},
            {"activation", std::string(to_string(layer.activation))},
        });
    }
    nlohmann::json j{
        {"version", kModelFormatVersion},
        {"layers", std::move(layers)},
        {"dropout_rate", m.dropout_rate()},
        {"head", std::string(to_string(m.head()))},
    };
    if (seed) j["seed"] = *seed;
    return j;
}

MlpModel model_from_json(const nlohmann::json& j) {
    try {
        if (!j.is_object() || !j.contains("version")) throw Error(Errc::corrupt_model, "missing field 'version'");
        const int version = j.at("version").get<int>();
        if (version != kModelFormatVersion) {
            throw Error(Errc::corrupt_model, "unsupported version " + std::to_string(version) + " (expected " +
                                                 std::to_string(kModelFormatVersion) + ")");
        }
        std::vector<DenseLayer> layers;
        for (const auto& jl : j.at("layers")) {
            const auto rows = jl.at("rows").get<std::size_t>();
            const auto cols = jl.at("cols").get<std::size_t>();
            const auto w = jl.at("weights").get<std::vector<double>>();
            const auto b = jl.at("bias").get<std::vector<double>>();
            if (w.size() != rows * cols || b.size() != cols) {
                throw Error(Errc::corrupt_model, "layer " + std::to_string(layers.size()) + " has inconsistent sizes");
            }
            DenseLayer layer;
            layer.weights = Eigen::Map<const Matrix>(w.data(), static_cast<Eigen::Index>(rows),
                                                     static_cast<Eigen::Index>(cols));
            layer.bias = Eigen::Map<const RowVector>(b.data(), static_cast<Eigen::Index>(cols));
            layer.activation = activation_from_string(jl.at("activation").get<std::string>());
            layers.push_back(std::move(layer));
        }
        MlpModel m(std::move(layers), j.at("dropout_rate").get<double>());
        if (j.contains("head") && head_from_string(j.at("head").get<std::string>()) != m.head()) {
            throw Error(Errc::corrupt_model, "head field disagrees with final layer activation");
        }
        return m;
    } catch (const Error& e) {
        if (e.code() == Errc::corrupt_model) throw;
        throw Error(Errc::corrupt_model, e.what());
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::corrupt_model, e.what());
    }
}

void save_model(const MlpModel& m, std::ostream& sink, std::optional<std::uint64_t> seed) {
    sink << model_to_json(m, seed).dump() << '\n';
}

MlpModel load_model(std::istream& source) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(source);
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::corrupt_model, e.what());
    }
    return model_from_json(j);
}

void save_model_file(const MlpModel& m, const std::string& path, std::optional<std::uint64_t> seed) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Errc::sink_unwritable, "cannot write '" + path + "'");
    save_model(m, out, seed);
}

MlpModel load_model_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::io_error, "cannot open '" + path + "'");
    return load_model(in);
}

void to_json(nlohmann::json& j, const TrainConfig& c) {
    j = nlohmann::json{
        {"epochs", c.epochs},
        {"batch_size", c.batch_size},
        {"learning_rate", c.learning_rate},
        {"optimizer", c.optimizer == Optimizer::adam ? "adam" : "sgd"},
        {"beta1", c.beta1},
        {"beta2", c.beta2},
        {"epsilon", c.epsilon},
        {"seed", c.seed},
    };
    if (c.loss) {
        j["loss"] = *c.loss == Loss::binary_cross_entropy ? "binary-cross-entropy" : "categorical-cross-entropy";
    }
}

void from_json(const nlohmann::json& j, TrainConfig& c) {
    c = TrainConfig{};
    if (j.contains("epochs")) j.at("epochs").get_to(c.epochs);
    if (j.contains("batch_size")) j.at("batch_size").get_to(c.batch_size);
    if (j.contains("learning_rate")) j.at("learning_rate").get_to(c.learning_rate);
    if (j.contains("optimizer")) {
        const auto o = j.at("optimizer").get<std::string>();
        if (o == "adam") c.optimizer = Optimizer::adam;
        else if (o == "sgd") c.optimizer = Optimizer::sgd;
        else throw Error(Errc::invalid_config, "unknown optimizer '" + o + "'");
    }
    if (j.contains("beta1")) j.at("beta1").get_to(c.beta1);
    if (j.contains("beta2")) j.at("beta2").get_to(c.beta2);
    if (j.contains("epsilon")) j.at("epsilon").get_to(c.epsilon);
    if (j.contains("seed")) j.at("seed").get_to(c.seed);
    if (j.contains("loss")) {
        const auto l = j.at("loss").get<std::string>();
        if (l == "binary-cross-entropy") c.loss = Loss::binary_cross_entropy;
        else if (l == "categorical-cross-entropy") c.loss = Loss::categorical_cross_entropy;
        else throw Error(Errc::invalid_config, "unknown loss '" + l + "'");
    }
    if (c.batch_size == 0) throw Error(Errc::invalid_config, "batch_size must be >= 1");
    if (!(c.learning_rate > 0.0)) throw Error(Errc::invalid_config, "learning_rate must be > 0");
}

void to_json(nlohmann::json& j, const TrainHistory& h) {
    j = nlohmann::json{{"train_loss", h.train_loss}, {"train_accuracy", h.train_accuracy}};
    if (!h.validation_loss.empty()) {
        j["validation_loss"] = h.validation_loss;
        j["validation_accuracy"] = h.validation_accuracy;
    }
}

} // namespace flowgate
