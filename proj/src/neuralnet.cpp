#include "cello/neuralnet.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <numeric>
#include <sstream>

#include "cello/error.hpp"
#include "cello/rng.hpp"

namespace cello {

namespace {

[[noreturn]] void shape_error(const std::string& detail) {
  throw Error(ErrorCode::ShapeMismatch, detail);
}

void check_layer_sizes(std::span<const std::size_t> sizes) {
  if (sizes.size() < 2) shape_error("an MLP needs at least an input and an output layer");
  for (std::size_t n : sizes) {
    if (n == 0) shape_error("layer sizes must be positive");
  }
}

// Per-layer activations for one sample. activations[0] is the standardized
// input; activations[l] is the output of layer l (ReLU for hidden layers,
// raw logits for the last one).
struct Trace {
  std::vector<std::vector<double>> activations;
};

std::vector<double> standardize(const MlpModel& model, std::span<const double> x) {
  if (x.size() != model.input_size()) {
    shape_error("expected " + std::to_string(model.input_size()) + " features, got " +
                std::to_string(x.size()));
  }
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = (x[i] - model.feature_means()[i]) / model.feature_stds()[i];
  }
  return out;
}

void dense(const DenseLayer& layer, std::span<const double> in, std::vector<double>& out,
           bool relu) {
  out.resize(layer.outputs);
  for (std::size_t o = 0; o < layer.outputs; ++o) {
    const double* row = layer.weights.data() + o * layer.inputs;
    double acc = layer.biases[o];
    for (std::size_t i = 0; i < layer.inputs; ++i) acc += row[i] * in[i];
    out[o] = relu ? std::max(acc, 0.0) : acc;
  }
}

Trace run(const MlpModel& model, std::span<const double> x) {
  Trace trace;
  const auto& layers = model.layers();
  trace.activations.reserve(layers.size() + 1);
  trace.activations.push_back(standardize(model, x));
  for (std::size_t l = 0; l < layers.size(); ++l) {
    std::vector<double> next;
    dense(layers[l], trace.activations.back(), next, l + 1 < layers.size());
    trace.activations.push_back(std::move(next));
  }
  return trace;
}

double log_sum_exp(std::span<const double> z) {
  const double m = *std::max_element(z.begin(), z.end());
  double s = 0.0;
  for (double v : z) s += std::exp(v - m);
  return m + std::log(s);
}

}  // namespace

MlpModel::MlpModel(std::vector<std::size_t> layer_sizes, std::vector<std::string> class_labels)
    : layer_sizes_(std::move(layer_sizes)), class_labels_(std::move(class_labels)) {
  check_layer_sizes(layer_sizes_);
  if (class_labels_.size() != layer_sizes_.back()) {
    shape_error("output size must equal the number of class labels");
  }
  for (std::size_t l = 0; l + 1 < layer_sizes_.size(); ++l) {
    DenseLayer layer;
    layer.inputs = layer_sizes_[l];
    layer.outputs = layer_sizes_[l + 1];
    layer.weights.assign(layer.inputs * layer.outputs, 0.0);
    layer.biases.assign(layer.outputs, 0.0);
    layers_.push_back(std::move(layer));
  }
  means_.assign(layer_sizes_.front(), 0.0);
  stds_.assign(layer_sizes_.front(), 1.0);
}

std::size_t MlpModel::parameter_count() const { return param_count(layer_sizes_); }

void MlpModel::validate() const {
  check_layer_sizes(layer_sizes_);
  if (class_labels_.size() != output_size()) shape_error("class label count != output size");
  if (layers_.size() + 1 != layer_sizes_.size()) shape_error("layer count does not match sizes");
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const DenseLayer& layer = layers_[l];
    if (layer.inputs != layer_sizes_[l] || layer.outputs != layer_sizes_[l + 1] ||
        layer.weights.size() != layer.inputs * layer.outputs ||
        layer.biases.size() != layer.outputs) {
      shape_error("layer " + std::to_string(l) + " shape is inconsistent");
    }
  }
  if (means_.size() != input_size() || stds_.size() != input_size()) {
    shape_error("standardization vectors must match the input size");
  }
  for (double s : stds_) {
    if (!(s > 0.0)) shape_error("feature standard deviations must be positive");
  }
}

std::size_t param_count(std::span<const std::size_t> layer_sizes) {
  std::size_t total = 0;
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    total += layer_sizes[l] * layer_sizes[l + 1] + layer_sizes[l + 1];
  }
  return total;
}

std::vector<double> logits(const MlpModel& model, std::span<const double> x) {
  Trace trace = run(model, x);
  return std::move(trace.activations.back());
}

std::vector<double> softmax(std::span<const double> z) {
  const double m = *std::max_element(z.begin(), z.end());
  std::vector<double> p(z.size());
  double s = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    p[i] = std::exp(z[i] - m);
    s += p[i];
  }
  for (double& v : p) v /= s;
  return p;
}

std::vector<double> forward(const MlpModel& model, std::span<const double> x) {
  const std::vector<double> z = logits(model, x);
  return softmax(z);
}

std::size_t argmax(std::span<const double> values) {
  return static_cast<std::size_t>(std::distance(
      values.begin(), std::max_element(values.begin(), values.end())));
}

LossAndGradients loss_and_gradients(const MlpModel& model,
                                    std::span<const std::vector<double>> inputs,
                                    std::span<const std::size_t> labels) {
  if (inputs.empty()) shape_error("batch is empty");
  if (inputs.size() != labels.size()) shape_error("batch inputs and labels differ in length");

  const auto& layers = model.layers();
  LossAndGradients out;
  out.gradients.weights.reserve(layers.size());
  out.gradients.biases.reserve(layers.size());
  for (const DenseLayer& layer : layers) {
    out.gradients.weights.emplace_back(layer.weights.size(), 0.0);
    out.gradients.biases.emplace_back(layer.biases.size(), 0.0);
  }

  std::vector<double> delta;
  std::vector<double> prev_delta;
  for (std::size_t n = 0; n < inputs.size(); ++n) {
    const std::size_t label = labels[n];
    if (label >= model.output_size()) shape_error("label out of range");
    const Trace trace = run(model, inputs[n]);
    const std::vector<double>& z = trace.activations.back();
    out.loss += log_sum_exp(z) - z[label];

    delta = softmax(z);
    delta[label] -= 1.0;
    for (std::size_t l = layers.size(); l-- > 0;) {
      const DenseLayer& layer = layers[l];
      const std::vector<double>& in = trace.activations[l];
      std::vector<double>& gw = out.gradients.weights[l];
      std::vector<double>& gb = out.gradients.biases[l];
      for (std::size_t o = 0; o < layer.outputs; ++o) {
        gb[o] += delta[o];
        double* row = gw.data() + o * layer.inputs;
        for (std::size_t i = 0; i < layer.inputs; ++i) row[i] += delta[o] * in[i];
      }
      if (l == 0) break;
      prev_delta.assign(layer.inputs, 0.0);
      for (std::size_t o = 0; o < layer.outputs; ++o) {
        const double* row = layer.weights.data() + o * layer.inputs;
        for (std::size_t i = 0; i < layer.inputs; ++i) prev_delta[i] += row[i] * delta[o];
      }
      // ReLU derivative, taken as 0 at the kink.
      for (std::size_t i = 0; i < layer.inputs; ++i) {
        if (in[i] <= 0.0) prev_delta[i] = 0.0;
      }
      std::swap(delta, prev_delta);
    }
  }

  const double scale = 1.0 / static_cast<double>(inputs.size());
  out.loss *= scale;
  for (auto& g : out.gradients.weights) {
    for (double& v : g) v *= scale;
  }
  for (auto& g : out.gradients.biases) {
    for (double& v : g) v *= scale;
  }
  return out;
}

void LabeledDataset::validate() const {
  if (inputs.size() != labels.size()) shape_error("dataset inputs and labels differ in length");
  if (class_labels.empty()) shape_error("dataset has no class labels");
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (inputs[i].size() != inputs.front().size()) shape_error("dataset rows differ in length");
    if (labels[i] >= class_labels.size()) shape_error("dataset label out of range");
  }
}

void write_dataset(const LabeledDataset& data, std::ostream& out) {
  data.validate();
  out << Json{{"class_labels", data.class_labels}}.dump() << '\n';
  for (std::size_t i = 0; i < data.size(); ++i) {
    out << Json{{"x", data.inputs[i]}, {"y", data.labels[i]}}.dump() << '\n';
  }
}

LabeledDataset read_dataset(std::istream& in) {
  LabeledDataset data;
  std::string line;
  std::size_t line_no = 0;
  try {
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      const Json record = Json::parse(line);
      if (line_no == 1) {
        data.class_labels = record.at("class_labels").get<std::vector<std::string>>();
        continue;
      }
      data.inputs.push_back(record.at("x").get<std::vector<double>>());
      data.labels.push_back(record.at("y").get<std::size_t>());
    }
  } catch (const Json::exception& e) {
    throw StreamError(ErrorCode::CorruptFile, line_no, e.what());
  }
  data.validate();
  return data;
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw Error(ErrorCode::BadConfig, "learning rate must be positive");
  if (batch_size == 0) throw Error(ErrorCode::BadConfig, "batch size must be positive");
  if (epochs == 0) throw Error(ErrorCode::BadConfig, "epochs must be positive");
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
    throw Error(ErrorCode::BadConfig, "validation fraction must lie in (0, 1)");
  }
  if (!(momentum >= 0.0 && momentum < 1.0)) {
    throw Error(ErrorCode::BadConfig, "momentum must lie in [0, 1)");
  }
}

double accuracy(const MlpModel& model, const LabeledDataset& data) {
  if (data.size() == 0) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (argmax(logits(model, data.inputs[i])) == data.labels[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(data.size());
}

TrainResult train(const LabeledDataset& data, std::vector<std::size_t> layer_sizes,
                  const TrainConfig& cfg) {
  data.validate();
  cfg.validate();
  check_layer_sizes(layer_sizes);
  if (data.size() == 0) throw Error(ErrorCode::InsufficientData, "dataset is empty");
  if (layer_sizes.front() != data.inputs.front().size()) {
    shape_error("input layer size does not match the feature length");
  }

  const std::size_t classes = data.class_labels.size();
  std::vector<std::vector<std::size_t>> by_class(classes);
  for (std::size_t i = 0; i < data.size(); ++i) by_class[data.labels[i]].push_back(i);
  std::size_t present = 0;
  for (std::size_t c = 0; c < classes; ++c) {
    if (by_class[c].empty()) continue;
    ++present;
    if (by_class[c].size() < 2) {
      throw Error(ErrorCode::InsufficientData,
                  "class '" + data.class_labels[c] + "' has fewer than 2 samples");
    }
  }
  if (present < 2) throw Error(ErrorCode::InsufficientData, "need at least 2 classes");

  Rng rng(cfg.seed);
  LabeledDataset train_set;
  LabeledDataset val_set;
  train_set.class_labels = val_set.class_labels = data.class_labels;
  for (auto& members : by_class) {
    if (members.empty()) continue;
    rng.shuffle(members);
    const auto n = members.size();
    auto n_val = static_cast<std::size_t>(
        std::llround(cfg.validation_fraction * static_cast<double>(n)));
    n_val = std::clamp<std::size_t>(n_val, 1, n - 1);
    for (std::size_t k = 0; k < n; ++k) {
      LabeledDataset& dst = k < n_val ? val_set : train_set;
      dst.inputs.push_back(data.inputs[members[k]]);
      dst.labels.push_back(data.labels[members[k]]);
    }
  }

  MlpModel model(layer_sizes, data.class_labels);
  const std::size_t features = layer_sizes.front();
  const double n_train = static_cast<double>(train_set.size());
  for (std::size_t f = 0; f < features; ++f) {
    double mean = 0.0;
    for (const auto& x : train_set.inputs) mean += x[f];
    mean /= n_train;
    double var = 0.0;
    for (const auto& x : train_set.inputs) var += (x[f] - mean) * (x[f] - mean);
    const double sd = std::sqrt(var / n_train);
    model.feature_means()[f] = mean;
    // Constant features (the hand origin is always (0, 0)) pass through.
    model.feature_stds()[f] = sd > 1e-12 ? sd : 1.0;
  }
  for (DenseLayer& layer : model.layers()) {
    const double limit = std::sqrt(6.0 / static_cast<double>(layer.inputs + layer.outputs));
    for (double& w : layer.weights) w = rng.uniform(-limit, limit);
  }

  std::vector<std::vector<double>> velocity_w;
  std::vector<std::vector<double>> velocity_b;
  for (const DenseLayer& layer : model.layers()) {
    velocity_w.emplace_back(layer.weights.size(), 0.0);
    velocity_b.emplace_back(layer.biases.size(), 0.0);
  }

  TrainReport report;
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<std::vector<double>> batch_x;
  std::vector<std::size_t> batch_y;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      batch_x.clear();
      batch_y.clear();
      for (std::size_t k = start; k < end; ++k) {
        batch_x.push_back(train_set.inputs[order[k]]);
        batch_y.push_back(train_set.labels[order[k]]);
      }
      const LossAndGradients lg = loss_and_gradients(model, batch_x, batch_y);
      epoch_loss += lg.loss;
      ++batches;
      for (std::size_t l = 0; l < model.layers().size(); ++l) {
        DenseLayer& layer = model.layers()[l];
        for (std::size_t i = 0; i < layer.weights.size(); ++i) {
          velocity_w[l][i] = cfg.momentum * velocity_w[l][i] -
                             cfg.learning_rate * lg.gradients.weights[l][i];
          layer.weights[i] += velocity_w[l][i];
        }
        for (std::size_t i = 0; i < layer.biases.size(); ++i) {
          velocity_b[l][i] = cfg.momentum * velocity_b[l][i] -
                             cfg.learning_rate * lg.gradients.biases[l][i];
          layer.biases[i] += velocity_b[l][i];
        }
      }
    }
    report.loss_curve.push_back(epoch_loss / static_cast<double>(batches));
  }

  report.train_acc = accuracy(model, train_set);
  report.val_acc = accuracy(model, val_set);
  report.train_size = train_set.size();
  report.val_size = val_set.size();
  report.parameter_count = model.parameter_count();
  return {std::move(model), std::move(report)};
}

Json model_to_json(const MlpModel& model) {
  Json layers = Json::array();
  for (const DenseLayer& layer : model.layers()) {
    Json rows = Json::array();
    for (std::size_t o = 0; o < layer.outputs; ++o) {
      rows.push_back(std::vector<double>(layer.weights.begin() + o * layer.inputs,
                                         layer.weights.begin() + (o + 1) * layer.inputs));
    }
    layers.push_back(Json{{"w", std::move(rows)}, {"b", layer.biases}});
  }
  return Json{{"version", kModelFormatVersion},
              {"layer_sizes", model.layer_sizes()},
              {"class_labels", model.class_labels()},
              {"feature_means", model.feature_means()},
              {"feature_stds", model.feature_stds()},
              {"layers", std::move(layers)}};
}

MlpModel model_from_json(const Json& doc) {
  auto corrupt = [](const std::string& detail) {
    return Error(ErrorCode::CorruptFile, "model file: " + detail);
  };
  if (!doc.is_object()) throw corrupt("top level must be an object");
  const auto version = doc.find("version");
  if (version == doc.end() || !version->is_number_integer()) throw corrupt("missing version");
  if (version->get<long long>() != kModelFormatVersion) {
    throw Error(ErrorCode::VersionMismatch,
                "model file version " + version->dump() + " is not supported");
  }
  try {
    MlpModel model(doc.at("layer_sizes").get<std::vector<std::size_t>>(),
                   doc.at("class_labels").get<std::vector<std::string>>());
    model.feature_means() = doc.at("feature_means").get<std::vector<double>>();
    model.feature_stds() = doc.at("feature_stds").get<std::vector<double>>();
    const Json& layers = doc.at("layers");
    if (!layers.is_array() || layers.size() != model.layers().size()) {
      throw corrupt("declared layer_sizes do not match the layers array");
    }
    for (std::size_t l = 0; l < layers.size(); ++l) {
      DenseLayer& layer = model.layers()[l];
      const Json& rows = layers[l].at("w");
      if (!rows.is_array() || rows.size() != layer.outputs) throw corrupt("weight row count");
      for (std::size_t o = 0; o < layer.outputs; ++o) {
        const auto row = rows[o].get<std::vector<double>>();
        if (row.size() != layer.inputs) throw corrupt("weight row length");
        std::copy(row.begin(), row.end(), layer.weights.begin() + o * layer.inputs);
      }
      layer.biases = layers[l].at("b").get<std::vector<double>>();
    }
    model.validate();
    return model;
  } catch (const Json::exception& e) {
    throw corrupt(e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::CorruptFile) throw;
    throw corrupt(e.what());
  }
}

void save_model(const MlpModel& model, std::ostream& out) {
  out << model_to_json(model).dump() << '\n';
}

MlpModel load_model(std::istream& in) {
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::CorruptFile, std::string("model file: ") + e.what());
  }
  return model_from_json(doc);
}

void save_model(const MlpModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write model " + path.string());
  save_model(model, out);
  if (!out) throw Error(ErrorCode::IoError, "failed writing model " + path.string());
}

MlpModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open model " + path.string());
  return load_model(in);
}

}  // namespace cello
