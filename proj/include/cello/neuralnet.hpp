#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "cello/json.hpp"

namespace cello {

// Fully connected layer; weights are out x in, row-major.
struct DenseLayer {
  std::size_t inputs = 0;
  std::size_t outputs = 0;
  std::vector<double> weights;
  std::vector<double> biases;

  double& weight(std::size_t out, std::size_t in) { return weights[out * inputs + in]; }
  double weight(std::size_t out, std::size_t in) const { return weights[out * inputs + in]; }

  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

/**
 * Multilayer perceptron classifier: inputs are standardized with the stored
 * training statistics, hidden layers use ReLU, the output is a softmax over
 * class_labels.
 */
class MlpModel {
 public:
  MlpModel() = default;
  // Zero weights, identity standardization. Throws Error(ShapeMismatch).
  MlpModel(std::vector<std::size_t> layer_sizes, std::vector<std::string> class_labels);

  const std::vector<std::size_t>& layer_sizes() const { return layer_sizes_; }
  const std::vector<std::string>& class_labels() const { return class_labels_; }
  std::size_t input_size() const { return layer_sizes_.front(); }
  std::size_t output_size() const { return layer_sizes_.back(); }
  std::size_t parameter_count() const;

  std::vector<DenseLayer>& layers() { return layers_; }
  const std::vector<DenseLayer>& layers() const { return layers_; }

  std::vector<double>& feature_means() { return means_; }
  const std::vector<double>& feature_means() const { return means_; }
  std::vector<double>& feature_stds() { return stds_; }
  const std::vector<double>& feature_stds() const { return stds_; }

  // Throws Error(ShapeMismatch) if any invariant is broken.
  void validate() const;

  friend bool operator==(const MlpModel&, const MlpModel&) = default;

 private:
  std::vector<std::size_t> layer_sizes_;
  std::vector<std::string> class_labels_;
  std::vector<DenseLayer> layers_;
  std::vector<double> means_;
  std::vector<double> stds_;
};

// Sum of n_in * n_out + n_out over consecutive layer pairs.
std::size_t param_count(std::span<const std::size_t> layer_sizes);

// Pre-softmax output. Throws Error(ShapeMismatch).
std::vector<double> logits(const MlpModel& model, std::span<const double> x);
std::vector<double> softmax(std::span<const double> logits);
// Class probabilities. Throws Error(ShapeMismatch).
std::vector<double> forward(const MlpModel& model, std::span<const double> x);
// Lowest index wins ties.
std::size_t argmax(std::span<const double> values);

struct Gradients {
  std::vector<std::vector<double>> weights;  // per layer, same layout as DenseLayer
  std::vector<std::vector<double>> biases;
};

struct LossAndGradients {
  double loss = 0.0;
  Gradients gradients;
};

// Mean cross-entropy over the batch and its gradient with respect to every
// weight and bias. Standardization statistics are constants here.
LossAndGradients loss_and_gradients(const MlpModel& model,
                                    std::span<const std::vector<double>> inputs,
                                    std::span<const std::size_t> labels);

struct LabeledDataset {
  std::vector<std::vector<double>> inputs;
  std::vector<std::size_t> labels;
  std::vector<std::string> class_labels;

  std::size_t size() const { return inputs.size(); }
  // Throws Error(ShapeMismatch) on ragged inputs or out-of-range labels.
  void validate() const;
};

// JSON lines: a header {"class_labels":[...]} then {"x":[...],"y":k} per sample.
void write_dataset(const LabeledDataset& data, std::ostream& out);
LabeledDataset read_dataset(std::istream& in);

struct TrainConfig {
  double learning_rate = 1e-3;
  std::size_t batch_size = 32;
  std::size_t epochs = 400;
  std::uint64_t seed = 0;
  double validation_fraction = 0.2;
  double momentum = 0.0;  // 0 gives plain SGD

  // Throws Error(BadConfig).
  void validate() const;
};

struct TrainReport {
  double train_acc = 0.0;
  double val_acc = 0.0;
  std::size_t train_size = 0;
  std::size_t val_size = 0;
  std::size_t parameter_count = 0;
  std::vector<double> loss_curve;  // mean minibatch loss per epoch
};

struct TrainResult {
  MlpModel model;
  TrainReport report;
};

// Deterministic for a given seed. Splits each class separately for the
// held-out set and computes standardization on the training split only.
// Throws Error(InsufficientData) when any class has fewer than two samples
// or fewer than two classes are present.
TrainResult train(const LabeledDataset& data, std::vector<std::size_t> layer_sizes,
                  const TrainConfig& cfg);

double accuracy(const MlpModel& model, const LabeledDataset& data);

inline constexpr int kModelFormatVersion = 1;

Json model_to_json(const MlpModel& model);
// Throws Error(VersionMismatch) or Error(CorruptFile).
MlpModel model_from_json(const Json& doc);

void save_model(const MlpModel& model, std::ostream& out);
MlpModel load_model(std::istream& in);
void save_model(const MlpModel& model, const std::filesystem::path& path);
MlpModel load_model(const std::filesystem::path& path);

}  // namespace cello
