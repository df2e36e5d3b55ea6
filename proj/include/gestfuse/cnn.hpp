#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "gestfuse/tensor.hpp"
#include "gestfuse/types.hpp"

namespace gestfuse {

// Architecture description of one layer, sufficient to rebuild it (without
// its parameter values).
struct LayerSpec {
  enum class Kind { conv2d, conv1d, maxpool2d, dense, relu, softmax };
  Kind kind = Kind::relu;
  int in_channels = 0;   // conv
  int out_channels = 0;  // conv
  int kernel = 0;        // conv; maxpool window is fixed at 2
  int in_dim = 0;        // dense
  int out_dim = 0;       // dense

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

// Activations captured by one forward pass, consumed by the matching
// backward pass. Owned by the caller so const models stay shareable
// between threads.
struct LayerContext {
  Tensor input;
  Tensor output;
  std::vector<std::size_t> pool_argmax;  // flat input index per pooled cell
};

class Layer {
 public:
  virtual ~Layer() = default;
  virtual std::unique_ptr<Layer> clone() const = 0;
  virtual LayerSpec spec() const = 0;

  // Raises ShapeMismatch when the layer cannot consume `input`.
  virtual std::vector<int> output_shape(const std::vector<int>& input) const = 0;

  // Pass ctx to record activations for a later backward; null for inference.
  virtual Tensor forward(const Tensor& x, LayerContext* ctx) const = 0;

  // Returns dL/dinput and ACCUMULATES dL/dparams into own_grads (one tensor
  // per parameter, already shaped), so batch gradients sum naturally.
  virtual Tensor backward(const LayerContext& ctx, const Tensor& dy,
                          std::span<Tensor> own_grads) const = 0;

  // The layer's parameter tensors in a fixed order (weights before biases).
  virtual std::vector<Tensor*> param_tensors() { return {}; }
};

std::unique_ptr<Layer> make_layer(const LayerSpec& spec);

// A feed-forward stack ending in softmax over the 5 gesture classes.
class CnnModel {
 public:
  CnnModel() = default;
  CnnModel(std::vector<int> input_shape, std::vector<std::unique_ptr<Layer>> layers,
           std::string modality);
  CnnModel(const CnnModel& other);
  CnnModel& operator=(const CnnModel& other);
  CnnModel(CnnModel&&) = default;
  CnnModel& operator=(CnnModel&&) = default;

  const std::vector<int>& input_shape() const { return input_shape_; }
  const std::string& modality() const { return modality_; }
  void set_modality(std::string m) { modality_ = std::move(m); }
  const std::vector<std::unique_ptr<Layer>>& layers() const { return layers_; }

  // He-style uniform initialization, limit sqrt(6 / fan_in), biases zero.
  void init_params(std::uint64_t seed);

  std::vector<Tensor*> parameters();
  std::vector<const Tensor*> parameters() const;

  // Class probabilities; safe to call concurrently on a const model.
  std::vector<double> forward(const Tensor& input) const;

  // Cross-entropy loss for (input, label); accumulates parameter gradients
  // into `grads` (initialized to zeros when empty). The softmax/cross-entropy
  // pair backpropagates as probabilities minus the one-hot target.
  double backward(const Tensor& input, int label, std::vector<Tensor>& grads) const;

  // Zero tensors shaped like parameters().
  std::vector<Tensor> zero_grads() const;

 private:
  void check_input(const Tensor& input) const;
  std::vector<double> run(const Tensor& input, std::vector<LayerContext>* ctxs) const;

  std::vector<int> input_shape_;
  std::vector<std::unique_ptr<Layer>> layers_;
  std::string modality_;
};

// LeNet-5 sized for 60x60 grayscale patches:
// conv 6@5x5, pool 2, conv 16@5x5, pool 2, dense 120, dense 84, dense 5;
// ReLU between the trainable layers, softmax output.
CnnModel make_vision_cnn(std::uint64_t seed, std::string modality = "DVS");

// 1-D variant for the 16-value time-domain vector, no pooling:
// conv1d 6@5, conv1d 16@5, dense 64, dense 5.
CnnModel make_emg_cnn(std::uint64_t seed, std::string modality = "EMG");

// Rebuild a model skeleton (uninitialized parameters) from specs.
CnnModel build_cnn(std::vector<int> input_shape, std::span<const LayerSpec> specs,
                   std::string modality);

struct AdadeltaState {
  double rho = 0.95;
  double epsilon = 1e-6;
  std::vector<Tensor> eg2;   // running E[g^2], aligned with the parameter list
  std::vector<Tensor> edx2;  // running E[dx^2]
};

// One update: E[g2] <- rho E[g2] + (1-rho) g^2;
// dx = -sqrt(E[dx2]+eps)/sqrt(E[g2]+eps) * g; E[dx2] <- rho E[dx2]+(1-rho)dx^2.
// Fresh (empty) state initializes zero accumulators from the parameter shapes.
void adadelta_step(std::span<Tensor*> params, std::span<const Tensor> grads,
                   AdadeltaState& state);

struct TrainConfig {
  int epochs = 100;
  int batch_size = 32;
  double rho = 0.95;
  double epsilon = 1e-6;
};

struct TrainResult {
  std::vector<double> loss_history;  // mean sample loss per epoch
};

// Mini-batch Adadelta training with seeded shuffling; mean batch gradients.
// Deterministic for a fixed seed (batch gradients are reduced over a fixed
// number of lanes in fixed order).
TrainResult train_cnn(CnnModel& model, std::span<const Tensor> inputs,
                      std::span<const int> labels, const TrainConfig& config,
                      std::uint64_t seed);

}  // namespace gestfuse
