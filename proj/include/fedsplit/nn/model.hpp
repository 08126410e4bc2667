#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "fedsplit/nn/matrix.hpp"

namespace fedsplit {

enum class Activation : std::uint8_t { kNone = 0, kReLU = 1, kSigmoid = 2 };

// LOCAL layers are owned by one agent. GLOBAL layers are replicated across
// agents and are the only ones that ever leave the process.
enum class Scope : std::uint8_t { kLocal = 0, kGlobal = 1 };

struct LayerSpec {
  std::string id;
  std::size_t in_dim = 0;
  std::size_t out_dim = 0;
  Activation activation = Activation::kNone;
  Scope scope = Scope::kLocal;
};

struct DenseLayer {
  std::string id;
  Matrix weights;  // in_dim x out_dim
  Vector bias;     // out_dim
  Activation activation = Activation::kNone;
  Scope scope = Scope::kLocal;

  std::size_t in_dim() const { return weights.rows(); }
  std::size_t out_dim() const { return weights.cols(); }

  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

// Weights-shaped and bias-shaped pair. Used for gradients and for additive
// weight deltas alike.
struct LayerTensors {
  Matrix weights;
  Vector bias;

  friend bool operator==(const LayerTensors&, const LayerTensors&) = default;
};

// Additive change to a single layer, as broadcast through the federation.
struct LayerDelta {
  std::string layer_id;
  Matrix weights;
  Vector bias;

  friend bool operator==(const LayerDelta&, const LayerDelta&) = default;
};

struct GradientBundle {
  std::map<std::string, LayerTensors> layers;
  std::uint32_t epoch = 0;

  // Elementwise add; layers missing on this side are copied in.
  void accumulate(const GradientBundle& other);
  void scale(double factor);
};

using DeltaBundle = std::map<std::string, LayerTensors>;

// Per-layer activations recorded by forward() for the backward pass.
struct LayerRecord {
  Vector input;
  Vector pre;   // affine output
  Vector post;  // after activation
};

struct Tape {
  std::vector<LayerRecord> records;
};

class SplitModel {
 public:
  SplitModel() = default;
  // Throws DimensionError when the layer chain is broken or a layer is
  // internally inconsistent, std::invalid_argument on empty/duplicate ids.
  SplitModel(std::string owner, std::vector<DenseLayer> layers);

  const std::string& owner() const { return owner_; }
  std::span<const DenseLayer> layers() const { return layers_; }
  std::size_t input_dim() const { return layers_.front().in_dim(); }
  std::size_t output_dim() const { return layers_.back().out_dim(); }

  DenseLayer& layer(const std::string& id);
  const DenseLayer& layer(const std::string& id) const;
  bool has_layer(const std::string& id) const;

  // The unique GLOBAL layer. Throws std::logic_error unless exactly one
  // layer is GLOBAL.
  DenseLayer& global_layer();
  const DenseLayer& global_layer() const;
  bool is_split() const;

  friend bool operator==(const SplitModel&, const SplitModel&) = default;

 private:
  std::string owner_;
  std::vector<DenseLayer> layers_;
};

// Default split topology: (obs,32) ReLU LOCAL, (32,16) ReLU GLOBAL "2",
// (16,actions) Sigmoid LOCAL. Local ids are "<agent>.1" and "<agent>.3".
std::vector<LayerSpec> split_topology(const std::string& agent, std::size_t obs_dim = 4,
                                      std::size_t actions = 2);

inline constexpr const char* kGlobalLayerId = "2";

// Weights uniform in [-1/sqrt(in_dim), 1/sqrt(in_dim)], zero biases.
SplitModel init_model(std::uint64_t seed, std::span<const LayerSpec> topology,
                      std::string owner = {});

Vector forward(const SplitModel& model, std::span<const double> input, Tape* tape = nullptr);

// Gradients of a scalar loss w.r.t. every parameter, given dLoss/dOutput.
// ReLU'(0) is taken as 0.
GradientBundle backward(const SplitModel& model, const Tape& tape,
                        std::span<const double> output_grad);

// Same as backward(), but adds the gradients into an existing bundle.
void backward_into(const SplitModel& model, const Tape& tape, std::span<const double> output_grad,
                   GradientBundle& into);

// w <- w - lr * g for every layer in the bundle. Returns the additive deltas
// (-lr * g) so that w_before + delta reproduces w_after bit-exactly.
DeltaBundle apply_update(SplitModel& model, const GradientBundle& bundle, double learning_rate);

// Adds delta elementwise to the named layer. DimensionError on shape
// mismatch, std::out_of_range on unknown layer.
void add_delta(DenseLayer& layer, const LayerTensors& delta);

// Copy of the GLOBAL layer entries only; everything else is dropped.
GradientBundle export_for_federation(const SplitModel& model, const GradientBundle& bundle);

}  // namespace fedsplit
