#include "fedsplit/nn/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <utility>

#include "fedsplit/errors.hpp"
#include "fedsplit/random.hpp"

namespace fedsplit {
namespace {

double activate(Activation a, double z) {
  switch (a) {
    case Activation::kReLU:
      return z > 0.0 ? z : 0.0;
    case Activation::kSigmoid:
      return 1.0 / (1.0 + std::exp(-z));
    case Activation::kNone:
      break;
  }
  return z;
}

// d(post)/d(pre), expressed through whichever of pre/post is cheaper.
double activation_slope(Activation a, double pre, double post) {
  switch (a) {
    case Activation::kReLU:
      return pre > 0.0 ? 1.0 : 0.0;
    case Activation::kSigmoid:
      return post * (1.0 - post);
    case Activation::kNone:
      break;
  }
  return 1.0;
}

void check_tensor_shape(const DenseLayer& layer, const LayerTensors& t) {
  if (!layer.weights.same_shape(t.weights) || layer.bias.size() != t.bias.size()) {
    throw DimensionError("tensor shape does not match layer '" + layer.id + "'");
  }
}

}  // namespace

void GradientBundle::accumulate(const GradientBundle& other) {
  for (const auto& [id, g] : other.layers) {
    auto it = layers.find(id);
    if (it == layers.end()) {
      layers.emplace(id, g);
      continue;
    }
    auto& mine = it->second;
    if (!mine.weights.same_shape(g.weights) || mine.bias.size() != g.bias.size()) {
      throw DimensionError("cannot accumulate gradients of different shape for '" + id + "'");
    }
    auto dst = mine.weights.data();
    auto src = g.weights.data();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
    for (std::size_t i = 0; i < mine.bias.size(); ++i) mine.bias[i] += g.bias[i];
  }
}

void GradientBundle::scale(double factor) {
  for (auto& [id, g] : layers) {
    for (double& v : g.weights.data()) v *= factor;
    for (double& v : g.bias) v *= factor;
  }
}

SplitModel::SplitModel(std::string owner, std::vector<DenseLayer> layers)
    : owner_(std::move(owner)), layers_(std::move(layers)) {
  if (layers_.empty()) throw std::invalid_argument("model needs at least one layer");
  std::set<std::string> seen;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& l = layers_[i];
    if (l.id.empty()) throw std::invalid_argument("layer id must not be empty");
    if (!seen.insert(l.id).second) throw std::invalid_argument("duplicate layer id '" + l.id + "'");
    if (l.in_dim() == 0 || l.out_dim() == 0) {
      throw DimensionError("layer '" + l.id + "' has a zero dimension");
    }
    if (l.bias.size() != l.out_dim()) {
      throw DimensionError("layer '" + l.id + "' bias length != out_dim");
    }
    if (i > 0 && layers_[i - 1].out_dim() != l.in_dim()) {
      throw DimensionError("layer '" + l.id + "' in_dim does not chain with previous out_dim");
    }
  }
}

DenseLayer& SplitModel::layer(const std::string& id) {
  for (auto& l : layers_) {
    if (l.id == id) return l;
  }
  throw std::out_of_range("no layer '" + id + "'");
}

const DenseLayer& SplitModel::layer(const std::string& id) const {
  return const_cast<SplitModel*>(this)->layer(id);
}

bool SplitModel::has_layer(const std::string& id) const {
  return std::any_of(layers_.begin(), layers_.end(), [&](const auto& l) { return l.id == id; });
}

bool SplitModel::is_split() const {
  return std::count_if(layers_.begin(), layers_.end(),
                       [](const auto& l) { return l.scope == Scope::kGlobal; }) == 1;
}

DenseLayer& SplitModel::global_layer() {
  if (!is_split()) throw std::logic_error("model must have exactly one GLOBAL layer");
  return *std::find_if(layers_.begin(), layers_.end(),
                       [](const auto& l) { return l.scope == Scope::kGlobal; });
}

const DenseLayer& SplitModel::global_layer() const {
  return const_cast<SplitModel*>(this)->global_layer();
}

std::vector<LayerSpec> split_topology(const std::string& agent, std::size_t obs_dim,
                                      std::size_t actions) {
  return {
      {agent + ".1", obs_dim, 32, Activation::kReLU, Scope::kLocal},
      {kGlobalLayerId, 32, 16, Activation::kReLU, Scope::kGlobal},
      {agent + ".3", 16, actions, Activation::kSigmoid, Scope::kLocal},
  };
}

SplitModel init_model(std::uint64_t seed, std::span<const LayerSpec> topology, std::string owner) {
  if (topology.empty()) throw std::invalid_argument("empty topology");
  Rng rng(seed);
  std::vector<DenseLayer> layers;
  layers.reserve(topology.size());
  for (const auto& spec : topology) {
    if (spec.in_dim == 0) throw DimensionError("layer '" + spec.id + "' has in_dim 0");
    const double bound = 1.0 / std::sqrt(static_cast<double>(spec.in_dim));
    DenseLayer l{spec.id, Matrix(spec.in_dim, spec.out_dim), Vector(spec.out_dim, 0.0),
                 spec.activation, spec.scope};
    for (double& w : l.weights.data()) w = rng.uniform(-bound, bound);
    layers.push_back(std::move(l));
  }
  return SplitModel(std::move(owner), std::move(layers));
}

Vector forward(const SplitModel& model, std::span<const double> input, Tape* tape) {
  if (input.size() != model.input_dim()) {
    throw DimensionError("input length " + std::to_string(input.size()) + " != " +
                         std::to_string(model.input_dim()));
  }
  if (tape) tape->records.clear();
  Vector x(input.begin(), input.end());
  for (const auto& l : model.layers()) {
    const std::size_t in = l.in_dim();
    const std::size_t out = l.out_dim();
    Vector pre(l.bias);
    for (std::size_t i = 0; i < in; ++i) {
      const double xi = x[i];
      const double* row = &l.weights(i, 0);
      for (std::size_t j = 0; j < out; ++j) pre[j] += xi * row[j];
    }
    Vector post(out);
    for (std::size_t j = 0; j < out; ++j) post[j] = activate(l.activation, pre[j]);
    if (tape) {
      tape->records.push_back({std::move(x), std::move(pre), post});
    }
    x = std::move(post);
  }
  return x;
}

void backward_into(const SplitModel& model, const Tape& tape, std::span<const double> output_grad,
                   GradientBundle& into) {
  const auto layers = model.layers();
  if (tape.records.size() != layers.size()) {
    throw DimensionError("tape has " + std::to_string(tape.records.size()) +
                         " records for a model with " + std::to_string(layers.size()) + " layers");
  }
  for (std::size_t k = 0; k < layers.size(); ++k) {
    const auto& r = tape.records[k];
    if (r.input.size() != layers[k].in_dim() || r.pre.size() != layers[k].out_dim() ||
        r.post.size() != layers[k].out_dim()) {
      throw DimensionError("tape record does not match layer '" + layers[k].id + "'");
    }
  }
  if (output_grad.size() != model.output_dim()) {
    throw DimensionError("output_grad length != model output dim");
  }

  Vector upstream(output_grad.begin(), output_grad.end());
  Vector delta;
  Vector downstream;
  for (std::size_t k = layers.size(); k-- > 0;) {
    const auto& l = layers[k];
    const auto& rec = tape.records[k];
    const std::size_t in = l.in_dim();
    const std::size_t out = l.out_dim();

    auto it = into.layers.find(l.id);
    if (it == into.layers.end()) {
      it = into.layers.emplace(l.id, LayerTensors{Matrix(in, out), Vector(out, 0.0)}).first;
    }
    LayerTensors& g = it->second;
    if (!g.weights.same_shape(l.weights) || g.bias.size() != out) {
      throw DimensionError("accumulator shape does not match layer '" + l.id + "'");
    }

    delta.assign(out, 0.0);
    for (std::size_t j = 0; j < out; ++j) {
      delta[j] = upstream[j] * activation_slope(l.activation, rec.pre[j], rec.post[j]);
      g.bias[j] += delta[j];
    }

    downstream.assign(in, 0.0);
    for (std::size_t i = 0; i < in; ++i) {
      const double xi = rec.input[i];
      const double* wrow = &l.weights(i, 0);
      double* grow = &g.weights(i, 0);
      double acc = 0.0;
      for (std::size_t j = 0; j < out; ++j) {
        grow[j] += xi * delta[j];
        acc += wrow[j] * delta[j];
      }
      downstream[i] = acc;
    }
    std::swap(upstream, downstream);
  }
}

GradientBundle backward(const SplitModel& model, const Tape& tape,
                        std::span<const double> output_grad) {
  GradientBundle bundle;
  backward_into(model, tape, output_grad, bundle);
  return bundle;
}

DeltaBundle apply_update(SplitModel& model, const GradientBundle& bundle, double learning_rate) {
  for (const auto& [id, g] : bundle.layers) {
    if (!model.has_layer(id)) throw DimensionError("bundle layer '" + id + "' not in model");
    check_tensor_shape(model.layer(id), g);
  }
  DeltaBundle deltas;
  for (const auto& [id, g] : bundle.layers) {
    auto& l = model.layer(id);
    LayerTensors d{Matrix(g.weights.rows(), g.weights.cols()), Vector(g.bias.size())};
    auto w = l.weights.data();
    auto gw = g.weights.data();
    auto dw = d.weights.data();
    for (std::size_t i = 0; i < w.size(); ++i) {
      dw[i] = -(learning_rate * gw[i]);
      w[i] += dw[i];
    }
    for (std::size_t i = 0; i < l.bias.size(); ++i) {
      d.bias[i] = -(learning_rate * g.bias[i]);
      l.bias[i] += d.bias[i];
    }
    deltas.emplace(id, std::move(d));
  }
  return deltas;
}

void add_delta(DenseLayer& layer, const LayerTensors& delta) {
  check_tensor_shape(layer, delta);
  auto w = layer.weights.data();
  auto d = delta.weights.data();
  for (std::size_t i = 0; i < w.size(); ++i) w[i] += d[i];
  for (std::size_t i = 0; i < layer.bias.size(); ++i) layer.bias[i] += delta.bias[i];
}

GradientBundle export_for_federation(const SplitModel& model, const GradientBundle& bundle) {
  GradientBundle out;
  out.epoch = bundle.epoch;
  const auto& id = model.global_layer().id;
  if (auto it = bundle.layers.find(id); it != bundle.layers.end()) {
    out.layers.emplace(id, it->second);
  }
  return out;
}

}  // namespace fedsplit
