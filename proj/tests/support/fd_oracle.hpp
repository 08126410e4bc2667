#pragma once

// Central finite differences over a long double copy of a SplitModel. The
// copy has its own forward pass, so the check shares no code with the
// library's, and extended precision keeps the cancellation noise of
// (L(p+h) - L(p-h)) / 2h well below the size of the smallest partials.

#include <cmath>
#include <vector>

#include "fedsplit/nn/model.hpp"

namespace fedsplit::testing {

struct LongDoubleNet {
  struct Layer {
    std::size_t in = 0, out = 0;
    std::vector<long double> w;  // row-major in x out
    std::vector<long double> b;
    Activation act = Activation::kNone;
  };
  std::vector<Layer> layers;

  explicit LongDoubleNet(const SplitModel& m) {
    for (const auto& l : m.layers()) {
      Layer c;
      c.in = l.in_dim();
      c.out = l.out_dim();
      c.w.assign(l.weights.data().begin(), l.weights.data().end());
      c.b.assign(l.bias.begin(), l.bias.end());
      c.act = l.activation;
      layers.push_back(std::move(c));
    }
  }

  std::vector<long double> forward(const std::vector<double>& input) const {
    std::vector<long double> x(input.begin(), input.end());
    for (const auto& l : layers) {
      std::vector<long double> y(l.out);
      for (std::size_t j = 0; j < l.out; ++j) {
        long double a = l.b[j];
        for (std::size_t i = 0; i < l.in; ++i) a += x[i] * l.w[i * l.out + j];
        if (l.act == Activation::kReLU) a = a > 0 ? a : 0.0L;
        if (l.act == Activation::kSigmoid) a = 1.0L / (1.0L + std::exp(-a));
        y[j] = a;
      }
      x = std::move(y);
    }
    return x;
  }

  // d/dp of sum_k weights[k] * output[k], by central differences.
  template <typename Loss>
  long double central_difference(long double& p, long double h, Loss&& loss) {
    const long double keep = p;
    p = keep + h;
    const long double up = loss();
    p = keep - h;
    const long double down = loss();
    p = keep;
    return (up - down) / (2 * h);
  }
};

}  // namespace fedsplit::testing
