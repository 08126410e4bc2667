#include "fedsplit/experiment/report.hpp"

#include <algorithm>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace fedsplit {

double window_mean(std::span<const double> curve, Window w) {
  if (w.begin >= w.end || w.end > curve.size()) {
    throw std::out_of_range("window [" + std::to_string(w.begin) + "," + std::to_string(w.end) +
                            ") outside curve of " + std::to_string(curve.size()) + " epochs");
  }
  double sum = 0.0;
  for (std::size_t e = w.begin; e < w.end; ++e) sum += curve[e];
  return sum / static_cast<double>(w.end - w.begin);
}

ComparisonReport compare_report(std::span<const LabeledCurve> curves, std::span<const Window> windows) {
  if (curves.empty()) throw std::invalid_argument("compare_report: no curves");
  const std::size_t epochs = curves.front().curve.size();
  for (const auto& c : curves) {
    if (c.curve.size() != epochs) {
      throw std::invalid_argument("compare_report: '" + c.label + "' has " +
                                  std::to_string(c.curve.size()) + " epochs, expected " +
                                  std::to_string(epochs));
    }
  }
  ComparisonReport r;
  for (const auto& c : curves) r.labels.push_back(c.label);
  for (Window w : windows) {
    if (w.begin >= epochs) continue;
    r.windows.push_back({w.begin, std::min(w.end, epochs)});
  }
  r.means.assign(curves.size(), {});
  for (std::size_t i = 0; i < curves.size(); ++i) {
    for (Window w : r.windows) r.means[i].push_back(window_mean(curves[i].curve, w));
  }
  for (std::size_t k = 0; k < r.windows.size(); ++k) {
    std::vector<std::size_t> order(curves.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return r.means[a][k] > r.means[b][k]; });
    r.ranking.push_back(std::move(order));
  }
  return r;
}

std::string format_report(const ComparisonReport& r) {
  std::size_t width = 8;
  for (const auto& l : r.labels) width = std::max(width, l.size() + 2);
  std::ostringstream os;
  os << std::left << std::setw(static_cast<int>(width)) << "curve";
  for (Window w : r.windows) {
    os << std::right << std::setw(12) << ("[" + std::to_string(w.begin) + "," + std::to_string(w.end) + ")");
  }
  os << '\n';
  os << std::fixed << std::setprecision(2);
  for (std::size_t i = 0; i < r.labels.size(); ++i) {
    os << std::left << std::setw(static_cast<int>(width)) << r.labels[i];
    for (double m : r.means[i]) os << std::right << std::setw(12) << m;
    os << '\n';
  }
  for (std::size_t k = 0; k < r.windows.size(); ++k) {
    os << "order [" << r.windows[k].begin << "," << r.windows[k].end << "): ";
    for (std::size_t j = 0; j < r.ranking[k].size(); ++j) {
      if (j) os << " > ";
      os << r.labels[r.ranking[k][j]];
    }
    os << '\n';
  }
  return os.str();
}

MarginCheck check_margin(const std::string& lhs, double lhs_value, const std::string& rhs,
                         double rhs_value, double margin) {
  return {lhs, rhs, lhs_value, rhs_value, margin, lhs_value >= rhs_value * (1.0 + margin)};
}

std::string format_check(const MarginCheck& c) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << (c.pass ? "ok      " : "FLAGGED ") << c.lhs << " ("
     << c.lhs_value << ") >= " << c.rhs << " (" << c.rhs_value << ") * " << (1.0 + c.margin);
  return os.str();
}

}  // namespace fedsplit
