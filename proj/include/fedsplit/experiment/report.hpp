#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace fedsplit {

// Half-open epoch range [begin, end), 0-based.
struct Window {
  std::size_t begin = 0;
  std::size_t end = 0;

  friend bool operator==(const Window&, const Window&) = default;
};

inline const std::vector<Window> kReportWindows{{20, 40}, {40, 60}, {60, 100}};

// Mean of curve over w. Throws std::out_of_range when w is empty or does not
// fit inside the curve.
double window_mean(std::span<const double> curve, Window w);

struct LabeledCurve {
  std::string label;
  std::vector<double> curve;  // per-epoch mean return
};

struct ComparisonReport {
  std::vector<std::string> labels;
  std::vector<Window> windows;              // those that fit the epoch domain
  std::vector<std::vector<double>> means;   // [label][window]
  std::vector<std::vector<std::size_t>> ranking;  // [window] -> label indices, best first
};

// Rejects (std::invalid_argument) curves of differing length. Windows that
// start past the last epoch are left out; a window running past it is cut.
ComparisonReport compare_report(std::span<const LabeledCurve> curves,
                                std::span<const Window> windows = kReportWindows);

std::string format_report(const ComparisonReport& report);

// lhs >= rhs * (1 + margin)
struct MarginCheck {
  std::string lhs;
  std::string rhs;
  double lhs_value = 0.0;
  double rhs_value = 0.0;
  double margin = 0.0;
  bool pass = false;
};

MarginCheck check_margin(const std::string& lhs, double lhs_value, const std::string& rhs,
                         double rhs_value, double margin);

std::string format_check(const MarginCheck& c);

}  // namespace fedsplit
