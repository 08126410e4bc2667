#include "fedsplit/experiment/polyfit.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fedsplit {

std::vector<double> polyfit(std::span<const double> xs, std::span<const double> ys,
                            std::size_t degree) {
  if (xs.size() != ys.size()) throw std::invalid_argument("polyfit: xs and ys differ in length");
  if (xs.size() <= degree) throw std::invalid_argument("polyfit: need more points than degree");
  const auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
  if (*lo == *hi) throw std::invalid_argument("polyfit: all x values are equal");

  const auto n = static_cast<Eigen::Index>(xs.size());
  const auto m = static_cast<Eigen::Index>(degree + 1);
  Eigen::MatrixXd vander(n, m);
  for (Eigen::Index i = 0; i < n; ++i) {
    double p = 1.0;
    for (Eigen::Index j = 0; j < m; ++j) {
      vander(i, j) = p;
      p *= xs[static_cast<std::size_t>(i)];
    }
  }
  // Equilibrate columns; raw monomials of epoch indices span many decades.
  Eigen::VectorXd scale = vander.colwise().norm().transpose();
  for (Eigen::Index j = 0; j < m; ++j) {
    if (scale(j) == 0.0) scale(j) = 1.0;
  }
  vander = vander * scale.cwiseInverse().asDiagonal();

  const Eigen::Map<const Eigen::VectorXd> y(ys.data(), n);
  const Eigen::VectorXd z = vander.colPivHouseholderQr().solve(y);
  std::vector<double> coeffs(static_cast<std::size_t>(m));
  for (Eigen::Index j = 0; j < m; ++j) coeffs[static_cast<std::size_t>(j)] = z(j) / scale(j);
  return coeffs;
}

double polyval(std::span<const double> coefficients, double x) {
  double acc = 0.0;
  for (auto it = coefficients.rbegin(); it != coefficients.rend(); ++it) acc = acc * x + *it;
  return acc;
}

}  // namespace fedsplit
