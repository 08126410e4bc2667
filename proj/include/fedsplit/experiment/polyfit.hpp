#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace fedsplit {

// Least-squares polynomial fit. Coefficients are in ascending powers:
// y ~ c[0] + c[1] x + ... + c[degree] x^degree.
// Throws std::invalid_argument when there are not more points than degree,
// when xs and ys differ in length, or when all x are equal.
std::vector<double> polyfit(std::span<const double> xs, std::span<const double> ys,
                            std::size_t degree);

double polyval(std::span<const double> coefficients, double x);

}  // namespace fedsplit
