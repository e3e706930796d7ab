#include "covconv/rep.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "covconv/errors.hpp"

namespace covconv {

MultiplicityTable so3_tensor_multiplicities(int n) {
  if (n < 0 || n > kMaxTensorPower)
    throw InvalidArgument("tensor power must lie in [0, " + std::to_string(kMaxTensorPower) + "]");
  MultiplicityTable table;
  table.entries[0] = 1;
  for (int step = 1; step <= n; ++step) {
    std::map<int, std::uint64_t> next;
    for (const auto& [j, mult] : table.entries) {
      if (j == 0) {
        next[1] += mult;
        continue;
      }
      next[j - 1] += mult;
      next[j] += mult;
      next[j + 1] += mult;
    }
    table.entries = std::move(next);
  }
  table.n = n;
  return table;
}

double so3_character_multiplicity(int n, int j, int grid) {
  if (grid < 2) throw InvalidArgument("character grid needs at least 2 intervals");
  // chi_j(t) = sin((2j+1) t / 2) / sin(t / 2), with chi_j(0) = 2j + 1.
  auto chi = [](int spin, double t) {
    const double s = std::sin(0.5 * t);
    if (std::abs(s) < 1e-300) return 2.0 * spin + 1.0;
    return std::sin((spin + 0.5) * t) / s;
  };
  // Trapezoid on [0, pi]. The integrand is an even trigonometric polynomial,
  // so the rule is exact once the grid exceeds its degree.
  const double h = std::numbers::pi / grid;
  double acc = 0.0;
  for (int k = 0; k <= grid; ++k) {
    const double t = k * h;
    const double w = (k == 0 || k == grid) ? 0.5 : 1.0;
    acc += w * std::pow(chi(1, t), n) * chi(j, t) * (1.0 - std::cos(t));
  }
  return acc * h / std::numbers::pi;
}

}  // namespace covconv
