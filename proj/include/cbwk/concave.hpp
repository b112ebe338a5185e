#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace cbwk {

// Concave f on [0,1]^d with a supergradient, L-Lipschitz under the norm
// whose value on the all-ones vector is norm_of_ones.
struct ConcaveObjective {
  std::string name;
  int dims = 1;
  std::function<double(std::span<const double>)> f;
  std::function<std::vector<double>(std::span<const double>)> supergradient;
  double L = 1.0;
  double norm_of_ones = 1.0;

  double operator()(std::span<const double> v) const { return f(v); }
  void validate() const;
};

// f(v) = w . v, Lipschitz in the Euclidean norm with L = ||w||_2.
ConcaveObjective linear_objective(std::vector<double> w);

// f(v) = -||v - target||_2, 1-Lipschitz in the Euclidean norm.
ConcaveObjective neg_distance_objective(std::vector<double> target);

// Midpoint concavity and Lipschitz spot checks on random pairs in [0,1]^d.
// Returns the number of violated checks.
int spot_check_objective(const ConcaveObjective& obj, int pairs, unsigned long seed);

}  // namespace cbwk
