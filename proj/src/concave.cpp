#include "cbwk/concave.hpp"

#include <cmath>

#include "cbwk/errors.hpp"
#include "cbwk/rng.hpp"

namespace cbwk {

void ConcaveObjective::validate() const {
  require(dims >= 1, "ConcaveObjective: dims must be >= 1");
  require(static_cast<bool>(f) && static_cast<bool>(supergradient),
          "ConcaveObjective: f and its supergradient are required");
  require(L > 0.0 && norm_of_ones > 0.0, "ConcaveObjective: L and ||1|| must be positive");
}

ConcaveObjective linear_objective(std::vector<double> w) {
  require(!w.empty(), "linear_objective: empty weight vector");
  double n2 = 0.0;
  for (double wi : w) n2 += wi * wi;
  ConcaveObjective obj;
  obj.name = "linear";
  obj.dims = static_cast<int>(w.size());
  obj.L = n2 > 0.0 ? std::sqrt(n2) : 1.0;
  obj.norm_of_ones = std::sqrt(static_cast<double>(w.size()));
  obj.f = [w](std::span<const double> v) {
    double s = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) s += w[j] * v[j];
    return s;
  };
  obj.supergradient = [w](std::span<const double>) { return w; };
  return obj;
}

ConcaveObjective neg_distance_objective(std::vector<double> target) {
  require(!target.empty(), "neg_distance_objective: empty target");
  ConcaveObjective obj;
  obj.name = "neg_distance";
  obj.dims = static_cast<int>(target.size());
  obj.L = 1.0;
  obj.norm_of_ones = std::sqrt(static_cast<double>(target.size()));
  obj.f = [target](std::span<const double> v) {
    double s = 0.0;
    for (std::size_t j = 0; j < target.size(); ++j) s += (v[j] - target[j]) * (v[j] - target[j]);
    return -std::sqrt(s);
  };
  obj.supergradient = [target](std::span<const double> v) {
    std::vector<double> g(target.size(), 0.0);
    double s = 0.0;
    for (std::size_t j = 0; j < target.size(); ++j) s += (v[j] - target[j]) * (v[j] - target[j]);
    s = std::sqrt(s);
    if (s > 0.0)
      for (std::size_t j = 0; j < target.size(); ++j) g[j] = -(v[j] - target[j]) / s;
    return g;
  };
  return obj;
}

int spot_check_objective(const ConcaveObjective& obj, int pairs, unsigned long seed) {
  obj.validate();
  Rng rng(seed);
  int bad = 0;
  const std::size_t d = static_cast<std::size_t>(obj.dims);
  std::vector<double> u(d), v(d), m(d);
  for (int i = 0; i < pairs; ++i) {
    double dist2 = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      u[j] = rng.uniform();
      v[j] = rng.uniform();
      m[j] = 0.5 * (u[j] + v[j]);
      dist2 += (u[j] - v[j]) * (u[j] - v[j]);
    }
    const double fu = obj(u), fv = obj(v);
    if (obj(m) < 0.5 * (fu + fv) - 1e-12) ++bad;
    // Both built-in objectives are Lipschitz in the Euclidean norm.
    if (std::abs(fu - fv) > obj.L * std::sqrt(dist2) + 1e-12) ++bad;
  }
  return bad;
}

}  // namespace cbwk
