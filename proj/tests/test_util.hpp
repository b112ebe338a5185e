#pragma once

#include <random>
#include <vector>

#include "cbwk/core_model.hpp"
#include "cbwk/estimators.hpp"

namespace testutil {

// Random policy class: policy 0 always plays the no-op, the rest are random
// tables. Duplicates are allowed.
inline cbwk::PolicyClass random_policy_class(std::mt19937_64& gen, int X, int K, int n) {
  std::vector<std::vector<int>> table(static_cast<std::size_t>(n), std::vector<int>(X, 0));
  for (int p = 1; p < n; ++p)
    for (int x = 0; x < X; ++x) table[p][x] = static_cast<int>(gen() % static_cast<unsigned>(K));
  return cbwk::PolicyClass(X, K, table, 0);
}

// History of t rounds logged under uniform action choice with random
// Bernoulli-ish outcomes; the no-op yields nothing.
inline cbwk::History random_history(std::mt19937_64& gen, int X, int K, int d, int t) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::vector<std::vector<double>> mr(X, std::vector<double>(K));
  std::vector<std::vector<std::vector<double>>> mv(X, std::vector<std::vector<double>>(K, std::vector<double>(d)));
  for (int x = 0; x < X; ++x)
    for (int a = 1; a < K; ++a) {
      mr[x][a] = U(gen);
      for (int j = 0; j < d; ++j) mv[x][a][j] = U(gen);
    }
  cbwk::History h(X, K, d);
  for (int i = 0; i < t; ++i) {
    cbwk::HistoryRecord rec;
    rec.x = {static_cast<int>(gen() % static_cast<unsigned>(X))};
    rec.a = static_cast<int>(gen() % static_cast<unsigned>(K));
    rec.p = 1.0 / K;
    rec.r = U(gen) < mr[rec.x.id][rec.a] ? 1.0 : 0.0;
    rec.v.resize(d);
    for (int j = 0; j < d; ++j) rec.v[j] = U(gen) < mv[rec.x.id][rec.a][j] ? 1.0 : 0.0;
    h.append(rec);
  }
  return h;
}

}  // namespace testutil
