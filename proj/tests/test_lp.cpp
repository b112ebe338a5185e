#include <cmath>
#include <optional>
#include <random>

#include "cbwk/lp.hpp"
#include "doctest.h"

using namespace cbwk::lp;

namespace {

// Solves the square system M z = r by Gaussian elimination with partial
// pivoting; nullopt when singular.
std::optional<std::vector<double>> solve_square(std::vector<std::vector<double>> M,
                                                std::vector<double> r) {
  const std::size_t n = r.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t i = c + 1; i < n; ++i)
      if (std::abs(M[i][c]) > std::abs(M[piv][c])) piv = i;
    if (std::abs(M[piv][c]) < 1e-10) return std::nullopt;
    std::swap(M[c], M[piv]);
    std::swap(r[c], r[piv]);
    for (std::size_t i = 0; i < n; ++i) {
      if (i == c) continue;
      const double f = M[i][c] / M[c][c];
      for (std::size_t k = c; k < n; ++k) M[i][k] -= f * M[c][k];
      r[i] -= f * r[c];
    }
  }
  std::vector<double> z(n);
  for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / M[i][i];
  return z;
}

bool feasible(const Problem& p, const std::vector<double>& x, double tol) {
  for (double xi : x)
    if (xi < -tol) return false;
  for (const auto& c : p.constraints) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += c.coeffs[i] * x[i];
    if (c.sense == Sense::kLessEqual && s > c.rhs + tol) return false;
    if (c.sense == Sense::kGreaterEqual && s < c.rhs - tol) return false;
    if (c.sense == Sense::kEqual && std::abs(s - c.rhs) > tol) return false;
  }
  return true;
}

// Best objective over all basic feasible points (bounded feasible region).
std::optional<double> vertex_enumeration(const Problem& p) {
  const std::size_t n = p.objective.size();
  std::vector<std::vector<double>> rows;
  std::vector<double> rhs;
  for (const auto& c : p.constraints) {
    rows.push_back(c.coeffs);
    rhs.push_back(c.rhs);
  }
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> e(n, 0.0);
    e[i] = 1.0;
    rows.push_back(e);
    rhs.push_back(0.0);
  }
  const std::size_t m = rows.size();
  std::optional<double> best;
  std::vector<int> pick(m, 0);
  std::fill(pick.begin(), pick.begin() + static_cast<long>(n), 1);
  std::sort(pick.begin(), pick.end());
  do {
    std::vector<std::vector<double>> M;
    std::vector<double> r;
    for (std::size_t i = 0; i < m; ++i)
      if (pick[i]) {
        M.push_back(rows[i]);
        r.push_back(rhs[i]);
      }
    auto z = solve_square(M, r);
    if (!z || !feasible(p, *z, 1e-9)) continue;
    double v = 0.0;
    for (std::size_t i = 0; i < n; ++i) v += p.objective[i] * (*z)[i];
    if (!best || v > *best) best = v;
  } while (std::next_permutation(pick.begin(), pick.end()));
  return best;
}

}  // namespace

TEST_CASE("simplex matches a hand-solved LP") {
  // max 3x + 5y s.t. x <= 4, 2y <= 12, 3x + 2y <= 18: optimum (2, 6), value 36.
  Problem p{{3, 5}, {{{1, 0}, Sense::kLessEqual, 4}, {{0, 2}, Sense::kLessEqual, 12},
                     {{3, 2}, Sense::kLessEqual, 18}}};
  const Solution s = maximize(p);
  REQUIRE(s.status == Status::kOptimal);
  CHECK(s.objective == doctest::Approx(36.0));
  CHECK(s.x[0] == doctest::Approx(2.0));
  CHECK(s.x[1] == doctest::Approx(6.0));
  CHECK(s.duals[0] == doctest::Approx(0.0));
  CHECK(s.duals[1] == doctest::Approx(1.5));
  CHECK(s.duals[2] == doctest::Approx(1.0));
}

TEST_CASE("simplex reports infeasible and unbounded problems") {
  Problem infeasible{{1, 1}, {{{1, 1}, Sense::kLessEqual, 1}, {{1, 1}, Sense::kGreaterEqual, 2}}};
  CHECK(maximize(infeasible).status == Status::kInfeasible);
  Problem unbounded{{1, 1}, {{{1, -1}, Sense::kLessEqual, 1}}};
  CHECK(maximize(unbounded).status == Status::kUnbounded);
}

TEST_CASE("simplex agrees with vertex enumeration and satisfies strong duality") {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  int solved = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 2 + static_cast<int>(gen() % 3);
    const int m = 1 + static_cast<int>(gen() % 4);
    Problem p;
    for (int i = 0; i < n; ++i) p.objective.push_back(U(gen));
    for (int i = 0; i < m; ++i) {
      Constraint c;
      for (int k = 0; k < n; ++k) c.coeffs.push_back(U(gen));
      const int kind = static_cast<int>(gen() % 4);
      c.sense = kind == 0 ? Sense::kGreaterEqual : kind == 1 ? Sense::kEqual : Sense::kLessEqual;
      c.rhs = U(gen) * 2.0;
      p.constraints.push_back(c);
    }
    // Box to keep the region bounded.
    Constraint box{std::vector<double>(static_cast<std::size_t>(n), 1.0), Sense::kLessEqual, 3.0};
    p.constraints.push_back(box);

    const Solution s = maximize(p);
    const auto ref = vertex_enumeration(p);
    if (!ref) {
      CHECK(s.status == Status::kInfeasible);
      continue;
    }
    REQUIRE(s.status == Status::kOptimal);
    ++solved;
    CHECK(s.objective == doctest::Approx(*ref).epsilon(1e-7));
    CHECK(feasible(p, s.x, 1e-8));
    // Strong duality and dual feasibility.
    double by = 0.0;
    for (std::size_t i = 0; i < p.constraints.size(); ++i) {
      by += p.constraints[i].rhs * s.duals[i];
      if (p.constraints[i].sense == Sense::kLessEqual) CHECK(s.duals[i] >= -1e-9);
      if (p.constraints[i].sense == Sense::kGreaterEqual) CHECK(s.duals[i] <= 1e-9);
    }
    CHECK(by == doctest::Approx(s.objective).epsilon(1e-7));
    for (int k = 0; k < n; ++k) {
      double aty = 0.0;
      for (std::size_t i = 0; i < p.constraints.size(); ++i)
        aty += p.constraints[i].coeffs[k] * s.duals[i];
      CHECK(aty >= p.objective[k] - 1e-8);
    }
  }
  CHECK(solved > 100);
}

TEST_CASE("simplex handles degenerate problems") {
  // Many constraints active at the optimum (0, 1).
  Problem p{{0, 1},
            {{{1, 1}, Sense::kLessEqual, 1},
             {{-1, 1}, Sense::kLessEqual, 1},
             {{2, 1}, Sense::kLessEqual, 1},
             {{0, 1}, Sense::kLessEqual, 1},
             {{1, 0}, Sense::kGreaterEqual, 0}}};
  const Solution s = maximize(p);
  REQUIRE(s.status == Status::kOptimal);
  CHECK(s.objective == doctest::Approx(1.0));
}
