#pragma once

#include <vector>

namespace cbwk::lp {

// Dense two-phase simplex for small linear programs:
//
//   maximize  c . x   subject to  A_i . x (<=|>=|=) b_i,  x >= 0.
//
// Sized for the oracle problems in this library (tens of rows and columns).
// Duals follow the usual convention y_i = d(objective)/d(b_i): y_i >= 0 on <=
// rows, y_i <= 0 on >= rows, free on equality rows.

enum class Sense { kLessEqual, kGreaterEqual, kEqual };

struct Constraint {
  std::vector<double> coeffs;
  Sense sense = Sense::kLessEqual;
  double rhs = 0.0;
};

struct Problem {
  std::vector<double> objective;
  std::vector<Constraint> constraints;
};

enum class Status { kOptimal, kInfeasible, kUnbounded, kIterationLimit };

struct Solution {
  Status status = Status::kInfeasible;
  std::vector<double> x;
  double objective = 0.0;
  std::vector<double> duals;
  int pivots = 0;
};

Solution maximize(const Problem& problem);

const char* to_string(Status s);

}  // namespace cbwk::lp
