#include "cbwk/lp.hpp"

#include <cmath>
#include <limits>

#include "cbwk/errors.hpp"

namespace cbwk::lp {
namespace {

constexpr double kPivotEps = 1e-11;
constexpr double kCostEps = 1e-10;
constexpr double kFeasEps = 1e-8;
// Consecutive degenerate pivots before switching to Bland's rule.
constexpr int kDegenerateSwitch = 30;

class Tableau {
 public:
  Tableau(int rows, int cols)
      : rows_(rows), cols_(cols), a_(static_cast<std::size_t>(rows) * (cols + 1), 0.0) {}

  double& at(int r, int c) { return a_[static_cast<std::size_t>(r) * (cols_ + 1) + c]; }
  double at(int r, int c) const { return a_[static_cast<std::size_t>(r) * (cols_ + 1) + c]; }
  double& rhs(int r) { return at(r, cols_); }
  double rhs(int r) const { return at(r, cols_); }
  int rows() const { return rows_; }
  int cols() const { return cols_; }

  void pivot(int pr, int pc, std::vector<double>& reduced, double& objective) {
    const double inv = 1.0 / at(pr, pc);
    for (int c = 0; c <= cols_; ++c) at(pr, c) *= inv;
    at(pr, pc) = 1.0;
    for (int r = 0; r < rows_; ++r) {
      if (r == pr) continue;
      const double f = at(r, pc);
      if (f == 0.0) continue;
      for (int c = 0; c <= cols_; ++c) at(r, c) -= f * at(pr, c);
      at(r, pc) = 0.0;
    }
    const double f = reduced[static_cast<std::size_t>(pc)];
    if (f != 0.0) {
      for (int c = 0; c < cols_; ++c) reduced[static_cast<std::size_t>(c)] -= f * at(pr, c);
      objective += f * rhs(pr);
      reduced[static_cast<std::size_t>(pc)] = 0.0;
    }
  }

 private:
  int rows_;
  int cols_;
  std::vector<double> a_;
};

struct Simplex {
  Tableau tab;
  std::vector<int> basis;
  std::vector<bool> allowed;
  int pivots = 0;
  int limit = 0;

  // Reduced costs and objective value for cost vector `cost`.
  void price(const std::vector<double>& cost, std::vector<double>& reduced, double& obj) const {
    reduced = cost;
    obj = 0.0;
    for (int r = 0; r < tab.rows(); ++r) {
      const double cb = cost[static_cast<std::size_t>(basis[static_cast<std::size_t>(r)])];
      if (cb == 0.0) continue;
      for (int c = 0; c < tab.cols(); ++c) reduced[static_cast<std::size_t>(c)] -= cb * tab.at(r, c);
      obj += cb * tab.rhs(r);
    }
  }

  Status run(const std::vector<double>& cost) {
    std::vector<double> reduced;
    double obj = 0.0;
    price(cost, reduced, obj);
    int degenerate = 0;
    while (true) {
      if (pivots >= limit) return Status::kIterationLimit;
      const bool bland = degenerate >= kDegenerateSwitch;
      int enter = -1;
      double best = kCostEps;
      for (int c = 0; c < tab.cols(); ++c) {
        if (!allowed[static_cast<std::size_t>(c)]) continue;
        const double rc = reduced[static_cast<std::size_t>(c)];
        if (rc > best) {
          enter = c;
          if (bland) break;
          best = rc;
        }
      }
      if (enter < 0) return Status::kOptimal;
      int leave = -1;
      double ratio = std::numeric_limits<double>::infinity();
      for (int r = 0; r < tab.rows(); ++r) {
        const double coef = tab.at(r, enter);
        if (coef <= kPivotEps) continue;
        const double q = tab.rhs(r) / coef;
        if (q < ratio - 1e-14 ||
            (q <= ratio + 1e-14 && leave >= 0 &&
             basis[static_cast<std::size_t>(r)] < basis[static_cast<std::size_t>(leave)])) {
          ratio = std::min(ratio, q);
          leave = r;
        }
      }
      if (leave < 0) return Status::kUnbounded;
      degenerate = (ratio <= 1e-14) ? degenerate + 1 : 0;
      tab.pivot(leave, enter, reduced, obj);
      for (int r = 0; r < tab.rows(); ++r)
        if (tab.rhs(r) < 0.0 && tab.rhs(r) > -1e-13) tab.rhs(r) = 0.0;
      basis[static_cast<std::size_t>(leave)] = enter;
      ++pivots;
    }
  }
};

}  // namespace

const char* to_string(Status s) {
  switch (s) {
    case Status::kOptimal:
      return "optimal";
    case Status::kInfeasible:
      return "infeasible";
    case Status::kUnbounded:
      return "unbounded";
    case Status::kIterationLimit:
      return "iteration-limit";
  }
  return "unknown";
}

Solution maximize(const Problem& problem) {
  const int n = static_cast<int>(problem.objective.size());
  const int m = static_cast<int>(problem.constraints.size());
  require(n >= 1, "lp::maximize: no variables");

  std::vector<bool> flipped(static_cast<std::size_t>(m), false);
  std::vector<Sense> sense(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    const Constraint& row = problem.constraints[static_cast<std::size_t>(i)];
    require(static_cast<int>(row.coeffs.size()) == n, "lp::maximize: constraint width mismatch");
    Sense s = row.sense;
    if (row.rhs < 0.0) {
      flipped[static_cast<std::size_t>(i)] = true;
      if (s == Sense::kLessEqual)
        s = Sense::kGreaterEqual;
      else if (s == Sense::kGreaterEqual)
        s = Sense::kLessEqual;
    }
    sense[static_cast<std::size_t>(i)] = s;
  }

  // Column layout: structural, then one slack/surplus per inequality, then one
  // artificial per >= or = row.
  std::vector<int> slack_col(static_cast<std::size_t>(m), -1);
  std::vector<int> art_col(static_cast<std::size_t>(m), -1);
  int cols = n;
  for (int i = 0; i < m; ++i)
    if (sense[static_cast<std::size_t>(i)] != Sense::kEqual) slack_col[static_cast<std::size_t>(i)] = cols++;
  for (int i = 0; i < m; ++i)
    if (sense[static_cast<std::size_t>(i)] != Sense::kLessEqual) art_col[static_cast<std::size_t>(i)] = cols++;

  Simplex sx{Tableau(m, cols), std::vector<int>(static_cast<std::size_t>(m)),
             std::vector<bool>(static_cast<std::size_t>(cols), true), 0, 200 * (m + cols) + 1000};
  std::vector<int> id_col(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    const Constraint& row = problem.constraints[static_cast<std::size_t>(i)];
    const double sign = flipped[static_cast<std::size_t>(i)] ? -1.0 : 1.0;
    for (int j = 0; j < n; ++j) sx.tab.at(i, j) = sign * row.coeffs[static_cast<std::size_t>(j)];
    sx.tab.rhs(i) = sign * row.rhs;
    const Sense s = sense[static_cast<std::size_t>(i)];
    if (s == Sense::kLessEqual) sx.tab.at(i, slack_col[static_cast<std::size_t>(i)]) = 1.0;
    if (s == Sense::kGreaterEqual) sx.tab.at(i, slack_col[static_cast<std::size_t>(i)]) = -1.0;
    if (s != Sense::kLessEqual) sx.tab.at(i, art_col[static_cast<std::size_t>(i)]) = 1.0;
    id_col[static_cast<std::size_t>(i)] =
        (s == Sense::kLessEqual) ? slack_col[static_cast<std::size_t>(i)] : art_col[static_cast<std::size_t>(i)];
    sx.basis[static_cast<std::size_t>(i)] = id_col[static_cast<std::size_t>(i)];
  }

  Solution sol;
  bool has_artificial = false;
  std::vector<double> phase1(static_cast<std::size_t>(cols), 0.0);
  for (int i = 0; i < m; ++i)
    if (art_col[static_cast<std::size_t>(i)] >= 0) {
      phase1[static_cast<std::size_t>(art_col[static_cast<std::size_t>(i)])] = -1.0;
      has_artificial = true;
    }

  if (has_artificial) {
    const Status st = sx.run(phase1);
    if (st == Status::kIterationLimit) {
      sol.status = st;
      sol.pivots = sx.pivots;
      return sol;
    }
    double infeas = 0.0;
    for (int r = 0; r < m; ++r)
      if (phase1[static_cast<std::size_t>(sx.basis[static_cast<std::size_t>(r)])] < 0.0)
        infeas += sx.tab.rhs(r);
    if (infeas > kFeasEps) {
      sol.status = Status::kInfeasible;
      sol.pivots = sx.pivots;
      return sol;
    }
    // Pivot zero-level artificials out of the basis where possible; rows where
    // that fails are redundant and keep a harmless zero artificial.
    std::vector<double> dummy(static_cast<std::size_t>(cols), 0.0);
    double dummy_obj = 0.0;
    for (int r = 0; r < m; ++r) {
      if (phase1[static_cast<std::size_t>(sx.basis[static_cast<std::size_t>(r)])] == 0.0) continue;
      for (int c = 0; c < cols; ++c) {
        if (phase1[static_cast<std::size_t>(c)] < 0.0) continue;
        if (std::abs(sx.tab.at(r, c)) > 1e-9) {
          sx.tab.pivot(r, c, dummy, dummy_obj);
          sx.basis[static_cast<std::size_t>(r)] = c;
          break;
        }
      }
    }
    for (int c = 0; c < cols; ++c)
      if (phase1[static_cast<std::size_t>(c)] < 0.0) sx.allowed[static_cast<std::size_t>(c)] = false;
  }

  std::vector<double> cost(static_cast<std::size_t>(cols), 0.0);
  for (int j = 0; j < n; ++j) cost[static_cast<std::size_t>(j)] = problem.objective[static_cast<std::size_t>(j)];
  const Status st = sx.run(cost);
  sol.status = st;
  sol.pivots = sx.pivots;
  if (st != Status::kOptimal) return sol;

  sol.x.assign(static_cast<std::size_t>(n), 0.0);
  for (int r = 0; r < m; ++r) {
    const int b = sx.basis[static_cast<std::size_t>(r)];
    if (b < n) sol.x[static_cast<std::size_t>(b)] = std::max(0.0, sx.tab.rhs(r));
  }
  sol.objective = 0.0;
  for (int j = 0; j < n; ++j) sol.objective += problem.objective[static_cast<std::size_t>(j)] * sol.x[static_cast<std::size_t>(j)];
  sol.duals.assign(static_cast<std::size_t>(m), 0.0);
  for (int i = 0; i < m; ++i) {
    double y = 0.0;
    for (int r = 0; r < m; ++r)
      y += cost[static_cast<std::size_t>(sx.basis[static_cast<std::size_t>(r)])] * sx.tab.at(r, id_col[static_cast<std::size_t>(i)]);
    sol.duals[static_cast<std::size_t>(i)] = flipped[static_cast<std::size_t>(i)] ? -y : y;
  }
  return sol;
}

}  // namespace cbwk::lp
