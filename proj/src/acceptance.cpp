#include "cbwk/acceptance.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "cbwk/amo.hpp"
#include "cbwk/errors.hpp"
#include "cbwk/opsolver.hpp"
#include "cbwk/zestimate.hpp"
#include "json.hpp"

namespace cbwk {

namespace fs = std::filesystem;

namespace {

std::string num(double x, int prec = 4) {
  std::ostringstream o;
  o.precision(prec);
  o << x;
  return o.str();
}

const HorizonSummary* find_horizon(const std::vector<HorizonSummary>& rows, long T) {
  for (const auto& r : rows)
    if (r.T == T) return &r;
  return nullptr;
}

CriterionResult make(int id, const char* name) {
  CriterionResult c;
  c.id = id;
  c.name = name;
  return c;
}

// Scaling over consecutive horizons; shared by the knapsack and concave checks.
struct Scaling {
  bool ok = true;
  std::vector<double> values;
  std::vector<double> ratios;
  std::string problem;
};

Scaling scaling(const std::vector<HorizonSummary>& rows, bool avg_regret) {
  Scaling s;
  if (rows.size() < 2) {
    s.ok = false;
    s.problem = "need at least two horizons";
    return s;
  }
  for (const auto& r : rows) {
    if (r.refused > 0 || r.runs == 0) {
      s.ok = false;
      s.problem += "T=" + std::to_string(r.T) + ": " + std::to_string(r.refused) + "/" +
                   std::to_string(r.refused + r.runs) + " runs refused" +
                   (r.algorithm == "cbwk" ? ", reduced budget B' <= 0; " : "; ");
    }
    s.values.push_back(avg_regret ? r.mean_avg_regret : r.mean_regret);
  }
  if (s.problem.size() >= 2) s.problem.resize(s.problem.size() - 2);
  for (std::size_t i = 1; i < s.values.size(); ++i) s.ratios.push_back(s.values[i] / s.values[i - 1]);
  return s;
}

std::string join(const std::vector<double>& xs) {
  std::string o;
  for (std::size_t i = 0; i < xs.size(); ++i) o += (i ? ", " : "") + num(xs[i]);
  return o;
}

}  // namespace

bool AcceptanceReport::all_passed() const {
  return !criteria.empty() &&
         std::all_of(criteria.begin(), criteria.end(), [](const auto& c) { return c.passed; });
}

std::string AcceptanceReport::to_text() const {
  std::ostringstream o;
  for (const auto& c : criteria) {
    o << (c.passed ? "PASS" : "FAIL") << ' ' << c.id << ' ' << c.name << ": " << c.measured
      << "; need " << c.threshold;
    if (!c.detail.empty()) o << " (" << c.detail << ")";
    o << '\n';
  }
  return o.str();
}

AcceptanceReport check_acceptance(const AcceptanceData& data) {
  AcceptanceReport rep;
  const LiveChecks* live = data.live ? &*data.live : nullptr;

  {
    auto c = make(1, "budget-safety");
    c.threshold = "<= 10 early aborts of " + std::to_string(data.safety_seeds) +
                  " runs and 0 unflagged budget crossings";
    const HorizonSummary* s = find_horizon(data.safety, data.safety_horizon);
    if (!s) {
      c.measured = "no data";
    } else {
      c.measured = std::to_string(s->aborted_early) + " early aborts, " +
                   std::to_string(s->safety_violations) + " unflagged crossings, " +
                   std::to_string(s->refused) + " refused, " + std::to_string(s->runs) + " runs";
      c.passed = s->refused == 0 && s->runs == data.safety_seeds && s->aborted_early <= 10 &&
                 s->safety_violations == 0;
    }
    rep.criteria.push_back(c);
  }
  {
    auto c = make(2, "z-bracket");
    c.threshold = ">= 95% of replications inside the bracket";
    if (!live || live->z_replications == 0) {
      c.measured = "no data";
    } else {
      const double rate = static_cast<double>(live->z_in_bracket) / live->z_replications;
      c.measured = std::to_string(live->z_in_bracket) + "/" + std::to_string(live->z_replications) +
                   " in [" + num(live->bracket_lo) + ", " + num(live->bracket_hi) + "], Z range [" +
                   num(live->z_min) + ", " + num(live->z_max) + "]";
      c.passed = rate >= 0.95;
    }
    rep.criteria.push_back(c);
  }
  {
    auto c = make(3, "op-feasibility");
    c.threshold = "0 violations";
    long solves = 0, bad = 0;
    for (const auto* rows : {&data.cbwk, &data.cbwr, &data.safety})
      for (const auto& r : *rows) {
        solves += r.op_solves;
        bad += r.op_violations;
      }
    c.measured = std::to_string(bad) + " violations in " + std::to_string(solves) + " solves";
    c.passed = solves > 0 && bad == 0;
    if (solves == 0) c.detail = "no solves recorded";
    rep.criteria.push_back(c);
  }
  {
    auto c = make(4, "cd-iteration-bound");
    c.threshold = "update steps <= 4 ln(1/(K mu))/mu at every solve";
    long solves = 0, bad = 0;
    for (const auto* rows : {&data.cbwk, &data.cbwr, &data.safety})
      for (const auto& r : *rows) {
        solves += r.op_solves;
        bad += r.cd_bound_violations;
      }
    c.measured = std::to_string(bad) + " over the bound in " + std::to_string(solves) + " solves";
    c.passed = solves > 0 && bad == 0;
    rep.criteria.push_back(c);
  }
  {
    auto c = make(5, "estimator-unbiasedness");
    c.threshold = "<= 2 component checks beyond 3 standard errors";
    if (!live || live->estimator_checks == 0) {
      c.measured = "no data";
    } else {
      c.measured = std::to_string(live->estimator_exceed) + "/" +
                   std::to_string(live->estimator_checks) + " beyond 3 SE, max " +
                   num(live->estimator_max_sigma, 3) + " SE";
      c.passed = live->estimator_exceed <= 2;
    }
    rep.criteria.push_back(c);
  }
  {
    auto c = make(6, "regret-scaling");
    c.threshold = "regret(4T)/regret(T) <= 2.6 and regret/T strictly decreasing";
    const Scaling s = scaling(data.cbwk, false);
    if (!s.ok) {
      c.measured = s.values.empty() ? "no data" : "mean regret [" + join(s.values) + "]";
      c.detail = s.problem;
    } else {
      std::vector<double> per_round;
      for (const auto& r : data.cbwk) per_round.push_back(r.mean_regret / static_cast<double>(r.T));
      bool decreasing = true;
      for (std::size_t i = 1; i < per_round.size(); ++i)
        decreasing = decreasing && per_round[i] < per_round[i - 1];
      bool ratios_ok = true;
      for (double r : s.ratios) ratios_ok = ratios_ok && r <= 2.6;
      c.measured = "mean regret [" + join(s.values) + "], ratios [" + join(s.ratios) +
                   "], per round [" + join(per_round) + "]";
      c.passed = decreasing && ratios_ok;
    }
    rep.criteria.push_back(c);
  }
  {
    auto c = make(7, "baseline-dominance");
    c.threshold = "CBwK mean reward >= 1.2 x uniform";
    const HorizonSummary* a = find_horizon(data.cbwk, data.baseline_horizon);
    const HorizonSummary* u = find_horizon(data.uniform, data.baseline_horizon);
    if (!a || !u || a->runs == 0 || u->runs == 0) {
      c.measured = "no data";
      if (a && a->refused > 0) c.detail = "CBwK runs refused at this horizon";
    } else {
      const double ratio = a->mean_reward / u->mean_reward;
      c.measured = "CBwK " + num(a->mean_reward, 6) + " vs uniform " + num(u->mean_reward, 6) +
                   ", ratio " + num(ratio);
      c.passed = ratio >= 1.2;
    }
    rep.criteria.push_back(c);
  }
  {
    auto c = make(8, "opt-budget-slope");
    c.threshold = "0 violations of OPT(b+g) <= OPT(b) + OPT(b) g / b + 1e-8";
    if (!live || live->lemma1_checks == 0) {
      c.measured = "no data";
    } else {
      c.measured = std::to_string(live->lemma1_violations) + "/" +
                   std::to_string(live->lemma1_checks) + " violations, worst excess " +
                   num(live->lemma1_worst_excess, 3);
      c.passed = live->lemma1_violations == 0;
    }
    rep.criteria.push_back(c);
  }
  {
    auto c = make(9, "cbwr-scaling");
    c.threshold = "avg-regret(4T)/avg-regret(T) <= 0.65";
    const Scaling s = scaling(data.cbwr, true);
    if (!s.ok) {
      c.measured = s.values.empty() ? "no data" : "mean avg-regret [" + join(s.values) + "]";
      c.detail = s.problem;
    } else {
      bool ok = true;
      for (double r : s.ratios) ok = ok && r <= 0.65;
      c.measured = "mean avg-regret [" + join(s.values) + "], ratios [" + join(s.ratios) + "]";
      c.passed = ok;
    }
    rep.criteria.push_back(c);
  }
  {
    auto c = make(10, "solver-oracle-equivalence");
    c.threshold = "|solver - grid search| <= 1e-3 on every fixture";
    if (!live || live->oracle_fixtures == 0) {
      c.measured = "no data";
    } else {
      c.measured = std::to_string(live->oracle_mismatches) + "/" +
                   std::to_string(live->oracle_fixtures) + " mismatches, worst gap " +
                   num(live->oracle_worst_gap, 3);
      c.passed = live->oracle_mismatches == 0;
    }
    rep.criteria.push_back(c);
  }
  return rep;
}

// ---- options ----

AcceptanceOptions load_acceptance_options(const fs::path& path) {
  using nlohmann::json;
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open acceptance config");
  std::stringstream ss;
  ss << in.rdbuf();
  json j;
  try {
    j = json::parse(ss.str());
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  const fs::path base = path.parent_path();
  AcceptanceOptions o;
  try {
    o.cbwk_config = base / j.at("cbwk").get<std::string>();
    o.uniform_config = base / j.at("uniform").get<std::string>();
    o.cbwr_config = base / j.at("cbwr").get<std::string>();
    o.safety_horizon = j.value("safety_horizon", o.safety_horizon);
    o.safety_seeds = j.value("safety_seeds", o.safety_seeds);
    o.baseline_horizon = j.value("baseline_horizon", o.baseline_horizon);
    o.z_replications = j.value("z_replications", o.z_replications);
    o.estimator_pairs = j.value("estimator_pairs", o.estimator_pairs);
    o.estimator_samples = j.value("estimator_samples", o.estimator_samples);
    o.lemma1_instances = j.value("lemma1_instances", o.lemma1_instances);
    o.lemma1_pairs = j.value("lemma1_pairs", o.lemma1_pairs);
    o.oracle_fixtures = j.value("oracle_fixtures", o.oracle_fixtures);
    o.seed = j.value("seed", o.seed);
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return o;
}

// ---- grid search ----

double grid_search_max(int n, const std::function<double(std::span<const double>)>& objective) {
  require(n >= 1 && n <= 4, "grid_search_max: supports 1 to 4 weights");
  std::vector<double> w(static_cast<std::size_t>(n));
  if (n == 1) {
    w[0] = 1.0;
    return objective(w);
  }
  const int m = n - 1;
  double best = -std::numeric_limits<double>::infinity();
  std::vector<double> best_x(static_cast<std::size_t>(m), 0.0);

  auto eval = [&](const std::vector<double>& x) {
    double s = 0.0;
    for (int i = 0; i < m; ++i) {
      if (x[i] < -1e-15) return;
      s += x[i];
    }
    if (s > 1.0 + 1e-15) return;
    w[0] = std::max(0.0, 1.0 - s);
    for (int i = 0; i < m; ++i) w[i + 1] = std::max(0.0, x[i]);
    const double v = objective(w);
    if (v > best) {
      best = v;
      best_x = x;
    }
  };

  const int N = 40;
  std::vector<int> k(static_cast<std::size_t>(m), 0);
  std::vector<double> x(static_cast<std::size_t>(m));
  while (true) {
    int s = 0;
    for (int v : k) s += v;
    if (s <= N) {
      for (int i = 0; i < m; ++i) x[i] = static_cast<double>(k[i]) / N;
      eval(x);
    }
    int i = 0;
    while (i < m && ++k[i] > N) k[i++] = 0;
    if (i == m) break;
  }

  double step = 1.0 / N;
  const int R = 8;
  for (int level = 0; level < 12; ++level) {
    step /= 4.0;
    const std::vector<double> center = best_x;
    std::vector<int> o(static_cast<std::size_t>(m), -R);
    while (true) {
      for (int i = 0; i < m; ++i) x[i] = center[i] + o[i] * step;
      eval(x);
      int i = 0;
      while (i < m && ++o[i] > R) o[i++] = -R;
      if (i == m) break;
    }
  }
  return best;
}

// ---- live checks ----

namespace {

EnvironmentSpec random_spec(Rng& rng, int X, int K, int d) {
  EnvironmentSpec spec;
  double total = 0.0;
  for (int x = 0; x < X; ++x) {
    spec.context_probs.push_back(0.2 + rng.uniform());
    total += spec.context_probs.back();
  }
  for (double& p : spec.context_probs) p /= total;
  spec.mean_reward.assign(X, std::vector<double>(K, 0.0));
  spec.mean_consumption.assign(X, std::vector<std::vector<double>>(K, std::vector<double>(d, 0.0)));
  for (int x = 0; x < X; ++x)
    for (int a = 1; a < K; ++a) {
      spec.mean_reward[x][a] = rng.uniform();
      for (int j = 0; j < d; ++j) spec.mean_consumption[x][a][j] = rng.uniform();
    }
  spec.noise = NoiseModel::kBernoulli;
  return spec;
}

PolicyClass random_class(Rng& rng, int X, int K, int n) {
  std::vector<std::vector<int>> table(static_cast<std::size_t>(n), std::vector<int>(X, 0));
  for (int p = 1; p < n; ++p)
    for (int x = 0; x < X; ++x) table[p][x] = 1 + static_cast<int>(rng.below(K - 1));
  return PolicyClass(X, K, table, 0);
}

int between(Rng& rng, int lo, int hi) { return lo + static_cast<int>(rng.below(hi - lo + 1)); }

void z_bracket(const AcceptanceOptions& opt, const ExperimentConfig& ref, LiveChecks& out) {
  const ProblemInstance& inst = *ref.instance;
  const int K = inst.env.num_actions();
  const int d = inst.env.dims();
  const long T = opt.safety_horizon;
  const ProblemDims dims{K, d, T, ref.budget_for(T), ref.delta};
  const ExplorationLength T0 =
      exploration_budget_T0(dims, inst.policies.size(), ref.agent.exploration_scale);
  const double OPT = compute_opt(inst.env, inst.policies, dims.B, T).opt;
  out.bracket_lo = std::max(4.0 * OPT / dims.B, 1.0);
  out.bracket_hi = 24.0 * OPT / dims.B + 8.0;
  out.z_min = std::numeric_limits<double>::infinity();
  out.z_max = -out.z_min;
  for (int r = 0; r < opt.z_replications; ++r) {
    SimulatedEnvironment env(inst.env, mix_seed(opt.seed, 100000 + r));
    Rng rng(mix_seed(opt.seed, 200000 + r));
    ExplorationEstimates est(inst.policies.size(), d);
    for (long t = 0; t < T0.T0; ++t) {
      const RoundOutcome round = *env.next();
      const int a = static_cast<int>(rng.below(static_cast<std::size_t>(K)));
      est.add({round.x, a, round.reward[a], round.consumption[a], 1.0 / K}, inst.policies);
    }
    const double Z = estimate_Z(est, dims, inst.policies);
    out.z_min = std::min(out.z_min, Z);
    out.z_max = std::max(out.z_max, Z);
    ++out.z_replications;
    if (Z >= out.bracket_lo && Z <= out.bracket_hi) ++out.z_in_bracket;
  }
}

void estimator_checks(const AcceptanceOptions& opt, LiveChecks& out) {
  Rng gen(mix_seed(opt.seed, 300000));
  const int d = 2;
  for (int i = 0; i < opt.estimator_pairs; ++i) {
    const int X = between(gen, 3, 6), K = between(gen, 2, 4);
    const EnvironmentSpec spec = random_spec(gen, X, K, d);
    const PolicyClass pc = random_class(gen, X, K, 2);
    const ExactMoments exact = exact_moments(spec, pc);

    SimulatedEnvironment env(spec, mix_seed(opt.seed, 310000 + i));
    Rng rng(mix_seed(opt.seed, 320000 + i));
    History h(X, K, d);
    // Per-round importance-weighted terms, kept only for the standard error.
    std::vector<double> s1(d + 1, 0.0), s2(d + 1, 0.0);
    for (long n = 0; n < opt.estimator_samples; ++n) {
      const RoundOutcome round = *env.next();
      const int a = static_cast<int>(rng.below(static_cast<std::size_t>(K)));
      h.append({round.x, a, round.reward[a], round.consumption[a], 1.0 / K});
      const bool hit = pc.action(1, round.x.id) == a;
      for (int c = 0; c <= d; ++c) {
        const double y = hit ? K * (c == 0 ? round.reward[a] : round.consumption[a][c - 1]) : 0.0;
        s1[c] += y;
        s2[c] += y * y;
      }
    }
    const MixedPolicy p = MixedPolicy::point_mass(1);
    std::vector<double> est{estimate_reward(h, p, pc)};
    for (double v : estimate_consumption(h, p, pc)) est.push_back(v);
    std::vector<double> truth{exact.R[1]};
    for (double v : exact.V[1]) truth.push_back(v);
    const double N = static_cast<double>(opt.estimator_samples);
    for (int c = 0; c <= d; ++c) {
      const double mean = s1[c] / N;
      const double var = std::max(0.0, s2[c] / N - mean * mean) * N / (N - 1.0);
      const double se = std::sqrt(var / N);
      const double err = std::abs(est[c] - truth[c]);
      const double sig = se > 0.0 ? err / se : (err > 1e-12 ? 1e9 : 0.0);
      out.estimator_max_sigma = std::max(out.estimator_max_sigma, sig);
      ++out.estimator_checks;
      if (sig > 3.0) ++out.estimator_exceed;
    }
  }
}

void lemma1_checks(const AcceptanceOptions& opt, LiveChecks& out) {
  Rng gen(mix_seed(opt.seed, 400000));
  for (int i = 0; i < opt.lemma1_instances; ++i) {
    const int X = between(gen, 2, 4), K = between(gen, 2, 4), d = between(gen, 1, 3);
    const EnvironmentSpec spec = random_spec(gen, X, K, d);
    const PolicyClass pc = random_class(gen, X, K, between(gen, 3, 8));
    const ExactMoments m = exact_moments(spec, pc);
    const long T = 1000;
    for (int k = 0; k < opt.lemma1_pairs; ++k) {
      const double b = T * (0.01 + 0.99 * gen.uniform());
      const double g = T * gen.uniform();
      const double ob = compute_opt(m, b, T).opt;
      const double obg = compute_opt(m, b + g, T).opt;
      const double excess = obg - (ob + ob / b * g);
      out.lemma1_worst_excess = std::max(out.lemma1_worst_excess, excess);
      ++out.lemma1_checks;
      if (excess > 1e-8) ++out.lemma1_violations;
    }
  }
}

// Per-policy empirical reward and consumption read straight off the tables.
void pure_values(const CompletedTables& tab, const PolicyClass& pc, std::vector<double>& R,
                 std::vector<std::vector<double>>& V) {
  const int d = tab.dims();
  R.assign(pc.size(), 0.0);
  V.assign(pc.size(), std::vector<double>(d, 0.0));
  for (int p = 0; p < pc.size(); ++p)
    for (int x = 0; x < pc.num_contexts(); ++x) {
      const int a = pc.action(p, x);
      R[p] += tab.reward.at(x, a);
      for (int j = 0; j < d; ++j) V[p][j] += tab.consumption[j].at(x, a);
    }
}

History fixture_history(Rng& gen, int X, int K, int d, int n) {
  const EnvironmentSpec spec = random_spec(gen, X, K, d);
  History h(X, K, d);
  for (int i = 0; i < n; ++i) {
    const RoundOutcome r = sample_round(spec, gen);
    std::vector<double> probs(K);
    double s = 0.0;
    for (double& q : probs) s += (q = 0.2 + gen.uniform());
    for (double& q : probs) q /= s;
    const int a = static_cast<int>(gen.categorical(probs));
    h.append({r.x, a, r.reward[a], r.consumption[a], probs[a]});
  }
  return h;
}

void oracle_checks(const AcceptanceOptions& opt, LiveChecks& out) {
  Rng gen(mix_seed(opt.seed, 500000));
  for (int i = 0; i < opt.oracle_fixtures; ++i) {
    const int X = between(gen, 2, 4), K = between(gen, 2, 3), d = between(gen, 1, 2);
    const int n = 2 + i % 3;
    const PolicyClass pc = random_class(gen, X, K, n);
    const CompletedTables tab = completed_tables(fixture_history(gen, X, K, d, 40 + 10 * i));
    std::vector<double> R;
    std::vector<std::vector<double>> V;
    pure_values(tab, pc, R, V);
    auto outcome = [&](std::span<const double> w) {
      std::vector<double> v(d, 0.0);
      for (int p = 0; p < n; ++p)
        for (int j = 0; j < d; ++j) v[j] += w[p] * V[p][j];
      return v;
    };

    double solver = 0.0, grid = 0.0;
    if (i % 2 == 0) {
      RegretParams params;
      params.T = 1000;
      params.Z = 1.0 + 4.0 * gen.uniform();
      params.B_prime = params.T * (0.05 + 0.5 * gen.uniform());
      const double b = params.B_prime / static_cast<double>(params.T);
      solver = solve_budgeted_argmax(tab, params, pc).value;
      grid = grid_search_max(n, [&](std::span<const double> w) {
        double r = 0.0;
        for (int p = 0; p < n; ++p) r += w[p] * R[p];
        double over = 0.0;
        for (double v : outcome(w)) over = std::max(over, v - b);
        return r - params.Z * over;
      });
    } else {
      std::vector<double> target(d);
      for (double& t : target) t = 1.5 * gen.uniform();
      const ConcaveObjective obj =
          i % 4 == 1 ? neg_distance_objective(target) : linear_objective(target);
      solver = concave_empirical_optimum(tab, obj, pc).value;
      grid = grid_search_max(n, [&](std::span<const double> w) {
        const std::vector<double> v = outcome(w);
        if (i % 4 == 1) {
          double s = 0.0;
          for (int j = 0; j < d; ++j) s += (v[j] - target[j]) * (v[j] - target[j]);
          return -std::sqrt(s);
        }
        double s = 0.0;
        for (int j = 0; j < d; ++j) s += target[j] * v[j];
        return s;
      });
    }
    const double gap = std::abs(solver - grid);
    out.oracle_worst_gap = std::max(out.oracle_worst_gap, gap);
    ++out.oracle_fixtures;
    if (gap > 1e-3) ++out.oracle_mismatches;
  }
}

}  // namespace

LiveChecks run_live_checks(const AcceptanceOptions& options, const ExperimentConfig& reference) {
  LiveChecks out;
  z_bracket(options, reference, out);
  estimator_checks(options, out);
  lemma1_checks(options, out);
  oracle_checks(options, out);
  return out;
}

AcceptanceData collect_acceptance_data(const AcceptanceOptions& options) {
  const ExperimentConfig cbwk = load_experiment_config(options.cbwk_config);
  const ExperimentConfig uniform = load_experiment_config(options.uniform_config);
  const ExperimentConfig cbwr = load_experiment_config(options.cbwr_config);
  if (cbwk.algorithm != "cbwk" || uniform.algorithm != "uniform" || cbwr.algorithm != "cbwr")
    throw ConfigError("acceptance: configs must be for cbwk, uniform and cbwr in that order");

  auto run = [&](const ExperimentConfig& c, const std::string& sub) {
    RunOptions ro;
    ro.jobs = options.jobs;
    ro.write_files = options.out_dir.has_value();
    if (options.out_dir) ro.out_dir = *options.out_dir / sub;
    return run_experiment(c, ro).summary;
  };

  AcceptanceData data;
  data.cbwk = run(cbwk, "cbwk");
  data.uniform = run(uniform, "uniform");
  data.cbwr = run(cbwr, "cbwr");

  ExperimentConfig safety = cbwk;
  safety.name = cbwk.name + "-safety";
  safety.horizons = {options.safety_horizon};
  safety.seeds.clear();
  for (int s = 1; s <= options.safety_seeds; ++s) safety.seeds.push_back(static_cast<std::uint64_t>(s));
  data.safety = run(safety, "safety");
  data.safety_horizon = options.safety_horizon;
  data.safety_seeds = options.safety_seeds;
  data.baseline_horizon = options.baseline_horizon;
  data.live = run_live_checks(options, cbwk);
  return data;
}

}  // namespace cbwk
