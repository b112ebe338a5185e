#include "cbwk/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

#include "cbwk/errors.hpp"
#include "json.hpp"

namespace cbwk {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view s, const std::string& where) {
  if (s == "nan") return std::nan("");
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double x = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), x);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw ConfigError(where + ": not a number: '" + std::string(s) + "'");
  return x;
}

long parse_long(std::string_view s, const std::string& where) {
  long x = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), x);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw ConfigError(where + ": not an integer: '" + std::string(s) + "'");
  return x;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? s.npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

// ---- config ----

struct Located {
  const std::string& text;
  const std::string& source;

  std::string at_offset(std::size_t offset) const {
    long line = 1, col = 1;
    for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    return source + ":" + std::to_string(line) + ":" + std::to_string(col);
  }
  std::string at_key(const std::string& key) const {
    const std::size_t pos = text.find("\"" + key + "\"");
    return at_offset(pos == std::string::npos ? 0 : pos);
  }
  [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
    throw ConfigError(at_key(key) + ": " + msg);
  }
};

const std::set<std::string> kConfigKeys = {
    "name",      "instance",     "algorithm",  "horizons",    "budget",
    "budget_fraction", "delta",  "seeds",      "c",           "exploration_scale",
    "warm_start", "include_exploration_in_history", "solver_tol", "op_halt_tol",
    "verify_op", "objective",    "output_dir"};

template <typename T>
T get_as(const json& j, const std::string& key, const Located& loc, const char* what) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    loc.fail(key, std::string("'") + key + "' must be " + what);
  }
}

ObjectiveSpec parse_objective(const json& o, const Located& loc) {
  if (!o.is_object()) loc.fail("objective", "'objective' must be an object");
  ObjectiveSpec spec;
  spec.type = get_as<std::string>(o, "type", loc, "a string");
  if (spec.type == "neg_distance") {
    spec.params = get_as<std::vector<double>>(o, "target", loc, "an array of numbers");
  } else if (spec.type == "linear") {
    spec.params = get_as<std::vector<double>>(o, "weights", loc, "an array of numbers");
  } else {
    loc.fail("type", "unknown objective type '" + spec.type + "' (neg_distance, linear)");
  }
  if (spec.params.empty()) loc.fail("objective", "objective needs at least one coordinate");
  return spec;
}

}  // namespace

ConcaveObjective ObjectiveSpec::build() const {
  if (type == "neg_distance") return neg_distance_objective(params);
  if (type == "linear") return linear_objective(params);
  throw ConfigError("unknown objective type '" + type + "'");
}

double ExperimentConfig::budget_for(long T) const {
  if (budget) return *budget;
  return *budget_fraction * static_cast<double>(T);
}

ExperimentConfig parse_experiment_config(const std::string& text, const fs::path& base_dir,
                                         const std::string& source_name) {
  const Located loc{text, source_name};
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t byte = e.byte > 0 ? e.byte - 1 : 0;
    std::string msg = e.what();
    if (auto p = msg.find("syntax error"); p != std::string::npos) msg = msg.substr(p);
    throw ConfigError(loc.at_offset(byte) + ": " + msg);
  }
  if (!j.is_object()) throw ConfigError(source_name + ":1:1: config must be a JSON object");
  for (const auto& [key, _] : j.items())
    if (!kConfigKeys.count(key)) loc.fail(key, "unknown key '" + key + "'");

  ExperimentConfig c;
  c.name = j.value("name", std::string("experiment"));

  if (!j.contains("instance")) throw ConfigError(source_name + ":1:1: missing key 'instance'");
  const json& inst = j.at("instance");
  if (inst.is_string()) {
    c.instance_path = base_dir / inst.get<std::string>();
    if (!fs::exists(c.instance_path))
      loc.fail("instance", "instance file not found: " + c.instance_path.string());
    try {
      c.instance = std::make_shared<const ProblemInstance>(load_instance(c.instance_path.string()));
    } catch (const ConfigError& e) {
      loc.fail("instance", e.what());
    }
  } else if (inst.is_object()) {
    try {
      c.instance = std::make_shared<const ProblemInstance>(instance_from_json(inst.dump()));
    } catch (const ConfigError& e) {
      loc.fail("instance", e.what());
    }
  } else {
    loc.fail("instance", "'instance' must be a path or an inline object");
  }

  if (!j.contains("algorithm")) throw ConfigError(source_name + ":1:1: missing key 'algorithm'");
  c.algorithm = get_as<std::string>(j, "algorithm", loc, "a string");
  if (c.algorithm != "cbwk" && c.algorithm != "cbwr" && c.algorithm != "uniform" &&
      c.algorithm != "static-lp")
    loc.fail("algorithm", "unknown algorithm '" + c.algorithm + "' (cbwk, cbwr, uniform, static-lp)");

  if (!j.contains("horizons")) throw ConfigError(source_name + ":1:1: missing key 'horizons'");
  c.horizons = get_as<std::vector<long>>(j, "horizons", loc, "an array of integers");
  if (c.horizons.empty()) loc.fail("horizons", "'horizons' is empty");
  for (std::size_t i = 0; i < c.horizons.size(); ++i) {
    if (c.horizons[i] < 1) loc.fail("horizons", "horizons must be positive");
    if (i > 0 && c.horizons[i] <= c.horizons[i - 1])
      loc.fail("horizons", "horizons must be sorted strictly ascending");
  }

  const bool has_b = j.contains("budget"), has_f = j.contains("budget_fraction");
  if (c.algorithm != "cbwr") {
    if (has_b == has_f) {
      if (has_b) loc.fail("budget", "give either 'budget' or 'budget_fraction', not both");
      throw ConfigError(source_name + ":1:1: missing key 'budget' or 'budget_fraction'");
    }
    if (has_b) {
      c.budget = get_as<double>(j, "budget", loc, "a number");
      if (!(*c.budget > 0.0)) loc.fail("budget", "'budget' must be positive");
    } else {
      c.budget_fraction = get_as<double>(j, "budget_fraction", loc, "a number");
      if (!(*c.budget_fraction > 0.0)) loc.fail("budget_fraction", "'budget_fraction' must be positive");
    }
  } else {
    if (has_b) loc.fail("budget", "cbwr runs have no budget");
    if (has_f) loc.fail("budget_fraction", "cbwr runs have no budget");
  }

  if (j.contains("delta")) {
    c.delta = get_as<double>(j, "delta", loc, "a number");
    if (!(c.delta > 0.0 && c.delta < 1.0)) loc.fail("delta", "'delta' must lie in (0, 1)");
  }

  if (!j.contains("seeds")) throw ConfigError(source_name + ":1:1: missing key 'seeds'");
  const json& seeds = j.at("seeds");
  if (seeds.is_array()) {
    c.seeds = get_as<std::vector<std::uint64_t>>(j, "seeds", loc, "an array of non-negative integers");
  } else if (seeds.is_object()) {
    const auto first = get_as<std::uint64_t>(seeds, "first", loc, "a non-negative integer");
    const auto count = get_as<std::uint64_t>(seeds, "count", loc, "a non-negative integer");
    for (std::uint64_t i = 0; i < count; ++i) c.seeds.push_back(first + i);
  } else {
    loc.fail("seeds", "'seeds' must be an array or {\"first\": n, \"count\": k}");
  }
  if (c.seeds.empty()) loc.fail("seeds", "'seeds' is empty");
  if (std::set<std::uint64_t>(c.seeds.begin(), c.seeds.end()).size() != c.seeds.size())
    loc.fail("seeds", "duplicate seeds");

  if (j.contains("c")) {
    c.agent.c = get_as<double>(j, "c", loc, "a number");
    if (!(c.agent.c >= 0.0)) loc.fail("c", "'c' must be non-negative");
  }
  if (j.contains("exploration_scale")) {
    c.agent.exploration_scale = get_as<double>(j, "exploration_scale", loc, "a number");
    if (!(c.agent.exploration_scale >= 0.0))
      loc.fail("exploration_scale", "'exploration_scale' must be non-negative");
  }
  if (j.contains("warm_start")) c.agent.warm_start = get_as<bool>(j, "warm_start", loc, "a boolean");
  if (j.contains("include_exploration_in_history"))
    c.agent.include_exploration_in_history =
        get_as<bool>(j, "include_exploration_in_history", loc, "a boolean");
  if (j.contains("verify_op")) c.agent.verify_op = get_as<bool>(j, "verify_op", loc, "a boolean");
  if (j.contains("solver_tol")) {
    c.agent.solver_tol = get_as<double>(j, "solver_tol", loc, "a number");
    if (!(c.agent.solver_tol > 0.0)) loc.fail("solver_tol", "'solver_tol' must be positive");
  }
  if (j.contains("op_halt_tol")) {
    c.agent.op.halt_tol = get_as<double>(j, "op_halt_tol", loc, "a number");
    if (!(c.agent.op.halt_tol > 0.0)) loc.fail("op_halt_tol", "'op_halt_tol' must be positive");
  }

  if (j.contains("objective")) {
    if (c.algorithm != "cbwr") loc.fail("objective", "'objective' only applies to cbwr");
    c.objective = parse_objective(j.at("objective"), loc);
    if (static_cast<int>(c.objective->params.size()) != c.instance->env.dims())
      loc.fail("objective", "objective dimension differs from the instance's resource count");
  } else if (c.algorithm == "cbwr") {
    throw ConfigError(source_name + ":1:1: cbwr needs an 'objective'");
  }

  c.output_dir = j.contains("output_dir")
                     ? fs::path(get_as<std::string>(j, "output_dir", loc, "a string"))
                     : fs::path("out") / c.name;
  return c;
}

ExperimentConfig load_experiment_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open config");
  std::stringstream ss;
  ss << in.rdbuf();
  ExperimentConfig c = parse_experiment_config(ss.str(), path.parent_path(), path.string());
  c.source = path;
  return c;
}

// ---- runs ----

Benchmark compute_benchmark(const ExperimentConfig& config, long T) {
  Benchmark b;
  b.T = T;
  const ProblemInstance& inst = *config.instance;
  if (config.algorithm == "cbwr") {
    const OptResult r = compute_concave_opt(inst.env, inst.policies, config.objective->build());
    b.value = r.opt;
    b.p_star = r.p_star;
  } else {
    b.B = config.budget_for(T);
    const OptResult r = compute_opt(inst.env, inst.policies, b.B, T);
    b.value = r.opt;
    b.p_star = r.p_star;
  }
  return b;
}

RunResult run_single(const ExperimentConfig& config, const Benchmark& bench, std::uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();
  const ProblemInstance& inst = *config.instance;
  const int K = inst.env.num_actions();
  const int d = inst.env.dims();
  SimulatedEnvironment env(inst.env, mix_seed(seed, 1));
  Rng rng(mix_seed(seed, 2));

  RunResult out;
  try {
    if (config.algorithm == "cbwk") {
      const ProblemDims dims{K, d, bench.T, bench.B, config.delta};
      out.trace = run_cbwk(env, dims, inst.policies, config.agent, rng);
    } else if (config.algorithm == "cbwr") {
      out.trace = run_cbwr(env, K, d, bench.T, config.delta, config.objective->build(),
                           inst.policies, config.agent, rng);
    } else if (config.algorithm == "uniform") {
      out.trace = baseline_uniform(env, K, d, bench.T, bench.B, rng);
    } else {
      out.trace = baseline_static_lp(env, inst.policies, bench.p_star, d, bench.T, bench.B, rng);
    }
  } catch (const ConfigError& e) {
    out.trace = RunTrace{};
    out.trace.terminal.refused = true;
    out.trace.terminal.refusal = e.what();
  }
  RunTerminal& term = out.trace.terminal;
  term.algorithm = config.algorithm;
  term.seed = seed;
  term.T = bench.T;
  term.B = bench.B;
  term.opt = bench.value;
  if (term.refused) {
    term.regret = term.avg_regret = std::nan("");
  } else if (config.algorithm == "cbwr") {
    term.avg_regret = bench.value - term.objective;
    term.regret = term.avg_regret;
  } else {
    term.regret = bench.value - term.total_reward;
  }
  out.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

int budget_safety_violations(const RunTrace& trace) {
  const RunTerminal& term = trace.terminal;
  if (term.algorithm == "cbwr" || !(term.B > 0.0) || trace.rows.empty()) return 0;
  int n = 0;
  for (std::size_t i = 0; i < trace.rows.size(); ++i) {
    const auto& cv = trace.rows[i].cum_v;
    const bool over = std::any_of(cv.begin(), cv.end(), [&](double c) { return c >= term.B; });
    const bool last = i + 1 == trace.rows.size();
    if (over && !(last && term.aborted)) ++n;
    if (last && term.aborted && !over) ++n;
  }
  return n;
}

// ---- summaries ----

namespace {

struct Moments {
  double mean = std::nan("");
  double sd = std::nan("");
};

Moments moments(const std::vector<double>& xs) {
  Moments m;
  if (xs.empty()) return m;
  double s = 0.0;
  for (double x : xs) s += x;
  m.mean = s / static_cast<double>(xs.size());
  double q = 0.0;
  for (double x : xs) q += (x - m.mean) * (x - m.mean);
  m.sd = xs.size() > 1 ? std::sqrt(q / static_cast<double>(xs.size() - 1)) : 0.0;
  return m;
}

}  // namespace

std::vector<HorizonSummary> summarize_traces(std::vector<const RunTrace*> traces) {
  using Key = std::tuple<std::string, long, double>;
  std::map<Key, std::vector<const RunTrace*>> groups;
  for (const RunTrace* t : traces)
    groups[{t->terminal.algorithm, t->terminal.T, t->terminal.B}].push_back(t);

  std::vector<HorizonSummary> out;
  for (auto& [key, group] : groups) {
    std::stable_sort(group.begin(), group.end(), [](const RunTrace* a, const RunTrace* b) {
      return a->terminal.seed < b->terminal.seed;
    });
    HorizonSummary s;
    std::tie(s.algorithm, s.T, s.B) = key;
    s.opt = group.front()->terminal.opt;
    std::vector<double> reward, regret, avg_regret, calls, Z;
    for (const RunTrace* t : group) {
      const RunTerminal& term = t->terminal;
      if (term.refused) {
        ++s.refused;
        continue;
      }
      ++s.runs;
      if (term.aborted && term.rounds < term.T) ++s.aborted_early;
      if (term.truncated) ++s.truncated;
      if (term.out_of_regime) ++s.out_of_regime;
      reward.push_back(term.total_reward);
      regret.push_back(term.regret);
      if (term.algorithm == "cbwr") avg_regret.push_back(term.avg_regret);
      calls.push_back(static_cast<double>(term.oracle_calls));
      Z.push_back(term.Z);
      s.op_solves += static_cast<long>(t->solves.size());
      s.op_violations += t->op_violations();
      s.cd_bound_violations += t->cd_bound_violations();
      s.safety_violations += budget_safety_violations(*t);
    }
    s.abort_rate = s.runs > 0 ? static_cast<double>(s.aborted_early) / s.runs : std::nan("");
    const Moments mr = moments(reward), mg = moments(regret), ma = moments(avg_regret),
                  mc = moments(calls), mz = moments(Z);
    s.mean_reward = mr.mean;
    s.sd_reward = mr.sd;
    s.mean_regret = mg.mean;
    s.sd_regret = mg.sd;
    s.mean_regret_per_round = mg.mean / static_cast<double>(s.T);
    s.mean_avg_regret = ma.mean;
    s.sd_avg_regret = ma.sd;
    s.mean_oracle_calls = mc.mean;
    s.sd_oracle_calls = mc.sd;
    s.mean_Z = mz.mean;
    out.push_back(std::move(s));
  }
  return out;
}

// ---- trace files ----

std::string trace_file_name(const RunTerminal& term) {
  return "trace_" + term.algorithm + "_T" + std::to_string(term.T) + "_s" +
         std::to_string(term.seed) + ".csv";
}

namespace {

int trace_dims(const RunTrace& trace) {
  if (!trace.rows.empty()) return static_cast<int>(trace.rows.front().v.size());
  return static_cast<int>(trace.terminal.avg_outcome.size());
}

void check_trace(const RunTrace& trace, int d) {
  double cum_r = 0.0;
  std::vector<double> cum_v(static_cast<std::size_t>(d), 0.0);
  const auto close = [](double a, double b) {
    return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(b));
  };
  for (const TraceRow& row : trace.rows) {
    if (static_cast<int>(row.v.size()) != d || static_cast<int>(row.cum_v.size()) != d)
      throw ContractError("trace row t=" + std::to_string(row.t) + " has the wrong dimension");
    cum_r += row.reward;
    if (!close(row.cum_reward, cum_r))
      throw ContractError("trace row t=" + std::to_string(row.t) + ": cumulative reward is not a prefix sum");
    for (int j = 0; j < d; ++j) {
      cum_v[j] += row.v[j];
      if (!close(row.cum_v[j], cum_v[j]))
        throw ContractError("trace row t=" + std::to_string(row.t) +
                            ": cumulative consumption is not a prefix sum");
    }
  }
  const RunTerminal& term = trace.terminal;
  if (term.refused) return;
  if (!close(term.total_reward, cum_r)) throw ContractError("trace: total reward differs from rows");
  if (term.algorithm != "cbwr" && std::abs(term.regret - (term.opt - cum_r)) > 1e-9)
    throw ContractError("trace: regret differs from OPT minus the rows' reward");
}

}  // namespace

void write_trace_csv(const fs::path& path, const RunTrace& trace) {
  const int d = trace_dims(trace);
  check_trace(trace, d);
  const RunTerminal& term = trace.terminal;
  std::ostringstream o;
  o << kTraceSchema << '\n';
  o << "# run algorithm=" << term.algorithm << " seed=" << term.seed << " T=" << term.T
    << " B=" << fmt(term.B) << " d=" << d << '\n';
  o << "t,epoch,context,action,prob,reward";
  for (int j = 1; j <= d; ++j) o << ",v" << j;
  o << ",cum_reward";
  for (int j = 1; j <= d; ++j) o << ",cum_v" << j;
  o << ",oracle_calls\n";
  for (const TraceRow& r : trace.rows) {
    o << r.t << ',' << r.epoch << ',' << r.context << ',' << r.action << ',' << fmt(r.prob) << ','
      << fmt(r.reward);
    for (double v : r.v) o << ',' << fmt(v);
    o << ',' << fmt(r.cum_reward);
    for (double v : r.cum_v) o << ',' << fmt(v);
    o << ',' << r.oracle_calls << '\n';
  }
  for (const OPRecord& s : trace.solves) {
    o << "# solve t=" << s.t << " epoch=" << s.epoch << " mu=" << fmt(s.mu)
      << " iterations=" << s.iterations << " scale_steps=" << s.scale_steps
      << " update_steps=" << s.update_steps << " update_bound=" << s.update_bound
      << " oracle_calls=" << s.oracle_calls << " first_lhs=" << fmt(s.first_lhs)
      << " second_excess=" << fmt(s.second_excess) << " feasible=" << (s.feasible ? 1 : 0)
      << " regret_of_p_t=" << fmt(s.regret_of_p_t) << " q_mass=" << fmt(s.q_mass) << '\n';
  }
  o << "# terminal aborted=" << term.aborted << " truncated=" << term.truncated
    << " refused=" << term.refused << " rounds=" << term.rounds
    << " total_reward=" << fmt(term.total_reward) << " opt=" << fmt(term.opt)
    << " regret=" << fmt(term.regret) << " Z=" << fmt(term.Z) << " B_prime=" << fmt(term.B_prime)
    << " T0=" << term.T0 << " out_of_regime=" << term.out_of_regime
    << " oracle_calls=" << term.oracle_calls << " avg_outcome=";
  for (std::size_t j = 0; j < term.avg_outcome.size(); ++j)
    o << (j ? ";" : "") << fmt(term.avg_outcome[j]);
  o << " objective=" << fmt(term.objective) << " avg_regret=" << fmt(term.avg_regret) << '\n';
  if (term.refused) o << "# refusal " << term.refusal << '\n';

  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError(path.string() + ": cannot write trace");
  out << o.str();
  if (!out) throw ConfigError(path.string() + ": write failed");
}

namespace {

std::map<std::string, std::string> parse_kv(std::string_view line, std::size_t skip) {
  std::map<std::string, std::string> kv;
  for (std::string_view tok : split(line.substr(skip), ' ')) {
    if (tok.empty()) continue;
    const std::size_t eq = tok.find('=');
    if (eq == std::string_view::npos) continue;
    kv[std::string(tok.substr(0, eq))] = std::string(tok.substr(eq + 1));
  }
  return kv;
}

struct KvReader {
  const std::map<std::string, std::string>& kv;
  std::string where;
  const std::string& raw(const std::string& k) const {
    auto it = kv.find(k);
    if (it == kv.end()) throw ConfigError(where + ": missing field '" + k + "'");
    return it->second;
  }
  double num(const std::string& k) const { return parse_double(raw(k), where); }
  long integer(const std::string& k) const { return parse_long(raw(k), where); }
  bool flag(const std::string& k) const { return integer(k) != 0; }
};

}  // namespace

RunTrace read_trace_csv(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path.string() + ": cannot open trace");
  const std::string name = path.string();
  std::string line;
  long lineno = 0;
  auto where = [&] { return name + ":" + std::to_string(lineno); };

  if (!std::getline(in, line) || line != kTraceSchema)
    throw ConfigError(name + ":1: not a cbwk trace (expected '" + kTraceSchema + "')");
  ++lineno;
  RunTrace trace;
  RunTerminal& term = trace.terminal;
  int d = 0;
  if (!std::getline(in, line) || line.rfind("# run ", 0) != 0)
    throw ConfigError(name + ":2: missing run line");
  ++lineno;
  {
    const auto kv = parse_kv(line, 6);
    const KvReader r{kv, where()};
    term.algorithm = r.raw("algorithm");
    term.seed = static_cast<std::uint64_t>(r.integer("seed"));
    term.T = r.integer("T");
    term.B = r.num("B");
    d = static_cast<int>(r.integer("d"));
  }
  if (!std::getline(in, line)) throw ConfigError(name + ":3: missing header");
  ++lineno;
  const std::size_t columns = 8 + 2 * static_cast<std::size_t>(d);
  if (split(line, ',').size() != columns) throw ConfigError(where() + ": header has wrong column count");

  bool saw_terminal = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line.rfind("# solve ", 0) == 0) {
      const auto kv = parse_kv(line, 8);
      const KvReader r{kv, where()};
      OPRecord s;
      s.t = r.integer("t");
      s.epoch = static_cast<int>(r.integer("epoch"));
      s.mu = r.num("mu");
      s.iterations = static_cast<int>(r.integer("iterations"));
      s.scale_steps = static_cast<int>(r.integer("scale_steps"));
      s.update_steps = static_cast<int>(r.integer("update_steps"));
      s.update_bound = r.integer("update_bound");
      s.oracle_calls = r.integer("oracle_calls");
      s.first_lhs = r.num("first_lhs");
      s.second_excess = r.num("second_excess");
      s.feasible = r.flag("feasible");
      s.regret_of_p_t = r.num("regret_of_p_t");
      s.q_mass = r.num("q_mass");
      trace.solves.push_back(s);
    } else if (line.rfind("# terminal ", 0) == 0) {
      const auto kv = parse_kv(line, 11);
      const KvReader r{kv, where()};
      term.aborted = r.flag("aborted");
      term.truncated = r.flag("truncated");
      term.refused = r.flag("refused");
      term.rounds = r.integer("rounds");
      term.total_reward = r.num("total_reward");
      term.opt = r.num("opt");
      term.regret = r.num("regret");
      term.Z = r.num("Z");
      term.B_prime = r.num("B_prime");
      term.T0 = r.integer("T0");
      term.out_of_regime = r.flag("out_of_regime");
      term.oracle_calls = r.integer("oracle_calls");
      term.avg_outcome.clear();
      if (!r.raw("avg_outcome").empty())
        for (std::string_view v : split(r.raw("avg_outcome"), ';'))
          term.avg_outcome.push_back(parse_double(v, where()));
      term.objective = r.num("objective");
      term.avg_regret = r.num("avg_regret");
      saw_terminal = true;
    } else if (line.rfind("# refusal ", 0) == 0) {
      term.refusal = line.substr(10);
    } else if (line[0] == '#') {
      continue;
    } else {
      const auto f = split(line, ',');
      if (f.size() != columns) throw ConfigError(where() + ": row has wrong column count");
      TraceRow row;
      std::size_t k = 0;
      row.t = parse_long(f[k++], where());
      row.epoch = static_cast<int>(parse_long(f[k++], where()));
      row.context = static_cast<int>(parse_long(f[k++], where()));
      row.action = static_cast<int>(parse_long(f[k++], where()));
      row.prob = parse_double(f[k++], where());
      row.reward = parse_double(f[k++], where());
      for (int j = 0; j < d; ++j) row.v.push_back(parse_double(f[k++], where()));
      row.cum_reward = parse_double(f[k++], where());
      for (int j = 0; j < d; ++j) row.cum_v.push_back(parse_double(f[k++], where()));
      row.oracle_calls = parse_long(f[k++], where());
      trace.rows.push_back(std::move(row));
    }
  }
  if (!saw_terminal) throw ConfigError(name + ": missing terminal line (truncated file?)");
  try {
    check_trace(trace, d);
  } catch (const ContractError& e) {
    throw ConfigError(name + ": " + e.what());
  }
  return trace;
}

// ---- summary files ----

namespace {

const char* kSummaryHeader =
    "algorithm,T,B,opt,runs,refused,aborted_early,truncated,abort_rate,mean_reward,sd_reward,"
    "mean_regret,sd_regret,mean_regret_per_round,mean_avg_regret,sd_avg_regret,"
    "mean_oracle_calls,sd_oracle_calls,mean_Z,op_solves,op_violations,cd_bound_violations,"
    "safety_violations,out_of_regime";

}  // namespace

void write_summary_csv(const fs::path& path, const std::vector<HorizonSummary>& rows) {
  std::ostringstream o;
  o << kSummarySchema << '\n' << kSummaryHeader << '\n';
  for (const HorizonSummary& s : rows) {
    o << s.algorithm << ',' << s.T << ',' << fmt(s.B) << ',' << fmt(s.opt) << ',' << s.runs << ','
      << s.refused << ',' << s.aborted_early << ',' << s.truncated << ',' << fmt(s.abort_rate)
      << ',' << fmt(s.mean_reward) << ',' << fmt(s.sd_reward) << ',' << fmt(s.mean_regret) << ','
      << fmt(s.sd_regret) << ',' << fmt(s.mean_regret_per_round) << ','
      << fmt(s.mean_avg_regret) << ',' << fmt(s.sd_avg_regret) << ','
      << fmt(s.mean_oracle_calls) << ',' << fmt(s.sd_oracle_calls) << ',' << fmt(s.mean_Z) << ','
      << s.op_solves << ',' << s.op_violations << ',' << s.cd_bound_violations << ','
      << s.safety_violations << ',' << s.out_of_regime << '\n';
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError(path.string() + ": cannot write summary");
  out << o.str();
}

std::vector<HorizonSummary> read_summary_csv(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path.string() + ": cannot open summary");
  std::string line;
  if (!std::getline(in, line) || line != kSummarySchema)
    throw ConfigError(path.string() + ":1: not a cbwk summary");
  if (!std::getline(in, line) || line != kSummaryHeader)
    throw ConfigError(path.string() + ":2: unexpected summary header");
  std::vector<HorizonSummary> rows;
  long lineno = 2;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::string w = path.string() + ":" + std::to_string(lineno);
    const auto f = split(line, ',');
    if (f.size() != 24) throw ConfigError(w + ": wrong column count");
    HorizonSummary s;
    std::size_t k = 0;
    s.algorithm = std::string(f[k++]);
    s.T = parse_long(f[k++], w);
    s.B = parse_double(f[k++], w);
    s.opt = parse_double(f[k++], w);
    s.runs = static_cast<int>(parse_long(f[k++], w));
    s.refused = static_cast<int>(parse_long(f[k++], w));
    s.aborted_early = static_cast<int>(parse_long(f[k++], w));
    s.truncated = static_cast<int>(parse_long(f[k++], w));
    s.abort_rate = parse_double(f[k++], w);
    s.mean_reward = parse_double(f[k++], w);
    s.sd_reward = parse_double(f[k++], w);
    s.mean_regret = parse_double(f[k++], w);
    s.sd_regret = parse_double(f[k++], w);
    s.mean_regret_per_round = parse_double(f[k++], w);
    s.mean_avg_regret = parse_double(f[k++], w);
    s.sd_avg_regret = parse_double(f[k++], w);
    s.mean_oracle_calls = parse_double(f[k++], w);
    s.sd_oracle_calls = parse_double(f[k++], w);
    s.mean_Z = parse_double(f[k++], w);
    s.op_solves = parse_long(f[k++], w);
    s.op_violations = parse_long(f[k++], w);
    s.cd_bound_violations = parse_long(f[k++], w);
    s.safety_violations = parse_long(f[k++], w);
    s.out_of_regime = static_cast<int>(parse_long(f[k++], w));
    rows.push_back(std::move(s));
  }
  return rows;
}

std::vector<HorizonSummary> summarize_dir(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw ConfigError(dir.string() + ": not a directory");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    const std::string n = e.path().filename().string();
    if (e.is_regular_file() && n.rfind("trace_", 0) == 0 && e.path().extension() == ".csv")
      files.push_back(e.path());
  }
  if (files.empty()) throw ConfigError(dir.string() + ": no trace files (trace_*.csv)");
  std::sort(files.begin(), files.end());
  std::vector<RunTrace> traces;
  traces.reserve(files.size());
  for (const auto& f : files) traces.push_back(read_trace_csv(f));
  std::vector<const RunTrace*> ptrs;
  for (const auto& t : traces) ptrs.push_back(&t);
  return summarize_traces(ptrs);
}

// ---- experiment ----

ExperimentOutput run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  require(config.instance != nullptr, "run_experiment: config has no instance");
  ExperimentOutput out;
  out.out_dir = options.out_dir ? *options.out_dir : config.output_dir;

  std::vector<Benchmark> benches;
  for (long T : config.horizons) benches.push_back(compute_benchmark(config, T));

  struct Task {
    std::size_t bench;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  for (std::size_t h = 0; h < benches.size(); ++h)
    for (std::uint64_t s : config.seeds) tasks.push_back({h, s + options.seed_offset});

  if (options.write_files) {
    fs::create_directories(out.out_dir);
    for (const auto& e : fs::directory_iterator(out.out_dir)) {
      const std::string n = e.path().filename().string();
      if (e.is_regular_file() && ((n.rfind("trace_", 0) == 0 && e.path().extension() == ".csv") ||
                                  n == "summary.csv" || n == "timing.csv"))
        fs::remove(e.path());
    }
  }

  out.runs.resize(tasks.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      try {
        out.runs[i] = run_single(config, benches[tasks[i].bench], tasks[i].seed);
        if (options.write_files)
          write_trace_csv(out.out_dir / trace_file_name(out.runs[i].trace.terminal), out.runs[i].trace);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
        next.store(tasks.size());
      }
    }
  };
  const int jobs = std::max(1, std::min<int>(options.jobs, static_cast<int>(tasks.size())));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);

  std::vector<const RunTrace*> ptrs;
  for (const auto& r : out.runs) ptrs.push_back(&r.trace);
  out.summary = summarize_traces(ptrs);

  if (options.write_files) {
    write_summary_csv(out.out_dir / "summary.csv", out.summary);
    std::ofstream timing(out.out_dir / "timing.csv", std::ios::binary);
    timing << "algorithm,T,seed,wall_seconds\n";
    for (const auto& r : out.runs)
      timing << r.trace.terminal.algorithm << ',' << r.trace.terminal.T << ','
             << r.trace.terminal.seed << ',' << fmt(r.wall_seconds) << '\n';
  }
  return out;
}

}  // namespace cbwk
