#include "dmm/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <fstream>
#include <functional>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "dmm/metrics.hpp"
#include "dmm/transform.hpp"

namespace dmm {

namespace fs = std::filesystem;

int ExperimentSpec::agents() const {
  return problem == ProblemKind::kQuadratic ? quadratic.agents : bilinear.agents;
}
int ExperimentSpec::dim_x() const {
  return problem == ProblemKind::kQuadratic ? quadratic.dim_x : bilinear.dim_x;
}
int ExperimentSpec::dim_y() const {
  return problem == ProblemKind::kQuadratic ? quadratic.dim_y : bilinear.dim_y;
}

namespace {

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? sep : "") + parts[i];
  return out;
}

}  // namespace

SpecError::SpecError(std::vector<std::string> diagnostics)
    : std::runtime_error(join(diagnostics, "\n")), diagnostics_(std::move(diagnostics)) {}

void apply_scale(ExperimentSpec& spec, Scale scale) {
  const bool paper = scale == Scale::kPaper;
  const int k = paper ? 20 : 8;
  const int d = paper ? 100 : 16;
  const int n = paper ? 2000 : 200;
  spec.quadratic.agents = k;
  spec.quadratic.dim_x = d;
  spec.quadratic.dim_y = d;
  spec.quadratic.samples_per_agent = n;
  spec.bilinear.agents = k;
  spec.bilinear.samples_per_agent = n;
}

// ---------------------------------------------------------------- parsing

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) throw InvalidArgument("empty list item");
    out.push_back(item);
  }
  return out;
}

long long to_int(const std::string& v) {
  std::size_t used = 0;
  long long out = 0;
  try {
    out = std::stoll(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != v.size() || v.empty()) throw InvalidArgument("expected an integer, got '" + v + "'");
  return out;
}

int to_int32(const std::string& v) {
  const long long out = to_int(v);
  if (out < -2147483647LL || out > 2147483647LL) throw InvalidArgument("integer out of range: '" + v + "'");
  return static_cast<int>(out);
}

std::uint64_t to_uint64(const std::string& v) {
  std::size_t used = 0;
  unsigned long long out = 0;
  try {
    if (!v.empty() && v[0] == '-') throw InvalidArgument("");
    out = std::stoull(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != v.size() || v.empty()) throw InvalidArgument("expected a non-negative integer, got '" + v + "'");
  return out;
}

double to_double(const std::string& v) { return parse_double(v, "value"); }

bool to_bool(const std::string& v) {
  std::string lower = v;
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "true" || lower == "yes" || lower == "1") return true;
  if (lower == "false" || lower == "no" || lower == "0") return false;
  throw InvalidArgument("expected true or false, got '" + v + "'");
}

Scale to_scale(const std::string& v) {
  if (v == "desk") return Scale::kDesk;
  if (v == "paper") return Scale::kPaper;
  throw InvalidArgument("scale must be desk or paper, got '" + v + "'");
}

SamplingMode to_sampling(const std::string& v) {
  if (v == "offline") return SamplingMode::kOffline;
  if (v == "online") return SamplingMode::kOnline;
  throw InvalidArgument("sampling must be offline or online, got '" + v + "'");
}

struct Entry {
  std::string key;
  std::string value;
  std::size_t line = 0;
};

// Estimator settings that may be given globally or per estimator.
struct GraceOverrides {
  std::optional<double> p, beta_x, beta_y;
  std::optional<int> b, b0, gamma1, gamma2;
  std::optional<std::optional<int>> big_b;
  std::optional<bool> shared_minibatch;
  std::optional<WarmStartSampling> warm_start;

  void apply(GraceConfig& c) const {
    if (p) c.p = *p;
    if (beta_x) c.beta_x = *beta_x;
    if (beta_y) c.beta_y = *beta_y;
    if (b) c.b = *b;
    if (b0) c.b0 = *b0;
    if (gamma1) c.gamma1 = *gamma1;
    if (gamma2) c.gamma2 = *gamma2;
    if (big_b) c.big_b = *big_b;
    if (shared_minibatch) c.shared_minibatch = *shared_minibatch;
    if (warm_start) c.warm_start = *warm_start;
  }
};

// Returns false when `key` is not an estimator setting.
bool set_grace_key(GraceOverrides& o, const std::string& key, const std::string& v) {
  if (key == "bernoulli_p") {
    o.p = to_double(v);
  } else if (key == "beta") {
    o.beta_x = o.beta_y = to_double(v);
  } else if (key == "beta_x") {
    o.beta_x = to_double(v);
  } else if (key == "beta_y") {
    o.beta_y = to_double(v);
  } else if (key == "minibatch") {
    o.b = to_int32(v);
  } else if (key == "b0") {
    o.b0 = to_int32(v);
  } else if (key == "gamma1") {
    o.gamma1 = to_int32(v);
  } else if (key == "gamma2") {
    o.gamma2 = to_int32(v);
  } else if (key == "large_batch") {
    o.big_b = v == "full" ? std::optional<int>() : std::optional<int>(to_int32(v));
  } else if (key == "shared_minibatch") {
    o.shared_minibatch = to_bool(v);
  } else if (key == "warm_start") {
    if (v == "with_replacement")
      o.warm_start = WarmStartSampling::kWithReplacement;
    else if (v == "without_replacement")
      o.warm_start = WarmStartSampling::kWithoutReplacement;
    else
      throw InvalidArgument("warm_start must be with_replacement or without_replacement");
  } else {
    return false;
  }
  return true;
}

using Setter = std::function<void(ExperimentSpec&, const std::string&)>;

const std::map<std::string, Setter>& plain_keys() {
  static const std::map<std::string, Setter> keys = {
      {"problem",
       [](ExperimentSpec& s, const std::string& v) {
         if (v == "quadratic")
           s.problem = ProblemKind::kQuadratic;
         else if (v == "bilinear")
           s.problem = ProblemKind::kBilinear;
         else
           throw InvalidArgument("problem must be quadratic or bilinear");
       }},
      {"agents", [](ExperimentSpec& s, const std::string& v) { s.quadratic.agents = s.bilinear.agents = to_int32(v); }},
      {"dim_x", [](ExperimentSpec& s, const std::string& v) { s.quadratic.dim_x = s.bilinear.dim_x = to_int32(v); }},
      {"dim_y", [](ExperimentSpec& s, const std::string& v) { s.quadratic.dim_y = s.bilinear.dim_y = to_int32(v); }},
      {"samples_per_agent",
       [](ExperimentSpec& s, const std::string& v) {
         s.quadratic.samples_per_agent = s.bilinear.samples_per_agent = to_int32(v);
       }},
      {"nu", [](ExperimentSpec& s, const std::string& v) { s.quadratic.nu = s.bilinear.nu = to_double(v); }},
      {"data_mean", [](ExperimentSpec& s, const std::string& v) { s.quadratic.data_mean = to_double(v); }},
      {"hetero_shift", [](ExperimentSpec& s, const std::string& v) { s.quadratic.hetero_shift = to_double(v); }},
      {"data_var", [](ExperimentSpec& s, const std::string& v) { s.quadratic.data_var = to_double(v); }},
      {"noise_var", [](ExperimentSpec& s, const std::string& v) { s.quadratic.noise_var = to_double(v); }},
      {"coupling_var", [](ExperimentSpec& s, const std::string& v) { s.quadratic.coupling_var = to_double(v); }},
      {"noise_std", [](ExperimentSpec& s, const std::string& v) { s.bilinear.noise_std = to_double(v); }},
      {"variance_is_std", [](ExperimentSpec& s, const std::string& v) { s.quadratic.variance_is_std = to_bool(v); }},
      {"sampling",
       [](ExperimentSpec& s, const std::string& v) { s.quadratic.sampling = s.bilinear.sampling = to_sampling(v); }},
      {"hessian_products", [](ExperimentSpec& s, const std::string& v) { s.quadratic.hessian_products = to_bool(v); }},
      {"topologies",
       [](ExperimentSpec& s, const std::string& v) {
         s.topologies.clear();
         for (const auto& item : split_list(v)) s.topologies.push_back(parse_graph_kind(item));
       }},
      {"edge_prob", [](ExperimentSpec& s, const std::string& v) { s.edge_probability = to_double(v); }},
      {"estimators",
       [](ExperimentSpec& s, const std::string& v) {
         s.estimators.clear();
         for (const auto& item : split_list(v)) s.estimators.push_back(parse_estimator_name(item));
       }},
      {"strategies",
       [](ExperimentSpec& s, const std::string& v) {
         s.strategies.clear();
         for (const auto& item : split_list(v)) s.strategies.push_back(parse_strategy_kind(item));
       }},
      {"mu_x", [](ExperimentSpec& s, const std::string& v) { s.mu_x = to_double(v); }},
      {"mu_y", [](ExperimentSpec& s, const std::string& v) { s.mu_y = to_double(v); }},
      {"rounds", [](ExperimentSpec& s, const std::string& v) { s.rounds = to_int32(v); }},
      {"update_form", [](ExperimentSpec& s, const std::string& v) { s.form = parse_update_form(v); }},
      {"metrics_every", [](ExperimentSpec& s, const std::string& v) { s.metrics_every = to_int32(v); }},
      {"repetitions", [](ExperimentSpec& s, const std::string& v) { s.repetitions = to_int32(v); }},
      {"seed", [](ExperimentSpec& s, const std::string& v) { s.seed = to_uint64(v); }},
      {"init_scale", [](ExperimentSpec& s, const std::string& v) { s.init_scale = to_double(v); }},
      {"consensus_init", [](ExperimentSpec& s, const std::string& v) { s.consensus_init = to_bool(v); }},
      {"divergence_threshold", [](ExperimentSpec& s, const std::string& v) { s.divergence_threshold = to_double(v); }},
      {"wallclock", [](ExperimentSpec& s, const std::string& v) { s.wallclock = to_bool(v); }},
      {"corrupt_mixing", [](ExperimentSpec& s, const std::string& v) { s.corrupt_mixing = to_bool(v); }},
  };
  return keys;
}

void check_ranges(const ExperimentSpec& s, const std::string& source, std::vector<std::string>& errors) {
  auto fail = [&](const std::string& msg) { errors.push_back(source + ": " + msg); };
  if (s.agents() < 1) fail("agents must be >= 1");
  if (s.agents() == 1 && s.topologies.size() > 1) fail("a single agent runs without topology; list at most one");
  if (s.dim_x() < 1 || s.dim_y() < 1) fail("dimensions must be >= 1");
  if (s.quadratic.samples_per_agent < 1) fail("samples_per_agent must be >= 1");
  if (!(s.quadratic.nu > 0.0)) fail("nu must be positive");
  if (s.quadratic.data_var < 0.0 || s.quadratic.noise_var < 0.0 || s.quadratic.coupling_var < 0.0)
    fail("variances must be non-negative");
  if (!(s.edge_probability > 0.0 && s.edge_probability <= 1.0)) fail("edge_prob must lie in (0, 1]");
  if (!(s.mu_x > 0.0) || !(s.mu_y > 0.0)) fail("mu_x and mu_y must be positive");
  if (s.rounds < 0) fail("rounds must be >= 0");
  if (s.metrics_every < 1) fail("metrics_every must be >= 1");
  if (s.repetitions < 1) fail("repetitions must be >= 1");
  if (!(s.init_scale >= 0.0)) fail("init_scale must be non-negative");
  if (!(s.divergence_threshold > 0.0)) fail("divergence_threshold must be positive");
  if (s.estimators.empty() || s.strategies.empty() || s.topologies.empty())
    fail("estimators, strategies and topologies must be non-empty");
}

}  // namespace

ExperimentSpec parse_spec(std::istream& in, const std::string& source, const SpecOverrides& overrides) {
  std::vector<std::string> errors;
  std::vector<Entry> entries;
  std::map<std::string, std::size_t> seen;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = source + ":" + std::to_string(line_no) + ": ";
    if (eq == std::string::npos) {
      errors.push_back(where + "expected 'key = value'");
      continue;
    }
    Entry e{trim(line.substr(0, eq)), trim(line.substr(eq + 1)), line_no};
    if (e.key.empty() || e.value.empty()) {
      errors.push_back(where + "empty key or value");
      continue;
    }
    if (auto it = seen.find(e.key); it != seen.end()) {
      errors.push_back(where + "duplicate key '" + e.key + "' (first set on line " + std::to_string(it->second) + ")");
      continue;
    }
    seen[e.key] = line_no;
    entries.push_back(std::move(e));
  }

  ExperimentSpec spec;
  auto at = [&](const Entry& e) { return source + ":" + std::to_string(e.line) + ": "; };

  // The scale preset first, so explicit size keys override it.
  for (const Entry& e : entries) {
    if (e.key != "scale") continue;
    try {
      apply_scale(spec, to_scale(e.value));
    } catch (const std::exception& ex) {
      errors.push_back(at(e) + ex.what());
    }
  }

  GraceOverrides global;
  std::map<EstimatorName, std::vector<const Entry*>> per_estimator;
  for (const Entry& e : entries) {
    if (e.key == "scale") continue;
    try {
      const auto dot = e.key.find('.');
      if (dot != std::string::npos) {
        const EstimatorName name = parse_estimator_name(e.key.substr(0, dot));
        GraceOverrides probe;
        if (!set_grace_key(probe, e.key.substr(dot + 1), e.value))
          throw InvalidArgument("unknown estimator setting '" + e.key.substr(dot + 1) + "'");
        per_estimator[name].push_back(&e);
      } else if (set_grace_key(global, e.key, e.value)) {
      } else if (auto it = plain_keys().find(e.key); it != plain_keys().end()) {
        it->second(spec, e.value);
      } else {
        throw InvalidArgument("unknown key '" + e.key + "'");
      }
    } catch (const std::exception& ex) {
      errors.push_back(at(e) + ex.what());
    }
  }

  if (overrides.scale) apply_scale(spec, *overrides.scale);
  if (overrides.seed) spec.seed = *overrides.seed;
  if (errors.empty()) check_ranges(spec, source, errors);
  if (!errors.empty()) throw SpecError(errors);

  // Resolve every listed estimator: named defaults, then global, then
  // per-estimator settings.
  const std::size_t n = (spec.problem == ProblemKind::kQuadratic ? spec.quadratic.sampling : spec.bilinear.sampling) ==
                                SamplingMode::kOffline
                            ? static_cast<std::size_t>(spec.quadratic.samples_per_agent)
                            : 0;
  const bool offline = n > 0;
  const bool hessians = spec.problem == ProblemKind::kBilinear || spec.quadratic.hessian_products;
  for (const auto& [name, list] : per_estimator) {
    if (std::find(spec.estimators.begin(), spec.estimators.end(), name) == spec.estimators.end())
      errors.push_back(at(*list.front()) + "settings for estimator " + std::string(to_string(name)) +
                       " which is not listed in estimators");
  }
  for (EstimatorName name : spec.estimators) {
    GraceConfig c = specialize(name, n);
    global.apply(c);
    std::size_t gamma2_line = seen.count("gamma2") ? seen["gamma2"] : 0;
    for (const Entry* e : per_estimator[name]) {
      GraceOverrides local;
      set_grace_key(local, e->key.substr(e->key.find('.') + 1), e->value);
      local.apply(c);
      if (e->key.substr(e->key.find('.') + 1) == "gamma2") gamma2_line = e->line;
    }
    const std::string where = source + ":" + (gamma2_line ? std::to_string(gamma2_line) + ":" : "") + " estimator " +
                              std::string(to_string(name)) + ": ";
    try {
      validate(c);
      require(offline || c.big_b.has_value(), "a full-batch large batch needs an offline problem");
      require(c.gamma2 == 0 || hessians, "gamma2 = 1 needs a problem with Hessian-vector products");
      require(!offline || c.warm_start == WarmStartSampling::kWithReplacement ||
                  c.b0 <= spec.quadratic.samples_per_agent,
              "b0 exceeds N_k for warm start without replacement");
    } catch (const std::exception& ex) {
      errors.push_back(where + ex.what());
    }
    spec.grace[name] = c;
  }
  if (!errors.empty()) throw SpecError(errors);
  return spec;
}

ExperimentSpec load_spec(const fs::path& path, const SpecOverrides& overrides) {
  std::ifstream in(path);
  if (!in) throw SpecError({path.string() + ": cannot open spec file"});
  return parse_spec(in, path.string(), overrides);
}

// ---------------------------------------------------------------- running

std::shared_ptr<MinimaxProblem> make_problem(const ExperimentSpec& spec, std::uint64_t data_seed) {
  if (spec.problem == ProblemKind::kBilinear) return make_bilinear(spec.bilinear, data_seed);
  return make_quadratic(spec.quadratic, data_seed);
}

MixingMatrix make_mixing(const ExperimentSpec& spec, GraphKind kind, std::uint64_t data_seed) {
  Rng topo = make_stream(data_seed, -1, StreamTag::kTopology);
  GraphOptions options;
  options.edge_probability = spec.edge_probability;
  return metropolis_weights(build_graph(kind, spec.agents(), topo(), options));
}

bool ExperimentResult::all_diverged() const {
  return !cells.empty() &&
         std::all_of(cells.begin(), cells.end(), [](const CellResult& c) { return c.diverged; });
}

std::string cell_file_name(EstimatorName e, StrategyKind s, GraphKind g, int rep) {
  return std::string(to_string(e)) + "_" + std::string(to_string(s)) + "_" + std::string(to_string(g)) + "_rep" +
         std::to_string(rep) + ".csv";
}

void write_file_atomically(const fs::path& path, const std::string& contents) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << contents;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

namespace {

RunConfig make_run_config(const ExperimentSpec& spec, EstimatorName e, StrategyKind s, const SeedSet& seeds) {
  RunConfig c;
  c.mu_x = spec.mu_x;
  c.mu_y = spec.mu_y;
  c.rounds = spec.rounds;
  c.strategy = s;
  c.grace = spec.grace.at(e);
  c.form = spec.form;
  c.seeds = seeds;
  c.metrics_every = spec.metrics_every;
  c.divergence_threshold = spec.divergence_threshold;
  c.record_wallclock = spec.wallclock;
  return c;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentSpec& spec, const fs::path& out_dir, int jobs) {
  fs::create_directories(out_dir);
  const int k = spec.agents();

  struct Task {
    CellResult cell;
    SeedSet seeds;
    std::shared_ptr<const MinimaxProblem> problem;
    std::shared_ptr<const MixingMatrix> mixing;
    std::shared_ptr<const Initialization> init;
  };
  std::vector<Task> tasks;
  for (int rep = 0; rep < spec.repetitions; ++rep) {
    const SeedSet seeds = derive_seeds(spec.seed, rep);
    auto problem = make_problem(spec, seeds.data);
    auto init = std::make_shared<const Initialization>(
        make_initialization(k, spec.dim_x(), spec.dim_y(), seeds.data, spec.init_scale, spec.consensus_init));
    for (GraphKind topology : spec.topologies) {
      std::shared_ptr<const MixingMatrix> mixing;
      if (k >= 2) mixing = std::make_shared<const MixingMatrix>(make_mixing(spec, topology, seeds.data));
      for (EstimatorName estimator : spec.estimators) {
        for (StrategyKind strategy : spec.strategies) {
          Task t;
          t.cell.estimator = estimator;
          t.cell.strategy = strategy;
          t.cell.topology = topology;
          t.cell.rep = rep;
          t.cell.csv = out_dir / cell_file_name(estimator, strategy, topology, rep);
          t.seeds = seeds;
          t.problem = problem;
          t.mixing = mixing;
          t.init = init;
          tasks.push_back(std::move(t));
        }
      }
    }
  }

  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      try {
        Task& t = tasks[i];
        const RunConfig config = make_run_config(spec, t.cell.estimator, t.cell.strategy, t.seeds);
        const RunResult r = t.mixing ? run(*t.problem, *t.mixing, config, *t.init)
                                     : run_centralized(*t.problem, config, *t.init);
        std::ostringstream csv;
        write_csv(r.log, csv);
        write_file_atomically(t.cell.csv, csv.str());
        t.cell.diverged = r.diverged;
        t.cell.final_row = r.log.rows.back();
        t.cell.warnings = r.warnings;
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        next = tasks.size();
      }
    }
  };
  const int threads = std::max(1, std::min<int>(jobs, static_cast<int>(tasks.size())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);

  ExperimentResult result;
  for (Task& t : tasks) result.cells.push_back(std::move(t.cell));
  std::ostringstream summary;
  write_summary(result, summary);
  write_file_atomically(out_dir / "summary.csv", summary.str());
  return result;
}

void write_summary(const ExperimentResult& result, std::ostream& out) {
  out << "estimator,strategy,topology,rep,status,final_round,final_grad_x_sq,final_grad_y_sq,"
         "final_consensus_x,final_consensus_y,oracle_max,oracle_mean\n";
  for (const CellResult& c : result.cells) {
    const RunRow& r = c.final_row;
    out << to_string(c.estimator) << ',' << to_string(c.strategy) << ',' << to_string(c.topology) << ',' << c.rep
        << ',' << (c.diverged ? "DIVERGED" : "OK") << ',' << r.round << ',' << format_double(r.grad_x_sq) << ','
        << format_double(r.grad_y_sq) << ',' << format_double(r.consensus_x) << ','
        << format_double(r.consensus_y) << ',' << r.oracle_max << ',' << format_double(r.oracle_mean) << '\n';
  }
}

// ---------------------------------------------------------------- verify

bool VerifyResult::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const VerifyCheck& c) { return c.passed; });
}

namespace {

constexpr double kEquivalenceTol = 1e-9;

std::string tag(StrategyKind s, GraphKind g) {
  return "[" + std::string(to_string(s)) + "," + std::string(to_string(g)) + "]";
}

std::vector<Block> random_stream(int rounds, int k, int d, Rng& rng) {
  std::normal_distribution<double> unit(0.0, 1.0);
  std::vector<Block> out;
  for (int i = 0; i < rounds; ++i) {
    Block b(k, d);
    for (int r = 0; r < k; ++r)
      for (int c = 0; c < d; ++c) b(r, c) = unit(rng);
    out.push_back(std::move(b));
  }
  return out;
}

}  // namespace

VerifyResult verify(const ExperimentSpec& input) {
  ExperimentSpec spec = input;
  spec.quadratic.agents = spec.bilinear.agents = std::clamp(spec.agents(), 2, 8);
  spec.quadratic.dim_x = spec.bilinear.dim_x = std::min(spec.dim_x(), 8);
  spec.quadratic.dim_y = spec.bilinear.dim_y = std::min(spec.dim_y(), 8);
  spec.rounds = std::clamp(spec.rounds, 1, 100);
  const int k = spec.agents();
  const int d1 = spec.dim_x();
  const int d2 = spec.dim_y();

  VerifyResult result;
  auto add = [&](std::string name, bool ok, std::string detail) {
    result.checks.push_back({std::move(name), ok, std::move(detail)});
  };
  const SeedSet seeds = derive_seeds(spec.seed, 0);
  const auto problem = make_problem(spec, seeds.data);
  const EstimatorName estimator = spec.estimators.front();
  const Initialization consensus = make_initialization(k, d1, d2, seeds.data, spec.init_scale, true);
  const Initialization spread = make_initialization(k, d1, d2, seeds.data, spec.init_scale, false);

  for (GraphKind topology : spec.topologies) {
    Rng topo = make_stream(seeds.data, -1, StreamTag::kTopology);
    GraphOptions options;
    options.edge_probability = spec.edge_probability;
    const Graph graph = build_graph(topology, k, topo(), options);
    Matrix w = metropolis_weight_matrix(graph);
    if (spec.corrupt_mixing) w(0, 1) += 1e-3;
    const MixingCheck mc = check_mixing(graph, w);
    const std::string mixing_name = "mixing[" + std::string(to_string(topology)) + "]";
    if (!mc.passed) {
      add(mixing_name, false, "invalid mixing matrix: " + mc.failure + " check failed");
      continue;
    }
    add(mixing_name, true, "lambda = " + format_double(mc.lambda_mix));
    const MixingMatrix mixing(graph, w);

    for (StrategyKind kind : kAllStrategies) {
      const std::string t = tag(kind, topology);
      const StrategySet s = build_strategy(kind, mixing);
      const ValidationReport a4 = validate_strategy(s);
      add("strategy_conditions" + t, a4.all_passed(),
          a4.all_passed() ? "max residual " + format_double(a4.max_residual()) : "failed: " + a4.failures());

      // Injected gradient streams through both update forms.
      Rng grad_rng = make_stream(seeds.estimator, static_cast<std::int64_t>(kind), StreamTag::kEstimator);
      const auto mx = random_stream(spec.rounds, k, d1, grad_rng);
      const auto my = random_stream(spec.rounds, k, d2, grad_rng);
      const Replay general = replay(s, UpdateForm::kGeneral, consensus.x0, consensus.y0, spec.mu_x, spec.mu_y, mx, my);
      const Replay node = replay(s, UpdateForm::kNodeLevel, consensus.x0, consensus.y0, spec.mu_x, spec.mu_y, mx, my);
      double worst = 0.0;
      for (std::size_t i = 0; i < general.x.size(); ++i)
        worst = std::max({worst, (general.x[i] - node.x[i]).norm(), (general.y[i] - node.y[i]).norm()});
      add("form_equivalence" + t, worst <= kEquivalenceTol, "max Frobenius gap " + format_double(worst));

      TransitionFactorization f;
      try {
        f = build_transition(s);
      } catch (const NumericError& ex) {
        add("reassembly" + t, false, ex.what());
        continue;
      }
      add("reassembly" + t, true, "residual " + format_double(f.reassembly_residual));
      if (!(f.t_norm < 1.0))
        result.warnings.push_back("||T|| = " + format_double(f.t_norm) + " for " + t +
                                  ": the transformed error does not contract");

      RunConfig config = make_run_config(spec, estimator, kind, seeds);
      config.form = UpdateForm::kGeneral;
      config.record_trajectory = true;
      const RunResult r = run(*problem, mixing, config, spread);
      const TransformReport rep = verify_transformed_dynamics(s, f, *r.trajectory, spec.mu_x, spec.mu_y);
      add("error_recursion" + t, rep.max_error <= kErrorTol, "max residual " + format_double(rep.max_error));
      add("centroid" + t, rep.max_centroid <= kCentroidTol, "max residual " + format_double(rep.max_centroid));

      config.mu_x = 0.0;
      config.mu_y = 0.0;
      const RunResult still = run(*problem, mixing, config, spread);
      const TransformReport zero = verify_transformed_dynamics(s, f, *still.trajectory, 0.0, 0.0);
      add("contraction" + t, zero.contraction_holds,
          "||T|| = " + format_double(f.t_norm) + ", worst excess " + format_double(zero.worst_contraction_excess));
    }
  }
  return result;
}

void write_verify_report(const VerifyResult& result, std::ostream& out) {
  for (const VerifyCheck& c : result.checks)
    out << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
  for (const std::string& w : result.warnings) out << "WARN " << w << '\n';
  out << "RESULT " << (result.passed() ? "PASS" : "FAIL") << '\n';
}

}  // namespace dmm
