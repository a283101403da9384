#include "dmm/engine.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <random>

namespace dmm {

std::string_view to_string(UpdateForm form) {
  return form == UpdateForm::kGeneral ? "general" : "node_level";
}

UpdateForm parse_update_form(std::string_view name) {
  if (name == "general") return UpdateForm::kGeneral;
  if (name == "node_level") return UpdateForm::kNodeLevel;
  throw InvalidArgument("unknown update form '" + std::string(name) + "'");
}

NetworkState make_state(const Block& x0, const Block& y0) {
  require(x0.rows() == y0.rows() && x0.rows() >= 1, "x0 and y0 need one row per agent");
  NetworkState s;
  s.x = x0;
  s.y = y0;
  s.dx = Block::Zero(x0.rows(), x0.cols());
  s.dy = Block::Zero(y0.rows(), y0.cols());
  s.prev_x = x0;
  s.prev_y = y0;
  s.prev_mx = Block::Zero(x0.rows(), x0.cols());
  s.prev_my = Block::Zero(y0.rows(), y0.cols());
  s.track_x = Block::Zero(x0.rows(), x0.cols());
  s.track_y = Block::Zero(y0.rows(), y0.cols());
  return s;
}

namespace {

void check_blocks(const NetworkState& s, const Block& mx, const Block& my) {
  if (mx.rows() != s.x.rows() || mx.cols() != s.x.cols() || my.rows() != s.y.rows() || my.cols() != s.y.cols())
    throw InvalidArgument("gradient block shape mismatch");
}

}  // namespace

void step_general(NetworkState& s, const StrategySet& st, double mu_x, double mu_y, const Block& mx,
                  const Block& my) {
  check_blocks(s, mx, my);
  require(st.a.rows() == s.x.rows(), "strategy size does not match the network");
  Block cx = st.c * s.x - mu_x * mx;
  Block cy = st.c * s.y + mu_y * my;
  s.x = st.a * cx - st.b * s.dx;
  s.y = st.a * cy - st.b * s.dy;
  s.dx += st.b * s.x;
  s.dy += st.b * s.y;
  ++s.round;
}

void step_node_level(NetworkState& s, StrategyKind kind, const Matrix& w, double mu_x, double mu_y,
                     const Block& mx, const Block& my) {
  check_blocks(s, mx, my);
  require(w.rows() == s.x.rows(), "mixing matrix size does not match the network");
  const bool first = s.round == 0;
  Block nx, ny;
  switch (kind) {
    case StrategyKind::kED:
      nx = w * (2.0 * s.x - s.prev_x - mu_x * (mx - s.prev_mx));
      ny = w * (2.0 * s.y - s.prev_y + mu_y * (my - s.prev_my));
      break;
    case StrategyKind::kEXTRA:
      nx = w * (2.0 * s.x - s.prev_x) - mu_x * (mx - s.prev_mx);
      ny = w * (2.0 * s.y - s.prev_y) + mu_y * (my - s.prev_my);
      break;
    case StrategyKind::kATC_GT:
      s.track_x = w * (s.track_x + mx - s.prev_mx);
      s.track_y = w * (s.track_y + my - s.prev_my);
      nx = w * (s.x - mu_x * s.track_x);
      ny = w * (s.y + mu_y * s.track_y);
      break;
    case StrategyKind::kSemiATC_GT:
      if (first) {
        nx = w * (s.x - mu_x * mx);
        ny = w * (s.y + mu_y * my);
      } else {
        const Matrix w2 = w * w;
        nx = 2.0 * (w * s.x) - w2 * s.prev_x - mu_x * (w * (mx - s.prev_mx));
        ny = 2.0 * (w * s.y) - w2 * s.prev_y + mu_y * (w * (my - s.prev_my));
      }
      break;
    case StrategyKind::kNonATC_GT:
      if (first) {
        nx = s.x - mu_x * mx;
        ny = s.y + mu_y * my;
      } else {
        const Matrix w2 = w * w;
        nx = 2.0 * (w * s.x) - w2 * s.prev_x - mu_x * (mx - s.prev_mx);
        ny = 2.0 * (w * s.y) - w2 * s.prev_y + mu_y * (my - s.prev_my);
      }
      break;
    default:
      throw InvalidArgument("unknown strategy kind");
  }
  s.prev_x = std::move(s.x);
  s.prev_y = std::move(s.y);
  s.x = std::move(nx);
  s.y = std::move(ny);
  s.prev_mx = mx;
  s.prev_my = my;
  ++s.round;
}

void step_centralized(NetworkState& s, double mu_x, double mu_y, const Block& mx, const Block& my) {
  check_blocks(s, mx, my);
  s.x -= mu_x * mx;
  s.y += mu_y * my;
  ++s.round;
}

Initialization make_initialization(int agents, int dim_x, int dim_y, std::uint64_t seed, double scale,
                                   bool consensus) {
  require(agents >= 1 && dim_x >= 1 && dim_y >= 1, "initialization needs positive sizes");
  require(scale >= 0.0, "init scale must be non-negative");
  Rng rng = make_stream(seed, -1, StreamTag::kInit);
  std::normal_distribution<double> unit(0.0, 1.0);
  Initialization init{Block(agents, dim_x), Block(agents, dim_y)};
  const int draws = consensus ? 1 : agents;
  for (int k = 0; k < draws; ++k) {
    for (int j = 0; j < dim_x; ++j) init.x0(k, j) = scale * unit(rng);
    for (int j = 0; j < dim_y; ++j) init.y0(k, j) = scale * unit(rng);
  }
  for (int k = draws; k < agents; ++k) {
    init.x0.row(k) = init.x0.row(0);
    init.y0.row(k) = init.y0.row(0);
  }
  return init;
}

namespace {

using Combine = std::function<void(NetworkState&, const Block&, const Block&)>;

bool out_of_range(const Block& b, double threshold) {
  if (!b.allFinite()) return true;
  return b.norm() > threshold;
}

RunResult drive(const MinimaxProblem& problem, const RunConfig& config, const Initialization& init,
                const Combine& combine) {
  const int k_count = problem.agent_count();
  const int d1 = problem.dim_x();
  const int d2 = problem.dim_y();
  require(init.x0.rows() == k_count && init.x0.cols() == d1, "x0 must be K x d1");
  require(init.y0.rows() == k_count && init.y0.cols() == d2, "y0 must be K x d2");
  require(config.rounds >= 0, "rounds must be non-negative");
  require(config.metrics_every >= 1, "metrics cadence must be >= 1");
  require(std::isfinite(config.mu_x) && std::isfinite(config.mu_y) && config.mu_x >= 0.0 && config.mu_y >= 0.0,
          "step sizes must be finite and non-negative");
  require(config.divergence_threshold > 0.0, "divergence threshold must be positive");
  validate(config.grace, problem);

  RunResult result;
  if (config.mu_x > config.mu_y)
    result.warnings.push_back("mu_x > mu_y: the two-time-scale ratio mu_x / mu_y exceeds 1");

  const auto start = std::chrono::steady_clock::now();
  auto wallclock = [&]() -> std::int64_t {
    if (!config.record_wallclock) return 0;
    return std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::steady_clock::now() - start)
        .count();
  };

  std::vector<Rng> streams;
  streams.reserve(k_count);
  for (int k = 0; k < k_count; ++k) streams.push_back(make_stream(config.seeds.estimator, k, StreamTag::kEstimator));
  Rng bernoulli_rng = make_stream(config.seeds.bernoulli, -1, StreamTag::kBernoulli);
  std::bernoulli_distribution coin(config.grace.p);

  std::vector<EstimatorState> estimators(k_count);
  Block mx(k_count, d1), my(k_count, d2);
  for (int k = 0; k < k_count; ++k) {
    warm_start(estimators[k], config.grace, problem, k, init.x0.row(k).transpose(), init.y0.row(k).transpose(),
               streams[k]);
    mx.row(k) = estimators[k].g_x.transpose();
    my.row(k) = estimators[k].g_y.transpose();
  }
  auto oracle_counts = [&]() {
    std::vector<std::int64_t> out(k_count);
    for (int k = 0; k < k_count; ++k) out[k] = estimators[k].oracle_count;
    return out;
  };

  NetworkState state = make_state(init.x0, init.y0);
  if (config.record_trajectory) {
    result.trajectory.emplace();
    result.trajectory->x.push_back(state.x);
    result.trajectory->y.push_back(state.y);
    result.trajectory->dx.push_back(state.dx);
    result.trajectory->dy.push_back(state.dy);
    result.trajectory->mx.push_back(mx);
    result.trajectory->my.push_back(my);
  }
  result.log.rows.push_back(record(state.x, state.y, problem, oracle_counts(), 0, 0, wallclock()));

  Vector xk, yk;
  for (int i = 0; i < config.rounds; ++i) {
    combine(state, mx, my);
    const int round = i + 1;
    if (out_of_range(state.x, config.divergence_threshold) || out_of_range(state.y, config.divergence_threshold)) {
      result.diverged = true;
      result.diverged_round = round;
      result.log.rows.push_back(record(state.x, state.y, problem, oracle_counts(), round, 0, wallclock()));
      break;
    }
    const bool pi = coin(bernoulli_rng);
    result.pi.push_back(pi ? 1 : 0);
    for (int k = 0; k < k_count; ++k) {
      xk = state.x.row(k).transpose();
      yk = state.y.row(k).transpose();
      grace_step(estimators[k], config.grace, problem, k, xk, yk, pi, streams[k]);
      mx.row(k) = estimators[k].g_x.transpose();
      my.row(k) = estimators[k].g_y.transpose();
    }
    if (config.record_trajectory) {
      result.trajectory->x.push_back(state.x);
      result.trajectory->y.push_back(state.y);
      result.trajectory->dx.push_back(state.dx);
      result.trajectory->dy.push_back(state.dy);
      result.trajectory->mx.push_back(mx);
      result.trajectory->my.push_back(my);
    }
    if (round % config.metrics_every == 0 || round == config.rounds)
      result.log.rows.push_back(record(state.x, state.y, problem, oracle_counts(), round, pi ? 1 : 0, wallclock()));
  }
  result.oracle_counts = oracle_counts();
  return result;
}

}  // namespace

RunResult run(const MinimaxProblem& problem, const MixingMatrix& mixing, const RunConfig& config,
              const Initialization& init) {
  require(mixing.size() == problem.agent_count(), "mixing matrix size does not match the agent count");
  const StrategySet strategy = build_strategy(config.strategy, mixing);
  if (config.form == UpdateForm::kGeneral) {
    return drive(problem, config, init, [&](NetworkState& s, const Block& mx, const Block& my) {
      step_general(s, strategy, config.mu_x, config.mu_y, mx, my);
    });
  }
  return drive(problem, config, init, [&](NetworkState& s, const Block& mx, const Block& my) {
    step_node_level(s, config.strategy, mixing.w(), config.mu_x, config.mu_y, mx, my);
  });
}

RunResult run_centralized(const MinimaxProblem& problem, const RunConfig& config, const Initialization& init) {
  require(problem.agent_count() == 1, "the centralized fallback needs exactly one agent");
  return drive(problem, config, init, [&](NetworkState& s, const Block& mx, const Block& my) {
    step_centralized(s, config.mu_x, config.mu_y, mx, my);
  });
}

Replay replay(const StrategySet& strategy, UpdateForm form, const Block& x0, const Block& y0, double mu_x,
              double mu_y, const std::vector<Block>& mx, const std::vector<Block>& my) {
  require(mx.size() == my.size(), "gradient streams must have equal length");
  NetworkState state = make_state(x0, y0);
  Replay out;
  out.x.push_back(state.x);
  out.y.push_back(state.y);
  for (std::size_t i = 0; i < mx.size(); ++i) {
    if (form == UpdateForm::kGeneral)
      step_general(state, strategy, mu_x, mu_y, mx[i], my[i]);
    else
      step_node_level(state, strategy.kind, strategy.w_ref.w(), mu_x, mu_y, mx[i], my[i]);
    out.x.push_back(state.x);
    out.y.push_back(state.y);
  }
  return out;
}

}  // namespace dmm
