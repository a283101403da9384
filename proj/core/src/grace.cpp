#include "dmm/grace.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

namespace dmm {

std::string_view to_string(EstimatorName name) {
  switch (name) {
    case EstimatorName::kGDA: return "GDA";
    case EstimatorName::kSGDA: return "SGDA";
    case EstimatorName::kHB: return "HB";
    case EstimatorName::kSTORM: return "STORM";
    case EstimatorName::kHCMomentum: return "HC_MOMENTUM";
    case EstimatorName::kLooplessSARAH: return "LOOPLESS_SARAH";
    case EstimatorName::kPAGE: return "PAGE";
    case EstimatorName::kGRACE: return "GRACE";
  }
  return "unknown";
}

EstimatorName parse_estimator_name(std::string_view name) {
  for (EstimatorName e : kAllEstimators)
    if (to_string(e) == name) return e;
  throw InvalidArgument("unknown estimator '" + std::string(name) + "'");
}

void validate(const GraceConfig& c) {
  require(c.p >= 0.0 && c.p <= 1.0, "p must lie in [0, 1]");
  require(c.beta_x >= 0.0 && c.beta_x <= 1.0, "beta_x must lie in [0, 1]");
  require(c.beta_y >= 0.0 && c.beta_y <= 1.0, "beta_y must lie in [0, 1]");
  require(c.b >= 1, "minibatch size b must be >= 1");
  require(!c.big_b || *c.big_b >= 1, "large batch size must be >= 1");
  require(c.b0 >= 1, "warm-start batch b0 must be >= 1");
  require(c.gamma1 == 0 || c.gamma1 == 1, "gamma1 must be 0 or 1");
  require(c.gamma2 == 0 || c.gamma2 == 1, "gamma2 must be 0 or 1");
  require(!(c.gamma1 == 1 && c.gamma2 == 1), "gamma1 = gamma2 = 1 is not supported");
}

void validate(const GraceConfig& c, const MinimaxProblem& problem) {
  validate(c);
  const bool offline = problem.sampling() == SamplingMode::kOffline;
  require(offline || c.big_b.has_value(), "a full-batch large batch needs an offline problem");
  require(c.gamma2 == 0 || problem.has_hessian_products(),
          "gamma2 = 1 needs a problem with Hessian-vector products");
  if (offline && c.warm_start == WarmStartSampling::kWithoutReplacement) {
    for (int k = 0; k < problem.agent_count(); ++k)
      require(static_cast<std::size_t>(c.b0) <= problem.local_size(k),
              "b0 exceeds N_k for warm start without replacement");
  }
}

GraceConfig specialize(EstimatorName name, std::size_t local_size) {
  const bool offline = local_size > 0;
  const std::optional<int> full = offline ? std::nullopt : std::optional<int>(2000);
  GraceConfig c;
  switch (name) {
    case EstimatorName::kGDA:
      c = {1.0, 0.0, 0.0, 1, full, 1, 0, 0};
      break;
    case EstimatorName::kSGDA:
      c = {0.0, 1.0, 1.0, 1, full, 1, 0, 0};
      break;
    case EstimatorName::kHB:
      c = {0.0, 0.01, 0.01, 1, full, 1, 0, 0};
      break;
    case EstimatorName::kSTORM:
      c = {0.0, 0.01, 0.01, 1, full, 1, 1, 0};
      break;
    case EstimatorName::kHCMomentum:
      c = {0.0, 0.01, 0.01, 1, full, 1, 0, 1};
      break;
    case EstimatorName::kLooplessSARAH:
      c = {0.1, 0.0, 0.0, 1, full, 1, 1, 0};
      break;
    case EstimatorName::kPAGE: {
      const double n = offline ? static_cast<double>(local_size) : static_cast<double>(*full);
      const int b = std::max(1, static_cast<int>(std::lround(std::sqrt(n))));
      c = {b / (n + b), 0.0, 0.0, b, full, 1, 1, 0};
      break;
    }
    case EstimatorName::kGRACE:
      c = {0.1, 0.01, 0.01, 5, full, 1, 1, 0};
      break;
  }
  return c;
}

namespace {

struct Accumulator {
  Vector x;
  Vector y;
  void reset(int dx, int dy) {
    x.setZero(dx);
    y.setZero(dy);
  }
};

// Average loss gradient at (x, y) over `count` draws.
void minibatch_mean(const MinimaxProblem& problem, int agent, const Vector& x, const Vector& y, int count,
                    Rng& rng, Vector& gx, Vector& gy) {
  Accumulator sum;
  sum.reset(problem.dim_x(), problem.dim_y());
  Vector sx, sy;
  for (int s = 0; s < count; ++s) {
    const Sample sample = problem.draw(agent, rng);
    problem.loss_gradient(agent, sample, x, y, sx, sy);
    sum.x += sx;
    sum.y += sy;
  }
  gx = sum.x / count;
  gy = sum.y / count;
}

// Sums over one minibatch of the fresh gradient at z_new and the correction
// gamma1 * q + gamma2 * h.
struct MinibatchSums {
  Accumulator fresh;
  Accumulator correction;
};

void accumulate(const MinimaxProblem& problem, const GraceConfig& c, int agent, const Sample& sample,
                const Vector& x, const Vector& y, const Vector& prev_x, const Vector& prev_y,
                MinibatchSums& sums, Vector& gx, Vector& gy) {
  problem.loss_gradient(agent, sample, x, y, gx, gy);
  sums.fresh.x += gx;
  sums.fresh.y += gy;
  if (c.gamma1 == 1) {
    // q = grad Q(z_prev) - grad Q(z_new) on the same sample.
    sums.correction.x -= gx;
    sums.correction.y -= gy;
    problem.loss_gradient(agent, sample, prev_x, prev_y, gx, gy);
    sums.correction.x += gx;
    sums.correction.y += gy;
  } else if (c.gamma2 == 1) {
    // h = Hessian at z_new applied to (z_prev - z_new).
    problem.hessian_product(agent, sample, x, y, prev_x - x, prev_y - y, gx, gy);
    sums.correction.x += gx;
    sums.correction.y += gy;
  }
}

}  // namespace

void warm_start(EstimatorState& state, const GraceConfig& config, const MinimaxProblem& problem, int agent,
                const Vector& x0, const Vector& y0, Rng& rng) {
  require(config.b0 >= 1, "warm-start batch b0 must be >= 1");
  require(x0.size() == problem.dim_x() && y0.size() == problem.dim_y(), "warm-start point has wrong shape");
  const bool offline = problem.sampling() == SamplingMode::kOffline;

  if (offline && config.warm_start == WarmStartSampling::kWithoutReplacement) {
    const std::size_t n = problem.local_size(agent);
    const auto b0 = static_cast<std::size_t>(config.b0);
    require(b0 <= n, "b0 exceeds N_k for warm start without replacement");
    if (b0 == n) {
      problem.local_gradient(agent, x0, y0, state.g_x, state.g_y);
    } else {
      // Partial Fisher-Yates: the first b0 slots become a uniform subset.
      std::vector<std::size_t> order(n);
      std::iota(order.begin(), order.end(), std::size_t{0});
      Accumulator sum;
      sum.reset(problem.dim_x(), problem.dim_y());
      Vector gx, gy;
      for (std::size_t s = 0; s < b0; ++s) {
        std::uniform_int_distribution<std::size_t> pick(s, n - 1);
        std::swap(order[s], order[pick(rng)]);
        Sample sample;
        sample.index = static_cast<std::int64_t>(order[s]);
        problem.loss_gradient(agent, sample, x0, y0, gx, gy);
        sum.x += gx;
        sum.y += gy;
      }
      state.g_x = sum.x / config.b0;
      state.g_y = sum.y / config.b0;
    }
  } else {
    minibatch_mean(problem, agent, x0, y0, config.b0, rng, state.g_x, state.g_y);
  }
  state.prev_x = x0;
  state.prev_y = y0;
  state.oracle_count += config.b0;
}

void grace_step(EstimatorState& state, const GraceConfig& c, const MinimaxProblem& problem, int agent,
                const Vector& x, const Vector& y, bool pi, Rng& rng) {
  require(x.size() == problem.dim_x() && y.size() == problem.dim_y(), "estimator point has wrong shape");
  require(state.g_x.size() == problem.dim_x() && state.g_y.size() == problem.dim_y(),
          "estimator used before warm start");
  require(c.gamma2 == 0 || problem.has_hessian_products(),
          "gamma2 = 1 needs a problem with Hessian-vector products");

  if (pi) {
    if (c.big_b) {
      minibatch_mean(problem, agent, x, y, *c.big_b, rng, state.g_x, state.g_y);
      state.oracle_count += *c.big_b;
    } else {
      require(problem.sampling() == SamplingMode::kOffline, "a full-batch large batch needs an offline problem");
      problem.local_gradient(agent, x, y, state.g_x, state.g_y);
      state.oracle_count += static_cast<std::int64_t>(problem.local_size(agent));
    }
  } else {
    MinibatchSums sx, sy;
    sx.fresh.reset(problem.dim_x(), problem.dim_y());
    sx.correction.reset(problem.dim_x(), problem.dim_y());
    Vector gx, gy;
    for (int s = 0; s < c.b; ++s)
      accumulate(problem, c, agent, problem.draw(agent, rng), x, y, state.prev_x, state.prev_y, sx, gx, gy);
    state.oracle_count += c.b;

    // The y-update reads from its own batch when batches are independent.
    MinibatchSums* y_sums = &sx;
    if (!c.shared_minibatch) {
      sy.fresh.reset(problem.dim_x(), problem.dim_y());
      sy.correction.reset(problem.dim_x(), problem.dim_y());
      for (int s = 0; s < c.b; ++s)
        accumulate(problem, c, agent, problem.draw(agent, rng), x, y, state.prev_x, state.prev_y, sy, gx, gy);
      state.oracle_count += c.b;
      y_sums = &sy;
    }

    state.g_x = (1.0 - c.beta_x) * (state.g_x - sx.correction.x / c.b) + c.beta_x * (sx.fresh.x / c.b);
    state.g_y = (1.0 - c.beta_y) * (state.g_y - y_sums->correction.y / c.b) +
                c.beta_y * (y_sums->fresh.y / c.b);
  }
  state.prev_x = x;
  state.prev_y = y;
}

}  // namespace dmm
