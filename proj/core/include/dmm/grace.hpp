#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

#include "dmm/common.hpp"
#include "dmm/problems.hpp"
#include "dmm/rng.hpp"

namespace dmm {

enum class EstimatorName { kGDA, kSGDA, kHB, kSTORM, kHCMomentum, kLooplessSARAH, kPAGE, kGRACE };

inline constexpr std::array<EstimatorName, 8> kAllEstimators = {
    EstimatorName::kGDA,        EstimatorName::kSGDA,          EstimatorName::kHB,
    EstimatorName::kSTORM,      EstimatorName::kHCMomentum,    EstimatorName::kLooplessSARAH,
    EstimatorName::kPAGE,       EstimatorName::kGRACE};

std::string_view to_string(EstimatorName name);
EstimatorName parse_estimator_name(std::string_view name);

enum class WarmStartSampling { kWithReplacement, kWithoutReplacement };

struct GraceConfig {
  double p = 0.0;
  double beta_x = 0.01;
  double beta_y = 0.01;
  int b = 1;
  // Large-batch size; empty means the full local batch (offline only).
  std::optional<int> big_b;
  int b0 = 1;
  int gamma1 = 1;
  int gamma2 = 0;
  // Reuse one minibatch for the x- and y-updates of a round.
  bool shared_minibatch = true;
  WarmStartSampling warm_start = WarmStartSampling::kWithReplacement;
};

// Throws InvalidArgument on out-of-range values, gamma1 = gamma2 = 1, a full
// large batch on an online problem, or gamma2 = 1 without Hessian products.
void validate(const GraceConfig& config, const MinimaxProblem& problem);
void validate(const GraceConfig& config);

// Named parameterizations. `local_size` is N_k offline and 0 online.
GraceConfig specialize(EstimatorName name, std::size_t local_size);

struct EstimatorState {
  Vector g_x;
  Vector g_y;
  Vector prev_x;
  Vector prev_y;
  // Cumulative sample draws (one draw yields both the x- and y-gradient).
  std::int64_t oracle_count = 0;
};

void warm_start(EstimatorState& state, const GraceConfig& config, const MinimaxProblem& problem,
                int agent, const Vector& x0, const Vector& y0, Rng& rng);

// One estimator update at z_new = (x, y). `pi` is the round's shared
// Bernoulli outcome.
void grace_step(EstimatorState& state, const GraceConfig& config, const MinimaxProblem& problem,
                int agent, const Vector& x, const Vector& y, bool pi, Rng& rng);

}  // namespace dmm
