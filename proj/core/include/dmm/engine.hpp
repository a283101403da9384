#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dmm/common.hpp"
#include "dmm/grace.hpp"
#include "dmm/metrics.hpp"
#include "dmm/problems.hpp"
#include "dmm/rng.hpp"
#include "dmm/strategy.hpp"
#include "dmm/topology.hpp"

namespace dmm {

enum class UpdateForm { kGeneral, kNodeLevel };

std::string_view to_string(UpdateForm form);
UpdateForm parse_update_form(std::string_view name);

// Stacked network iterates. Row k of every block belongs to agent k.
struct NetworkState {
  Block x;
  Block y;
  // General form: dual blocks, zero at round 0.
  Block dx;
  Block dy;
  // Node-level form: X_{i-1} and M_{i-1}.
  Block prev_x;
  Block prev_y;
  Block prev_mx;
  Block prev_my;
  // Node-level ATC-GT: gradient trackers m_{i-1}.
  Block track_x;
  Block track_y;
  int round = 0;
};

NetworkState make_state(const Block& x0, const Block& y0);

// X <- A(C X - mu_x Mx) - B Dx, Y <- A(C Y + mu_y My) - B Dy, then
// Dx += B X_new, Dy += B Y_new.
void step_general(NetworkState& state, const StrategySet& strategy, double mu_x, double mu_y,
                  const Block& mx, const Block& my);

// Kind-specific node-level recursion. ED, EXTRA, SEMI_ATC_GT and NON_ATC_GT
// use their difference forms with X_{-1} = X_0, M_{-1} = 0; ATC_GT runs the
// explicit tracker update with m_{-1} = 0.
void step_node_level(NetworkState& state, StrategyKind kind, const Matrix& w, double mu_x, double mu_y,
                     const Block& mx, const Block& my);

// K = 1 fallback: X <- X - mu_x Mx, Y <- Y + mu_y My.
void step_centralized(NetworkState& state, double mu_x, double mu_y, const Block& mx, const Block& my);

struct RunConfig {
  double mu_x = 1e-3;
  double mu_y = 1e-2;
  int rounds = 100;
  StrategyKind strategy = StrategyKind::kED;
  GraceConfig grace;
  UpdateForm form = UpdateForm::kGeneral;
  SeedSet seeds;
  int metrics_every = 1;
  double divergence_threshold = 1e12;
  bool record_trajectory = false;
  bool record_wallclock = false;
};

struct Initialization {
  Block x0;
  Block y0;
};

// Entries Normal(0, scale^2); with `consensus` every agent shares one draw.
Initialization make_initialization(int agents, int dim_x, int dim_y, std::uint64_t seed, double scale,
                                   bool consensus);

// Per-round record of a run, for the transformed-dynamics oracle.
struct Trajectory {
  std::vector<Block> x;   // X_0 .. X_T
  std::vector<Block> y;
  std::vector<Block> dx;  // Dx_0 .. Dx_T (general form)
  std::vector<Block> dy;
  std::vector<Block> mx;  // M_0 .. M_T (gradient blocks fed at each round)
  std::vector<Block> my;
};

struct RunResult {
  RunLog log;
  bool diverged = false;
  int diverged_round = -1;
  std::vector<std::string> warnings;
  std::vector<std::int64_t> oracle_counts;  // per agent, at the end
  std::vector<int> pi;                      // pi_1 .. pi_T
  std::optional<Trajectory> trajectory;
};

// Warm start, then T rounds of: combine with M_i, draw the shared pi, update
// every agent's estimator at the new iterate, record metrics.
RunResult run(const MinimaxProblem& problem, const MixingMatrix& mixing, const RunConfig& config,
              const Initialization& init);
// Single-agent run through step_centralized.
RunResult run_centralized(const MinimaxProblem& problem, const RunConfig& config, const Initialization& init);

// Feeds a fixed gradient stream M_0..M_{T-1} through one update form and
// returns X_0..X_T and Y_0..Y_T.
struct Replay {
  std::vector<Block> x;
  std::vector<Block> y;
};
Replay replay(const StrategySet& strategy, UpdateForm form, const Block& x0, const Block& y0, double mu_x,
              double mu_y, const std::vector<Block>& mx, const std::vector<Block>& my);

}  // namespace dmm
