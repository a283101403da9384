#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "dmm/common.hpp"
#include "dmm/topology.hpp"

namespace dmm {

enum class StrategyKind { kED, kEXTRA, kATC_GT, kSemiATC_GT, kNonATC_GT };

inline constexpr std::array<StrategyKind, 5> kAllStrategies = {
    StrategyKind::kED, StrategyKind::kEXTRA, StrategyKind::kATC_GT, StrategyKind::kSemiATC_GT,
    StrategyKind::kNonATC_GT};

std::string_view to_string(StrategyKind kind);
StrategyKind parse_strategy_kind(std::string_view name);
bool is_gradient_tracking(StrategyKind kind);

// K x K factors of the six block matrices: A_x = a ⊗ I_{d1}, A_y = a ⊗ I_{d2},
// and likewise for b, b_sq and c. The same factors serve both variables.
struct StrategySet {
  StrategyKind kind = StrategyKind::kED;
  Matrix a;
  Matrix b_sq;
  Matrix b;
  Matrix c;
  MixingMatrix w_ref;

  // Eigenvalues of a, c and b in the eigenbasis of w_ref (full length K, the
  // Perron entry first: a, c -> 1 and b -> 0).
  Vector eig_a;
  Vector eig_c;
  Vector eig_b;
};

StrategySet build_strategy(StrategyKind kind, const MixingMatrix& mixing);

struct ValidationCheck {
  std::string name;
  bool passed = false;
  double residual = 0;
  double tolerance = 0;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;

  bool all_passed() const;
  double max_residual() const;
  // Names of failed checks, comma separated; empty when everything passed.
  std::string failures() const;
};

// Checks symmetric/doubly stochastic a and c, PSD b_sq with null space span(1),
// b*b == b_sq, and that everything commutes with W and with each other.
ValidationReport validate_strategy(const StrategySet& strategy);

struct StrategyDiagnostics {
  double a_radius = 0;  // max |eig(a)| off span(1)
  double b_radius = 0;  // max |eig(b)| off span(1)
  double lambda_a = 0;  // max(a_radius, b_radius)
  double min_nonzero_eig_bsq = 0;
};

StrategyDiagnostics strategy_diagnostics(const StrategySet& strategy);

}  // namespace dmm
