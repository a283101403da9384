#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <vector>

#include "dmm/common.hpp"
#include "dmm/problems.hpp"

namespace dmm {

inline constexpr std::string_view kCsvHeader =
    "round,grad_x_sq,grad_y_sq,consensus_x,consensus_y,oracle_max,oracle_mean,pi,wallclock_us";

struct RunRow {
  int round = 0;
  double grad_x_sq = 0;  // ||grad_x J(x_c, y_c)||^2
  double grad_y_sq = 0;
  double consensus_x = 0;  // ||X - 1 (x) x_c||^2
  double consensus_y = 0;
  std::int64_t oracle_max = 0;
  double oracle_mean = 0;
  int pi = 0;
  std::int64_t wallclock_us = 0;

  bool operator==(const RunRow&) const = default;
};

struct RunLog {
  std::vector<RunRow> rows;
};

Vector centroid(const Block& stacked);
double consensus_error(const Block& stacked);

// Exact deterministic gradients at the centroid plus consensus norms.
RunRow record(const Block& x, const Block& y, const MinimaxProblem& problem,
              const std::vector<std::int64_t>& oracle_counts, int round, int pi,
              std::int64_t wallclock_us);

void write_csv(const RunLog& log, std::ostream& out);
// Throws InvalidArgument on a header mismatch or malformed row.
RunLog read_csv(std::istream& in);

// First round whose gradient norms are both <= eps^2.
std::optional<int> first_stationary_round(const RunLog& log, double eps);

}  // namespace dmm
