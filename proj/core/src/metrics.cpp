#include "dmm/metrics.hpp"

#include <algorithm>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

namespace dmm {

Vector centroid(const Block& stacked) {
  require(stacked.rows() >= 1, "empty network block");
  return stacked.colwise().mean().transpose();
}

double consensus_error(const Block& stacked) {
  const Eigen::RowVectorXd c = stacked.colwise().mean();
  return (stacked.rowwise() - c).squaredNorm();
}

RunRow record(const Block& x, const Block& y, const MinimaxProblem& problem,
              const std::vector<std::int64_t>& oracle_counts, int round, int pi,
              std::int64_t wallclock_us) {
  RunRow row;
  row.round = round;
  const auto [gx, gy] = problem.saddle_residual(centroid(x), centroid(y));
  row.grad_x_sq = gx;
  row.grad_y_sq = gy;
  row.consensus_x = consensus_error(x);
  row.consensus_y = consensus_error(y);
  if (!oracle_counts.empty()) {
    row.oracle_max = *std::max_element(oracle_counts.begin(), oracle_counts.end());
    const std::int64_t total = std::accumulate(oracle_counts.begin(), oracle_counts.end(), std::int64_t{0});
    row.oracle_mean = static_cast<double>(total) / static_cast<double>(oracle_counts.size());
  }
  row.pi = pi;
  row.wallclock_us = wallclock_us;
  return row;
}

void write_csv(const RunLog& log, std::ostream& out) {
  out << kCsvHeader << '\n';
  for (const RunRow& r : log.rows) {
    out << r.round << ',' << format_double(r.grad_x_sq) << ',' << format_double(r.grad_y_sq) << ','
        << format_double(r.consensus_x) << ',' << format_double(r.consensus_y) << ',' << r.oracle_max << ','
        << format_double(r.oracle_mean) << ',' << r.pi << ',' << r.wallclock_us << '\n';
  }
}

namespace {

std::int64_t parse_int(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  long long value = 0;
  try {
    value = std::stoll(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || text.empty()) throw InvalidArgument("invalid integer for " + what + ": '" + text + "'");
  return value;
}

}  // namespace

RunLog read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) throw InvalidArgument("run log header mismatch");
  RunLog log;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) f.push_back(field);
    const std::string where = "line " + std::to_string(line_no);
    if (f.size() != 9) throw InvalidArgument("run log " + where + " needs 9 fields");
    RunRow r;
    r.round = static_cast<int>(parse_int(f[0], where));
    r.grad_x_sq = parse_double(f[1], where);
    r.grad_y_sq = parse_double(f[2], where);
    r.consensus_x = parse_double(f[3], where);
    r.consensus_y = parse_double(f[4], where);
    r.oracle_max = parse_int(f[5], where);
    r.oracle_mean = parse_double(f[6], where);
    r.pi = static_cast<int>(parse_int(f[7], where));
    r.wallclock_us = parse_int(f[8], where);
    log.rows.push_back(r);
  }
  return log;
}

std::optional<int> first_stationary_round(const RunLog& log, double eps) {
  const double threshold = eps * eps;
  for (const RunRow& r : log.rows)
    if (r.grad_x_sq <= threshold && r.grad_y_sq <= threshold) return r.round;
  return std::nullopt;
}

}  // namespace dmm
