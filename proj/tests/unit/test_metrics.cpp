#include <limits>
#include <sstream>

#include <gtest/gtest.h>

#include "dmm/metrics.hpp"

namespace dmm {
namespace {

TEST(Metrics, CentroidAndConsensusByHand) {
  Block x(2, 2);
  x << 1, 2, 3, 6;
  EXPECT_EQ(centroid(x), Vector((Vector(2) << 2, 4).finished()));
  // Deviations (-1, -2) and (1, 2).
  EXPECT_DOUBLE_EQ(consensus_error(x), 10.0);
  EXPECT_DOUBLE_EQ(consensus_error(Block::Constant(3, 4, 1.5)), 0.0);
}

TEST(Metrics, RecordUsesExactGradientAtTheCentroid) {
  QuadraticOptions o;
  o.agents = 3;
  o.dim_x = o.dim_y = 2;
  o.samples_per_agent = 20;
  const auto p = make_quadratic(o, 6);
  Block x(3, 2), y(3, 2);
  x << 1, 0, 0, 1, 2, 2;
  y << 0, 0, 1, 1, -1, 2;
  const RunRow row = record(x, y, *p, {10, 20, 30}, 7, 1, 0);
  const GradientPair g = p->global_gradient(centroid(x), centroid(y));
  EXPECT_DOUBLE_EQ(row.grad_x_sq, g.x.squaredNorm());
  EXPECT_DOUBLE_EQ(row.grad_y_sq, g.y.squaredNorm());
  EXPECT_DOUBLE_EQ(row.consensus_x, consensus_error(x));
  EXPECT_EQ(row.oracle_max, 30);
  EXPECT_DOUBLE_EQ(row.oracle_mean, 20.0);
  EXPECT_EQ(row.round, 7);
  EXPECT_EQ(row.pi, 1);
}

TEST(Metrics, CsvHeaderIsFixed) {
  std::ostringstream out;
  write_csv(RunLog{}, out);
  EXPECT_EQ(out.str(), "round,grad_x_sq,grad_y_sq,consensus_x,consensus_y,oracle_max,oracle_mean,pi,wallclock_us\n");
}

TEST(Metrics, CsvRoundTripsExactly) {
  RunLog log;
  log.rows.push_back({0, 0.1, 1.0 / 3.0, 1e-300, 123456.789, 1000, 1000.5, 0, 0});
  log.rows.push_back({5, std::numeric_limits<double>::denorm_min(), 2.0, 0.0, 7e22, 1234, 1233.25, 1, 98});
  std::stringstream io;
  write_csv(log, io);
  const RunLog back = read_csv(io);
  EXPECT_EQ(back.rows, log.rows);
}

TEST(Metrics, CsvReaderRejectsMalformedInput) {
  std::istringstream bad_header("round,grad\n0,1\n");
  EXPECT_THROW(read_csv(bad_header), InvalidArgument);
  std::istringstream short_row(std::string(kCsvHeader) + "\n0,1,2\n");
  EXPECT_THROW(read_csv(short_row), InvalidArgument);
  std::istringstream junk(std::string(kCsvHeader) + "\n0,x,1,1,1,1,1,0,0\n");
  EXPECT_THROW(read_csv(junk), InvalidArgument);
}

TEST(Metrics, FirstStationaryRound) {
  RunLog log;
  log.rows.push_back({0, 1.0, 1.0, 0, 0, 0, 0, 0, 0});
  log.rows.push_back({10, 1e-3, 0.5, 0, 0, 0, 0, 0, 0});
  log.rows.push_back({20, 1e-5, 1e-5, 0, 0, 0, 0, 0, 0});
  log.rows.push_back({30, 1e-7, 1e-7, 0, 0, 0, 0, 0, 0});
  EXPECT_EQ(first_stationary_round(log, 1e-2), 20);
  EXPECT_EQ(first_stationary_round(log, 1.0), 0);
  EXPECT_FALSE(first_stationary_round(log, 1e-4).has_value());
}

}  // namespace
}  // namespace dmm
