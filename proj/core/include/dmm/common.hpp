#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace dmm {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Stacked per-agent block: row k holds agent k's vector. Network-wide block
// operators of the form (M ⊗ I_d) act as M * Block.
using Block = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Bad user input: shapes, ranges, malformed configuration.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Internal numerical failure (eigensolver, factorization reassembly).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw InvalidArgument(message);
}

// Shortest decimal text that round-trips to the same double.
std::string format_double(double value);

// Strict full-string parse; throws InvalidArgument naming `what` on failure.
double parse_double(const std::string& text, const std::string& what);

}  // namespace dmm
