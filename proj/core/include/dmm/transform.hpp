#pragma once

#include <iosfwd>
#include <vector>

#include "dmm/common.hpp"
#include "dmm/engine.hpp"
#include "dmm/strategy.hpp"

namespace dmm {

enum class BlockCase { kRealDistinct, kComplex, kJordan, kScalar };

// G = V T V^{-1} for one nontrivial eigenvalue of W.
struct BlockFactor {
  Eigen::Matrix2d g;
  Eigen::Matrix2d v;
  Eigen::Matrix2d t;
  Eigen::Matrix2d v_inv;
  BlockCase kind = BlockCase::kRealDistinct;
  double epsilon = 0;  // Jordan scaling, 0 otherwise
};

// Factorization of the 2(K-1) x 2(K-1) transition matrix P acting on the
// stacked coordinates [U_hat^T X; Lambda_b^{-1} U_hat^T Z]. The Kronecker
// factor I_d is implicit.
struct TransitionFactorization {
  std::vector<BlockFactor> blocks;
  Matrix p;
  Matrix q_hat;
  Matrix t;
  Matrix q_hat_inv;
  double t_norm = 0;                 // spectral norm of t
  double reassembly_residual = 0;    // ||P - Q T Q^{-1}||_F
  Matrix u_hat;                      // K x (K-1)
  Vector lambda_a;                   // complement eigenvalues of a, c, b
  Vector lambda_c;
  Vector lambda_b;
};

// |disc| <= kJordanTol * max(1, |trace|)^2 selects the Jordan path.
inline constexpr double kJordanTol = 1e-12;

BlockFactor factor_block(double lambda_a, double lambda_c, double lambda_b);

// Throws NumericError when the reassembly residual exceeds 1e-8.
TransitionFactorization build_transition(const StrategySet& strategy);

struct CoupledError {
  Block e_x;  // 2(K-1) x d1
  Block e_y;  // 2(K-1) x d2
  double tau_x = 1;
  double tau_y = 1;
};

// Z_x = mu_x A Mx + B Dx - B^2 X, Z_y = -mu_y A My + B Dy - B^2 Y.
Block auxiliary_x(const StrategySet& s, double mu_x, const Block& x, const Block& dx, const Block& mx);
Block auxiliary_y(const StrategySet& s, double mu_y, const Block& y, const Block& dy, const Block& my);

// [U_hat^T X; Lambda_b^{-1} U_hat^T Z].
Block stacked_coordinates(const TransitionFactorization& f, const Block& x, const Block& z);

CoupledError compute_error_vectors(const StrategySet& s, const TransitionFactorization& f, double mu_x,
                                   double mu_y, const Block& x, const Block& dx, const Block& mx, const Block& y,
                                   const Block& dy, const Block& my, double tau_x = 1.0, double tau_y = 1.0);

// Driving term -(mu/tau) Q^{-1} [0; Lambda_b^{-1} Lambda_a U_hat^T (M_i - M_{i+1})]
// for x; pass sign = -1 for y.
Block driving_term(const TransitionFactorization& f, double mu, double tau, double sign, const Block& m_i,
                   const Block& m_next);

struct RoundResidual {
  int round = 0;
  // max-norm centroid gap over max(1, max |X_{i+1}|)
  double centroid_x = 0;
  double centroid_y = 0;
  double error_x = 0;  // ||e_{i+1} - (T e_i + drive)|| / max(1, ||e_{i+1}||)
  double error_y = 0;
  double norm_e_x = 0;  // ||e_i||
  double norm_e_y = 0;
};

struct TransformReport {
  std::vector<RoundResidual> rounds;
  double t_norm = 0;
  double reassembly_residual = 0;
  double max_centroid = 0;
  double max_error = 0;
  // Zero-step runs only: ||e_{i+1}|| <= ||T|| ||e_i|| + 1e-10 at every round.
  bool contraction_checked = false;
  bool contraction_holds = true;
  double worst_contraction_excess = 0;
};

inline constexpr double kCentroidTol = 1e-12;
inline constexpr double kErrorTol = 1e-8;

// Replays a recorded general-form trajectory through the transformed system.
TransformReport verify_transformed_dynamics(const StrategySet& s, const TransitionFactorization& f,
                                            const Trajectory& trajectory, double mu_x, double mu_y,
                                            double tau_x = 1.0, double tau_y = 1.0);

void write_report(const TransformReport& report, std::ostream& out);

}  // namespace dmm
