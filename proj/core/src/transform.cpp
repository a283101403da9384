#include "dmm/transform.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <Eigen/LU>
#include <Eigen/SVD>

namespace dmm {

namespace {

// Eigenvector of the 2x2 matrix g for eigenvalue r (complex allowed): the
// better-conditioned of the two null-space candidates.
Eigen::Vector2cd eigenvector(const Eigen::Matrix2d& g, std::complex<double> r) {
  Eigen::Vector2cd first(g(0, 1), r - g(0, 0));
  Eigen::Vector2cd second(r - g(1, 1), g(1, 0));
  Eigen::Vector2cd v = first.norm() >= second.norm() ? first : second;
  const double n = v.norm();
  if (!(n > 0.0)) throw NumericError("degenerate 2x2 eigenvector");
  return v / n;
}

double spectral_norm2(const Eigen::Matrix2d& m) {
  Eigen::JacobiSVD<Eigen::Matrix2d> svd(m);
  return svd.singularValues()(0);
}

}  // namespace

BlockFactor factor_block(double lambda_a, double lambda_c, double lambda_b) {
  BlockFactor f;
  f.g << lambda_a * lambda_c - lambda_b * lambda_b, -lambda_b, lambda_b, 1.0;
  const double tr = f.g.trace();
  const double det = f.g.determinant();
  const double disc = tr * tr - 4.0 * det;
  const double scale = std::max(1.0, std::abs(tr));

  if (std::abs(disc) <= kJordanTol * scale * scale) {
    const double gamma = 0.5 * tr;
    const Eigen::Matrix2d n = f.g - gamma * Eigen::Matrix2d::Identity();
    if (n.norm() <= 1e-14 * scale) {
      f.kind = BlockCase::kScalar;
      f.v.setIdentity();
      f.t = gamma * Eigen::Matrix2d::Identity();
    } else {
      f.kind = BlockCase::kJordan;
      // v2 outside ker(N), v1 = N v2 spans ker(N): G [v1 v2] = [v1 v2] J.
      const Eigen::Vector2d e0(1.0, 0.0), e1(0.0, 1.0);
      const Eigen::Vector2d v2 = (n * e0).norm() >= (n * e1).norm() ? e0 : e1;
      const Eigen::Vector2d v1 = n * v2;
      f.epsilon = std::abs(gamma) < 1.0 ? 0.5 * (1.0 - std::abs(gamma)) : 0.5;
      f.v.col(0) = v1;
      f.v.col(1) = f.epsilon * v2;
      f.t << gamma, f.epsilon, 0.0, gamma;
    }
  } else if (disc < 0.0) {
    f.kind = BlockCase::kComplex;
    const double re = 0.5 * tr;
    const double im = 0.5 * std::sqrt(-disc);
    const Eigen::Vector2cd v = eigenvector(f.g, {re, im});
    f.v.col(0) = v.real();
    f.v.col(1) = v.imag();
    f.t << re, im, -im, re;
  } else {
    f.kind = BlockCase::kRealDistinct;
    const double root = std::sqrt(disc);
    const double r1 = 0.5 * (tr + (tr >= 0.0 ? root : -root));
    const double r2 = r1 != 0.0 ? det / r1 : 0.5 * (tr - root);
    f.v.col(0) = eigenvector(f.g, r1).real();
    f.v.col(1) = eigenvector(f.g, r2).real();
    f.t << r1, 0.0, 0.0, r2;
  }
  f.v_inv = f.v.inverse();
  return f;
}

TransitionFactorization build_transition(const StrategySet& s) {
  const SpectralData& spectral = s.w_ref.spectral();
  const auto k = static_cast<int>(spectral.lambda.size());
  require(k >= 2, "the transformed system needs K >= 2");
  const int n = k - 1;

  TransitionFactorization f;
  f.u_hat = spectral.u_hat();
  f.lambda_a = s.eig_a.tail(n);
  f.lambda_c = s.eig_c.tail(n);
  f.lambda_b = s.eig_b.tail(n);
  if (!(f.lambda_b.minCoeff() > 0.0)) throw NumericError("Lambda_b is singular on the complement of span(1)");

  f.p = Matrix::Zero(2 * n, 2 * n);
  f.q_hat = Matrix::Zero(2 * n, 2 * n);
  f.t = Matrix::Zero(2 * n, 2 * n);
  f.q_hat_inv = Matrix::Zero(2 * n, 2 * n);
  for (int j = 0; j < n; ++j) {
    const double la = f.lambda_a[j];
    const double lc = f.lambda_c[j];
    const double lb = f.lambda_b[j];
    f.p(j, j) = la * lc - lb * lb;
    f.p(j, n + j) = -lb;
    f.p(n + j, j) = lb;
    f.p(n + j, n + j) = 1.0;

    BlockFactor b = factor_block(la, lc, lb);
    // Row j holds the X coordinate, row n + j the Z coordinate; columns 2j,
    // 2j + 1 are the grouped coordinates of block j.
    const int rows[2] = {j, n + j};
    for (int r = 0; r < 2; ++r) {
      for (int c = 0; c < 2; ++c) {
        f.q_hat(rows[r], 2 * j + c) = b.v(r, c);
        f.q_hat_inv(2 * j + c, rows[r]) = b.v_inv(c, r);
        f.t(2 * j + r, 2 * j + c) = b.t(r, c);
      }
    }
    f.t_norm = std::max(f.t_norm, spectral_norm2(b.t));
    f.blocks.push_back(std::move(b));
  }
  f.reassembly_residual = (f.p - f.q_hat * f.t * f.q_hat_inv).norm();
  if (f.reassembly_residual > 1e-8)
    throw NumericError("transition reassembly residual " + format_double(f.reassembly_residual) + " above 1e-8");
  return f;
}

Block auxiliary_x(const StrategySet& s, double mu_x, const Block& x, const Block& dx, const Block& mx) {
  Block z = mu_x * (s.a * mx);
  z += s.b * dx;
  z -= s.b_sq * x;
  return z;
}

Block auxiliary_y(const StrategySet& s, double mu_y, const Block& y, const Block& dy, const Block& my) {
  Block z = -mu_y * (s.a * my);
  z += s.b * dy;
  z -= s.b_sq * y;
  return z;
}

Block stacked_coordinates(const TransitionFactorization& f, const Block& x, const Block& z) {
  const Eigen::Index n = f.u_hat.cols();
  Block out(2 * n, x.cols());
  out.topRows(n) = f.u_hat.transpose() * x;
  out.bottomRows(n) = f.lambda_b.cwiseInverse().asDiagonal() * (f.u_hat.transpose() * z);
  return out;
}

CoupledError compute_error_vectors(const StrategySet& s, const TransitionFactorization& f, double mu_x,
                                   double mu_y, const Block& x, const Block& dx, const Block& mx, const Block& y,
                                   const Block& dy, const Block& my, double tau_x, double tau_y) {
  require(tau_x > 0.0 && tau_y > 0.0, "tau must be positive");
  CoupledError e;
  e.tau_x = tau_x;
  e.tau_y = tau_y;
  e.e_x = (f.q_hat_inv * stacked_coordinates(f, x, auxiliary_x(s, mu_x, x, dx, mx))) / tau_x;
  e.e_y = (f.q_hat_inv * stacked_coordinates(f, y, auxiliary_y(s, mu_y, y, dy, my))) / tau_y;
  return e;
}

Block driving_term(const TransitionFactorization& f, double mu, double tau, double sign, const Block& m_i,
                   const Block& m_next) {
  const Eigen::Index n = f.u_hat.cols();
  Block stacked = Block::Zero(2 * n, m_i.cols());
  const Vector ratio = f.lambda_a.cwiseQuotient(f.lambda_b);
  stacked.bottomRows(n) = ratio.asDiagonal() * (f.u_hat.transpose() * (m_i - m_next));
  return (-sign * mu / tau) * (f.q_hat_inv * stacked);
}

TransformReport verify_transformed_dynamics(const StrategySet& s, const TransitionFactorization& f,
                                            const Trajectory& tr, double mu_x, double mu_y, double tau_x,
                                            double tau_y) {
  const std::size_t count = tr.x.size();
  require(count >= 1 && tr.y.size() == count && tr.dx.size() == count && tr.dy.size() == count &&
              tr.mx.size() == count && tr.my.size() == count,
          "trajectory needs X, Y, D and M for every round");
  TransformReport report;
  report.t_norm = f.t_norm;
  report.reassembly_residual = f.reassembly_residual;
  report.contraction_checked = mu_x == 0.0 && mu_y == 0.0;

  std::vector<CoupledError> errors;
  errors.reserve(count);
  for (std::size_t i = 0; i < count; ++i)
    errors.push_back(compute_error_vectors(s, f, mu_x, mu_y, tr.x[i], tr.dx[i], tr.mx[i], tr.y[i], tr.dy[i],
                                           tr.my[i], tau_x, tau_y));

  for (std::size_t i = 0; i + 1 < count; ++i) {
    RoundResidual r;
    r.round = static_cast<int>(i);
    const Vector cx_pred = centroid(tr.x[i]) - mu_x * centroid(tr.mx[i]);
    const Vector cy_pred = centroid(tr.y[i]) + mu_y * centroid(tr.my[i]);
    r.centroid_x = (centroid(tr.x[i + 1]) - cx_pred).cwiseAbs().maxCoeff() /
                   std::max(1.0, tr.x[i + 1].cwiseAbs().maxCoeff());
    r.centroid_y = (centroid(tr.y[i + 1]) - cy_pred).cwiseAbs().maxCoeff() /
                   std::max(1.0, tr.y[i + 1].cwiseAbs().maxCoeff());

    const CoupledError& now = errors[i];
    const CoupledError& next = errors[i + 1];
    const Block pred_x = f.t * now.e_x + driving_term(f, mu_x, tau_x, 1.0, tr.mx[i], tr.mx[i + 1]);
    const Block pred_y = f.t * now.e_y + driving_term(f, mu_y, tau_y, -1.0, tr.my[i], tr.my[i + 1]);
    r.error_x = (next.e_x - pred_x).norm() / std::max(1.0, next.e_x.norm());
    r.error_y = (next.e_y - pred_y).norm() / std::max(1.0, next.e_y.norm());
    r.norm_e_x = now.e_x.norm();
    r.norm_e_y = now.e_y.norm();

    report.max_centroid = std::max({report.max_centroid, r.centroid_x, r.centroid_y});
    report.max_error = std::max({report.max_error, r.error_x, r.error_y});
    if (report.contraction_checked) {
      const double excess_x = next.e_x.norm() - (f.t_norm * now.e_x.norm() + 1e-10);
      const double excess_y = next.e_y.norm() - (f.t_norm * now.e_y.norm() + 1e-10);
      const double excess = std::max(excess_x, excess_y);
      report.worst_contraction_excess =
          i == 0 ? excess : std::max(report.worst_contraction_excess, excess);
      if (excess > 0.0) report.contraction_holds = false;
    }
    report.rounds.push_back(r);
  }
  return report;
}

void write_report(const TransformReport& report, std::ostream& out) {
  out << "t_norm " << format_double(report.t_norm) << '\n';
  out << "reassembly_residual " << format_double(report.reassembly_residual) << '\n';
  out << "max_centroid_residual " << format_double(report.max_centroid) << '\n';
  out << "max_error_residual " << format_double(report.max_error) << '\n';
  if (report.contraction_checked)
    out << "contraction " << (report.contraction_holds ? "holds" : "violated") << " worst_excess "
        << format_double(report.worst_contraction_excess) << '\n';
  out << "round,centroid_x,centroid_y,error_x,error_y,norm_e_x,norm_e_y\n";
  for (const RoundResidual& r : report.rounds) {
    out << r.round << ',' << format_double(r.centroid_x) << ',' << format_double(r.centroid_y) << ','
        << format_double(r.error_x) << ',' << format_double(r.error_y) << ',' << format_double(r.norm_e_x) << ','
        << format_double(r.norm_e_y) << '\n';
  }
}

}  // namespace dmm
