#include "dmm/strategy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

namespace dmm {

std::string_view to_string(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::kED: return "ED";
    case StrategyKind::kEXTRA: return "EXTRA";
    case StrategyKind::kATC_GT: return "ATC_GT";
    case StrategyKind::kSemiATC_GT: return "SEMI_ATC_GT";
    case StrategyKind::kNonATC_GT: return "NON_ATC_GT";
  }
  return "unknown";
}

StrategyKind parse_strategy_kind(std::string_view name) {
  for (StrategyKind kind : kAllStrategies)
    if (to_string(kind) == name) return kind;
  throw InvalidArgument("unknown strategy '" + std::string(name) + "'");
}

bool is_gradient_tracking(StrategyKind kind) {
  return kind == StrategyKind::kATC_GT || kind == StrategyKind::kSemiATC_GT ||
         kind == StrategyKind::kNonATC_GT;
}

StrategySet build_strategy(StrategyKind kind, const MixingMatrix& mixing) {
  const Matrix& w = mixing.w();
  const int k = mixing.size();
  const Matrix identity = Matrix::Identity(k, k);
  const SpectralData& spectral = mixing.spectral();
  const Vector& lambda = spectral.lambda;

  // 1 - lambda, with the Perron entry pinned to exactly zero.
  Vector gap = (1.0 - lambda.array()).max(0.0).matrix();
  gap[0] = 0.0;

  StrategySet s{kind, Matrix(), Matrix(), Matrix(), Matrix(), mixing, Vector(), Vector(), Vector()};
  const Vector ones = Vector::Ones(k);
  switch (kind) {
    case StrategyKind::kED:
      s.a = w;
      s.c = identity;
      s.eig_a = lambda;
      s.eig_c = ones;
      break;
    case StrategyKind::kEXTRA:
      s.a = identity;
      s.c = w;
      s.eig_a = ones;
      s.eig_c = lambda;
      break;
    case StrategyKind::kATC_GT:
      s.a = w * w;
      s.c = identity;
      s.eig_a = lambda.array().square().matrix();
      s.eig_c = ones;
      break;
    case StrategyKind::kSemiATC_GT:
      s.a = w;
      s.c = w;
      s.eig_a = lambda;
      s.eig_c = lambda;
      break;
    case StrategyKind::kNonATC_GT:
      s.a = identity;
      s.c = w * w;
      s.eig_a = ones;
      s.eig_c = lambda.array().square().matrix();
      break;
  }
  s.eig_a[0] = 1.0;
  s.eig_c[0] = 1.0;

  if (is_gradient_tracking(kind)) {
    // B = I - W, so B^2 = (I - W)^2.
    s.b = identity - w;
    s.b_sq = s.b * s.b;
    s.eig_b = gap;
  } else {
    // B = (I - W)^{1/2} through the shared eigenbasis.
    s.b_sq = identity - w;
    s.eig_b = gap.array().sqrt().matrix();
    s.b = spectral.u * s.eig_b.asDiagonal() * spectral.u.transpose();
    s.b = 0.5 * (s.b + s.b.transpose());
    // Double centering keeps 1^T B at rounding level so the centroid stays exact.
    const Matrix center = identity - Matrix::Constant(w.rows(), w.rows(), 1.0 / static_cast<double>(w.rows()));
    s.b = center * s.b * center;
  }
  return s;
}

bool ValidationReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const ValidationCheck& c) { return c.passed; });
}

double ValidationReport::max_residual() const {
  double worst = 0.0;
  for (const auto& c : checks) worst = std::max(worst, c.residual);
  return worst;
}

std::string ValidationReport::failures() const {
  std::string out;
  for (const auto& c : checks) {
    if (c.passed) continue;
    if (!out.empty()) out += ", ";
    out += c.name;
  }
  return out;
}

namespace {

double doubly_stochastic_residual(const Matrix& m) {
  const double rows = (m.rowwise().sum().array() - 1.0).abs().maxCoeff();
  const double cols = (m.colwise().sum().array() - 1.0).abs().maxCoeff();
  return std::max(rows, cols);
}

double symmetry_residual(const Matrix& m) { return (m - m.transpose()).cwiseAbs().maxCoeff(); }

double commutator(const Matrix& x, const Matrix& y) { return (x * y - y * x).norm(); }

// Eigenvalues of a symmetric matrix, ascending.
Vector symmetric_eigenvalues(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericError("eigensolver failed");
  return solver.eigenvalues();
}

}  // namespace

ValidationReport validate_strategy(const StrategySet& s) {
  constexpr double kStochTol = 1e-12;
  constexpr double kTol = 1e-10;
  ValidationReport report;
  auto add = [&](std::string name, double residual, double tol) {
    report.checks.push_back({std::move(name), residual <= tol, residual, tol});
  };

  add("a symmetric", symmetry_residual(s.a), kStochTol);
  add("a doubly stochastic", doubly_stochastic_residual(s.a), kStochTol);
  add("c symmetric", symmetry_residual(s.c), kStochTol);
  add("c doubly stochastic", doubly_stochastic_residual(s.c), kStochTol);
  add("b_sq symmetric", symmetry_residual(s.b_sq), kTol);

  const Vector eig_bsq = symmetric_eigenvalues(s.b_sq);
  add("b_sq positive semidefinite", std::max(0.0, -eig_bsq[0]), kTol);
  const Vector ones = Vector::Ones(s.b.rows());
  add("b annihilates 1", (s.b * ones).cwiseAbs().maxCoeff(), kTol);
  {
    // null(b) is exactly span(1): the second-smallest eigenvalue must be positive.
    const double second = eig_bsq.size() > 1 ? eig_bsq[1] : 0.0;
    ValidationCheck c{"b_sq null space is span(1)", second > kTol, second > kTol ? 0.0 : kTol - second, kTol};
    report.checks.push_back(c);
  }
  add("b*b == b_sq", (s.b * s.b - s.b_sq).norm(), kTol);

  const Matrix& w = s.w_ref.w();
  add("a commutes with W", commutator(s.a, w), kTol);
  add("b_sq commutes with W", commutator(s.b_sq, w), kTol);
  add("c commutes with W", commutator(s.c, w), kTol);
  add("a commutes with b", commutator(s.a, s.b), kTol);
  add("a commutes with c", commutator(s.a, s.c), kTol);
  add("b commutes with c", commutator(s.b, s.c), kTol);
  return report;
}

StrategyDiagnostics strategy_diagnostics(const StrategySet& s) {
  StrategyDiagnostics d;
  const Eigen::Index k = s.eig_a.size();
  d.min_nonzero_eig_bsq = k > 1 ? std::numeric_limits<double>::infinity() : 0.0;
  for (Eigen::Index i = 1; i < k; ++i) {
    d.a_radius = std::max(d.a_radius, std::abs(s.eig_a[i]));
    d.b_radius = std::max(d.b_radius, std::abs(s.eig_b[i]));
    d.min_nonzero_eig_bsq = std::min(d.min_nonzero_eig_bsq, s.eig_b[i] * s.eig_b[i]);
  }
  d.lambda_a = std::max(d.a_radius, d.b_radius);
  return d;
}

}  // namespace dmm
