#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "dmm/common.hpp"
#include "dmm/rng.hpp"

namespace dmm {

enum class SamplingMode { kOnline, kOffline };

// One stochastic sample. Offline problems address their dataset by index;
// online problems carry the drawn randomness in `payload`.
struct Sample {
  std::int64_t index = -1;
  Vector payload;
};

struct GradientPair {
  Vector x;
  Vector y;
};

// Stochastic minimax problem min_x max_y (1/K) sum_k J_k(x, y), with
// J_k = E[Q_k(x, y; xi)]. Immutable; all randomness comes from caller streams.
class MinimaxProblem {
 public:
  virtual ~MinimaxProblem() = default;

  virtual int dim_x() const = 0;
  virtual int dim_y() const = 0;
  virtual int agent_count() const = 0;
  virtual SamplingMode sampling() const = 0;
  // N_k in offline mode, 0 online.
  virtual std::size_t local_size(int agent) const = 0;

  // Online: a fresh i.i.d. draw. Offline: a uniform index, with replacement.
  virtual Sample draw(int agent, Rng& rng) const = 0;

  virtual double loss(int agent, const Sample& sample, const Vector& x, const Vector& y) const = 0;
  virtual void loss_gradient(int agent, const Sample& sample, const Vector& x, const Vector& y,
                             Vector& gx, Vector& gy) const = 0;
  // Exact grad J_k (full local batch offline, population expectation online).
  virtual void local_gradient(int agent, const Vector& x, const Vector& y, Vector& gx,
                              Vector& gy) const = 0;

  virtual bool has_hessian_products() const { return false; }
  // [hx; hy] = Hessian of Q_k at (x, y) applied to [dx; dy].
  virtual void hessian_product(int agent, const Sample& sample, const Vector& x, const Vector& y,
                               const Vector& dx, const Vector& dy, Vector& hx, Vector& hy) const;

  // Exact saddle point of J when known in closed form.
  virtual std::optional<std::pair<Vector, Vector>> saddle_point() const { return std::nullopt; }

  GradientPair loss_gradient(int agent, const Sample& sample, const Vector& x,
                             const Vector& y) const;
  GradientPair local_gradient(int agent, const Vector& x, const Vector& y) const;
  GradientPair global_gradient(const Vector& x, const Vector& y) const;
  // (||grad_x J||^2, ||grad_y J||^2) at (x, y).
  std::pair<double, double> saddle_residual(const Vector& x, const Vector& y) const;

 protected:
  void check_shapes(const Vector& x, const Vector& y) const;
  void check_agent(int agent) const;
};

struct QuadraticOptions {
  int agents = 8;
  int dim_x = 16;
  int dim_y = 16;
  int samples_per_agent = 200;
  double nu = 10.0;
  double data_mean = 1.0;
  double hetero_shift = 0.01;
  double data_var = 10.0;
  double noise_var = 10.0;
  double coupling_var = 0.001;
  // Read the three *_var fields as standard deviations instead of variances.
  bool variance_is_std = false;
  SamplingMode sampling = SamplingMode::kOffline;
  bool hessian_products = true;
};

// Q_k = 1/2 (a^T x)^2 + y^T (B_k x + e) - nu/2 ||y||^2 with a entries drawn
// from Normal(data_mean + hetero_shift * k, data_var) for 1-based agent k.
class QuadraticMinimax final : public MinimaxProblem {
 public:
  using MinimaxProblem::local_gradient;
  using MinimaxProblem::loss_gradient;

  QuadraticMinimax(QuadraticOptions options, std::vector<Matrix> coupling,
                   std::vector<Matrix> samples_a, std::vector<Matrix> samples_e);

  int dim_x() const override { return options_.dim_x; }
  int dim_y() const override { return options_.dim_y; }
  int agent_count() const override { return options_.agents; }
  SamplingMode sampling() const override { return options_.sampling; }
  std::size_t local_size(int agent) const override;
  Sample draw(int agent, Rng& rng) const override;
  double loss(int agent, const Sample& sample, const Vector& x, const Vector& y) const override;
  void loss_gradient(int agent, const Sample& sample, const Vector& x, const Vector& y, Vector& gx,
                     Vector& gy) const override;
  void local_gradient(int agent, const Vector& x, const Vector& y, Vector& gx,
                      Vector& gy) const override;
  bool has_hessian_products() const override { return options_.hessian_products; }
  void hessian_product(int agent, const Sample& sample, const Vector& x, const Vector& y,
                       const Vector& dx, const Vector& dy, Vector& hx, Vector& hy) const override;
  std::optional<std::pair<Vector, Vector>> saddle_point() const override;

  const QuadraticOptions& options() const { return options_; }
  const Matrix& coupling(int agent) const { return coupling_.at(agent); }
  // N_k x d1 and N_k x d2 offline datasets (empty online).
  const Matrix& samples_a(int agent) const { return samples_a_.at(agent); }
  const Matrix& samples_e(int agent) const { return samples_e_.at(agent); }
  double agent_mean(int agent) const;
  // E[a a^T] for agent k (empirical offline, population online).
  const Matrix& second_moment(int agent) const { return second_moment_.at(agent); }

 private:
  // Splits a sample into (a, e) views.
  std::pair<Vector, Vector> unpack(int agent, const Sample& sample) const;

  QuadraticOptions options_;
  std::vector<Matrix> coupling_;
  std::vector<Matrix> samples_a_;
  std::vector<Matrix> samples_e_;
  std::vector<Matrix> second_moment_;
  std::vector<Vector> mean_e_;
};

// Throws InvalidArgument on non-positive dims, nu <= 0 or negative spreads.
std::shared_ptr<QuadraticMinimax> make_quadratic(const QuadraticOptions& options,
                                                 std::uint64_t seed);

// Dataset audit format: one row per sample, `agent,sample,a_0..,e_0..`, and one
// row per coupling row, `agent,row,b_0..`.
void write_samples_csv(const QuadraticMinimax& problem, std::ostream& out);
void write_coupling_csv(const QuadraticMinimax& problem, std::ostream& out);
std::shared_ptr<QuadraticMinimax> load_quadratic(const QuadraticOptions& options,
                                                 std::istream& samples, std::istream& coupling);

struct BilinearOptions {
  int agents = 4;
  int dim_x = 3;
  int dim_y = 2;
  int samples_per_agent = 50;
  double nu = 1.0;
  double noise_std = 1.0;
  SamplingMode sampling = SamplingMode::kOffline;
};

// Q_k = 1/2 ||x - c_k - xi||^2 + x^T M y - nu/2 ||y||^2 with zero-mean noise xi.
// Saddle: (I + M M^T / nu) x = mean(c_k + E xi), y = M^T x / nu.
class BilinearSaddle final : public MinimaxProblem {
 public:
  using MinimaxProblem::local_gradient;
  using MinimaxProblem::loss_gradient;

  BilinearSaddle(BilinearOptions options, std::vector<Vector> centers, Matrix m,
                 std::vector<Matrix> noise);

  int dim_x() const override { return options_.dim_x; }
  int dim_y() const override { return options_.dim_y; }
  int agent_count() const override { return options_.agents; }
  SamplingMode sampling() const override { return options_.sampling; }
  std::size_t local_size(int agent) const override;
  Sample draw(int agent, Rng& rng) const override;
  double loss(int agent, const Sample& sample, const Vector& x, const Vector& y) const override;
  void loss_gradient(int agent, const Sample& sample, const Vector& x, const Vector& y, Vector& gx,
                     Vector& gy) const override;
  void local_gradient(int agent, const Vector& x, const Vector& y, Vector& gx,
                      Vector& gy) const override;
  bool has_hessian_products() const override { return true; }
  void hessian_product(int agent, const Sample& sample, const Vector& x, const Vector& y,
                       const Vector& dx, const Vector& dy, Vector& hx, Vector& hy) const override;
  std::optional<std::pair<Vector, Vector>> saddle_point() const override;

  const Matrix& coupling() const { return m_; }

 private:
  Vector noise(int agent, const Sample& sample) const;
  Vector mean_noise(int agent) const;

  BilinearOptions options_;
  std::vector<Vector> centers_;
  Matrix m_;
  std::vector<Matrix> noise_;
};

std::shared_ptr<BilinearSaddle> make_bilinear(const BilinearOptions& options, std::uint64_t seed);

}  // namespace dmm
