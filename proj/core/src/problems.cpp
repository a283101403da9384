#include "dmm/problems.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include <Eigen/LU>

namespace dmm {

// ---------------------------------------------------------------- interface

void MinimaxProblem::hessian_product(int, const Sample&, const Vector&, const Vector&,
                                     const Vector&, const Vector&, Vector&, Vector&) const {
  throw InvalidArgument("problem does not provide Hessian-vector products");
}

GradientPair MinimaxProblem::loss_gradient(int agent, const Sample& sample, const Vector& x,
                                           const Vector& y) const {
  GradientPair g;
  loss_gradient(agent, sample, x, y, g.x, g.y);
  return g;
}

GradientPair MinimaxProblem::local_gradient(int agent, const Vector& x, const Vector& y) const {
  GradientPair g;
  local_gradient(agent, x, y, g.x, g.y);
  return g;
}

GradientPair MinimaxProblem::global_gradient(const Vector& x, const Vector& y) const {
  check_shapes(x, y);
  GradientPair total{Vector::Zero(dim_x()), Vector::Zero(dim_y())};
  Vector gx, gy;
  for (int k = 0; k < agent_count(); ++k) {
    local_gradient(k, x, y, gx, gy);
    total.x += gx;
    total.y += gy;
  }
  total.x /= agent_count();
  total.y /= agent_count();
  return total;
}

std::pair<double, double> MinimaxProblem::saddle_residual(const Vector& x, const Vector& y) const {
  const GradientPair g = global_gradient(x, y);
  return {g.x.squaredNorm(), g.y.squaredNorm()};
}

void MinimaxProblem::check_shapes(const Vector& x, const Vector& y) const {
  if (x.size() != dim_x() || y.size() != dim_y())
    throw InvalidArgument("shape mismatch: expected x in R^" + std::to_string(dim_x()) +
                          ", y in R^" + std::to_string(dim_y()));
}

void MinimaxProblem::check_agent(int agent) const {
  require(agent >= 0 && agent < agent_count(), "agent index out of range");
}

namespace {

std::size_t draw_index(std::size_t n, Rng& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  return pick(rng);
}

double spread(double value, bool is_std) { return is_std ? value : std::sqrt(value); }

// Normal draw that also accepts a zero standard deviation.
class Normal {
 public:
  Normal(double mean, double sd) : mean_(mean), sd_(sd), dist_(0.0, 1.0) {}
  double operator()(Rng& rng) { return sd_ > 0.0 ? mean_ + sd_ * dist_(rng) : mean_; }

 private:
  double mean_;
  double sd_;
  std::normal_distribution<double> dist_;
};

std::vector<double> split_csv_numbers(const std::string& line, std::size_t line_no) {
  std::vector<double> values;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ','))
    values.push_back(parse_double(field, "csv line " + std::to_string(line_no)));
  return values;
}

}  // namespace

// ---------------------------------------------------------------- quadratic

QuadraticMinimax::QuadraticMinimax(QuadraticOptions options, std::vector<Matrix> coupling,
                                   std::vector<Matrix> samples_a, std::vector<Matrix> samples_e)
    : options_(options),
      coupling_(std::move(coupling)),
      samples_a_(std::move(samples_a)),
      samples_e_(std::move(samples_e)) {
  const int k_count = options_.agents;
  const int d1 = options_.dim_x;
  const int d2 = options_.dim_y;
  require(k_count >= 1 && d1 >= 1 && d2 >= 1, "quadratic problem needs positive dimensions");
  require(options_.nu > 0.0, "nu must be positive");
  require(static_cast<int>(coupling_.size()) == k_count, "one coupling matrix per agent");
  for (const Matrix& b : coupling_) require(b.rows() == d2 && b.cols() == d1, "coupling must be d2 x d1");

  const bool offline = options_.sampling == SamplingMode::kOffline;
  if (offline) {
    require(static_cast<int>(samples_a_.size()) == k_count && static_cast<int>(samples_e_.size()) == k_count,
            "offline problem needs one dataset per agent");
  } else {
    samples_a_.assign(k_count, Matrix());
    samples_e_.assign(k_count, Matrix());
  }
  for (int k = 0; k < k_count; ++k) {
    if (offline) {
      const Matrix& a = samples_a_[k];
      const Matrix& e = samples_e_[k];
      require(a.rows() >= 1 && a.rows() == e.rows(), "every agent needs N_k >= 1 samples");
      require(a.cols() == d1 && e.cols() == d2, "sample width does not match dimensions");
      const double n = static_cast<double>(a.rows());
      second_moment_.push_back(a.transpose() * a / n);
      mean_e_.push_back(e.colwise().mean().transpose());
    } else {
      const double m = agent_mean(k);
      const double s = spread(options_.data_var, options_.variance_is_std);
      second_moment_.push_back(Matrix::Constant(d1, d1, m * m) + s * s * Matrix::Identity(d1, d1));
      mean_e_.push_back(Vector::Zero(d2));
    }
  }
}

double QuadraticMinimax::agent_mean(int agent) const {
  return options_.data_mean + options_.hetero_shift * static_cast<double>(agent + 1);
}

std::size_t QuadraticMinimax::local_size(int agent) const {
  check_agent(agent);
  return options_.sampling == SamplingMode::kOffline ? static_cast<std::size_t>(samples_a_[agent].rows())
                                                      : 0;
}

Sample QuadraticMinimax::draw(int agent, Rng& rng) const {
  check_agent(agent);
  Sample s;
  if (options_.sampling == SamplingMode::kOffline) {
    s.index = static_cast<std::int64_t>(draw_index(local_size(agent), rng));
    return s;
  }
  const int d1 = options_.dim_x;
  const int d2 = options_.dim_y;
  Normal a_dist(agent_mean(agent), spread(options_.data_var, options_.variance_is_std));
  Normal e_dist(0.0, spread(options_.noise_var, options_.variance_is_std));
  s.payload.resize(d1 + d2);
  for (int j = 0; j < d1; ++j) s.payload[j] = a_dist(rng);
  for (int j = 0; j < d2; ++j) s.payload[d1 + j] = e_dist(rng);
  return s;
}

std::pair<Vector, Vector> QuadraticMinimax::unpack(int agent, const Sample& sample) const {
  check_agent(agent);
  if (options_.sampling == SamplingMode::kOffline) {
    require(sample.index >= 0 && sample.index < samples_a_[agent].rows(), "sample index out of range");
    return {samples_a_[agent].row(sample.index).transpose(), samples_e_[agent].row(sample.index).transpose()};
  }
  require(sample.payload.size() == options_.dim_x + options_.dim_y, "online sample payload has wrong size");
  return {sample.payload.head(options_.dim_x), sample.payload.tail(options_.dim_y)};
}

double QuadraticMinimax::loss(int agent, const Sample& sample, const Vector& x, const Vector& y) const {
  check_shapes(x, y);
  const auto [a, e] = unpack(agent, sample);
  const double ax = a.dot(x);
  return 0.5 * ax * ax + y.dot(coupling_[agent] * x + e) - 0.5 * options_.nu * y.squaredNorm();
}

void QuadraticMinimax::loss_gradient(int agent, const Sample& sample, const Vector& x, const Vector& y,
                                     Vector& gx, Vector& gy) const {
  check_shapes(x, y);
  const auto [a, e] = unpack(agent, sample);
  const Matrix& b = coupling_[agent];
  gx.noalias() = b.transpose() * y;
  gx += a * a.dot(x);
  gy.noalias() = b * x;
  gy += e - options_.nu * y;
}

void QuadraticMinimax::local_gradient(int agent, const Vector& x, const Vector& y, Vector& gx,
                                      Vector& gy) const {
  check_shapes(x, y);
  check_agent(agent);
  const Matrix& b = coupling_[agent];
  gx.noalias() = second_moment_[agent] * x;
  gx.noalias() += b.transpose() * y;
  gy.noalias() = b * x;
  gy += mean_e_[agent] - options_.nu * y;
}

void QuadraticMinimax::hessian_product(int agent, const Sample& sample, const Vector& x, const Vector& y,
                                       const Vector& dx, const Vector& dy, Vector& hx, Vector& hy) const {
  if (!options_.hessian_products) MinimaxProblem::hessian_product(agent, sample, x, y, dx, dy, hx, hy);
  check_shapes(x, y);
  check_shapes(dx, dy);
  const auto [a, e] = unpack(agent, sample);
  const Matrix& b = coupling_[agent];
  hx.noalias() = b.transpose() * dy;
  hx += a * a.dot(dx);
  hy.noalias() = b * dx;
  hy -= options_.nu * dy;
}

std::optional<std::pair<Vector, Vector>> QuadraticMinimax::saddle_point() const {
  const int d1 = options_.dim_x;
  const int d2 = options_.dim_y;
  Matrix h = Matrix::Zero(d1, d1);
  Matrix b = Matrix::Zero(d2, d1);
  Vector e = Vector::Zero(d2);
  for (int k = 0; k < options_.agents; ++k) {
    h += second_moment_[k];
    b += coupling_[k];
    e += mean_e_[k];
  }
  h /= options_.agents;
  b /= options_.agents;
  e /= options_.agents;

  Matrix kkt(d1 + d2, d1 + d2);
  kkt << h, b.transpose(), b, -options_.nu * Matrix::Identity(d2, d2);
  Vector rhs = Vector::Zero(d1 + d2);
  rhs.tail(d2) = -e;
  Eigen::FullPivLU<Matrix> lu(kkt);
  if (!lu.isInvertible()) return std::nullopt;
  const Vector z = lu.solve(rhs);
  return std::make_pair(Vector(z.head(d1)), Vector(z.tail(d2)));
}

std::shared_ptr<QuadraticMinimax> make_quadratic(const QuadraticOptions& options, std::uint64_t seed) {
  require(options.agents >= 1 && options.dim_x >= 1 && options.dim_y >= 1,
          "quadratic problem needs positive dimensions");
  require(options.nu > 0.0, "nu must be positive");
  require(options.data_var >= 0.0 && options.noise_var >= 0.0 && options.coupling_var >= 0.0,
          "variances must be non-negative");
  const bool offline = options.sampling == SamplingMode::kOffline;
  require(!offline || options.samples_per_agent >= 1, "samples_per_agent must be positive offline");

  const int d1 = options.dim_x;
  const int d2 = options.dim_y;
  std::vector<Matrix> coupling, samples_a, samples_e;
  for (int k = 0; k < options.agents; ++k) {
    Rng rng = make_stream(seed, k, StreamTag::kData);
    Normal b_dist(0.0, spread(options.coupling_var, options.variance_is_std));
    Matrix b(d2, d1);
    for (int r = 0; r < d2; ++r)
      for (int c = 0; c < d1; ++c) b(r, c) = b_dist(rng);
    coupling.push_back(std::move(b));
    if (!offline) continue;

    const double mean = options.data_mean + options.hetero_shift * static_cast<double>(k + 1);
    Normal a_dist(mean, spread(options.data_var, options.variance_is_std));
    Normal e_dist(0.0, spread(options.noise_var, options.variance_is_std));
    const int n = options.samples_per_agent;
    Matrix a(n, d1), e(n, d2);
    for (int s = 0; s < n; ++s) {
      for (int j = 0; j < d1; ++j) a(s, j) = a_dist(rng);
      for (int j = 0; j < d2; ++j) e(s, j) = e_dist(rng);
    }
    samples_a.push_back(std::move(a));
    samples_e.push_back(std::move(e));
  }
  return std::make_shared<QuadraticMinimax>(options, std::move(coupling), std::move(samples_a),
                                            std::move(samples_e));
}

void write_samples_csv(const QuadraticMinimax& problem, std::ostream& out) {
  require(problem.sampling() == SamplingMode::kOffline, "only offline datasets can be dumped");
  out << "agent,sample";
  for (int j = 0; j < problem.dim_x(); ++j) out << ",a_" << j;
  for (int j = 0; j < problem.dim_y(); ++j) out << ",e_" << j;
  out << '\n';
  for (int k = 0; k < problem.agent_count(); ++k) {
    const Matrix& a = problem.samples_a(k);
    const Matrix& e = problem.samples_e(k);
    for (Eigen::Index s = 0; s < a.rows(); ++s) {
      out << k << ',' << s;
      for (Eigen::Index j = 0; j < a.cols(); ++j) out << ',' << format_double(a(s, j));
      for (Eigen::Index j = 0; j < e.cols(); ++j) out << ',' << format_double(e(s, j));
      out << '\n';
    }
  }
}

void write_coupling_csv(const QuadraticMinimax& problem, std::ostream& out) {
  out << "agent,row";
  for (int j = 0; j < problem.dim_x(); ++j) out << ",b_" << j;
  out << '\n';
  for (int k = 0; k < problem.agent_count(); ++k) {
    const Matrix& b = problem.coupling(k);
    for (Eigen::Index r = 0; r < b.rows(); ++r) {
      out << k << ',' << r;
      for (Eigen::Index j = 0; j < b.cols(); ++j) out << ',' << format_double(b(r, j));
      out << '\n';
    }
  }
}

std::shared_ptr<QuadraticMinimax> load_quadratic(const QuadraticOptions& options, std::istream& samples,
                                                 std::istream& coupling) {
  require(options.sampling == SamplingMode::kOffline, "loaded datasets are offline");
  const int d1 = options.dim_x;
  const int d2 = options.dim_y;
  std::vector<std::vector<Vector>> rows_a(options.agents), rows_e(options.agents);
  std::vector<std::vector<Vector>> rows_b(options.agents);

  std::string line;
  std::size_t line_no = 0;
  std::getline(samples, line);
  ++line_no;
  while (std::getline(samples, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto v = split_csv_numbers(line, line_no);
    require(static_cast<int>(v.size()) == 2 + d1 + d2, "sample row width mismatch at line " + std::to_string(line_no));
    const int k = static_cast<int>(v[0]);
    require(k >= 0 && k < options.agents, "agent out of range at line " + std::to_string(line_no));
    require(static_cast<std::size_t>(v[1]) == rows_a[k].size(), "samples must be listed in order");
    Vector row = Eigen::Map<const Vector>(v.data() + 2, d1 + d2);
    rows_a[k].push_back(row.head(d1));
    rows_e[k].push_back(row.tail(d2));
  }

  line_no = 0;
  std::getline(coupling, line);
  ++line_no;
  while (std::getline(coupling, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto v = split_csv_numbers(line, line_no);
    require(static_cast<int>(v.size()) == 2 + d1, "coupling row width mismatch at line " + std::to_string(line_no));
    const int k = static_cast<int>(v[0]);
    require(k >= 0 && k < options.agents, "agent out of range at line " + std::to_string(line_no));
    rows_b[k].push_back(Eigen::Map<const Vector>(v.data() + 2, d1));
  }

  std::vector<Matrix> a(options.agents), e(options.agents), b(options.agents);
  for (int k = 0; k < options.agents; ++k) {
    require(static_cast<int>(rows_b[k].size()) == d2, "coupling matrix needs d2 rows per agent");
    const auto n = static_cast<Eigen::Index>(rows_a[k].size());
    a[k].resize(n, d1);
    e[k].resize(n, d2);
    for (Eigen::Index s = 0; s < n; ++s) {
      a[k].row(s) = rows_a[k][s].transpose();
      e[k].row(s) = rows_e[k][s].transpose();
    }
    b[k].resize(d2, d1);
    for (int r = 0; r < d2; ++r) b[k].row(r) = rows_b[k][r].transpose();
  }
  return std::make_shared<QuadraticMinimax>(options, std::move(b), std::move(a), std::move(e));
}

// ---------------------------------------------------------------- bilinear

BilinearSaddle::BilinearSaddle(BilinearOptions options, std::vector<Vector> centers, Matrix m,
                               std::vector<Matrix> noise)
    : options_(options), centers_(std::move(centers)), m_(std::move(m)), noise_(std::move(noise)) {
  require(options_.agents >= 1 && options_.dim_x >= 1 && options_.dim_y >= 1,
          "bilinear problem needs positive dimensions");
  require(options_.nu > 0.0, "nu must be positive");
  require(static_cast<int>(centers_.size()) == options_.agents, "one center per agent");
  require(m_.rows() == options_.dim_x && m_.cols() == options_.dim_y, "coupling must be d1 x d2");
  if (options_.sampling == SamplingMode::kOffline) {
    require(static_cast<int>(noise_.size()) == options_.agents, "offline problem needs one dataset per agent");
    for (const Matrix& n : noise_) require(n.rows() >= 1 && n.cols() == options_.dim_x, "bad noise dataset");
  }
}

std::size_t BilinearSaddle::local_size(int agent) const {
  check_agent(agent);
  return options_.sampling == SamplingMode::kOffline ? static_cast<std::size_t>(noise_[agent].rows()) : 0;
}

Sample BilinearSaddle::draw(int agent, Rng& rng) const {
  check_agent(agent);
  Sample s;
  if (options_.sampling == SamplingMode::kOffline) {
    s.index = static_cast<std::int64_t>(draw_index(local_size(agent), rng));
    return s;
  }
  Normal dist(0.0, options_.noise_std);
  s.payload.resize(options_.dim_x);
  for (int j = 0; j < options_.dim_x; ++j) s.payload[j] = dist(rng);
  return s;
}

Vector BilinearSaddle::noise(int agent, const Sample& sample) const {
  check_agent(agent);
  if (options_.sampling == SamplingMode::kOffline) {
    require(sample.index >= 0 && sample.index < noise_[agent].rows(), "sample index out of range");
    return noise_[agent].row(sample.index).transpose();
  }
  require(sample.payload.size() == options_.dim_x, "online sample payload has wrong size");
  return sample.payload;
}

Vector BilinearSaddle::mean_noise(int agent) const {
  if (options_.sampling == SamplingMode::kOffline) return noise_[agent].colwise().mean().transpose();
  return Vector::Zero(options_.dim_x);
}

double BilinearSaddle::loss(int agent, const Sample& sample, const Vector& x, const Vector& y) const {
  check_shapes(x, y);
  const Vector r = x - centers_[agent] - noise(agent, sample);
  return 0.5 * r.squaredNorm() + x.dot(m_ * y) - 0.5 * options_.nu * y.squaredNorm();
}

void BilinearSaddle::loss_gradient(int agent, const Sample& sample, const Vector& x, const Vector& y,
                                   Vector& gx, Vector& gy) const {
  check_shapes(x, y);
  gx = x - centers_[agent] - noise(agent, sample) + m_ * y;
  gy = m_.transpose() * x - options_.nu * y;
}

void BilinearSaddle::local_gradient(int agent, const Vector& x, const Vector& y, Vector& gx,
                                    Vector& gy) const {
  check_shapes(x, y);
  check_agent(agent);
  gx = x - centers_[agent] - mean_noise(agent) + m_ * y;
  gy = m_.transpose() * x - options_.nu * y;
}

void BilinearSaddle::hessian_product(int agent, const Sample&, const Vector& x, const Vector& y,
                                     const Vector& dx, const Vector& dy, Vector& hx, Vector& hy) const {
  check_agent(agent);
  check_shapes(x, y);
  check_shapes(dx, dy);
  hx = dx + m_ * dy;
  hy = m_.transpose() * dx - options_.nu * dy;
}

std::optional<std::pair<Vector, Vector>> BilinearSaddle::saddle_point() const {
  const int d1 = options_.dim_x;
  Vector target = Vector::Zero(d1);
  for (int k = 0; k < options_.agents; ++k) target += centers_[k] + mean_noise(k);
  target /= options_.agents;
  const Matrix lhs = Matrix::Identity(d1, d1) + m_ * m_.transpose() / options_.nu;
  const Vector x = lhs.partialPivLu().solve(target);
  Vector y = m_.transpose() * x / options_.nu;
  return std::make_pair(x, std::move(y));
}

std::shared_ptr<BilinearSaddle> make_bilinear(const BilinearOptions& options, std::uint64_t seed) {
  require(options.agents >= 1 && options.dim_x >= 1 && options.dim_y >= 1,
          "bilinear problem needs positive dimensions");
  require(options.noise_std >= 0.0, "noise_std must be non-negative");
  const bool offline = options.sampling == SamplingMode::kOffline;
  require(!offline || options.samples_per_agent >= 1, "samples_per_agent must be positive offline");

  Normal unit(0.0, 1.0);
  Rng shared = make_stream(seed, -1, StreamTag::kData);
  Matrix m(options.dim_x, options.dim_y);
  const double scale = 1.0 / std::sqrt(static_cast<double>(options.dim_x));
  for (int r = 0; r < options.dim_x; ++r)
    for (int c = 0; c < options.dim_y; ++c) m(r, c) = scale * unit(shared);

  std::vector<Vector> centers;
  std::vector<Matrix> noise;
  Normal noise_dist(0.0, options.noise_std);
  for (int k = 0; k < options.agents; ++k) {
    Rng rng = make_stream(seed, k, StreamTag::kData);
    Vector c(options.dim_x);
    for (int j = 0; j < options.dim_x; ++j) c[j] = unit(rng);
    centers.push_back(std::move(c));
    if (!offline) continue;
    Matrix n(options.samples_per_agent, options.dim_x);
    for (int s = 0; s < options.samples_per_agent; ++s)
      for (int j = 0; j < options.dim_x; ++j) n(s, j) = noise_dist(rng);
    noise.push_back(std::move(n));
  }
  return std::make_shared<BilinearSaddle>(options, std::move(centers), std::move(m), std::move(noise));
}

}  // namespace dmm
