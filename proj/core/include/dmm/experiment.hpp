#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dmm/engine.hpp"
#include "dmm/grace.hpp"
#include "dmm/problems.hpp"
#include "dmm/strategy.hpp"
#include "dmm/topology.hpp"

namespace dmm {

enum class Scale { kDesk, kPaper };
enum class ProblemKind { kQuadratic, kBilinear };

struct ExperimentSpec {
  ProblemKind problem = ProblemKind::kQuadratic;
  QuadraticOptions quadratic;
  BilinearOptions bilinear;

  std::vector<GraphKind> topologies = {GraphKind::kRing};
  double edge_probability = 0.5;
  std::vector<EstimatorName> estimators = {EstimatorName::kSTORM};
  std::vector<StrategyKind> strategies = {StrategyKind::kED};
  // Fully resolved estimator settings, one per listed estimator.
  std::map<EstimatorName, GraceConfig> grace;

  double mu_x = 1e-3;
  double mu_y = 1e-2;
  int rounds = 2000;
  UpdateForm form = UpdateForm::kGeneral;
  int metrics_every = 1;
  int repetitions = 1;
  std::uint64_t seed = 1;
  double init_scale = 1.0;
  bool consensus_init = false;
  double divergence_threshold = 1e12;
  bool wallclock = false;

  // verify only: perturb one mixing weight to exercise the validator.
  bool corrupt_mixing = false;

  int agents() const;
  int dim_x() const;
  int dim_y() const;
};

// Line-numbered spec diagnostics.
class SpecError : public std::runtime_error {
 public:
  explicit SpecError(std::vector<std::string> diagnostics);
  const std::vector<std::string>& diagnostics() const { return diagnostics_; }

 private:
  std::vector<std::string> diagnostics_;
};

struct SpecOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<Scale> scale;
};

// Parses the key = value format described in docs/spec-format.md. `source`
// names the input in diagnostics. Throws SpecError.
ExperimentSpec parse_spec(std::istream& in, const std::string& source, const SpecOverrides& overrides = {});
ExperimentSpec load_spec(const std::filesystem::path& path, const SpecOverrides& overrides = {});

void apply_scale(ExperimentSpec& spec, Scale scale);

std::shared_ptr<MinimaxProblem> make_problem(const ExperimentSpec& spec, std::uint64_t data_seed);
MixingMatrix make_mixing(const ExperimentSpec& spec, GraphKind kind, std::uint64_t data_seed);

struct CellResult {
  EstimatorName estimator = EstimatorName::kSTORM;
  StrategyKind strategy = StrategyKind::kED;
  GraphKind topology = GraphKind::kRing;
  int rep = 0;
  bool diverged = false;
  RunRow final_row;
  std::filesystem::path csv;
  std::vector<std::string> warnings;
};

struct ExperimentResult {
  std::vector<CellResult> cells;
  bool all_diverged() const;
};

std::string cell_file_name(EstimatorName e, StrategyKind s, GraphKind g, int rep);

// One CSV per cell and repetition plus summary.csv, all written atomically.
ExperimentResult run_experiment(const ExperimentSpec& spec, const std::filesystem::path& out_dir, int jobs = 1);

void write_summary(const ExperimentResult& result, std::ostream& out);

struct VerifyCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct VerifyResult {
  std::vector<VerifyCheck> checks;
  std::vector<std::string> warnings;
  bool passed() const;
};

// Oracle suite on a clamped copy of the experiment (K <= 8, d <= 8, T <= 100).
VerifyResult verify(const ExperimentSpec& spec);
void write_verify_report(const VerifyResult& result, std::ostream& out);

// Writes via a temporary sibling and renames into place.
void write_file_atomically(const std::filesystem::path& path, const std::string& contents);

}  // namespace dmm
