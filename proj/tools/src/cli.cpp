#include "dmm_cli/cli.hpp"

#include <filesystem>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dmm/experiment.hpp"

namespace dmm::cli {

namespace {

constexpr int kRuntimeError = 4;

struct Options {
  std::string spec;
  std::string out = "out";
  std::optional<std::uint64_t> seed;
  std::optional<std::string> scale;
  int jobs = 1;
};

void add_common(CLI::App& cmd, Options& opts) {
  cmd.add_option("spec", opts.spec, "Experiment spec file")->required()->check(CLI::ExistingFile);
  cmd.add_option("--out", opts.out, "Output directory")->capture_default_str();
  cmd.add_option("--seed", opts.seed, "Override the base seed");
  cmd.add_option("--scale", opts.scale, "Problem size preset")->check(CLI::IsMember({"paper", "desk"}));
}

SpecOverrides overrides_from(const Options& opts) {
  SpecOverrides o;
  o.seed = opts.seed;
  if (opts.scale) o.scale = *opts.scale == "paper" ? Scale::kPaper : Scale::kDesk;
  return o;
}

int do_run(const Options& opts, std::ostream& out, std::ostream& err) {
  const ExperimentSpec spec = load_spec(opts.spec, overrides_from(opts));
  const ExperimentResult result = run_experiment(spec, opts.out, opts.jobs);
  std::size_t diverged = 0;
  for (const CellResult& c : result.cells) {
    for (const std::string& w : c.warnings) err << "warning: " << c.csv.filename().string() << ": " << w << '\n';
    if (c.diverged) {
      ++diverged;
      err << "diverged: " << c.csv.filename().string() << " at round " << c.final_row.round << '\n';
    }
  }
  out << result.cells.size() << " cells, " << diverged << " diverged, written to " << opts.out << '\n';
  return result.all_diverged() ? kAllDiverged : kOk;
}

int do_verify(const Options& opts, std::ostream& out) {
  const ExperimentSpec spec = load_spec(opts.spec, overrides_from(opts));
  const VerifyResult result = verify(spec);
  std::ostringstream report;
  write_verify_report(result, report);
  std::filesystem::create_directories(opts.out);
  write_file_atomically(std::filesystem::path(opts.out) / "verify_report.txt", report.str());
  out << report.str();
  return result.passed() ? kOk : kVerificationFailed;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Decentralized stochastic minimax simulator"};
  app.require_subcommand(1);
  Options opts;
  CLI::App* run_cmd = app.add_subcommand("run", "Run every cell of an experiment grid");
  add_common(*run_cmd, opts);
  run_cmd->add_option("--jobs", opts.jobs, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  CLI::App* verify_cmd = app.add_subcommand("verify", "Run the oracle suite on small instances");
  add_common(*verify_cmd, opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kSpecError;
  }

  try {
    if (*run_cmd) return do_run(opts, out, err);
    return do_verify(opts, out);
  } catch (const SpecError& e) {
    for (const std::string& d : e.diagnostics()) err << d << '\n';
    return kSpecError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
}

}  // namespace dmm::cli
