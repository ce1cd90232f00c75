#pragma once

// Experiment drivers behind the command-line tool: single solves, algorithm
// comparisons, regularization paths and size sweeps.

#include <ogl/auglag.hpp>
#include <ogl/datagen.hpp>

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace ogl::bench {

namespace fs = std::filesystem;

/// Stable process exit codes.
enum ExitCode : int { kSuccess = 0, kNotConverged = 1, kInputError = 2 };

enum class Family { Ogl, Dct };

/// Exactly one of `dir` or `family` names the data.
struct DatasetSource {
  std::optional<fs::path> dir;
  std::optional<Family> family;
  OglSpec ogl;
  DctSpec dct;
};

struct RunManifest {
  DatasetSource source;
  std::vector<Algorithm> algorithms{Algorithm::FISTAP};
  Penalty penalty = Penalty::L1L2;
  /// Absolute lambdas, or (when `lambda_is_fraction`) fractions of the
  /// smallest lambda that certifies the all-zero solution.
  std::vector<double> lambdas{1.0};
  bool lambda_is_fraction = false;
  OuterConfig config;
  std::optional<fs::path> out_dir;
  double truncation = 1e-6;
  unsigned threads = 1;
};

void validate(const RunManifest& manifest);

/// Builds the problem at lambda = 1 (callers rescale with `with_lambda`).
Problem<double> load_source(const DatasetSource& source, Penalty penalty);
Problem<double> with_lambda(Problem<double> problem, double lambda);
double resolve_lambda(const Problem<double>& problem, double value, bool is_fraction);

/// Worker count from OGL_THREADS (defaults to the hardware concurrency).
unsigned thread_cap();

/// Runs f(0..count-1) on up to `threads` workers.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& f);

struct RunSummary {
  Algorithm algorithm = Algorithm::FISTAP;
  Penalty penalty = Penalty::L1L2;
  double lambda = 0;
  bool converged = false;
  double seconds = 0;
  Index outer_iterations = 0;
  double average_inner = 0;
  double objective = 0;
  Index active_groups = 0;
  Index nonzeros = 0;
};

/// Groups whose truncated replicated block is nonzero.
Index active_groups(const VectorXd& y, const ReplicationMap& map, double truncation);

RunSummary summarize(const SolveReport<double>& report, const Problem<double>& problem,
                     double truncation);

std::string summary_line(const RunSummary& s);
std::string summary_json(const RunSummary& s);

/// Writes trace.csv, summary.json, x.bin and y.bin into `dir`.
void write_artifacts(const fs::path& dir, const SolveReport<double>& report,
                     const RunSummary& summary);

struct SolveOutcome {
  SolveReport<double> report;
  RunSummary summary;
};

SolveOutcome cmd_solve(const Problem<double>& problem, Algorithm algorithm,
                       const OuterConfig& config, const std::optional<fs::path>& out_dir,
                       double truncation = 1e-6);

struct Comparison {
  std::vector<SolveOutcome> runs;
  double max_discrepancy = 0;  // max pairwise relative F(x) difference
};

Comparison cmd_compare(const Problem<double>& problem, const std::vector<Algorithm>& algorithms,
                       const OuterConfig& config, unsigned threads = 1, double truncation = 1e-6);

double max_relative_discrepancy(const std::vector<double>& values);

struct PathResult {
  std::vector<SolveOutcome> points;  // in solve order (largest lambda first)
  Index total_outer = 0;
};

/// Solves along a sorted lambda grid from the largest value down, optionally
/// warm-starting (x, y, v) from the previous point.
PathResult cmd_path(const Problem<double>& problem, std::vector<double> lambdas,
                    Algorithm algorithm, const OuterConfig& config, bool warm_start = true,
                    double truncation = 1e-6);

struct SweepRow {
  Index size = 0;  // m for dct, J for ogl
  SolveOutcome outcome;
};

/// Size sweep: one problem per size, every algorithm on each.
std::vector<SweepRow> cmd_sweep(const DatasetSource& base, const std::vector<Index>& sizes,
                                const std::vector<Algorithm>& algorithms, Penalty penalty,
                                double lambda, bool lambda_is_fraction, const OuterConfig& config,
                                unsigned threads = 1, double truncation = 1e-6);

}  // namespace ogl::bench
