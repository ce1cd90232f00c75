#include <ogl/bench.hpp>
#include <ogl/io.hpp>

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

namespace ogl::bench {

void validate(const RunManifest& manifest) {
  const auto& src = manifest.source;
  require(src.dir.has_value() != src.family.has_value(),
          "exactly one dataset source (a data directory or a generator) is required");
  require(!manifest.algorithms.empty(), "no algorithm selected");
  require(!manifest.lambdas.empty(), "no lambda given");
  for (std::size_t i = 0; i < manifest.lambdas.size(); ++i) {
    require(manifest.lambdas[i] > 0, "lambda values must be positive");
    if (i > 0) require(manifest.lambdas[i] > manifest.lambdas[i - 1], "lambda grid must be sorted ascending");
  }
  require(manifest.truncation >= 0, "truncation threshold must be >= 0");
  for (Algorithm a : manifest.algorithms) ogl::validate(manifest.config, a);
}

Problem<double> load_source(const DatasetSource& source, Penalty penalty) {
  require(source.dir.has_value() != source.family.has_value(),
          "exactly one dataset source is required");
  if (source.dir) return io::load_problem(*source.dir, 1.0, penalty);
  if (*source.family == Family::Ogl) return gen_ogl(source.ogl, 1.0, penalty).problem;
  return gen_dct(source.dct, 1.0, penalty).problem;
}

Problem<double> with_lambda(Problem<double> problem, double lambda) {
  require(lambda > 0, "lambda must be positive");
  problem.lambda = lambda;
  return problem;
}

double resolve_lambda(const Problem<double>& problem, double value, bool is_fraction) {
  return is_fraction ? value * zero_solution_lambda(problem) : value;
}

unsigned thread_cap() {
  unsigned cap = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("OGL_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v >= 1) cap = static_cast<unsigned>(v);
  }
  return cap;
}

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& f) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(count)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          f(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

Index active_groups(const VectorXd& y, const ReplicationMap& map, double truncation) {
  Index active = 0;
  for (Index s = 0; s < map.group_count(); ++s) {
    const auto block = y.segment(map.group_begin(s), map.group_size(s));
    const VectorXd kept = (block.array().abs() < truncation).select(0.0, block);
    if (kept.norm() > truncation) ++active;
  }
  return active;
}

RunSummary summarize(const SolveReport<double>& report, const Problem<double>& problem,
                     double truncation) {
  RunSummary s;
  s.algorithm = report.algorithm;
  s.penalty = problem.penalty;
  s.lambda = problem.lambda;
  s.converged = report.converged;
  s.seconds = report.seconds;
  s.outer_iterations = report.outer_iterations();
  s.average_inner = report.average_inner_iterations();
  s.objective = report.objective;
  s.active_groups = active_groups(report.y, problem.map, truncation);
  s.nonzeros = (report.x.array().abs() >= truncation).count();
  return s;
}

std::string summary_line(const RunSummary& s) {
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "%-8s %-6s lambda=%-11.5g CPU(s)=%-9.3f Iters=%-4lld AvgSubIters=%-8.2f "
                "F(x)=%.10e active=%lld converged=%s",
                to_string(s.algorithm).c_str(), to_string(s.penalty).c_str(), s.lambda, s.seconds,
                static_cast<long long>(s.outer_iterations), s.average_inner, s.objective,
                static_cast<long long>(s.active_groups), s.converged ? "true" : "false");
  return buf;
}

std::string summary_json(const RunSummary& s) {
  nlohmann::json j;
  j["algorithm"] = to_string(s.algorithm);
  j["penalty"] = to_string(s.penalty);
  j["lambda"] = s.lambda;
  j["converged"] = s.converged;
  j["cpu_seconds"] = s.seconds;
  j["outer_iterations"] = s.outer_iterations;
  j["avg_inner_iterations"] = s.average_inner;
  j["objective"] = s.objective;
  j["active_groups"] = s.active_groups;
  j["nonzeros"] = s.nonzeros;
  return j.dump(2);
}

void write_artifacts(const fs::path& dir, const SolveReport<double>& report,
                     const RunSummary& summary) {
  fs::create_directories(dir);
  io::write_trace_csv(dir / "trace.csv", report.trace);
  io::write_matrix_binary(dir / "x.bin", report.x);
  io::write_matrix_binary(dir / "y.bin", report.y);
  std::ofstream json(dir / "summary.json");
  if (!json) throw InputError("cannot write " + (dir / "summary.json").string());
  json << summary_json(summary) << '\n';
}

SolveOutcome cmd_solve(const Problem<double>& problem, Algorithm algorithm,
                       const OuterConfig& config, const std::optional<fs::path>& out_dir,
                       double truncation) {
  SolveOutcome out;
  out.report = solve(problem, config, algorithm);
  out.summary = summarize(out.report, problem, truncation);
  if (out_dir) write_artifacts(*out_dir, out.report, out.summary);
  return out;
}

double max_relative_discrepancy(const std::vector<double>& values) {
  double worst = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    for (std::size_t j = i + 1; j < values.size(); ++j) {
      const double scale = std::max({std::abs(values[i]), std::abs(values[j]), 1e-300});
      worst = std::max(worst, std::abs(values[i] - values[j]) / scale);
    }
  }
  return worst;
}

Comparison cmd_compare(const Problem<double>& problem, const std::vector<Algorithm>& algorithms,
                       const OuterConfig& config, unsigned threads, double truncation) {
  require(algorithms.size() >= 2, "compare needs at least two algorithms");
  Comparison cmp;
  cmp.runs.resize(algorithms.size());
  parallel_for(algorithms.size(), threads, [&](std::size_t i) {
    cmp.runs[i] = cmd_solve(problem, algorithms[i], config, std::nullopt, truncation);
  });
  std::vector<double> values;
  for (const auto& r : cmp.runs) values.push_back(r.summary.objective);
  cmp.max_discrepancy = max_relative_discrepancy(values);
  return cmp;
}

PathResult cmd_path(const Problem<double>& problem, std::vector<double> lambdas,
                    Algorithm algorithm, const OuterConfig& config, bool warm_start,
                    double truncation) {
  require(!lambdas.empty(), "path needs at least one lambda");
  require(std::is_sorted(lambdas.begin(), lambdas.end()), "lambda grid must be sorted");
  PathResult path;
  Problem<double> current = problem;
  std::optional<WarmStart<double>> warm;
  for (auto it = lambdas.rbegin(); it != lambdas.rend(); ++it) {
    current.lambda = *it;
    SolveOutcome point;
    point.report = solve(current, config, algorithm, warm ? &*warm : nullptr);
    point.summary = summarize(point.report, current, truncation);
    path.total_outer += point.report.outer_iterations();
    if (warm_start) warm = WarmStart<double>{point.report.x, point.report.y, point.report.v};
    path.points.push_back(std::move(point));
  }
  return path;
}

std::vector<SweepRow> cmd_sweep(const DatasetSource& base, const std::vector<Index>& sizes,
                                const std::vector<Algorithm>& algorithms, Penalty penalty,
                                double lambda, bool lambda_is_fraction, const OuterConfig& config,
                                unsigned threads, double truncation) {
  require(base.family.has_value(), "sweep needs a generator family");
  require(!sizes.empty() && !algorithms.empty(), "sweep needs sizes and algorithms");
  std::vector<Problem<double>> problems;
  for (Index size : sizes) {
    DatasetSource src = base;
    if (*src.family == Family::Dct) {
      src.dct.m = size;
    } else {
      src.ogl.J = size;
    }
    Problem<double> p = load_source(src, penalty);
    p.lambda = resolve_lambda(p, lambda, lambda_is_fraction);
    problems.push_back(std::move(p));
  }
  std::vector<SweepRow> rows(sizes.size() * algorithms.size());
  parallel_for(rows.size(), threads, [&](std::size_t k) {
    const std::size_t i = k / algorithms.size();
    rows[k].size = sizes[i];
    rows[k].outcome = cmd_solve(problems[i], algorithms[k % algorithms.size()], config,
                                std::nullopt, truncation);
  });
  return rows;
}

}  // namespace ogl::bench
