// ogl: generate data, solve, compare algorithms, trace regularization paths
// and run size sweeps for the overlapping group lasso.

#include <ogl/bench.hpp>
#include <ogl/io.hpp>

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

using namespace ogl;
namespace fs = std::filesystem;

struct SourceOpts {
  std::string data;
  std::string gen;
  Index n = 0;
  Index J = 20;
  Index m = 1000;
  std::uint64_t seed = 0;
};

struct SolverOpts {
  std::string penalty = "l12";
  std::optional<double> mu0;
  std::string mu_policy = "fixed";
  double beta = 0.5;
  double tau = 10;
  double mu_min = 1e-6;
  double mu_max = 10;
  double eps_out = 1e-4;
  Index max_outer = 500;
  Index max_inner = 2000;
  std::string linsolve = "auto";
  Index pcg_threshold = kDefaultPcgThreshold;
  double time_limit = 0;
  double truncation = 1e-6;
};

void add_source(CLI::App* cmd, SourceOpts& o) {
  auto* data = cmd->add_option("--data", o.data, "dataset directory (A.bin or A.csv, b.txt, groups.txt)");
  auto* gen = cmd->add_option("--gen", o.gen, "generate the data instead: ogl or dct")
                  ->check(CLI::IsMember({"ogl", "dct"}));
  data->excludes(gen);
  cmd->add_option("--n", o.n, "samples for --gen (ogl default 200, dct default 1000)");
  cmd->add_option("--J", o.J, "ogl group count")->capture_default_str();
  cmd->add_option("--m", o.m, "dct feature count")->capture_default_str();
  cmd->add_option("--seed", o.seed, "generator seed")->capture_default_str();
}

void add_solver(CLI::App* cmd, SolverOpts& o) {
  cmd->add_option("--penalty", o.penalty, "l12 or l1inf")->check(CLI::IsMember({"l12", "l1inf"}))
      ->capture_default_str();
  cmd->add_option("--mu0", o.mu0, "initial mu (default 0.1 for adal, 0.01 otherwise)");
  cmd->add_option("--mu-policy", o.mu_policy, "fixed or dynamic")
      ->check(CLI::IsMember({"fixed", "dynamic"}))->capture_default_str();
  cmd->add_option("--beta", o.beta, "dynamic mu factor")->capture_default_str();
  cmd->add_option("--tau", o.tau, "dynamic mu balance ratio")->capture_default_str();
  cmd->add_option("--mu-min", o.mu_min)->capture_default_str();
  cmd->add_option("--mu-max", o.mu_max)->capture_default_str();
  cmd->add_option("--eps-out", o.eps_out, "outer tolerance")->capture_default_str();
  cmd->add_option("--max-outer", o.max_outer)->capture_default_str();
  cmd->add_option("--max-inner", o.max_inner)->capture_default_str();
  cmd->add_option("--linsolve", o.linsolve, "auto, direct, direct-m, direct-n or pcg")
      ->capture_default_str();
  cmd->add_option("--pcg-threshold", o.pcg_threshold, "auto mode uses pcg when n and m exceed this")
      ->capture_default_str();
  cmd->add_option("--time-limit", o.time_limit, "wall-clock seconds per solve, 0 = none")
      ->capture_default_str();
  cmd->add_option("--truncation", o.truncation, "sparsity reporting threshold")->capture_default_str();
}

OuterConfig to_config(const SolverOpts& o) {
  OuterConfig c;
  c.mu0 = o.mu0;
  c.mu_policy.kind = parse_mu_policy(o.mu_policy);
  c.mu_policy.beta = o.beta;
  c.mu_policy.tau = o.tau;
  c.mu_policy.mu_min = o.mu_min;
  c.mu_policy.mu_max = o.mu_max;
  c.eps_out = o.eps_out;
  c.max_outer = o.max_outer;
  c.max_inner = o.max_inner;
  c.linsolve = parse_linsolve(o.linsolve);
  c.pcg_threshold = o.pcg_threshold;
  c.time_limit = o.time_limit;
  return c;
}

bench::DatasetSource to_source(const SourceOpts& o) {
  bench::DatasetSource src;
  if (!o.data.empty()) src.dir = o.data;
  if (!o.gen.empty()) {
    src.family = o.gen == "ogl" ? bench::Family::Ogl : bench::Family::Dct;
    src.ogl.J = o.J;
    src.ogl.seed = o.seed;
    if (o.n > 0) src.ogl.n = o.n;
    src.dct.m = o.m;
    src.dct.seed = o.seed;
    if (o.n > 0) src.dct.n = o.n;
  }
  return src;
}

std::vector<Algorithm> to_algorithms(const std::vector<std::string>& names) {
  std::vector<Algorithm> out;
  for (const auto& s : names) out.push_back(parse_algorithm(s));
  return out;
}

bench::RunManifest manifest(const SourceOpts& src, const SolverOpts& solver,
                            const std::vector<std::string>& algs, std::vector<double> lambdas,
                            bool fraction) {
  bench::RunManifest m;
  m.source = to_source(src);
  m.algorithms = to_algorithms(algs);
  m.penalty = parse_penalty(solver.penalty);
  m.lambdas = std::move(lambdas);
  m.lambda_is_fraction = fraction;
  m.config = to_config(solver);
  m.truncation = solver.truncation;
  m.threads = bench::thread_cap();
  bench::validate(m);
  return m;
}

int exit_for(bool converged) { return converged ? bench::kSuccess : bench::kNotConverged; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Overlapping group lasso solvers"};
  app.set_config("--config", "", "key=value file with option defaults");
  app.require_subcommand(1);
  app.fallthrough();

  SourceOpts src;
  SolverOpts solver;
  std::vector<std::string> algs;
  std::vector<double> lambdas;
  std::vector<double> fracs;
  std::string out_dir;
  add_source(&app, src);
  add_solver(&app, solver);
  app.add_option("--alg,--algs", algs, "adal, aplm-s, ista-p, fista-p, fista (comma list for compare/sweep)")
      ->delimiter(',');
  auto* lambda_opt = app.add_option("--lambda,--lambdas", lambdas, "regularization weight(s)")->delimiter(',');
  auto* frac_opt = app.add_option("--lambda-frac,--lambda-fracs", fracs,
                                  "lambda as a fraction of the smallest all-zero lambda")
                       ->delimiter(',');
  lambda_opt->excludes(frac_opt);
  app.add_option("--out", out_dir, "output directory");

  auto* gen = app.add_subcommand("gen", "write a synthetic dataset directory to --out");
  std::string gen_family;
  gen->add_option("family", gen_family, "ogl or dct")->required()->check(CLI::IsMember({"ogl", "dct"}));

  auto* solve_cmd = app.add_subcommand("solve", "solve one problem");
  auto* compare_cmd = app.add_subcommand("compare", "run several algorithms on one problem");
  auto* path_cmd = app.add_subcommand("path", "regularization path, largest lambda first");
  bool path_cold = false;
  path_cmd->add_flag("--cold", path_cold, "do not warm-start between grid points");
  auto* sweep_cmd = app.add_subcommand("sweep", "size sweep over generated problems");
  std::vector<Index> sweep_sizes;
  sweep_cmd->add_option("--sizes", sweep_sizes, "m values (dct) or J values (ogl)")->delimiter(',')
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? bench::kSuccess : bench::kInputError;
  }

  try {
    if (*gen) {
      require(!out_dir.empty(), "gen needs --out");
      Dataset data;
      if (gen_family == "ogl") {
        OglSpec spec;
        if (src.n > 0) spec.n = src.n;
        spec.J = src.J;
        spec.seed = src.seed;
        require(spec.n >= 1 && spec.J >= 1, "ogl needs n >= 1 and J >= 1");
        data = gen_ogl(spec);
      } else {
        DctSpec spec;
        if (src.n > 0) spec.n = src.n;
        spec.m = src.m;
        spec.seed = src.seed;
        data = gen_dct(spec);
      }
      io::save_dataset(out_dir, data);
      std::printf("wrote %s: n=%lld m=%lld groups=%lld\n", out_dir.c_str(),
                  static_cast<long long>(data.problem.n()), static_cast<long long>(data.problem.m()),
                  static_cast<long long>(data.problem.map.group_count()));
      return bench::kSuccess;
    }

    const bool frac = frac_opt->count() > 0;
    require(frac || lambda_opt->count() > 0, "give --lambda or --lambda-frac");
    const std::vector<double>& grid_in = frac ? fracs : lambdas;
    std::optional<fs::path> out;
    if (!out_dir.empty()) out = out_dir;

    if (*solve_cmd) {
      require(grid_in.size() == 1, "solve takes a single lambda");
      if (algs.empty()) algs = {"fista-p"};
      require(algs.size() == 1, "solve takes a single algorithm");
      const auto m = manifest(src, solver, algs, grid_in, frac);
      Problem<double> p = bench::load_source(m.source, m.penalty);
      p = bench::with_lambda(p, bench::resolve_lambda(p, m.lambdas.front(), frac));
      const auto result = bench::cmd_solve(p, m.algorithms.front(), m.config, out, m.truncation);
      std::cout << bench::summary_line(result.summary) << '\n';
      return exit_for(result.summary.converged);
    }

    if (*compare_cmd) {
      require(grid_in.size() == 1, "compare takes a single lambda");
      if (algs.empty()) algs = {"adal", "aplm-s", "ista-p", "fista-p", "fista"};
      const auto m = manifest(src, solver, algs, grid_in, frac);
      Problem<double> p = bench::load_source(m.source, m.penalty);
      p = bench::with_lambda(p, bench::resolve_lambda(p, m.lambdas.front(), frac));
      const auto cmp = bench::cmd_compare(p, m.algorithms, m.config, m.threads, m.truncation);
      bool all = true;
      for (const auto& r : cmp.runs) {
        std::cout << bench::summary_line(r.summary) << '\n';
        all = all && r.summary.converged;
      }
      std::printf("max relative F(x) discrepancy: %.3e\n", cmp.max_discrepancy);
      return exit_for(all);
    }

    if (*path_cmd) {
      if (algs.empty()) algs = {"fista-p"};
      require(algs.size() == 1, "path takes a single algorithm");
      const auto m = manifest(src, solver, algs, grid_in, frac);
      const Problem<double> p = bench::load_source(m.source, m.penalty);
      std::vector<double> grid;
      for (double v : m.lambdas) grid.push_back(bench::resolve_lambda(p, v, frac));
      const auto path = bench::cmd_path(p, grid, m.algorithms.front(), m.config, !path_cold, m.truncation);
      bool all = true;
      std::ofstream csv;
      if (out) {
        fs::create_directories(*out);
        csv.open(*out / "path.csv");
        if (!csv) throw InputError("cannot write " + (*out / "path.csv").string());
        csv << "lambda,objective,active_groups,nonzeros,outer_iterations,converged\n";
      }
      for (const auto& pt : path.points) {
        const auto& s = pt.summary;
        std::cout << bench::summary_line(s) << '\n';
        all = all && s.converged;
        if (csv.is_open()) {
          csv << s.lambda << ',' << s.objective << ',' << s.active_groups << ',' << s.nonzeros << ','
              << s.outer_iterations << ',' << (s.converged ? 1 : 0) << '\n';
        }
      }
      std::printf("total outer iterations: %lld\n", static_cast<long long>(path.total_outer));
      return exit_for(all);
    }

    if (*sweep_cmd) {
      require(grid_in.size() == 1, "sweep takes a single lambda");
      if (algs.empty()) algs = {"adal", "fista-p", "fista"};
      const auto m = manifest(src, solver, algs, grid_in, frac);
      require(m.source.family.has_value(), "sweep needs --gen ogl or --gen dct");
      const auto rows = bench::cmd_sweep(m.source, sweep_sizes, m.algorithms, m.penalty,
                                         m.lambdas.front(), frac, m.config, m.threads, m.truncation);
      bool all = true;
      std::ofstream csv;
      if (out) {
        fs::create_directories(*out);
        csv.open(*out / "sweep.csv");
        if (!csv) throw InputError("cannot write " + (*out / "sweep.csv").string());
        csv << "size,algorithm,cpu_seconds,outer_iterations,avg_inner_iterations,objective,converged\n";
      }
      for (const auto& row : rows) {
        const auto& s = row.outcome.summary;
        std::printf("size=%-7lld %s\n", static_cast<long long>(row.size), bench::summary_line(s).c_str());
        all = all && s.converged;
        if (csv.is_open()) {
          csv << row.size << ',' << to_string(s.algorithm) << ',' << s.seconds << ','
              << s.outer_iterations << ',' << s.average_inner << ',' << s.objective << ','
              << (s.converged ? 1 : 0) << '\n';
        }
      }
      return exit_for(all);
    }
  } catch (const InputError& e) {
    std::cerr << "ogl: " << e.what() << '\n';
    return bench::kInputError;
  } catch (const std::exception& e) {
    std::cerr << "ogl: solver failure: " << e.what() << '\n';
    return bench::kNotConverged;
  }
  return bench::kSuccess;
}
