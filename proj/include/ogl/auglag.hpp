#pragma once

// Outer augmented Lagrangian loop for
//   min 1/2||Ax - b||^2 + penalty(y)   s.t.  Cx = y.

#include <ogl/inner.hpp>

#include <chrono>
#include <optional>
#include <string>
#include <vector>

namespace ogl {

enum class MuPolicyKind { Fixed, Dynamic };

inline MuPolicyKind parse_mu_policy(const std::string& s) {
  if (s == "fixed") return MuPolicyKind::Fixed;
  if (s == "dynamic") return MuPolicyKind::Dynamic;
  throw InputError("unknown mu policy '" + s + "' (expected fixed or dynamic)");
}

inline std::string to_string(MuPolicyKind k) { return k == MuPolicyKind::Fixed ? "fixed" : "dynamic"; }

struct MuPolicy {
  MuPolicyKind kind = MuPolicyKind::Fixed;
  double beta = 0.5;
  double tau = 10;
  double mu_min = 1e-6;
  double mu_max = 10;
};

struct OuterConfig {
  /// Unset means the per-algorithm default (0.1 for ADAL, 0.01 otherwise).
  std::optional<double> mu0;
  MuPolicy mu_policy;
  double eps_out = 1e-4;
  Index max_outer = 500;
  double eps_in0 = 0.01;
  double beta_in = 0.5;
  double eps_in_floor_factor = 0.2;
  Index max_inner = 2000;
  LinsolveMode linsolve = LinsolveMode::Auto;
  Index pcg_threshold = kDefaultPcgThreshold;
  /// Wall-clock limit in seconds; 0 disables it.
  double time_limit = 0;
};

inline double default_mu0(Algorithm algorithm) { return algorithm == Algorithm::ADAL ? 0.1 : 0.01; }

inline void validate(const OuterConfig& c, Algorithm algorithm) {
  const double mu0 = c.mu0.value_or(default_mu0(algorithm));
  require(mu0 > 0, "mu0 must be positive");
  require(c.eps_out > 0 && c.eps_in0 > 0, "tolerances must be positive");
  require(c.max_outer >= 1 && c.max_inner >= 1, "iteration caps must be >= 1");
  require(c.beta_in > 0 && c.beta_in < 1, "beta_in must lie in (0, 1)");
  require(c.eps_in_floor_factor > 0, "eps_in floor factor must be positive");
  require(c.time_limit >= 0, "time limit must be >= 0");
  if (c.mu_policy.kind == MuPolicyKind::Dynamic) {
    const auto& p = c.mu_policy;
    require(p.beta > 0 && p.beta < 1, "mu policy beta must lie in (0, 1)");
    require(p.tau > 1, "mu policy tau must exceed 1");
    require(p.mu_min > 0 && p.mu_min < p.mu_max, "need 0 < mu_min < mu_max");
    require(mu0 >= p.mu_min && mu0 <= p.mu_max, "mu0 must lie in [mu_min, mu_max]");
  }
}

/// Balances the primal and dual residuals by moving mu within [mu_min, mu_max].
inline double update_mu(double mu, double r, double s, const MuPolicy& policy) {
  if (policy.kind == MuPolicyKind::Fixed) return mu;
  if (r > policy.tau * s) return std::max(policy.beta * mu, policy.mu_min);
  if (s > policy.tau * r) return std::min(mu / policy.beta, policy.mu_max);
  return mu;
}

inline double next_inner_tolerance(double eps_in, const OuterConfig& c) {
  return std::max(c.beta_in * eps_in, c.eps_in_floor_factor * c.eps_out);
}

/// ||Cx - y|| / max(||Cx||, ||y||).
template <class Scalar>
Scalar primal_residual(const Vector<Scalar>& x, const Vector<Scalar>& y, const ReplicationMap& map) {
  const Vector<Scalar> Cx = apply_C(x, map);
  return (Cx - y).norm() / guarded(std::max(Cx.norm(), y.norm()));
}

struct OuterResiduals {
  double r = 0;
  double s = 0;
};

/// r from the new iterates; s is taken from the inner solver, which already
/// computed it as its last relative gradient residual (or, for ADAL, from
/// consecutive outer y iterates).
template <class Scalar>
OuterResiduals outer_residuals(const Vector<Scalar>& x, const Vector<Scalar>& y,
                               const InnerOutput<Scalar>& inner, const ReplicationMap& map) {
  return {static_cast<double>(primal_residual(x, y, map)), static_cast<double>(inner.dual_residual)};
}

struct TraceRecord {
  Index outer = 0;
  double r = 0;
  double s = 0;
  double mu = 0;
  double eps_in = 0;
  Index inner_iterations = 0;
  Index skips = 0;
  double objective = 0;
  double seconds = 0;  // cumulative wall time
};

template <class Scalar = double>
struct WarmStart {
  Vector<Scalar> x;
  Vector<Scalar> y;
  Vector<Scalar> v;
};

template <class Scalar = double>
struct SolveReport {
  Algorithm algorithm = Algorithm::FISTAP;
  Vector<Scalar> x;
  Vector<Scalar> y;
  Vector<Scalar> v;
  double objective = 0;
  bool converged = false;
  bool timed_out = false;
  double seconds = 0;
  Index plan_count = 0;
  std::vector<TraceRecord> trace;

  Index outer_iterations() const { return static_cast<Index>(trace.size()); }

  Index total_inner_iterations() const {
    Index total = 0;
    for (const auto& t : trace) total += t.inner_iterations;
    return total;
  }

  double average_inner_iterations() const {
    return trace.empty() ? 0.0
                         : static_cast<double>(total_inner_iterations()) /
                               static_cast<double>(trace.size());
  }
};

/// Raised when an inner solve fails; carries the trace up to the failure.
class SolveFailure : public SolverError {
 public:
  SolveFailure(const std::string& what, std::vector<TraceRecord> partial)
      : SolverError(what), trace(std::move(partial)) {}
  std::vector<TraceRecord> trace;
};

/// Hooks for tests: see every outer step, or every plan of a linear system.
template <class Scalar>
struct OuterObserver {
  std::function<void(const TraceRecord&, const InnerOutput<Scalar>&, const Vector<Scalar>& v_before,
                     const Vector<Scalar>& v_after, Index plans_before_inner)>
      on_outer;
};

template <class Scalar>
SolveReport<Scalar> solve(const Problem<Scalar>& problem, const OuterConfig& config,
                          Algorithm algorithm, const WarmStart<Scalar>* warm = nullptr,
                          const OuterObserver<Scalar>& observer = {}) {
  validate(config, algorithm);
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  const auto elapsed = [&start] {
    return std::chrono::duration<double>(Clock::now() - start).count();
  };

  SystemCache<Scalar> cache(problem.A, problem.map, config.linsolve, config.pcg_threshold);

  SolveReport<Scalar> report;
  report.algorithm = algorithm;
  InnerInput<Scalar> in;
  if (warm) {
    require(warm->x.size() == problem.m() && warm->y.size() == problem.M() &&
                warm->v.size() == problem.M(),
            "warm start has wrong dimensions");
    in.x0 = warm->x;
    in.y0 = warm->y;
    in.v = warm->v;
  } else {
    in.x0 = Vector<Scalar>::Zero(problem.m());
    in.y0 = Vector<Scalar>::Zero(problem.M());
    in.v = Vector<Scalar>::Zero(problem.M());
  }
  in.max_inner = config.max_inner;
  double mu = config.mu0.value_or(default_mu0(algorithm));
  double eps_in = config.eps_in0;

  for (Index l = 0; l < config.max_outer; ++l) {
    in.mu = static_cast<Scalar>(mu);
    in.eps_in = static_cast<Scalar>(eps_in);

    // Plan the systems for this mu before the inner solve touches them.
    const Index plans_before = cache.plan_count();
    if (algorithm == Algorithm::APLMS) {
      cache.for_alpha(1 / (2 * in.mu));
    } else if (algorithm != Algorithm::FISTA) {
      cache.for_alpha(1 / in.mu);
    }

    InnerOutput<Scalar> inner;
    try {
      inner = inner_solve(algorithm, in, problem, cache);
    } catch (const SolverError& e) {
      throw SolveFailure(std::string("outer iteration ") + std::to_string(l) + ": " + e.what(),
                         report.trace);
    }

    const Vector<Scalar> v_before = in.v;
    in.v -= (apply_C(inner.x, problem.map) - inner.y) / in.mu;
    const OuterResiduals res = outer_residuals(inner.x, inner.y, inner, problem.map);

    TraceRecord rec;
    rec.outer = l;
    rec.r = res.r;
    rec.s = res.s;
    rec.mu = mu;
    rec.eps_in = eps_in;
    rec.inner_iterations = inner.iterations;
    rec.skips = inner.skips;
    rec.objective = static_cast<double>(objective(inner.x, inner.y, problem));
    rec.seconds = elapsed();
    report.trace.push_back(rec);
    if (observer.on_outer) observer.on_outer(rec, inner, v_before, in.v, plans_before);

    in.x0 = std::move(inner.x);
    in.y0 = std::move(inner.y);

    if (std::max(res.r, res.s) <= config.eps_out) {
      report.converged = true;
      break;
    }
    if (config.time_limit > 0 && rec.seconds >= config.time_limit) {
      report.timed_out = true;
      break;
    }
    mu = update_mu(mu, res.r, res.s, config.mu_policy);
    eps_in = next_inner_tolerance(eps_in, config);
  }

  report.x = std::move(in.x0);
  report.y = std::move(in.y0);
  report.v = std::move(in.v);
  report.objective = static_cast<double>(objective(report.x, report.y, problem));
  report.seconds = elapsed();
  report.plan_count = cache.plan_count();
  return report;
}

}  // namespace ogl
