#pragma once

// Approximate minimizers of the augmented Lagrangian
//   L(x, y; v) = f(x, y) + g(y),
//   f(x, y) = 1/2||Ax - b||^2 - v^T(Cx - y) + 1/(2 mu)||Cx - y||^2,
// for a fixed multiplier v. Every routine here is one "inner" solve of the
// outer multiplier loop in auglag.hpp.

#include <ogl/linsolve.hpp>
#include <ogl/prox.hpp>

#include <cmath>
#include <functional>
#include <string>
#include <vector>

namespace ogl {

enum class Algorithm { ADAL, APLMS, ISTAP, FISTAP, FISTA };

inline std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::ADAL: return "adal";
    case Algorithm::APLMS: return "aplm-s";
    case Algorithm::ISTAP: return "ista-p";
    case Algorithm::FISTAP: return "fista-p";
    case Algorithm::FISTA: return "fista";
  }
  return "?";
}

inline Algorithm parse_algorithm(const std::string& s) {
  if (s == "adal") return Algorithm::ADAL;
  if (s == "aplm-s" || s == "aplms") return Algorithm::APLMS;
  if (s == "ista-p" || s == "istap") return Algorithm::ISTAP;
  if (s == "fista-p" || s == "fistap") return Algorithm::FISTAP;
  if (s == "fista") return Algorithm::FISTA;
  throw InputError("unknown algorithm '" + s + "' (expected adal, aplm-s, ista-p, fista-p, fista)");
}

/// Relative slack allowed in the FISTA sufficient-decrease test, so that
/// steps that are already at roundoff level do not shrink rho forever.
inline constexpr double kLineSearchSlack = 1e-12;
inline constexpr double kMinLineSearchStep = 1e-12;

template <class Scalar>
struct InnerInput {
  Vector<Scalar> x0;
  Vector<Scalar> y0;
  Vector<Scalar> v;
  Scalar mu = Scalar(0.01);
  Scalar eps_in = Scalar(0.01);
  Index max_inner = 2000;
};

/// What an observer sees after inner iteration k (0-based) has produced
/// (x^{k+1}, ybar^{k+1}).
template <class Scalar>
struct IterateView {
  Index k;
  const Vector<Scalar>& x;
  const Vector<Scalar>& ybar;
  bool skipped;  // APLM-S only
  Scalar rho;    // step used for the y-prox
  Scalar primal_residual;
  Scalar gradient_residual;
  const Vector<Scalar>* gamma = nullptr;  // APLM-S inner multiplier after the update
};

template <class Scalar>
struct InnerControls {
  /// APLM-S: take the skipping branch on every iteration.
  bool force_skip = false;
  /// FISTA-p / FISTA: pin the extrapolation coefficient to zero.
  bool disable_momentum = false;
  /// Record F(x^k, ybar^k) = L(x^k, ybar^k; v) after every iteration.
  bool record_objective = false;
  std::function<void(const IterateView<Scalar>&)> observer;
};

template <class Scalar>
struct InnerOutput {
  Vector<Scalar> x;
  Vector<Scalar> y;  // ybar^{K+1}
  /// Numerator and value of the relative dual residual s the outer loop uses.
  Scalar dual_numerator = 0;
  Scalar dual_residual = 0;
  Scalar primal_residual = 0;
  Index iterations = 0;
  Index skips = 0;
  bool hit_cap = false;
  Scalar final_rho = 0;
  std::vector<Scalar> f_history;
};

namespace detail {

template <class Scalar>
LinsolveOptions<Scalar> linsolve_options(const InnerInput<Scalar>& in, const Vector<Scalar>& warm) {
  LinsolveOptions<Scalar> opts;
  opts.pcg_tol = std::min(Scalar(0.1) * in.eps_in, Scalar(1e-8));
  opts.warm_start = &warm;
  return opts;
}

/// r_x = A^T b + C^T v, the y-independent part of every x-system right-hand side.
template <class Scalar>
Vector<Scalar> x_rhs_base(const Problem<Scalar>& problem, const Vector<Scalar>& v) {
  return problem.A.transpose() * problem.b + apply_Ct(v, problem.map);
}

/// argmin_x f(x; y): (A^T A + D/mu) x = A^T b + C^T v + C^T y / mu.
template <class Scalar>
Vector<Scalar> minimize_x(const Factorization<Scalar>& system, const Vector<Scalar>& rx,
                          const Vector<Scalar>& y, const InnerInput<Scalar>& in,
                          const Problem<Scalar>& problem, const Vector<Scalar>& warm) {
  const Vector<Scalar> rhs = rx + apply_Ct(y, problem.map) / in.mu;
  return system.solve(rhs, linsolve_options(in, warm));
}

/// argmin_ybar 1/(2 mu)||Cx - mu v - ybar||^2 + g(ybar).
template <class Scalar>
Vector<Scalar> prox_step(const Vector<Scalar>& Cx, const InnerInput<Scalar>& in,
                         const Problem<Scalar>& problem) {
  const Vector<Scalar> d = Cx - in.mu * in.v;
  return prox_penalty(d, in.mu * problem.lambda, problem);
}

template <class Scalar>
void check_input(const InnerInput<Scalar>& in, const Problem<Scalar>& problem) {
  require(in.mu > 0, "inner solve: mu must be positive");
  require(in.eps_in > 0, "inner solve: eps_in must be positive");
  require(in.max_inner >= 1, "inner solve: max_inner must be >= 1");
  require(in.x0.size() == problem.m(), "inner solve: x0 has wrong length");
  require(in.y0.size() == problem.M(), "inner solve: y0 has wrong length");
  require(in.v.size() == problem.M(), "inner solve: v has wrong length");
}

template <class Scalar>
void record(InnerOutput<Scalar>& out, const InnerControls<Scalar>& controls,
            const InnerInput<Scalar>& in, const Problem<Scalar>& problem) {
  if (controls.record_objective) {
    out.f_history.push_back(augmented_lagrangian(out.x, out.y, in.v, in.mu, problem));
  }
}

}  // namespace detail

/// -gamma is a subgradient of g at ybar: groupwise lambda w_s ybar_s/||ybar_s||
/// (l2) or lambda w_s sign(ybar_i) spread evenly over the maximal coordinates
/// (l-inf); zero on zero groups.
template <class Scalar>
Vector<Scalar> initial_inner_multiplier(const Vector<Scalar>& ybar, const Problem<Scalar>& problem) {
  const auto& map = problem.map;
  Vector<Scalar> gamma = Vector<Scalar>::Zero(ybar.size());
  for (Index s = 0; s < map.group_count(); ++s) {
    const auto block = ybar.segment(map.group_begin(s), map.group_size(s));
    const Scalar scale = problem.lambda * problem.weight(s);
    auto out = gamma.segment(map.group_begin(s), map.group_size(s));
    if (problem.penalty == Penalty::L1L2) {
      const Scalar norm = block.norm();
      if (norm > 0) out = -scale * block / norm;
    } else {
      const Scalar top = block.cwiseAbs().maxCoeff();
      if (top > 0) {
        const Scalar ties = static_cast<Scalar>((block.array().abs() == top).count());
        for (Index i = 0; i < block.size(); ++i) {
          if (std::abs(block[i]) == top) out[i] = -scale * (block[i] > 0 ? 1 : -1) / ties;
        }
      }
    }
  }
  return gamma;
}

/// One ADAL sweep: exact x-minimization at y^l, then the y-prox. The dual
/// residual uses consecutive outer y iterates.
template <class Scalar>
InnerOutput<Scalar> adal_step(const InnerInput<Scalar>& in, const Problem<Scalar>& problem,
                              SystemCache<Scalar>& cache,
                              const InnerControls<Scalar>& controls = {}) {
  detail::check_input(in, problem);
  const auto system = cache.for_alpha(1 / in.mu);
  const Vector<Scalar> rx = detail::x_rhs_base(problem, in.v);

  InnerOutput<Scalar> out;
  out.x = detail::minimize_x(*system, rx, in.y0, in, problem, in.x0);
  out.y = detail::prox_step(Vector<Scalar>(apply_C(out.x, problem.map)), in, problem);
  out.iterations = 1;
  out.final_rho = in.mu;

  const Vector<Scalar> diff = out.y - in.y0;
  out.primal_residual = diff.norm() / guarded(in.y0.norm());
  out.dual_numerator = apply_Ct(diff, problem.map).norm();
  out.dual_residual = out.dual_numerator / guarded(apply_Ct(in.y0, problem.map).norm());
  detail::record(out, controls, in, problem);
  if (controls.observer) {
    controls.observer({0, out.x, out.y, false, in.mu, out.primal_residual, out.dual_residual});
  }
  return out;
}

/// ISTA with partial linearization: exact x-step against ybar^k, prox step
/// in y with rho = mu.
template <class Scalar>
InnerOutput<Scalar> istap(const InnerInput<Scalar>& in, const Problem<Scalar>& problem,
                          SystemCache<Scalar>& cache, const InnerControls<Scalar>& controls = {}) {
  detail::check_input(in, problem);
  const auto system = cache.for_alpha(1 / in.mu);
  const Vector<Scalar> rx = detail::x_rhs_base(problem, in.v);

  InnerOutput<Scalar> out;
  out.x = in.x0;
  out.y = in.y0;
  out.final_rho = in.mu;
  for (Index k = 0; k < in.max_inner; ++k) {
    out.x = detail::minimize_x(*system, rx, out.y, in, problem, out.x);
    Vector<Scalar> ybar = detail::prox_step(Vector<Scalar>(apply_C(out.x, problem.map)), in, problem);

    const Vector<Scalar> diff = ybar - out.y;
    out.primal_residual = diff.norm() / guarded(out.y.norm());
    out.dual_numerator = apply_Ct(diff, problem.map).norm();
    out.dual_residual = out.dual_numerator / guarded(apply_Ct(out.y, problem.map).norm());
    out.y = std::move(ybar);
    out.iterations = k + 1;

    detail::record(out, controls, in, problem);
    if (controls.observer) {
      controls.observer({k, out.x, out.y, false, in.mu, out.primal_residual, out.dual_residual});
    }
    if (std::max(out.primal_residual, out.dual_residual) <= in.eps_in) return out;
  }
  out.hit_cap = true;
  return out;
}

/// FISTA-p: ISTA-p with Nesterov extrapolation on the y block.
template <class Scalar>
InnerOutput<Scalar> fistap(const InnerInput<Scalar>& in, const Problem<Scalar>& problem,
                           SystemCache<Scalar>& cache,
                           const InnerControls<Scalar>& controls = {}) {
  detail::check_input(in, problem);
  const auto system = cache.for_alpha(1 / in.mu);
  const Vector<Scalar> rx = detail::x_rhs_base(problem, in.v);

  InnerOutput<Scalar> out;
  out.x = in.x0;
  out.y = in.y0;
  out.final_rho = in.mu;
  Vector<Scalar> z = in.y0;
  Scalar t = 1;
  for (Index k = 0; k < in.max_inner; ++k) {
    out.x = detail::minimize_x(*system, rx, z, in, problem, out.x);
    Vector<Scalar> ybar = detail::prox_step(Vector<Scalar>(apply_C(out.x, problem.map)), in, problem);

    const Vector<Scalar> diff = ybar - z;
    out.primal_residual = diff.norm() / guarded(z.norm());
    out.dual_numerator = apply_Ct(diff, problem.map).norm();
    out.dual_residual = out.dual_numerator / guarded(apply_Ct(z, problem.map).norm());

    const Scalar t_next = (1 + std::sqrt(1 + 4 * t * t)) / 2;
    if (controls.disable_momentum) {
      z = ybar;
    } else {
      z = ybar + ((t - 1) / t_next) * (ybar - out.y);
    }
    t = t_next;
    out.y = std::move(ybar);
    out.iterations = k + 1;

    detail::record(out, controls, in, problem);
    if (controls.observer) {
      controls.observer({k, out.x, out.y, false, in.mu, out.primal_residual, out.dual_residual});
    }
    if (std::max(out.primal_residual, out.dual_residual) <= in.eps_in) return out;
  }
  out.hit_cap = true;
  return out;
}

/// Alternating partial linearization with skipping. The regular step
/// minimizes L_rho(x, y, ybar^k, gamma^k) jointly over (x, y) through
///   (A^T A + D/(2 mu)) x = r_x + C^T r_y / 2,   y = (mu/2)(r_y + Cx/mu),
/// with r_x = A^T b + C^T v and r_y = -v + gamma + ybar/rho. When the
/// regular step fails the decrease test, y falls back to ybar^k and x is
/// re-minimized against it.
template <class Scalar>
InnerOutput<Scalar> aplms(const InnerInput<Scalar>& in, const Problem<Scalar>& problem,
                          SystemCache<Scalar>& cache, const InnerControls<Scalar>& controls = {}) {
  detail::check_input(in, problem);
  const Scalar mu = in.mu;
  const Scalar rho = mu;
  const auto joint = cache.for_alpha(1 / (2 * mu));
  std::shared_ptr<const Factorization<Scalar>> skip_system;
  const Vector<Scalar> rx = detail::x_rhs_base(problem, in.v);

  InnerOutput<Scalar> out;
  out.x = in.x0;
  out.y = in.y0;  // ybar^k
  out.final_rho = rho;
  Vector<Scalar> gamma = initial_inner_multiplier(in.y0, problem);
  Vector<Scalar> y;
  for (Index k = 0; k < in.max_inner; ++k) {
    bool skipped = controls.force_skip;
    if (!skipped) {
      const Vector<Scalar> ry = -in.v + gamma + out.y / rho;
      const Vector<Scalar> rhs = rx + Scalar(0.5) * apply_Ct(ry, problem.map);
      Vector<Scalar> x = joint->solve(rhs, detail::linsolve_options(in, out.x));
      y = (mu / 2) * (ry + apply_C(x, problem.map) / mu);
      // F(x, y) > L_rho(x, y, ybar, gamma); the f(x, y) terms cancel.
      const Vector<Scalar> gap = out.y - y;
      const Scalar lhs = penalty_value(y, problem);
      const Scalar rhs_value =
          penalty_value(out.y, problem) + gamma.dot(gap) + gap.squaredNorm() / (2 * rho);
      skipped = lhs > rhs_value;
      if (!skipped) out.x = std::move(x);
    }
    if (skipped) {
      if (!skip_system) skip_system = cache.for_alpha(1 / mu);
      y = out.y;
      out.x = detail::minimize_x(*skip_system, rx, y, in, problem, out.x);
      ++out.skips;
    }

    const Vector<Scalar> Cx = apply_C(out.x, problem.map);
    Vector<Scalar> ybar = detail::prox_step(Cx, in, problem);
    const Vector<Scalar> grad_y = in.v + (y - Cx) / mu;
    gamma = grad_y - (y - ybar) / rho;

    const Vector<Scalar> diff = ybar - y;
    out.primal_residual = diff.norm() / guarded(y.norm());
    out.dual_numerator = apply_Ct(diff, problem.map).norm();
    out.dual_residual = out.dual_numerator / guarded(apply_Ct(y, problem.map).norm());
    out.y = std::move(ybar);
    out.iterations = k + 1;

    detail::record(out, controls, in, problem);
    if (controls.observer) {
      controls.observer(
          {k, out.x, out.y, skipped, rho, out.primal_residual, out.dual_residual, &gamma});
    }
    if (std::max(out.primal_residual, out.dual_residual) <= in.eps_in) return out;
  }
  out.hit_cap = true;
  return out;
}

/// FISTA on the full (x, y) pair: a gradient step on f from the extrapolated
/// point, exact in x and prox in y, with backtracking on rho from rho_0 = mu.
template <class Scalar>
InnerOutput<Scalar> fista(const InnerInput<Scalar>& in, const Problem<Scalar>& problem,
                          const InnerControls<Scalar>& controls = {}) {
  detail::check_input(in, problem);
  Scalar rho = in.mu;

  InnerOutput<Scalar> out;
  out.x = in.x0;
  out.y = in.y0;
  Vector<Scalar> zx = in.x0;
  Vector<Scalar> zy = in.y0;
  Scalar t = 1;
  for (Index k = 0; k < in.max_inner; ++k) {
    const Scalar fz = smooth_value(zx, zy, in.v, in.mu, problem);
    const auto grad = smooth_gradient(zx, zy, in.v, in.mu, problem);

    Vector<Scalar> xn;
    Vector<Scalar> yn;
    for (;;) {
      xn = zx - rho * grad.x;
      yn = prox_penalty(Vector<Scalar>(zy - rho * grad.y), rho * problem.lambda, problem);
      const Vector<Scalar> sx = xn - zx;
      const Vector<Scalar> sy = yn - zy;
      const Scalar model = fz + grad.x.dot(sx) + grad.y.dot(sy) +
                           (sx.squaredNorm() + sy.squaredNorm()) / (2 * rho);
      const Scalar fn = smooth_value(xn, yn, in.v, in.mu, problem);
      const Scalar slack = Scalar(kLineSearchSlack) * std::max(Scalar(1), std::abs(fz));
      if (fn <= model + slack) break;
      rho /= 2;
      if (rho < Scalar(kMinLineSearchStep)) {
        throw SolverError("fista: line search step underflow (rho < 1e-12)");
      }
    }

    const Scalar den = std::sqrt(zx.squaredNorm() + zy.squaredNorm());
    out.dual_numerator = std::sqrt((xn - zx).squaredNorm() + (yn - zy).squaredNorm());
    out.primal_residual = out.dual_numerator / guarded(den);
    out.dual_residual = out.primal_residual;

    const Scalar t_next = (1 + std::sqrt(1 + 4 * t * t)) / 2;
    const Scalar coef = controls.disable_momentum ? Scalar(0) : (t - 1) / t_next;
    zx = xn + coef * (xn - out.x);
    zy = yn + coef * (yn - out.y);
    t = t_next;
    out.x = std::move(xn);
    out.y = std::move(yn);
    out.iterations = k + 1;
    out.final_rho = rho;

    detail::record(out, controls, in, problem);
    if (controls.observer) {
      controls.observer({k, out.x, out.y, false, rho, out.primal_residual, out.dual_residual});
    }
    if (out.primal_residual <= in.eps_in) return out;
  }
  out.hit_cap = true;
  return out;
}

/// Dispatches one inner solve.
template <class Scalar>
InnerOutput<Scalar> inner_solve(Algorithm algorithm, const InnerInput<Scalar>& in,
                                const Problem<Scalar>& problem, SystemCache<Scalar>& cache,
                                const InnerControls<Scalar>& controls = {}) {
  switch (algorithm) {
    case Algorithm::ADAL: return adal_step(in, problem, cache, controls);
    case Algorithm::APLMS: return aplms(in, problem, cache, controls);
    case Algorithm::ISTAP: return istap(in, problem, cache, controls);
    case Algorithm::FISTAP: return fistap(in, problem, cache, controls);
    case Algorithm::FISTA: return fista(in, problem, controls);
  }
  throw InputError("unknown algorithm");
}

}  // namespace ogl
