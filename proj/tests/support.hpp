#pragma once

// Shared fixtures and independent reference computations for the tests.

#include <ogl/auglag.hpp>
#include <ogl/datagen.hpp>

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace ogl::testing {

inline VectorXd random_vector(std::mt19937_64& rng, Index size, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  VectorXd v(size);
  for (Index i = 0; i < size; ++i) v[i] = normal(rng);
  return v;
}

inline MatrixXd random_matrix(std::mt19937_64& rng, Index rows, Index cols) {
  std::normal_distribution<double> normal;
  MatrixXd A(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) A(i, j) = normal(rng);
  return A;
}

/// Random overlapping groups: a covering chain plus a few random extra groups,
/// with random positive weights when `weighted`.
inline GroupStructure<double> random_groups(std::mt19937_64& rng, Index m, bool weighted) {
  GroupStructure<double> gs;
  gs.m = m;
  std::uniform_int_distribution<Index> len(1, std::max<Index>(1, std::min<Index>(6, m)));
  for (Index start = 0; start < m;) {
    const Index size = std::min(len(rng), m - start);
    std::vector<Index> g;
    for (Index j = start; j < start + size; ++j) g.push_back(j);
    gs.groups.push_back(g);
    start += std::max<Index>(1, size - 1);  // neighbours share one feature
  }
  std::uniform_int_distribution<Index> pick(0, m - 1);
  for (int extra = 0; extra < 3; ++extra) {
    std::vector<Index> g;
    for (Index k = 0; k < len(rng); ++k) {
      const Index j = pick(rng);
      if (std::find(g.begin(), g.end(), j) == g.end()) g.push_back(j);
    }
    gs.groups.push_back(g);
  }
  if (weighted) {
    std::uniform_real_distribution<double> w(0.5, 2.0);
    for (std::size_t s = 0; s < gs.groups.size(); ++s) gs.weights.push_back(w(rng));
  }
  return gs;
}

inline Problem<double> random_problem(std::mt19937_64& rng, Index n, Index m, Penalty penalty,
                                      bool weighted = false, double lambda_fraction = 0.2) {
  auto groups = random_groups(rng, m, weighted);
  MatrixXd A = random_matrix(rng, n, m);
  VectorXd b = random_vector(rng, n);
  auto p = make_problem(std::move(A), std::move(b), 1.0, penalty, std::move(groups));
  p.lambda = lambda_fraction * zero_solution_lambda(p);
  return p;
}

inline Problem<double> small_ogl(std::uint64_t seed, Index n, Index J, Penalty penalty,
                                 double lambda_fraction) {
  Dataset d = gen_ogl(OglSpec{n, J, 10, 3, seed}, 1.0, penalty);
  d.problem.lambda = lambda_fraction * zero_solution_lambda(d.problem);
  return d.problem;
}

/// Root of a nonincreasing function on [lo, hi] by bisection.
inline double bisect(const std::function<double(double)>& f, double lo, double hi) {
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) > 0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

/// argmin_y 1/2||y - d||^2 + t||y||_2 by searching along the ray y = r d/||d||:
/// phi'(r) = r - ||d|| + t.
inline VectorXd oracle_prox_l2(const VectorXd& d, double t) {
  const double norm = d.norm();
  if (norm == 0) return VectorXd::Zero(d.size());
  const double r = bisect([&](double r) { return norm - t - r; }, 0.0, norm);
  return (r / norm) * d;
}

/// argmin_y 1/2||y - d||^2 + t||y||_inf over the epigraph variable s = ||y||_inf:
/// for fixed s the optimum is clip(d, -s, s) and
/// phi'(s) = t - sum_i (|d_i| - s)_+ is nondecreasing in s.
inline VectorXd oracle_prox_linf(const VectorXd& d, double t) {
  const double top = d.cwiseAbs().maxCoeff();
  if (top == 0) return VectorXd::Zero(d.size());
  const auto excess = [&](double s) { return (d.cwiseAbs().array() - s).cwiseMax(0.0).sum() - t; };
  if (excess(0.0) <= 0) return VectorXd::Zero(d.size());
  const double s = bisect(excess, 0.0, top);
  return d.cwiseMax(-s).cwiseMin(s);
}

/// Simplex projection through the threshold equation sum_i (v_i - theta)_+ = radius.
inline VectorXd oracle_project_simplex(const VectorXd& v, double radius) {
  const auto excess = [&](double th) { return (v.array() - th).cwiseMax(0.0).sum() - radius; };
  const double theta = bisect(excess, v.minCoeff() - radius, v.maxCoeff());
  return (v.array() - theta).cwiseMax(0.0).matrix();
}

/// Projected-gradient oracle for the group prox of a full problem: minimizes
/// 1/2||y - d||^2 + t * sum_s w_s ||y_s|| groupwise through the scalar oracles.
inline VectorXd oracle_prox_penalty(const VectorXd& d, double t, const Problem<double>& p) {
  VectorXd out(d.size());
  for (Index s = 0; s < p.map.group_count(); ++s) {
    const VectorXd block = d.segment(p.map.group_begin(s), p.map.group_size(s));
    const double ts = t * p.weight(s);
    out.segment(p.map.group_begin(s), p.map.group_size(s)) =
        p.penalty == Penalty::L1L2 ? oracle_prox_l2(block, ts) : oracle_prox_linf(block, ts);
  }
  return out;
}

/// Subgradient membership of -gamma in dg(ybar), groupwise, with tolerance tol:
///   l2:   zero group  -> ||gamma_s|| <= lambda w_s
///         else        -> gamma_s = -lambda w_s ybar_s/||ybar_s||
///   linf: zero group  -> ||gamma_s||_1 <= lambda w_s
///         else        -> ||gamma_s||_1 = lambda w_s, -gamma_s supported on the
///                        argmax set with matching signs.
inline double subgradient_violation(const VectorXd& gamma, const VectorXd& ybar,
                                    const Problem<double>& p, double zero_tol = 1e-12) {
  double worst = 0;
  for (Index s = 0; s < p.map.group_count(); ++s) {
    const VectorXd g = gamma.segment(p.map.group_begin(s), p.map.group_size(s));
    const VectorXd y = ybar.segment(p.map.group_begin(s), p.map.group_size(s));
    const double radius = p.lambda * p.weight(s);
    if (p.penalty == Penalty::L1L2) {
      if (y.norm() <= zero_tol) {
        worst = std::max(worst, g.norm() - radius);
      } else {
        worst = std::max(worst, (g + radius * y / y.norm()).norm());
      }
    } else {
      const double top = y.cwiseAbs().maxCoeff();
      if (top <= zero_tol) {
        worst = std::max(worst, g.lpNorm<1>() - radius);
      } else {
        worst = std::max(worst, std::abs(g.lpNorm<1>() - radius));
        for (Index i = 0; i < y.size(); ++i) {
          const bool at_max = std::abs(std::abs(y[i]) - top) <= 1e-9 * std::max(1.0, top);
          if (!at_max) {
            worst = std::max(worst, std::abs(g[i]));
          } else if (y[i] * g[i] > 0) {
            worst = std::max(worst, std::abs(g[i]));
          }
        }
      }
    }
  }
  return worst;
}

/// Elementwise Lasso KKT residual at x, scaled by lambda:
///   zero coordinate:   (|g_j| - lambda)_+
///   active coordinate: |g_j + lambda sign(x_j)|
/// with g = A^T(Ax - b).
inline double lasso_kkt_residual(const MatrixXd& A, const VectorXd& b, const VectorXd& x,
                                 double lambda) {
  const VectorXd g = A.transpose() * (A * x - b);
  double worst = 0;
  for (Index j = 0; j < x.size(); ++j) {
    const double r = x[j] == 0 ? std::max(0.0, std::abs(g[j]) - lambda)
                               : std::abs(g[j] + lambda * (x[j] > 0 ? 1.0 : -1.0));
    worst = std::max(worst, r);
  }
  return worst / lambda;
}

/// Independent evaluation of the relative primal residual from dense C.
inline double dense_primal_residual(const VectorXd& x, const VectorXd& y, const ReplicationMap& map) {
  MatrixXd C = MatrixXd::Zero(map.rows(), map.cols());
  for (Index i = 0; i < map.rows(); ++i) C(i, map.row_to_col[i]) = 1.0;
  const VectorXd Cx = C * x;
  return (Cx - y).norm() / std::max({Cx.norm(), y.norm(), 1e-12});
}

/// Inner problem fixture: fixed multiplier v and penalty mu on a problem.
struct InnerFixture {
  Problem<double> problem;
  InnerInput<double> input;
};

/// The multiplier comes from a few outer iterations at the same mu, so the
/// inner minimizer is a nontrivial point near the sparse solution; the inner
/// solve then starts cold from (0, 0).
inline InnerFixture inner_fixture(std::uint64_t seed, Index n, Index J, Penalty penalty, double mu,
                                  double lambda_fraction = 0.1, Index warm_outer = 3) {
  InnerFixture f{small_ogl(seed, n, J, penalty, lambda_fraction), {}};
  OuterConfig config;
  config.mu0 = mu;
  config.max_outer = warm_outer;
  const auto warm = solve(f.problem, config, Algorithm::FISTAP);
  f.input.x0 = VectorXd::Zero(f.problem.m());
  f.input.y0 = VectorXd::Zero(f.problem.M());
  f.input.v = warm.v;
  f.input.mu = mu;
  f.input.eps_in = 1e-12;
  f.input.max_inner = 60;
  return f;
}

/// High-accuracy minimizer (x*, y*) and value F* of L(x, y; v) for fixed v.
struct InnerOptimum {
  VectorXd x;
  VectorXd y;
  double value = 0;
};

inline InnerOptimum inner_reference(const InnerFixture& f, double tol = 1e-10) {
  SystemCache<double> cache(f.problem.A, f.problem.map);
  InnerInput<double> in = f.input;
  in.eps_in = tol;
  in.max_inner = 200000;
  const auto out = fistap(in, f.problem, cache);
  InnerOptimum opt{out.x, out.y, 0};
  // Finish with the exact x-minimizer for the returned y.
  const auto sys = cache.for_alpha(1 / in.mu);
  opt.x = sys->solve(VectorXd(detail::x_rhs_base(f.problem, in.v) +
                              apply_Ct(opt.y, f.problem.map) / in.mu));
  opt.value = augmented_lagrangian(opt.x, opt.y, in.v, in.mu, f.problem);
  return opt;
}

}  // namespace ogl::testing
