#pragma once

// Overlapping group structure, the replication map y = Cx, and the
// objective pieces evaluated on top of it.

#include <ogl/core.hpp>

#include <cmath>
#include <string>
#include <utility>
#include <vector>

namespace ogl {

enum class Penalty { L1L2, L1Inf };

inline std::string to_string(Penalty p) { return p == Penalty::L1L2 ? "l12" : "l1inf"; }

inline Penalty parse_penalty(const std::string& s) {
  if (s == "l12" || s == "l1l2") return Penalty::L1L2;
  if (s == "l1inf") return Penalty::L1Inf;
  throw InputError("unknown penalty '" + s + "' (expected l12 or l1inf)");
}

/// Feature groups over 0..m-1. Groups may overlap; every feature must be
/// covered by at least one group.
template <class Scalar = double>
struct GroupStructure {
  std::vector<std::vector<Index>> groups;
  std::vector<Scalar> weights;
  Index m = 0;

  Index group_count() const { return static_cast<Index>(groups.size()); }

  Index replicated_size() const {
    Index total = 0;
    for (const auto& g : groups) total += static_cast<Index>(g.size());
    return total;
  }
};

/// The implicit 0/1 matrix C with one nonzero per row. Replicated
/// coordinates are laid out group by group, so group s occupies
/// [group_offsets[s], group_offsets[s+1]).
struct ReplicationMap {
  std::vector<Index> row_to_col;
  std::vector<Index> multiplicity;  // diagonal of D = C^T C
  std::vector<Index> group_offsets;

  Index rows() const { return static_cast<Index>(row_to_col.size()); }
  Index cols() const { return static_cast<Index>(multiplicity.size()); }
  Index group_count() const { return static_cast<Index>(group_offsets.size()) - 1; }
  Index group_begin(Index s) const { return group_offsets[s]; }
  Index group_size(Index s) const { return group_offsets[s + 1] - group_offsets[s]; }

  template <class Scalar = double>
  Vector<Scalar> diagonal() const {
    Vector<Scalar> d(cols());
    for (Index j = 0; j < cols(); ++j) d[j] = static_cast<Scalar>(multiplicity[j]);
    return d;
  }

  Index max_multiplicity() const {
    Index best = 0;
    for (Index c : multiplicity) best = std::max(best, c);
    return best;
  }
};

template <class Scalar>
ReplicationMap build_replication(const GroupStructure<Scalar>& gs) {
  require(gs.m > 0, "group structure needs m > 0");
  require(!gs.groups.empty(), "group structure has no groups");
  require(gs.weights.empty() || gs.weights.size() == gs.groups.size(),
          "weights must be empty or one per group");

  ReplicationMap map;
  map.multiplicity.assign(gs.m, 0);
  map.group_offsets.reserve(gs.groups.size() + 1);
  map.group_offsets.push_back(0);
  for (std::size_t s = 0; s < gs.groups.size(); ++s) {
    const auto& g = gs.groups[s];
    require(!g.empty(), "group " + std::to_string(s) + " is empty");
    for (Index j : g) {
      require(j >= 0 && j < gs.m, "group " + std::to_string(s) + " has index " +
                                      std::to_string(j) + " outside [0, " +
                                      std::to_string(gs.m) + ")");
      map.row_to_col.push_back(j);
      ++map.multiplicity[j];
    }
    map.group_offsets.push_back(static_cast<Index>(map.row_to_col.size()));
  }
  for (Index j = 0; j < gs.m; ++j) {
    require(map.multiplicity[j] > 0,
            "feature " + std::to_string(j) + " is not covered by any group");
  }
  for (std::size_t s = 0; s < gs.weights.size(); ++s) {
    require(gs.weights[s] >= 0 && std::isfinite(static_cast<double>(gs.weights[s])),
            "group " + std::to_string(s) + " has a negative or non-finite weight");
  }
  return map;
}

/// out = C x
template <class Derived>
Vector<typename Derived::Scalar> apply_C(const Eigen::MatrixBase<Derived>& x,
                                         const ReplicationMap& map) {
  require(x.size() == map.cols(), "apply_C: x has wrong length");
  Vector<typename Derived::Scalar> out(map.rows());
  for (Index i = 0; i < map.rows(); ++i) out[i] = x[map.row_to_col[i]];
  return out;
}

/// out = C^T u, i.e. replicated entries summed back onto their feature.
template <class Derived>
Vector<typename Derived::Scalar> apply_Ct(const Eigen::MatrixBase<Derived>& u,
                                          const ReplicationMap& map) {
  require(u.size() == map.rows(), "apply_Ct: u has wrong length");
  Vector<typename Derived::Scalar> out = Vector<typename Derived::Scalar>::Zero(map.cols());
  for (Index i = 0; i < map.rows(); ++i) out[map.row_to_col[i]] += u[i];
  return out;
}

/// Least squares with an overlapping group penalty:
///   min_x 1/2 ||Ax - b||^2 + lambda * sum_s w_s ||x_s||      (l2 or l-inf)
template <class Scalar = double>
struct Problem {
  Matrix<Scalar> A;
  Vector<Scalar> b;
  Scalar lambda = 1;
  Penalty penalty = Penalty::L1L2;
  GroupStructure<Scalar> groups;
  ReplicationMap map;

  Index n() const { return A.rows(); }
  Index m() const { return A.cols(); }
  Index M() const { return map.rows(); }

  Scalar weight(Index s) const {
    return groups.weights.empty() ? Scalar(1) : groups.weights[s];
  }
};

template <class Scalar>
Problem<Scalar> make_problem(Matrix<Scalar> A, Vector<Scalar> b, Scalar lambda, Penalty penalty,
                             GroupStructure<Scalar> groups) {
  require(A.rows() == b.size(), "A has " + std::to_string(A.rows()) + " rows but b has " +
                                    std::to_string(b.size()) + " entries");
  require(A.cols() == groups.m, "A has " + std::to_string(A.cols()) +
                                    " columns but groups cover m=" + std::to_string(groups.m));
  require(lambda > 0 && std::isfinite(static_cast<double>(lambda)), "lambda must be positive");
  Problem<Scalar> p;
  p.map = build_replication(groups);
  p.A = std::move(A);
  p.b = std::move(b);
  p.lambda = lambda;
  p.penalty = penalty;
  p.groups = std::move(groups);
  return p;
}

template <class Derived>
typename Derived::Scalar block_norm(const Eigen::MatrixBase<Derived>& block, Penalty penalty) {
  if (block.size() == 0) return 0;
  return penalty == Penalty::L1L2 ? block.norm() : block.template lpNorm<Eigen::Infinity>();
}

/// lambda * sum_s w_s ||y_s|| over the contiguous replicated blocks.
template <class Scalar, class Derived>
Scalar penalty_value(const Eigen::MatrixBase<Derived>& y, const Problem<Scalar>& problem) {
  require(y.size() == problem.M(), "penalty_value: y has wrong length");
  Scalar total = 0;
  for (Index s = 0; s < problem.map.group_count(); ++s) {
    total += problem.weight(s) *
             block_norm(y.segment(problem.map.group_begin(s), problem.map.group_size(s)),
                        problem.penalty);
  }
  return problem.lambda * total;
}

template <class Scalar, class DX, class DY>
Scalar objective(const Eigen::MatrixBase<DX>& x, const Eigen::MatrixBase<DY>& y,
                 const Problem<Scalar>& problem) {
  require(x.size() == problem.m(), "objective: x has wrong length");
  return Scalar(0.5) * (problem.A * x - problem.b).squaredNorm() + penalty_value(y, problem);
}

/// f(x, y) = 1/2||Ax-b||^2 - v^T(Cx-y) + 1/(2 mu)||Cx-y||^2, the smooth part
/// of the augmented Lagrangian for a fixed multiplier v.
template <class Scalar>
Scalar smooth_value(const Vector<Scalar>& x, const Vector<Scalar>& y, const Vector<Scalar>& v,
                    Scalar mu, const Problem<Scalar>& problem) {
  require(mu > 0, "mu must be positive");
  const Vector<Scalar> gap = apply_C(x, problem.map) - y;
  return Scalar(0.5) * (problem.A * x - problem.b).squaredNorm() - v.dot(gap) +
         gap.squaredNorm() / (2 * mu);
}

template <class Scalar>
struct SmoothGradient {
  Vector<Scalar> x;
  Vector<Scalar> y;
};

template <class Scalar>
SmoothGradient<Scalar> smooth_gradient(const Vector<Scalar>& x, const Vector<Scalar>& y,
                                       const Vector<Scalar>& v, Scalar mu,
                                       const Problem<Scalar>& problem) {
  require(mu > 0, "mu must be positive");
  const Vector<Scalar> gap = apply_C(x, problem.map) - y;
  SmoothGradient<Scalar> g;
  g.x = problem.A.transpose() * (problem.A * x - problem.b) +
        apply_Ct(Vector<Scalar>(gap / mu - v), problem.map);
  g.y = v - gap / mu;
  return g;
}

/// Augmented Lagrangian L(x, y, v) = f(x, y) + penalty(y).
template <class Scalar>
Scalar augmented_lagrangian(const Vector<Scalar>& x, const Vector<Scalar>& y,
                            const Vector<Scalar>& v, Scalar mu, const Problem<Scalar>& problem) {
  return smooth_value(x, y, v, mu, problem) + penalty_value(y, problem);
}

/// Smallest lambda (for this problem's data) at which x = 0 is certified
/// optimal. The certificate spreads g = A^T b evenly over the replicates of
/// each feature: u_i = g_j / (lambda * mult_j), which satisfies C^T u = g / lambda
/// and is dual-feasible once lambda >= max_s ||(g/mult)_s||_* / w_s.
template <class Scalar>
Scalar zero_solution_lambda(const Problem<Scalar>& problem) {
  const Vector<Scalar> g = problem.A.transpose() * problem.b;
  const auto& map = problem.map;
  Scalar best = 0;
  for (Index s = 0; s < map.group_count(); ++s) {
    Vector<Scalar> block(map.group_size(s));
    for (Index k = 0; k < block.size(); ++k) {
      const Index j = map.row_to_col[map.group_begin(s) + k];
      block[k] = g[j] / static_cast<Scalar>(map.multiplicity[j]);
    }
    const Scalar dual = problem.penalty == Penalty::L1L2 ? block.norm() : block.template lpNorm<1>();
    const Scalar w = problem.weight(s);
    if (w > 0) best = std::max(best, dual / w);
  }
  return best;
}

}  // namespace ogl
