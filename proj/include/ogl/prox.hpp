#pragma once

// Proximal maps of the group penalties and the projections they rely on.

#include <ogl/group_model.hpp>

#include <algorithm>
#include <functional>

namespace ogl {

/// Prox of t*||.||_2: shrinks d radially by t, or to zero when ||d|| <= t.
template <class Derived>
Vector<typename Derived::Scalar> block_soft_threshold(const Eigen::MatrixBase<Derived>& d,
                                                      typename Derived::Scalar t) {
  using Scalar = typename Derived::Scalar;
  require(t > 0, "block_soft_threshold: threshold must be positive");
  const Scalar norm = d.norm();
  if (norm <= t) return Vector<Scalar>::Zero(d.size());
  return ((norm - t) / norm) * d;
}

/// Euclidean projection onto {z >= 0, sum z = radius}. Sort-based: with u
/// sorted descending, the support is the largest k with
/// u_k > (sum_{i<=k} u_i - radius) / k.
template <class Derived>
Vector<typename Derived::Scalar> project_simplex(const Eigen::MatrixBase<Derived>& v,
                                                 typename Derived::Scalar radius) {
  using Scalar = typename Derived::Scalar;
  require(radius > 0, "project_simplex: radius must be positive");
  const Index k = v.size();
  if (k == 0) return Vector<Scalar>();
  Vector<Scalar> u = v;
  std::sort(u.data(), u.data() + k, std::greater<Scalar>());
  Scalar cumsum = 0;
  Scalar theta = 0;
  for (Index i = 0; i < k; ++i) {
    cumsum += u[i];
    const Scalar candidate = (cumsum - radius) / static_cast<Scalar>(i + 1);
    if (u[i] > candidate) theta = candidate;
  }
  return (v.array() - theta).cwiseMax(Scalar(0)).matrix();
}

/// Projection onto the l1 ball of the given radius.
template <class Derived>
Vector<typename Derived::Scalar> project_l1_ball(const Eigen::MatrixBase<Derived>& c,
                                                 typename Derived::Scalar radius) {
  using Scalar = typename Derived::Scalar;
  require(radius > 0, "project_l1_ball: radius must be positive");
  if (c.template lpNorm<1>() <= radius) return c;
  const Vector<Scalar> magnitude = c.cwiseAbs();
  const Vector<Scalar> z = project_simplex(magnitude, radius);
  return (c.array().sign() * z.array()).matrix();
}

/// Prox of t*||.||_inf via the Moreau decomposition against the dual l1 ball.
template <class Derived>
Vector<typename Derived::Scalar> prox_linf(const Eigen::MatrixBase<Derived>& c,
                                           typename Derived::Scalar t) {
  require(t > 0, "prox_linf: threshold must be positive");
  return c - project_l1_ball(c, t);
}

template <class Derived>
Vector<typename Derived::Scalar> prox_block(const Eigen::MatrixBase<Derived>& d,
                                            typename Derived::Scalar t, Penalty penalty) {
  return penalty == Penalty::L1L2 ? block_soft_threshold(d, t) : prox_linf(d, t);
}

/// argmin_y 1/2||d - y||^2 + t * penalty(y)/lambda, i.e. every group slice is
/// thresholded at t * w_s. Groups with zero weight pass through unchanged.
template <class Scalar, class Derived>
Vector<Scalar> prox_penalty(const Eigen::MatrixBase<Derived>& d, Scalar t,
                            const Problem<Scalar>& problem) {
  require(d.size() == problem.M(), "prox_penalty: d has wrong length");
  require(t > 0, "prox_penalty: threshold must be positive");
  const auto& map = problem.map;
  Vector<Scalar> out(d.size());
  for (Index s = 0; s < map.group_count(); ++s) {
    const Index begin = map.group_begin(s);
    const Index size = map.group_size(s);
    const Scalar ts = t * problem.weight(s);
    if (ts > 0) {
      out.segment(begin, size) = prox_block(d.segment(begin, size), ts, problem.penalty);
    } else {
      out.segment(begin, size) = d.segment(begin, size);
    }
  }
  return out;
}

}  // namespace ogl
