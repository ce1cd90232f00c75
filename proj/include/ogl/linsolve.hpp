#pragma once

// Solvers for (A^T A + alpha D) x = rhs, D diagonal with entries >= 1.
//
// Three regimes:
//   DirectM      Cholesky of the m x m matrix A^T A + alpha D.
//   DirectN_SMW  Cholesky of the n x n matrix I + (1/alpha) A D^{-1} A^T and the
//                Sherman-Morrison-Woodbury identity
//                  (A^T A + alpha D)^{-1} = (1/alpha) D^{-1}
//                      - (1/alpha^2) D^{-1} A^T (I + (1/alpha) A D^{-1} A^T)^{-1} A D^{-1}.
//   PCG          Jacobi-preconditioned conjugate gradients on matvecs only.

#include <ogl/group_model.hpp>

#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace ogl {

enum class LinsolveMode { Auto, DirectM, DirectN_SMW, PCG };

inline std::string to_string(LinsolveMode mode) {
  switch (mode) {
    case LinsolveMode::Auto: return "auto";
    case LinsolveMode::DirectM: return "direct-m";
    case LinsolveMode::DirectN_SMW: return "direct-n";
    case LinsolveMode::PCG: return "pcg";
  }
  return "?";
}

/// CLI spelling: auto | direct | pcg. "direct" lets the shape pick M vs N.
inline LinsolveMode parse_linsolve(const std::string& s) {
  if (s == "auto" || s == "direct") return LinsolveMode::Auto;
  if (s == "pcg") return LinsolveMode::PCG;
  if (s == "direct-m") return LinsolveMode::DirectM;
  if (s == "direct-n") return LinsolveMode::DirectN_SMW;
  throw InputError("unknown linear solver '" + s + "' (expected auto, direct or pcg)");
}

inline constexpr Index kDefaultPcgThreshold = 4096;

template <class Scalar>
struct PcgResult {
  Vector<Scalar> x;
  Index iterations = 0;
  Scalar residual = 0;  // ||op(x) - rhs|| / ||rhs||
  bool converged = false;
  std::vector<Scalar> history;  // relative residual after each iteration
};

/// Preconditioned conjugate gradients for an SPD operator. `op(p)` returns
/// the operator applied to p; `precond(r)` returns M^{-1} r.
template <class Scalar, class Op, class Precond>
PcgResult<Scalar> pcg(Op&& op, const Vector<Scalar>& rhs, Scalar tol, Index max_iter,
                      Precond&& precond, const Vector<Scalar>* x0 = nullptr) {
  require(tol > 0, "pcg: tolerance must be positive");
  PcgResult<Scalar> out;
  const Scalar rhs_norm = rhs.norm();
  if (rhs_norm == 0) {
    out.x = Vector<Scalar>::Zero(rhs.size());
    out.converged = true;
    return out;
  }
  out.x = x0 ? *x0 : Vector<Scalar>::Zero(rhs.size());
  Vector<Scalar> r = x0 ? Vector<Scalar>(rhs - op(out.x)) : rhs;
  out.residual = r.norm() / rhs_norm;
  if (out.residual <= tol) {
    out.converged = true;
    return out;
  }
  Vector<Scalar> z = precond(r);
  Vector<Scalar> p = z;
  Scalar rz = r.dot(z);
  for (Index it = 0; it < max_iter; ++it) {
    const Vector<Scalar> q = op(p);
    const Scalar curvature = p.dot(q);
    if (!(curvature > 0)) {
      throw SolverError("pcg: non-positive curvature " + std::to_string(curvature) +
                        " (operator is not SPD)");
    }
    const Scalar step = rz / curvature;
    out.x += step * p;
    r -= step * q;
    out.iterations = it + 1;
    out.residual = r.norm() / rhs_norm;
    out.history.push_back(out.residual);
    if (out.residual <= tol) {
      out.converged = true;
      return out;
    }
    z = precond(r);
    const Scalar rz_next = r.dot(z);
    p = z + (rz_next / rz) * p;
    rz = rz_next;
  }
  return out;
}

template <class Scalar>
struct LinsolveOptions {
  Scalar pcg_tol = Scalar(1e-10);
  Index pcg_max_iter = 0;  // 0 means 2m
  const Vector<Scalar>* warm_start = nullptr;
};

template <class Scalar>
class Factorization;

/// Plans a solver for (A^T A + alpha D). `gram_m` (A^T A) and `gram_n`
/// (A D^{-1} A^T) may be supplied to avoid recomputing alpha-independent
/// products. A must outlive the returned object.
template <class Scalar>
Factorization<Scalar> plan(const Matrix<Scalar>& A, const Vector<Scalar>& d, Scalar alpha,
                           LinsolveMode hint = LinsolveMode::Auto,
                           Index pcg_threshold = kDefaultPcgThreshold,
                           const Matrix<Scalar>* gram_m = nullptr,
                           const Matrix<Scalar>* gram_n = nullptr);

/// A planned solver for one value of alpha. Immutable after planning, so one
/// instance may be shared by concurrent solves.
template <class Scalar>
class Factorization {
 public:
  LinsolveMode mode() const { return mode_; }
  Scalar alpha() const { return alpha_; }
  Index size() const { return A_->cols(); }

  /// (A^T A + alpha D) x without forming A^T A.
  Vector<Scalar> apply(const Vector<Scalar>& x) const {
    return A_->transpose() * (*A_ * x) + alpha_ * d_.cwiseProduct(x);
  }

  Vector<Scalar> solve(const Vector<Scalar>& rhs, const LinsolveOptions<Scalar>& opts = {},
                       PcgResult<Scalar>* stats = nullptr) const {
    require(rhs.size() == size(), "linsolve: rhs has wrong length");
    switch (mode_) {
      case LinsolveMode::DirectM:
        return llt_.solve(rhs);
      case LinsolveMode::DirectN_SMW: {
        const Vector<Scalar> u = rhs.cwiseQuotient(d_);
        const Vector<Scalar> w = llt_.solve(*A_ * u);
        const Vector<Scalar> correction = (A_->transpose() * w).cwiseQuotient(d_);
        return (u - correction / alpha_) / alpha_;
      }
      case LinsolveMode::PCG: {
        const Index cap = opts.pcg_max_iter > 0 ? opts.pcg_max_iter : 2 * size();
        auto result = pcg<Scalar>([this](const Vector<Scalar>& p) { return apply(p); }, rhs,
                                  opts.pcg_tol, cap,
                                  [this](const Vector<Scalar>& r) {
                                    return Vector<Scalar>(r.cwiseQuotient(jacobi_));
                                  },
                                  opts.warm_start);
        if (!result.converged) {
          throw SolverError("pcg did not converge in " + std::to_string(cap) +
                            " iterations (relative residual " +
                            std::to_string(static_cast<double>(result.residual)) + ")");
        }
        Vector<Scalar> x = std::move(result.x);
        if (stats) {
          *stats = std::move(result);
        }
        return x;
      }
      case LinsolveMode::Auto:
        break;
    }
    throw SolverError("linsolve: unplanned factorization");
  }

 private:
  template <class S>
  friend Factorization<S> plan(const Matrix<S>& A, const Vector<S>& d, S alpha, LinsolveMode hint,
                               Index pcg_threshold, const Matrix<S>* gram_m,
                               const Matrix<S>* gram_n);

  const Matrix<Scalar>* A_ = nullptr;
  Vector<Scalar> d_;
  Scalar alpha_ = 0;
  LinsolveMode mode_ = LinsolveMode::Auto;
  Eigen::LLT<Matrix<Scalar>> llt_;
  Vector<Scalar> jacobi_;
};

/// Shape rule for LinsolveMode::Auto.
inline LinsolveMode choose_mode(Index n, Index m, LinsolveMode hint,
                                Index pcg_threshold = kDefaultPcgThreshold) {
  if (hint != LinsolveMode::Auto) return hint;
  if (n > pcg_threshold && m > pcg_threshold) return LinsolveMode::PCG;
  return m <= n ? LinsolveMode::DirectM : LinsolveMode::DirectN_SMW;
}

template <class Scalar>
Factorization<Scalar> plan(const Matrix<Scalar>& A, const Vector<Scalar>& d, Scalar alpha,
                           LinsolveMode hint, Index pcg_threshold, const Matrix<Scalar>* gram_m,
                           const Matrix<Scalar>* gram_n) {
  require(alpha > 0 && std::isfinite(static_cast<double>(alpha)), "plan: alpha must be positive");
  require(d.size() == A.cols(), "plan: diagonal has wrong length");
  require((d.array() > 0).all(), "plan: diagonal entries must be positive");

  Factorization<Scalar> f;
  f.A_ = &A;
  f.d_ = d;
  f.alpha_ = alpha;
  f.mode_ = choose_mode(A.rows(), A.cols(), hint, pcg_threshold);

  switch (f.mode_) {
    case LinsolveMode::DirectM: {
      Matrix<Scalar> K = gram_m ? *gram_m : Matrix<Scalar>(A.transpose() * A);
      K.diagonal() += alpha * d;
      f.llt_.compute(K);
      break;
    }
    case LinsolveMode::DirectN_SMW: {
      Matrix<Scalar> S;
      if (gram_n) {
        S = *gram_n / alpha;
      } else {
        S = (A * d.cwiseInverse().asDiagonal() * A.transpose()) / alpha;
      }
      S.diagonal().array() += Scalar(1);
      f.llt_.compute(S);
      break;
    }
    case LinsolveMode::PCG:
      f.jacobi_ = A.colwise().squaredNorm().transpose() + alpha * d;
      break;
    case LinsolveMode::Auto:
      break;
  }
  if ((f.mode_ == LinsolveMode::DirectM || f.mode_ == LinsolveMode::DirectN_SMW) &&
      (f.llt_.info() != Eigen::Success || !f.llt_.matrixLLT().allFinite())) {
    throw SolverError("Cholesky factorization failed (non-finite entries in A?)");
  }
  return f;
}

/// Keeps the planned solvers for the current penalty parameter(s) and the
/// alpha-independent Gram products they are built from. Lookups are keyed by
/// alpha, so a solve can never use a factorization built for another alpha.
template <class Scalar>
class SystemCache {
 public:
  SystemCache(const Matrix<Scalar>& A, const ReplicationMap& map,
              LinsolveMode hint = LinsolveMode::Auto,
              Index pcg_threshold = kDefaultPcgThreshold, std::size_t capacity = 2)
      : A_(&A),
        d_(map.diagonal<Scalar>()),
        mode_(choose_mode(A.rows(), A.cols(), hint, pcg_threshold)),
        capacity_(capacity) {
    require(A.cols() == map.cols(), "SystemCache: A and replication map disagree on m");
  }

  LinsolveMode mode() const { return mode_; }

  std::shared_ptr<const Factorization<Scalar>> for_alpha(Scalar alpha) {
    for (const auto& entry : entries_) {
      if (entry->alpha() == alpha) return entry;
    }
    if (mode_ == LinsolveMode::DirectM && !gram_m_) {
      gram_m_ = Matrix<Scalar>(A_->transpose() * *A_);
    }
    if (mode_ == LinsolveMode::DirectN_SMW && !gram_n_) {
      gram_n_ = Matrix<Scalar>(*A_ * d_.cwiseInverse().asDiagonal() * A_->transpose());
    }
    auto f = std::make_shared<const Factorization<Scalar>>(
        plan(*A_, d_, alpha, mode_, 0, gram_m_ ? &*gram_m_ : nullptr,
             gram_n_ ? &*gram_n_ : nullptr));
    ++plans_;
    entries_.push_back(f);
    if (entries_.size() > capacity_) entries_.erase(entries_.begin());
    return f;
  }

  /// Number of factorizations planned so far.
  Index plan_count() const { return plans_; }

 private:
  const Matrix<Scalar>* A_;
  Vector<Scalar> d_;
  LinsolveMode mode_;
  std::size_t capacity_;
  std::optional<Matrix<Scalar>> gram_m_;
  std::optional<Matrix<Scalar>> gram_n_;
  std::vector<std::shared_ptr<const Factorization<Scalar>>> entries_;
  Index plans_ = 0;
};

}  // namespace ogl
