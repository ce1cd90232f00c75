#include "support.hpp"

#include <gtest/gtest.h>

namespace {

using namespace ogl;
using namespace ogl::testing;

struct Step {
  VectorXd x;
  VectorXd y;
  bool skipped = false;
  double rho = 0;
};

std::vector<Step> trajectory(Algorithm alg, const InnerFixture& f, InnerControls<double> controls = {},
                             InnerOutput<double>* result = nullptr) {
  std::vector<Step> steps;
  controls.observer = [&](const IterateView<double>& v) {
    steps.push_back({v.x, v.ybar, v.skipped, v.rho});
  };
  SystemCache<double> cache(f.problem.A, f.problem.map);
  auto out = inner_solve(alg, f.input, f.problem, cache, controls);
  if (result) *result = std::move(out);
  return steps;
}

void expect_bitwise_equal(const std::vector<Step>& a, const std::vector<Step>& b) {
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_TRUE(a[k].x == b[k].x) << "x differs at iteration " << k;
    EXPECT_TRUE(a[k].y == b[k].y) << "ybar differs at iteration " << k;
  }
}

TEST(Inner, ParsesAlgorithmNames) {
  for (auto a : {Algorithm::ADAL, Algorithm::APLMS, Algorithm::ISTAP, Algorithm::FISTAP, Algorithm::FISTA}) {
    EXPECT_EQ(parse_algorithm(to_string(a)), a);
  }
  EXPECT_THROW(parse_algorithm("admm"), InputError);
}

TEST(Inner, AdalXStepSolvesItsSystem) {
  auto f = inner_fixture(1, 60, 6, Penalty::L1L2, 0.05);
  std::mt19937_64 rng(2);
  f.input.y0 = random_vector(rng, f.problem.M());
  SystemCache<double> cache(f.problem.A, f.problem.map);
  const auto out = adal_step(f.input, f.problem, cache);
  EXPECT_EQ(out.iterations, 1);
  const VectorXd rhs = f.problem.A.transpose() * f.problem.b + apply_Ct(f.input.v, f.problem.map) +
                       apply_Ct(f.input.y0, f.problem.map) / f.input.mu;
  MatrixXd K = f.problem.A.transpose() * f.problem.A;
  K.diagonal() += f.problem.map.diagonal<double>() / f.input.mu;
  EXPECT_LE((K * out.x - rhs).norm(), 1e-8 * rhs.norm());
  EXPECT_LE((out.y - oracle_prox_penalty(VectorXd(apply_C(out.x, f.problem.map) - f.input.mu * f.input.v),
                                         f.input.mu * f.problem.lambda, f.problem))
                .cwiseAbs()
                .maxCoeff(),
            1e-8);
}

TEST(Inner, AdalKillsAllGroupsForHugeLambda) {
  auto f = inner_fixture(3, 40, 5, Penalty::L1L2, 0.1);
  f.input.v.setZero();
  f.problem.lambda = 1e8;
  SystemCache<double> cache(f.problem.A, f.problem.map);
  EXPECT_EQ(adal_step(f.input, f.problem, cache).y.norm(), 0.0);
}

// ADAL's ApproxAugLagMin with the multiplier frozen is ISTA-p.
TEST(Inner, AdalWithFrozenMultiplierIsIstaP) {
  for (Penalty pen : {Penalty::L1L2, Penalty::L1Inf}) {
    auto f = inner_fixture(5, 80, 8, pen, 0.05);
    f.input.max_inner = 25;
    const auto ista = trajectory(Algorithm::ISTAP, f);
    SystemCache<double> cache(f.problem.A, f.problem.map);
    InnerInput<double> in = f.input;
    for (std::size_t k = 0; k < ista.size(); ++k) {
      const auto out = adal_step(in, f.problem, cache);
      EXPECT_LE((out.x - ista[k].x).norm(), 1e-14 * (1 + ista[k].x.norm()));
      EXPECT_LE((out.y - ista[k].y).norm(), 1e-14 * (1 + ista[k].y.norm()));
      in.x0 = out.x;
      in.y0 = out.y;
    }
  }
}

TEST(Inner, ForcedSkipAplmsIsIstaP) {
  for (Penalty pen : {Penalty::L1L2, Penalty::L1Inf}) {
    auto f = inner_fixture(7, 80, 8, pen, 0.05);
    InnerControls<double> controls;
    controls.force_skip = true;
    InnerOutput<double> out;
    const auto skip = trajectory(Algorithm::APLMS, f, controls, &out);
    expect_bitwise_equal(skip, trajectory(Algorithm::ISTAP, f));
    EXPECT_EQ(out.skips, out.iterations);
  }
}

TEST(Inner, FistaPWithoutMomentumIsIstaP) {
  for (Penalty pen : {Penalty::L1L2, Penalty::L1Inf}) {
    auto f = inner_fixture(9, 80, 8, pen, 0.05);
    InnerControls<double> controls;
    controls.disable_momentum = true;
    expect_bitwise_equal(trajectory(Algorithm::FISTAP, f, controls), trajectory(Algorithm::ISTAP, f));
  }
}

TEST(Inner, IstaPAndAplmsAreMonotone) {
  for (Penalty pen : {Penalty::L1L2, Penalty::L1Inf}) {
    for (double mu : {0.01, 0.1}) {
      for (auto alg : {Algorithm::ISTAP, Algorithm::APLMS}) {
        auto f = inner_fixture(11, 100, 10, pen, mu);
        f.input.max_inner = 100;
        InnerControls<double> controls;
        controls.record_objective = true;
        SystemCache<double> cache(f.problem.A, f.problem.map);
        const auto out = inner_solve(alg, f.input, f.problem, cache, controls);
        for (std::size_t k = 1; k < out.f_history.size(); ++k) {
          EXPECT_LE(out.f_history[k], out.f_history[k - 1] + 1e-12 * std::abs(out.f_history[k - 1]))
              << to_string(alg) << " k=" << k;
        }
      }
    }
  }
}

// Gap F(x^k, ybar^k) - F* against the ISTA-p, APLM-S and FISTA-p envelopes.
TEST(Inner, RateBounds) {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    for (Penalty pen : {Penalty::L1L2, Penalty::L1Inf}) {
      const double mu = 0.01;
      auto f = inner_fixture(seed, 100, 10, pen, mu);
      const auto opt = inner_reference(f);
      const double dist = (f.input.y0 - opt.y).squaredNorm();
      for (auto alg : {Algorithm::ISTAP, Algorithm::APLMS, Algorithm::FISTAP}) {
        InnerControls<double> controls;
        controls.record_objective = true;
        std::vector<Index> regular;
        Index count = 0;
        controls.observer = [&](const IterateView<double>& v) {
          if (!v.skipped) ++count;
          regular.push_back(count);
        };
        SystemCache<double> cache(f.problem.A, f.problem.map);
        const auto out = inner_solve(alg, f.input, f.problem, cache, controls);
        for (std::size_t i = 0; i < out.f_history.size(); ++i) {
          const double k = static_cast<double>(i + 1);
          const double gap = out.f_history[i] - opt.value;
          double bound = dist / (2 * mu * k);
          if (alg == Algorithm::APLMS) bound = dist / (2 * mu * (k + static_cast<double>(regular[i])));
          if (alg == Algorithm::FISTAP) bound = 2 * dist / (mu * (k + 1) * (k + 1));
          EXPECT_LE(gap, bound + 1e-9 * std::abs(opt.value)) << to_string(alg) << " k=" << k;
        }
      }
    }
  }
}

// -gamma^{k+1} must be a subgradient of g at ybar^{k+1}.
TEST(Inner, AplmsMultiplierStaysInSubdifferential) {
  for (Penalty pen : {Penalty::L1L2, Penalty::L1Inf}) {
    for (double mu : {0.01, 0.5}) {
      auto f = inner_fixture(13, 100, 10, pen, mu);
      std::mt19937_64 rng(5);
      f.input.y0 = random_vector(rng, f.problem.M());
      EXPECT_LE(subgradient_violation(initial_inner_multiplier(f.input.y0, f.problem), f.input.y0, f.problem),
                1e-8);
      InnerControls<double> controls;
      double worst = 0;
      Index regular = 0;
      controls.observer = [&](const IterateView<double>& v) {
        ASSERT_NE(v.gamma, nullptr);
        worst = std::max(worst, subgradient_violation(*v.gamma, v.ybar, f.problem, 1e-13));
        regular += v.skipped ? 0 : 1;
      };
      SystemCache<double> cache(f.problem.A, f.problem.map);
      aplms(f.input, f.problem, cache, controls);
      EXPECT_LE(worst, 1e-8 * std::max(1.0, f.problem.lambda));
    }
  }
}

TEST(Inner, InitialMultiplierSplitsLinfTies) {
  auto f = inner_fixture(15, 30, 3, Penalty::L1Inf, 0.1);
  VectorXd y = VectorXd::Zero(f.problem.M());
  y[0] = 2;
  y[1] = -2;
  y[2] = 1;
  const VectorXd g = initial_inner_multiplier(y, f.problem);
  EXPECT_NEAR(g[0], -f.problem.lambda / 2, 1e-15);
  EXPECT_NEAR(g[1], f.problem.lambda / 2, 1e-15);
  EXPECT_EQ(g[2], 0.0);
  EXPECT_LE(subgradient_violation(g, y, f.problem), 1e-12);
}

// Recomputes the extrapolated point from the iterates and checks the
// sufficient-decrease inequality at the step FISTA accepted.
TEST(Inner, FistaLineSearchInequalityHolds) {
  for (Penalty pen : {Penalty::L1L2, Penalty::L1Inf}) {
    auto f = inner_fixture(17, 80, 8, pen, 0.05);
    f.input.max_inner = 80;
    InnerOutput<double> out;
    const auto steps = trajectory(Algorithm::FISTA, f, {}, &out);
    ASSERT_FALSE(steps.empty());
    VectorXd px = f.input.x0, py = f.input.y0;
    VectorXd zx = px, zy = py;
    double t = 1;
    double previous_rho = f.input.mu;
    for (const auto& s : steps) {
      EXPECT_LE(s.rho, previous_rho);
      previous_rho = s.rho;
      const auto grad = smooth_gradient(zx, zy, f.input.v, f.input.mu, f.problem);
      const VectorXd sx = s.x - zx, sy = s.y - zy;
      const double fz = smooth_value(zx, zy, f.input.v, f.input.mu, f.problem);
      const double lhs = smooth_value(s.x, s.y, f.input.v, f.input.mu, f.problem);
      const double rhs = fz + grad.x.dot(sx) + grad.y.dot(sy) + (sx.squaredNorm() + sy.squaredNorm()) / (2 * s.rho);
      EXPECT_LE(lhs, rhs + kLineSearchSlack * std::max(1.0, std::abs(fz)) * 1.0000001);
      // The step itself is the gradient/prox step from z with that rho.
      EXPECT_LE((s.x - (zx - s.rho * grad.x)).norm(), 1e-12 * (1 + s.x.norm()));
      const VectorXd yp = oracle_prox_penalty(VectorXd(zy - s.rho * grad.y), s.rho * f.problem.lambda, f.problem);
      EXPECT_LE((s.y - yp).cwiseAbs().maxCoeff(), 1e-8);
      const double t_next = (1 + std::sqrt(1 + 4 * t * t)) / 2;
      zx = s.x + ((t - 1) / t_next) * (s.x - px);
      zy = s.y + ((t - 1) / t_next) * (s.y - py);
      t = t_next;
      px = s.x;
      py = s.y;
    }
  }
}

TEST(Inner, FistaFirstStepIsClassicIsta) {
  std::mt19937_64 rng(19);
  GroupStructure<double> gs;
  gs.m = 6;
  for (Index j = 0; j < 6; ++j) gs.groups.push_back({j});
  auto p = make_problem(random_matrix(rng, 10, 6), random_vector(rng, 10), 0.3, Penalty::L1L2, gs);
  InnerInput<double> in;
  in.x0 = random_vector(rng, 6);
  in.y0 = random_vector(rng, 6);
  in.v = VectorXd::Zero(6);
  in.mu = 0.2;
  in.max_inner = 1;
  const auto out = fista(in, p);
  const double rho = out.final_rho;
  const VectorXd gap = in.x0 - in.y0;
  const VectorXd gx = p.A.transpose() * (p.A * in.x0 - p.b) + gap / in.mu;
  const VectorXd gy = -gap / in.mu;
  EXPECT_LE((out.x - (in.x0 - rho * gx)).norm(), 1e-13);
  const VectorXd d = in.y0 - rho * gy;
  for (Index j = 0; j < 6; ++j) {
    const double expected = std::copysign(std::max(0.0, std::abs(d[j]) - rho * p.lambda), d[j]);
    EXPECT_NEAR(out.y[j], expected, 1e-13);
  }
}

// lambda -> 0 with singleton groups: min f has y = x = least-squares solution.
TEST(Inner, FistaQuadraticLimit) {
  std::mt19937_64 rng(23);
  GroupStructure<double> gs;
  gs.m = 5;
  for (Index j = 0; j < 5; ++j) gs.groups.push_back({j});
  auto p = make_problem(random_matrix(rng, 12, 5), random_vector(rng, 12), 1e-12, Penalty::L1L2, gs);
  InnerInput<double> in;
  in.x0 = VectorXd::Zero(5);
  in.y0 = VectorXd::Zero(5);
  in.v = VectorXd::Zero(5);
  in.mu = 1.0;
  in.eps_in = 1e-13;
  in.max_inner = 20000;
  const auto out = fista(in, p);
  const VectorXd ls = p.A.colPivHouseholderQr().solve(p.b);
  EXPECT_LE((out.x - ls).norm(), 1e-6 * ls.norm());
  EXPECT_LE((out.y - ls).norm(), 1e-6 * ls.norm());
}

TEST(Inner, ExitContract) {
  for (auto alg : {Algorithm::ADAL, Algorithm::APLMS, Algorithm::ISTAP, Algorithm::FISTAP, Algorithm::FISTA}) {
    for (Index cap : {3, 2000}) {
      auto f = inner_fixture(25, 80, 8, Penalty::L1L2, 0.02);
      f.input.eps_in = 1e-5;
      f.input.max_inner = cap;
      SystemCache<double> cache(f.problem.A, f.problem.map);
      const auto out = inner_solve(alg, f.input, f.problem, cache);
      EXPECT_TRUE(out.x.allFinite());
      EXPECT_TRUE(out.y.allFinite());
      EXPECT_LE(out.iterations, cap);
      if (alg != Algorithm::ADAL) {
        EXPECT_TRUE(out.hit_cap || std::max(out.primal_residual, out.dual_residual) <= f.input.eps_in)
            << to_string(alg);
      }
      if (cap == 2000 && alg != Algorithm::ADAL) EXPECT_FALSE(out.hit_cap) << to_string(alg);
    }
  }
}

// The numerator handed to the outer loop is ||C^T(ybar^{K+1} - z^K)||, with z
// rebuilt from the momentum recursion.
TEST(Inner, FistaPDualNumeratorUsesExtrapolatedPoint) {
  auto f = inner_fixture(27, 80, 8, Penalty::L1Inf, 0.05);
  f.input.eps_in = 1e-4;
  InnerOutput<double> out;
  const auto steps = trajectory(Algorithm::FISTAP, f, {}, &out);
  VectorXd z = f.input.y0, prev = f.input.y0;
  double t = 1;
  for (std::size_t k = 0; k + 1 < steps.size(); ++k) {
    const double t_next = (1 + std::sqrt(1 + 4 * t * t)) / 2;
    z = steps[k].y + ((t - 1) / t_next) * (steps[k].y - prev);
    prev = steps[k].y;
    t = t_next;
  }
  const double expected = apply_Ct(VectorXd(steps.back().y - z), f.problem.map).norm();
  EXPECT_NEAR(out.dual_numerator, expected, 1e-12 * (1 + expected));
  EXPECT_NEAR(out.dual_residual, expected / std::max(apply_Ct(z, f.problem.map).norm(), 1e-12), 1e-12);
}

TEST(Inner, RejectsBadInput) {
  auto f = inner_fixture(29, 30, 3, Penalty::L1L2, 0.1);
  SystemCache<double> cache(f.problem.A, f.problem.map);
  auto bad = f.input;
  bad.mu = 0;
  EXPECT_THROW(istap(bad, f.problem, cache), InputError);
  bad = f.input;
  bad.y0 = VectorXd::Zero(3);
  EXPECT_THROW(fistap(bad, f.problem, cache), InputError);
}

}  // namespace
