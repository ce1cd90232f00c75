#include "support.hpp"

#include <gtest/gtest.h>

namespace {

using namespace ogl;

TEST(Datagen, ChainShape) {
  const auto gs = chain_groups(2, 10, 3);
  ASSERT_EQ(gs.m, 17);
  ASSERT_EQ(gs.groups.size(), 2u);
  EXPECT_EQ(gs.groups[0].front(), 0);
  EXPECT_EQ(gs.groups[0].back(), 9);
  EXPECT_EQ(gs.groups[1].front(), 7);
  EXPECT_EQ(gs.groups[1].back(), 16);
  EXPECT_EQ((OglSpec{5000, 100, 10, 3, 0}.m()), 703);
}

TEST(Datagen, OglInstance) {
  const auto d = gen_ogl(OglSpec{50, 6, 10, 3, 4});
  const auto& p = d.problem;
  EXPECT_EQ(p.n(), 50);
  EXPECT_EQ(p.m(), 45);
  EXPECT_EQ(p.map.group_count(), 6);
  for (Index c : p.map.multiplicity) EXPECT_TRUE(c == 1 || c == 2);
  const Index support = OglSpec{50, 6, 10, 3, 4}.support();
  EXPECT_EQ(support, 23);
  EXPECT_EQ((d.x_true.head(support).array() != 0).count(), support);
  EXPECT_EQ(d.x_true.tail(p.m() - support).norm(), 0.0);
  EXPECT_LE((p.b - (p.A * d.x_true + d.noise)).norm(), 1e-12 * p.b.norm());
}

TEST(Datagen, DctInstance) {
  const DctSpec spec{40, 100, 5, 0.1, 0.01, 2};
  const auto d = gen_dct(spec);
  const auto& p = d.problem;
  EXPECT_EQ(p.map.group_count(), 96);
  for (Index j = 0; j < p.m(); ++j) {
    EXPECT_NEAR(p.A.col(j).norm(), 1.0, 1e-12);
    EXPECT_EQ(p.map.multiplicity[j], std::min<Index>({j + 1, 5, p.m() - j}));
  }
  EXPECT_EQ((d.x_true.array() != 0).count(), 10);
  const VectorXd signal = p.A * d.x_true;
  EXPECT_LE((p.b - signal - d.noise).norm(), 1e-12 * p.b.norm());
}

TEST(Datagen, CosineAtoms) {
  const MatrixXd A = cosine_dictionary(8, 20);
  EXPECT_LE((A.col(0) - VectorXd::Constant(8, 1 / std::sqrt(8.0))).norm(), 1e-15);
  for (Index j = 1; j < 20; ++j) {
    for (Index i = 0; i < 8; ++i) {
      EXPECT_NEAR(A(i, j) / A(0, j), std::cos(M_PI * (2 * i + 1) * j / 40.0) / std::cos(M_PI * j / 40.0), 1e-10);
    }
  }
  // No two atoms coincide.
  const MatrixXd G = A.transpose() * A;
  for (Index j = 0; j < 20; ++j)
    for (Index k = j + 1; k < 20; ++k) EXPECT_LT(std::abs(G(j, k)), 1 - 1e-9);
}

TEST(Datagen, SeededDeterminism) {
  const auto a = gen_ogl(OglSpec{30, 4, 10, 3, 9});
  const auto b = gen_ogl(OglSpec{30, 4, 10, 3, 9});
  const auto c = gen_ogl(OglSpec{30, 4, 10, 3, 10});
  EXPECT_TRUE(a.problem.A == b.problem.A && a.problem.b == b.problem.b);
  EXPECT_FALSE(a.problem.A == c.problem.A);
  const auto d1 = gen_dct(DctSpec{30, 60, 5, 0.1, 0.01, 9});
  const auto d2 = gen_dct(DctSpec{30, 60, 5, 0.1, 0.01, 9});
  EXPECT_TRUE(d1.problem.b == d2.problem.b && d1.x_true == d2.x_true);
}

TEST(Datagen, SignalDominatesNoise) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto o = gen_ogl(OglSpec{200, 20, 10, 3, seed});
    EXPECT_GT((o.problem.A * o.x_true).norm() / o.noise.norm(), 1.0);
    const auto d = gen_dct(DctSpec{200, 1000, 5, 0.1, 0.01, seed});
    EXPECT_GT((d.problem.A * d.x_true).norm() / d.noise.norm(), 1.0);
  }
}

TEST(Datagen, RejectsBadSpecs) {
  EXPECT_THROW(gen_ogl(OglSpec{0, 4, 10, 3, 0}), InputError);
  EXPECT_THROW(gen_ogl(OglSpec{10, 4, 10, 10, 0}), InputError);
  EXPECT_THROW(gen_dct(DctSpec{10, 4, 5, 0.1, 0.01, 0}), InputError);
}

}  // namespace
