#include <ogl/datagen.hpp>

#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace ogl {

GroupStructure<double> chain_groups(Index J, Index group_size, Index overlap) {
  require(J >= 1, "ogl: need J >= 1");
  require(group_size >= 1, "ogl: group size must be >= 1");
  require(overlap >= 0 && overlap < group_size, "ogl: need 0 <= overlap < group size");
  GroupStructure<double> gs;
  const Index stride = group_size - overlap;
  gs.m = group_size + (J - 1) * stride;
  gs.groups.resize(J);
  for (Index s = 0; s < J; ++s) {
    auto& g = gs.groups[s];
    g.resize(group_size);
    std::iota(g.begin(), g.end(), s * stride);
  }
  return gs;
}

GroupStructure<double> window_groups(Index m, Index length) {
  require(length >= 1 && m >= length,
          "dct: need m >= group length (m=" + std::to_string(m) + ")");
  GroupStructure<double> gs;
  gs.m = m;
  gs.groups.resize(m - length + 1);
  for (Index j = 0; j + length <= m; ++j) {
    auto& g = gs.groups[j];
    g.resize(length);
    std::iota(g.begin(), g.end(), j);
  }
  return gs;
}

MatrixXd cosine_dictionary(Index n, Index m) {
  require(n >= 1 && m >= 1, "cosine dictionary needs positive dimensions");
  MatrixXd A(n, m);
  const double pi = std::numbers::pi;
  for (Index j = 0; j < m; ++j) {
    for (Index i = 0; i < n; ++i) {
      A(i, j) = std::cos(pi * static_cast<double>(2 * i + 1) * static_cast<double>(j) /
                         (2.0 * static_cast<double>(m)));
    }
    A.col(j).normalize();
  }
  return A;
}

Dataset gen_ogl(const OglSpec& spec, double lambda, Penalty penalty) {
  require(spec.n >= 1, "ogl: need n >= 1");
  GroupStructure<double> groups = chain_groups(spec.J, spec.group_size, spec.overlap);
  const Index m = groups.m;

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  MatrixXd A(spec.n, m);
  for (Index j = 0; j < m; ++j) {
    for (Index i = 0; i < spec.n; ++i) A(i, j) = normal(rng);
  }
  VectorXd x_true = VectorXd::Zero(m);
  for (Index j = 0; j < spec.support(); ++j) x_true[j] = normal(rng);
  VectorXd noise(spec.n);
  for (Index i = 0; i < spec.n; ++i) noise[i] = normal(rng);

  VectorXd b = A * x_true + noise;
  Dataset out{make_problem(std::move(A), std::move(b), lambda, penalty, std::move(groups)),
              std::move(x_true), std::move(noise)};
  return out;
}

Dataset gen_dct(const DctSpec& spec, double lambda, Penalty penalty) {
  require(spec.n >= 1, "dct: need n >= 1");
  require(spec.nnz_fraction > 0 && spec.nnz_fraction <= 1, "dct: nnz fraction must be in (0, 1]");
  require(spec.noise_factor >= 0, "dct: noise factor must be >= 0");
  GroupStructure<double> groups = window_groups(spec.m, spec.group_length);
  MatrixXd A = cosine_dictionary(spec.n, spec.m);

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  // Partial Fisher-Yates for the support positions.
  const auto nnz = static_cast<Index>(std::ceil(spec.nnz_fraction * static_cast<double>(spec.m)));
  std::vector<Index> order(spec.m);
  std::iota(order.begin(), order.end(), Index{0});
  for (Index k = 0; k < nnz; ++k) {
    std::uniform_int_distribution<Index> pick(k, spec.m - 1);
    std::swap(order[k], order[pick(rng)]);
  }
  VectorXd x_true = VectorXd::Zero(spec.m);
  for (Index k = 0; k < nnz; ++k) x_true[order[k]] = normal(rng);

  const VectorXd signal = A * x_true;
  const double sigma =
      std::sqrt(spec.noise_factor * signal.squaredNorm() / static_cast<double>(spec.n));
  VectorXd noise(spec.n);
  for (Index i = 0; i < spec.n; ++i) noise[i] = sigma * normal(rng);

  VectorXd b = signal + noise;
  Dataset out{make_problem(std::move(A), std::move(b), lambda, penalty, std::move(groups)),
              std::move(x_true), std::move(noise)};
  return out;
}

}  // namespace ogl
