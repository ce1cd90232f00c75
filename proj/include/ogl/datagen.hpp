#pragma once

// Seeded synthetic benchmark families.
//
// Randomness comes from std::mt19937_64 seeded with the generator seed, with
// Gaussian draws from std::normal_distribution<double>. Draw order is fixed:
// A column by column, then the signal, then the noise.

#include <ogl/group_model.hpp>

#include <cstdint>

namespace ogl {

/// Chain of equally sized groups where neighbours share `overlap` features.
struct OglSpec {
  Index n = 200;
  Index J = 20;
  Index group_size = 10;
  Index overlap = 3;
  std::uint64_t seed = 0;

  Index m() const { return group_size + (J - 1) * (group_size - overlap); }
  Index support() const { return (m() + 1) / 2; }
};

/// Overcomplete cosine dictionary with all length-5 windows as groups.
struct DctSpec {
  Index n = 1000;
  Index m = 5000;
  Index group_length = 5;
  double nnz_fraction = 0.10;
  double noise_factor = 0.01;
  std::uint64_t seed = 0;
};

struct Dataset {
  Problem<double> problem;
  VectorXd x_true;
  VectorXd noise;
};

GroupStructure<double> chain_groups(Index J, Index group_size, Index overlap);
GroupStructure<double> window_groups(Index m, Index length);

/// Unit-norm cosine atoms: column j samples cos(pi (2i+1) j / (2m)), i < n.
MatrixXd cosine_dictionary(Index n, Index m);

Dataset gen_ogl(const OglSpec& spec, double lambda = 1.0, Penalty penalty = Penalty::L1L2);
Dataset gen_dct(const DctSpec& spec, double lambda = 1.0, Penalty penalty = Penalty::L1L2);

}  // namespace ogl
