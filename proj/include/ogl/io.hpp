#pragma once

// File formats:
//   matrix  binary: uint32 n, uint32 m (little endian), then n*m float64 in
//           column-major order; or CSV with one row per line.
//   vector  text, one value per line.
//   groups  one group per line, whitespace-separated 0-based indices, with an
//           optional trailing "w=<float>". Blank lines and '#' comments are skipped.
//   trace   CSV with a header row, one record per outer iteration.

#include <ogl/auglag.hpp>
#include <ogl/datagen.hpp>

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace ogl::io {

namespace fs = std::filesystem;

void write_matrix_binary(const fs::path& path, const MatrixXd& A);
MatrixXd read_matrix_binary(const fs::path& path);
MatrixXd read_matrix_csv(const fs::path& path);
/// Dispatches on extension: ".csv" is CSV, anything else is binary.
MatrixXd read_matrix(const fs::path& path);

void write_vector_text(const fs::path& path, const VectorXd& v);
VectorXd read_vector_text(const fs::path& path);

void write_groups(std::ostream& os, const GroupStructure<double>& groups);
/// Parses a groups file; the feature count m comes from the design matrix.
GroupStructure<double> parse_groups(std::istream& is, Index m);
void write_groups(const fs::path& path, const GroupStructure<double>& groups);
GroupStructure<double> read_groups(const fs::path& path, Index m);

void write_trace_csv(std::ostream& os, const std::vector<TraceRecord>& trace);
std::vector<TraceRecord> read_trace_csv(std::istream& is);
void write_trace_csv(const fs::path& path, const std::vector<TraceRecord>& trace);
std::vector<TraceRecord> read_trace_csv(const fs::path& path);

/// Hash over every deterministic trace column (wall time excluded), for
/// run-to-run reproducibility checks.
std::uint64_t trace_fingerprint(const std::vector<TraceRecord>& trace);

/// Dataset directory layout: A.bin (or A.csv), b.txt, groups.txt and, when
/// known, x_true.txt.
void save_dataset(const fs::path& dir, const Dataset& data);
Problem<double> load_problem(const fs::path& dir, double lambda, Penalty penalty);

}  // namespace ogl::io
