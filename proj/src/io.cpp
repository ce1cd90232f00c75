#include <ogl/io.hpp>

#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string_view>

namespace ogl::io {

namespace {

static_assert(std::endian::native == std::endian::little,
              "binary matrix I/O assumes a little-endian host");

std::ifstream open_in(const fs::path& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  if (!in) throw InputError("cannot open '" + path.string() + "' for reading");
  return in;
}

std::ofstream open_out(const fs::path& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode);
  if (!out) throw InputError("cannot open '" + path.string() + "' for writing");
  return out;
}

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

bool parse_double(std::string_view token, double& out) {
  token = trim(token);
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  const auto res = std::from_chars(token.data(), token.data() + token.size(), out);
  return res.ec == std::errc() && res.ptr == token.data() + token.size();
}

bool parse_index(std::string_view token, Index& out) {
  token = trim(token);
  long long value = 0;
  const auto res = std::from_chars(token.data(), token.data() + token.size(), value);
  if (res.ec != std::errc() || res.ptr != token.data() + token.size()) return false;
  out = static_cast<Index>(value);
  return true;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string at_line(const fs::path& path, std::size_t line) {
  return path.string() + ":" + std::to_string(line) + ": ";
}

}  // namespace

void write_matrix_binary(const fs::path& path, const MatrixXd& A) {
  require(A.rows() <= UINT32_MAX && A.cols() <= UINT32_MAX, "matrix too large for the format");
  auto out = open_out(path, std::ios::binary);
  const std::uint32_t header[2] = {static_cast<std::uint32_t>(A.rows()),
                                   static_cast<std::uint32_t>(A.cols())};
  out.write(reinterpret_cast<const char*>(header), sizeof header);
  out.write(reinterpret_cast<const char*>(A.data()),
            static_cast<std::streamsize>(sizeof(double) * A.size()));
  if (!out) throw InputError("failed writing '" + path.string() + "'");
}

MatrixXd read_matrix_binary(const fs::path& path) {
  auto in = open_in(path, std::ios::binary);
  std::uint32_t header[2] = {0, 0};
  in.read(reinterpret_cast<char*>(header), sizeof header);
  if (!in) throw InputError(path.string() + ": truncated header");
  MatrixXd A(header[0], header[1]);
  in.read(reinterpret_cast<char*>(A.data()), static_cast<std::streamsize>(sizeof(double) * A.size()));
  if (!in) {
    throw InputError(path.string() + ": expected " + std::to_string(A.size()) +
                     " float64 values after the header");
  }
  return A;
}

MatrixXd read_matrix_csv(const fs::path& path) {
  auto in = open_in(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    std::vector<double> row;
    for (auto tok : split(line, ',')) {
      double value = 0;
      if (!parse_double(tok, value)) {
        throw InputError(at_line(path, lineno) + "bad number '" + std::string(trim(tok)) + "'");
      }
      row.push_back(value);
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw InputError(at_line(path, lineno) + "expected " + std::to_string(rows.front().size()) +
                       " columns, found " + std::to_string(row.size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw InputError(path.string() + ": empty matrix");
  MatrixXd A(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) A(i, j) = rows[i][j];
  }
  return A;
}

MatrixXd read_matrix(const fs::path& path) {
  return path.extension() == ".csv" ? read_matrix_csv(path) : read_matrix_binary(path);
}

void write_vector_text(const fs::path& path, const VectorXd& v) {
  auto out = open_out(path);
  for (Index i = 0; i < v.size(); ++i) out << format_double(v[i]) << '\n';
  if (!out) throw InputError("failed writing '" + path.string() + "'");
}

VectorXd read_vector_text(const fs::path& path) {
  auto in = open_in(path);
  std::vector<double> values;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto tok = trim(line);
    if (tok.empty()) continue;
    double value = 0;
    if (!parse_double(tok, value)) {
      throw InputError(at_line(path, lineno) + "bad number '" + std::string(tok) + "'");
    }
    values.push_back(value);
  }
  return Eigen::Map<const VectorXd>(values.data(), static_cast<Index>(values.size()));
}

void write_groups(std::ostream& os, const GroupStructure<double>& groups) {
  for (std::size_t s = 0; s < groups.groups.size(); ++s) {
    const auto& g = groups.groups[s];
    for (std::size_t k = 0; k < g.size(); ++k) os << (k ? " " : "") << g[k];
    if (!groups.weights.empty()) os << " w=" << format_double(groups.weights[s]);
    os << '\n';
  }
}

GroupStructure<double> parse_groups(std::istream& is, Index m) {
  GroupStructure<double> gs;
  gs.m = m;
  bool any_weight = false;
  std::vector<std::pair<std::size_t, double>> weights;  // (group, weight)
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    std::string_view body = line;
    if (const auto hash = body.find('#'); hash != std::string_view::npos) body = body.substr(0, hash);
    if (trim(body).empty()) continue;

    std::istringstream tokens{std::string(body)};
    std::vector<Index> group;
    std::string tok;
    bool have_weight = false;
    double weight = 1.0;
    while (tokens >> tok) {
      if (have_weight) {
        throw InputError("groups line " + std::to_string(lineno) + ": tokens after w=");
      }
      if (tok.rfind("w=", 0) == 0) {
        if (!parse_double(std::string_view(tok).substr(2), weight) || weight < 0) {
          throw InputError("groups line " + std::to_string(lineno) + ": bad weight '" + tok + "'");
        }
        have_weight = true;
        continue;
      }
      Index idx = 0;
      if (!parse_index(tok, idx)) {
        throw InputError("groups line " + std::to_string(lineno) + ": bad index '" + tok + "'");
      }
      if (idx < 0 || idx >= m) {
        throw InputError("groups line " + std::to_string(lineno) + ": index " + tok +
                         " outside [0, " + std::to_string(m) + ")");
      }
      group.push_back(idx);
    }
    if (group.empty()) {
      throw InputError("groups line " + std::to_string(lineno) + ": group has no indices");
    }
    any_weight = any_weight || have_weight;
    weights.emplace_back(gs.groups.size(), weight);
    gs.groups.push_back(std::move(group));
  }
  if (gs.groups.empty()) throw InputError("groups file contains no groups");
  if (any_weight) {
    gs.weights.resize(gs.groups.size(), 1.0);
    for (const auto& [s, w] : weights) gs.weights[s] = w;
  }
  return gs;
}

void write_groups(const fs::path& path, const GroupStructure<double>& groups) {
  auto out = open_out(path);
  write_groups(out, groups);
  if (!out) throw InputError("failed writing '" + path.string() + "'");
}

GroupStructure<double> read_groups(const fs::path& path, Index m) {
  auto in = open_in(path);
  try {
    return parse_groups(in, m);
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

namespace {
constexpr std::string_view kTraceHeader = "outer,r,s,mu,eps_in,inner_iterations,skips,objective,seconds";

void write_record(std::ostream& os, const TraceRecord& t, bool with_time) {
  os << t.outer << ',' << format_double(t.r) << ',' << format_double(t.s) << ','
     << format_double(t.mu) << ',' << format_double(t.eps_in) << ',' << t.inner_iterations << ','
     << t.skips << ',' << format_double(t.objective);
  if (with_time) os << ',' << format_double(t.seconds);
  os << '\n';
}
}  // namespace

void write_trace_csv(std::ostream& os, const std::vector<TraceRecord>& trace) {
  os << kTraceHeader << '\n';
  for (const auto& t : trace) write_record(os, t, true);
}

std::vector<TraceRecord> read_trace_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || trim(line) != kTraceHeader) {
    throw InputError("trace CSV: missing or unexpected header");
  }
  std::vector<TraceRecord> out;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto cells = split(trim(line), ',');
    if (cells.size() != 9) {
      throw InputError("trace CSV line " + std::to_string(lineno) + ": expected 9 fields");
    }
    TraceRecord t;
    bool ok = parse_index(cells[0], t.outer) && parse_double(cells[1], t.r) &&
              parse_double(cells[2], t.s) && parse_double(cells[3], t.mu) &&
              parse_double(cells[4], t.eps_in) && parse_index(cells[5], t.inner_iterations) &&
              parse_index(cells[6], t.skips) && parse_double(cells[7], t.objective) &&
              parse_double(cells[8], t.seconds);
    if (!ok) throw InputError("trace CSV line " + std::to_string(lineno) + ": bad field");
    out.push_back(t);
  }
  return out;
}

void write_trace_csv(const fs::path& path, const std::vector<TraceRecord>& trace) {
  auto out = open_out(path);
  write_trace_csv(out, trace);
  if (!out) throw InputError("failed writing '" + path.string() + "'");
}

std::vector<TraceRecord> read_trace_csv(const fs::path& path) {
  auto in = open_in(path);
  return read_trace_csv(in);
}

std::uint64_t trace_fingerprint(const std::vector<TraceRecord>& trace) {
  std::ostringstream os;
  for (const auto& t : trace) write_record(os, t, false);
  // FNV-1a
  std::uint64_t hash = 1469598103934665603ULL;
  for (unsigned char c : os.str()) {
    hash ^= c;
    hash *= 1099511628211ULL;
  }
  return hash;
}

void save_dataset(const fs::path& dir, const Dataset& data) {
  fs::create_directories(dir);
  write_matrix_binary(dir / "A.bin", data.problem.A);
  write_vector_text(dir / "b.txt", data.problem.b);
  write_groups(dir / "groups.txt", data.problem.groups);
  if (data.x_true.size() > 0) write_vector_text(dir / "x_true.txt", data.x_true);
}

Problem<double> load_problem(const fs::path& dir, double lambda, Penalty penalty) {
  fs::path a_path = dir / "A.bin";
  if (!fs::exists(a_path) && fs::exists(dir / "A.csv")) a_path = dir / "A.csv";
  MatrixXd A = read_matrix(a_path);
  VectorXd b = read_vector_text(dir / "b.txt");
  GroupStructure<double> groups = read_groups(dir / "groups.txt", A.cols());
  return make_problem(std::move(A), std::move(b), lambda, penalty, std::move(groups));
}

}  // namespace ogl::io
