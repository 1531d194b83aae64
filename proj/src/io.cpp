#include "levcomp/io.hpp"

#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <vector>

namespace levcomp::io {

namespace {

constexpr int kDigits = std::numeric_limits<double>::max_digits10;

std::string next_content_line(std::istream& in, const char* what) {
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") != std::string::npos) return line;
  }
  throw ParseError(std::string("unexpected end of input while reading ") + what);
}

template <typename T>
T parse_field(std::istringstream& ss, const char* what) {
  T value{};
  if (!(ss >> value)) throw ParseError(std::string("malformed field: ") + what);
  return value;
}

void expect_end(std::istringstream& ss, const char* what) {
  std::string rest;
  if (ss >> rest) throw ParseError(std::string("trailing data in ") + what + ": " + rest);
}

std::vector<double> parse_row(const std::string& line) {
  std::istringstream ss(line);
  std::vector<double> out;
  double v = 0.0;
  while (ss >> v) out.push_back(v);
  if (!ss.eof()) throw ParseError("non-numeric token in row: " + line);
  return out;
}

template <typename Fn>
auto with_file(const std::string& path, std::ios::openmode mode, Fn fn) {
  std::fstream f(path, mode);
  if (!f) throw ParseError("cannot open " + path);
  return fn(f);
}

}  // namespace

void write_matrix(std::ostream& out, const Matrix& M) {
  out << M.rows() << ' ' << M.cols() << '\n' << std::setprecision(kDigits);
  for (Index i = 0; i < M.rows(); ++i) {
    for (Index j = 0; j < M.cols(); ++j) {
      if (j) out << ' ';
      out << M(i, j);
    }
    out << '\n';
  }
}

Matrix read_matrix(std::istream& in) {
  std::istringstream header(next_content_line(in, "matrix header"));
  const auto rows = parse_field<Index>(header, "n_rows");
  const auto cols = parse_field<Index>(header, "n_cols");
  expect_end(header, "matrix header");
  if (rows < 1 || cols < 1) throw ParseError("matrix dimensions must be positive");
  Matrix M(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    const auto row = parse_row(next_content_line(in, "matrix row"));
    if (static_cast<Index>(row.size()) != cols) {
      throw ParseError("row " + std::to_string(i) + " has " + std::to_string(row.size()) +
                       " values, expected " + std::to_string(cols));
    }
    for (Index j = 0; j < cols; ++j) M(i, j) = row[static_cast<std::size_t>(j)];
  }
  if (!M.allFinite()) throw ParseError("matrix contains non-finite values");
  return M;
}

void write_observations(std::ostream& out, const ObservationSet& obs) {
  out << obs.rows() << ' ' << obs.cols() << ' ' << obs.size() << '\n'
      << std::setprecision(kDigits);
  for (std::size_t k = 0; k < obs.size(); ++k) {
    const Entry& e = obs.entries()[k];
    out << e.row << ' ' << e.col << ' ' << e.value;
    if (obs.has_probabilities()) out << ' ' << obs.probabilities()[k];
    out << '\n';
  }
}

ObservationSet read_observations(std::istream& in) {
  std::istringstream header(next_content_line(in, "observation header"));
  const auto rows = parse_field<Index>(header, "n_rows");
  const auto cols = parse_field<Index>(header, "n_cols");
  const auto count = parse_field<long long>(header, "m");
  expect_end(header, "observation header");
  if (count < 0) throw ParseError("negative observation count");

  std::vector<Entry> entries;
  std::vector<double> probs;
  entries.reserve(static_cast<std::size_t>(count));
  bool with_p = false;
  for (long long k = 0; k < count; ++k) {
    std::istringstream ss(next_content_line(in, "observation line"));
    Entry e{};
    e.row = parse_field<Index>(ss, "i");
    e.col = parse_field<Index>(ss, "j");
    e.value = parse_field<double>(ss, "value");
    double p = 0.0;
    std::string token;
    const bool has_p = static_cast<bool>(ss >> token);
    if (has_p) {
      std::size_t used = 0;
      try {
        p = std::stod(token, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != token.size()) throw ParseError("malformed field: p");
    }
    if (k == 0) with_p = has_p;
    if (has_p != with_p) throw ParseError("probability column must be present on all lines or none");
    if (has_p) probs.push_back(p);
    expect_end(ss, "observation line");
    entries.push_back(e);
  }
  std::optional<std::vector<double>> p;
  if (with_p) p = std::move(probs);
  return ObservationSet(rows, cols, std::move(entries), std::move(p));
}

void write_weights(std::ostream& out, const Vector& row_weights, const Vector& col_weights) {
  out << std::setprecision(kDigits);
  for (const Vector* v : {&row_weights, &col_weights}) {
    for (Index k = 0; k < v->size(); ++k) {
      if (k) out << ' ';
      out << (*v)(k);
    }
    out << '\n';
  }
}

std::pair<Vector, Vector> read_weights(std::istream& in) {
  const auto r = parse_row(next_content_line(in, "row weights"));
  const auto c = parse_row(next_content_line(in, "column weights"));
  if (r.empty() || c.empty()) throw ParseError("weight lines must be nonempty");
  return {Eigen::Map<const Vector>(r.data(), static_cast<Index>(r.size())),
          Eigen::Map<const Vector>(c.data(), static_cast<Index>(c.size()))};
}

void save_matrix(const std::string& path, const Matrix& M) {
  with_file(path, std::ios::out, [&](std::fstream& f) { write_matrix(f, M); return 0; });
}

Matrix load_matrix(const std::string& path) {
  return with_file(path, std::ios::in, [](std::fstream& f) { return read_matrix(f); });
}

void save_observations(const std::string& path, const ObservationSet& obs) {
  with_file(path, std::ios::out, [&](std::fstream& f) { write_observations(f, obs); return 0; });
}

ObservationSet load_observations(const std::string& path) {
  return with_file(path, std::ios::in, [](std::fstream& f) { return read_observations(f); });
}

std::pair<Vector, Vector> load_weights(const std::string& path) {
  return with_file(path, std::ios::in, [](std::fstream& f) { return read_weights(f); });
}

}  // namespace levcomp::io
