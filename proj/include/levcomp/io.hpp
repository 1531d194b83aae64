#pragma once

// Text file formats shared by the CLI and the library.
//
// Matrix file:       "n_rows n_cols" then n_rows lines of n_cols values.
// Observation file:  "n_rows n_cols m" then m lines "i j value [p]",
//                    0-based indices, the probability column optional.
// Weights file:      two lines, the diagonal of R then the diagonal of C.

#include <iosfwd>
#include <string>
#include <utility>

#include "levcomp/core.hpp"

namespace levcomp::io {

void write_matrix(std::ostream& out, const Matrix& M);
Matrix read_matrix(std::istream& in);

void write_observations(std::ostream& out, const ObservationSet& obs);
ObservationSet read_observations(std::istream& in);

void write_weights(std::ostream& out, const Vector& row_weights, const Vector& col_weights);
std::pair<Vector, Vector> read_weights(std::istream& in);

void save_matrix(const std::string& path, const Matrix& M);
Matrix load_matrix(const std::string& path);
void save_observations(const std::string& path, const ObservationSet& obs);
ObservationSet load_observations(const std::string& path);
std::pair<Vector, Vector> load_weights(const std::string& path);

}  // namespace levcomp::io
