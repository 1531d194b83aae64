#include "levcomp/core.hpp"

#include <cstdint>
#include <unordered_set>
#include <utility>

namespace levcomp {

namespace {

std::uint64_t key(Index i, Index j, Index cols) {
  return static_cast<std::uint64_t>(i) * static_cast<std::uint64_t>(cols) +
         static_cast<std::uint64_t>(j);
}

}  // namespace

ObservationSet::ObservationSet(Index rows, Index cols, std::vector<Entry> entries,
                               std::optional<std::vector<double>> probabilities)
    : rows_(rows), cols_(cols), entries_(std::move(entries)),
      probabilities_(std::move(probabilities)) {
  if (rows_ < 1 || cols_ < 1) throw DimensionError("ObservationSet: empty shape");
  std::unordered_set<std::uint64_t> seen;
  seen.reserve(entries_.size() * 2);
  for (const Entry& e : entries_) {
    if (e.row < 0 || e.row >= rows_ || e.col < 0 || e.col >= cols_) {
      throw DimensionError("ObservationSet: index (" + std::to_string(e.row) + ", " +
                           std::to_string(e.col) + ") out of range");
    }
    if (!std::isfinite(e.value)) throw ContractError("ObservationSet: non-finite value");
    if (!seen.insert(key(e.row, e.col, cols_)).second) {
      throw ContractError("ObservationSet: duplicate index (" + std::to_string(e.row) +
                          ", " + std::to_string(e.col) + ")");
    }
  }
  if (probabilities_) {
    if (probabilities_->size() != entries_.size()) {
      throw DimensionError("ObservationSet: probability count does not match entries");
    }
    for (double p : *probabilities_) {
      if (!(p > 0.0 && p <= 1.0)) {
        throw ContractError("ObservationSet: probability outside (0, 1]");
      }
    }
  }
}

const std::vector<double>& ObservationSet::probabilities() const {
  if (!probabilities_) throw ContractError("ObservationSet: no probabilities recorded");
  return *probabilities_;
}

Matrix ObservationSet::mask() const {
  Matrix m = Matrix::Zero(rows_, cols_);
  for (const Entry& e : entries_) m(e.row, e.col) = 1.0;
  return m;
}

Matrix ObservationSet::values() const {
  Matrix m = Matrix::Zero(rows_, cols_);
  for (const Entry& e : entries_) m(e.row, e.col) = e.value;
  return m;
}

ObservationSet ObservationSet::with_values(const Matrix& source) const {
  if (source.rows() != rows_ || source.cols() != cols_) {
    throw DimensionError("ObservationSet::with_values: shape mismatch");
  }
  std::vector<Entry> out = entries_;
  for (Entry& e : out) e.value = source(e.row, e.col);
  return ObservationSet(rows_, cols_, std::move(out), probabilities_);
}

ObservationSet observe(const Matrix& M, const std::vector<std::pair<Index, Index>>& indices,
                       std::optional<std::vector<double>> probabilities) {
  std::vector<Entry> entries;
  entries.reserve(indices.size());
  for (const auto& [i, j] : indices) {
    if (i < 0 || i >= M.rows() || j < 0 || j >= M.cols()) {
      throw DimensionError("observe: index out of range");
    }
    entries.push_back({i, j, M(i, j)});
  }
  return ObservationSet(M.rows(), M.cols(), std::move(entries), std::move(probabilities));
}

ObservationSet merge(const ObservationSet& a, const ObservationSet& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError("merge: shape mismatch");
  }
  std::vector<Entry> entries = a.entries();
  entries.insert(entries.end(), b.entries().begin(), b.entries().end());
  std::optional<std::vector<double>> probs;
  if (a.has_probabilities() && b.has_probabilities()) {
    probs = a.probabilities();
    probs->insert(probs->end(), b.probabilities().begin(), b.probabilities().end());
  }
  return ObservationSet(a.rows(), a.cols(), std::move(entries), std::move(probs));
}

namespace {

template <typename Weight>
Matrix weighted_restriction(const ObservationSet& obs, const Matrix& Z, Weight weight,
                            const char* where) {
  if (Z.rows() != obs.rows() || Z.cols() != obs.cols()) {
    throw DimensionError(std::string(where) + ": shape mismatch");
  }
  if (!obs.has_probabilities()) {
    throw ContractError(std::string(where) + ": observation set carries no probabilities");
  }
  const auto& probs = obs.probabilities();
  Matrix out = Matrix::Zero(Z.rows(), Z.cols());
  for (std::size_t k = 0; k < obs.size(); ++k) {
    const Entry& e = obs.entries()[k];
    out(e.row, e.col) = Z(e.row, e.col) * weight(probs[k]);
  }
  return out;
}

}  // namespace

Matrix r_omega(const ObservationSet& obs, const Matrix& Z) {
  return weighted_restriction(obs, Z, [](double p) { return 1.0 / p; }, "r_omega");
}

Matrix r_omega_sqrt(const ObservationSet& obs, const Matrix& Z) {
  return weighted_restriction(obs, Z, [](double p) { return 1.0 / std::sqrt(p); },
                              "r_omega_sqrt");
}

double spectral_norm(const Matrix& Z) {
  if (Z.size() == 0) return 0.0;
  Eigen::BDCSVD<Matrix> svd(Z);
  return svd.singularValues()(0);
}

double nuclear_norm(const Matrix& Z) {
  if (Z.size() == 0) return 0.0;
  Eigen::BDCSVD<Matrix> svd(Z);
  return svd.singularValues().sum();
}

double relative_error(const Matrix& estimate, const Matrix& truth) {
  if (estimate.rows() != truth.rows() || estimate.cols() != truth.cols()) {
    throw DimensionError("relative_error: shape mismatch");
  }
  const double denom = truth.norm();
  return (estimate - truth).norm() / (denom > 0.0 ? denom : 1.0);
}

}  // namespace levcomp
