#pragma once

// Dense numerical substrate: matrix aliases, the rank-r SVD facade, the
// tangent-space projection of a low-rank factorization, the
// inverse-probability sampling operator and the leverage-weighted norms.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace levcomp {

using Index = Eigen::Index;

template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Matrix = Mat<double>;
using Vector = Vec<double>;

// ---------------------------------------------------------------------------
// Errors

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class ContractError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, int iterations)
      : Error(what + " (after " + std::to_string(iterations) + " iterations)"),
        iterations_(iterations) {}
  int iterations() const { return iterations_; }

 private:
  int iterations_;
};

/// A nonzero matrix entry sits on a row or column whose leverage score is
/// zero, so its weight in a mu-norm is infinite.
class InfiniteWeightError : public Error {
 public:
  using Error::Error;
};

class DegenerateDistributionError : public Error {
 public:
  using Error::Error;
};

class InfeasibleBudgetError : public Error {
 public:
  using Error::Error;
};

class SizeError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Factorizations

/// Rank-r SVD triple U diag(S) V^T. U and V have orthonormal columns and S is
/// nonincreasing and strictly positive.
template <typename Scalar>
struct LowRankFactorization {
  Mat<Scalar> U;
  Vec<Scalar> S;
  Mat<Scalar> V;

  Index rank() const { return S.size(); }
  Index rows() const { return U.rows(); }
  Index cols() const { return V.rows(); }

  Mat<Scalar> reconstruct() const { return U * S.asDiagonal() * V.transpose(); }
  /// The sign matrix U V^T of the factorization.
  Mat<Scalar> uv() const { return U * V.transpose(); }
};

using Factorization = LowRankFactorization<double>;

template <typename Derived>
bool all_finite(const Eigen::DenseBase<Derived>& m) {
  return m.derived().allFinite();
}

/// Singular values kept by svd_rank_r must exceed this fraction of sigma_1.
inline constexpr double kRelativeSingularFloor = 1e-12;

/// Top-r singular triplets of M. Triplets whose singular value falls below
/// kRelativeSingularFloor * sigma_1 are dropped, so the returned rank can be
/// smaller than r for rank-deficient input (zero for the zero matrix).
template <typename Scalar>
LowRankFactorization<Scalar> svd_rank_r(const Mat<Scalar>& M, Index r) {
  const Index k = std::min(M.rows(), M.cols());
  if (r < 1 || r > k) {
    throw DimensionError("svd_rank_r: rank " + std::to_string(r) +
                         " outside [1, " + std::to_string(k) + "]");
  }
  if (!all_finite(M)) throw ContractError("svd_rank_r: non-finite input");

  Eigen::BDCSVD<Mat<Scalar>> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) {
    throw ConvergenceError("svd_rank_r: SVD did not converge",
                           static_cast<int>(svd.nonzeroSingularValues()));
  }
  const Vec<Scalar>& sv = svd.singularValues();
  Index kept = 0;
  if (sv.size() > 0 && sv(0) > Scalar(0)) {
    const Scalar floor = Scalar(kRelativeSingularFloor) * sv(0);
    while (kept < r && sv(kept) > floor) ++kept;
  }
  LowRankFactorization<Scalar> f;
  f.U = svd.matrixU().leftCols(kept);
  f.S = sv.head(kept);
  f.V = svd.matrixV().leftCols(kept);
  return f;
}

// ---------------------------------------------------------------------------
// Tangent space of the factorization

template <typename Scalar, typename Derived>
void check_shape(const LowRankFactorization<Scalar>& F,
                 const Eigen::MatrixBase<Derived>& Z, const char* where) {
  if (Z.rows() != F.rows() || Z.cols() != F.cols()) {
    throw DimensionError(std::string(where) + ": matrix is " +
                         std::to_string(Z.rows()) + "x" + std::to_string(Z.cols()) +
                         ", factorization is " + std::to_string(F.rows()) + "x" +
                         std::to_string(F.cols()));
  }
}

/// P_T(Z) = U U^T Z + Z V V^T - U U^T Z V V^T.
template <typename Scalar, typename Derived>
Mat<Scalar> project_tangent(const LowRankFactorization<Scalar>& F,
                            const Eigen::MatrixBase<Derived>& Z) {
  check_shape(F, Z, "project_tangent");
  const Mat<Scalar> UtZ = F.U.transpose() * Z;           // r x n2
  const Mat<Scalar> ZV = Z * F.V;                         // n1 x r
  // U UtZ + (ZV - U (UtZ V)) V^T
  Mat<Scalar> out = F.U * UtZ;
  out.noalias() += (ZV - F.U * (UtZ * F.V)) * F.V.transpose();
  return out;
}

template <typename Scalar, typename Derived>
Mat<Scalar> project_tangent_perp(const LowRankFactorization<Scalar>& F,
                                 const Eigen::MatrixBase<Derived>& Z) {
  return Z - project_tangent(F, Z);
}

// ---------------------------------------------------------------------------
// Observations

struct Entry {
  Index row;
  Index col;
  double value;
};

/// A set Omega of observed (i, j, M_ij) triples, optionally carrying the
/// probability p_ij with which each entry was drawn.
class ObservationSet {
 public:
  ObservationSet() = default;
  ObservationSet(Index rows, Index cols, std::vector<Entry> entries,
                 std::optional<std::vector<double>> probabilities = std::nullopt);

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const std::vector<Entry>& entries() const { return entries_; }

  bool has_probabilities() const { return probabilities_.has_value(); }
  const std::vector<double>& probabilities() const;

  /// 0/1 indicator of Omega.
  Matrix mask() const;
  /// P_Omega(M): observed values, zero elsewhere.
  Matrix values() const;

  /// Same index set with replaced values (e.g. rescaled observations).
  ObservationSet with_values(const Matrix& source) const;

 private:
  Index rows_ = 0;
  Index cols_ = 0;
  std::vector<Entry> entries_;
  std::optional<std::vector<double>> probabilities_;
};

/// Observations of `M` on the given index list.
ObservationSet observe(const Matrix& M, const std::vector<std::pair<Index, Index>>& indices,
                       std::optional<std::vector<double>> probabilities = std::nullopt);

/// Union of two index-disjoint observation sets of the same shape.
ObservationSet merge(const ObservationSet& a, const ObservationSet& b);

/// (R_Omega Z)_ij = delta_ij Z_ij / p_ij.
Matrix r_omega(const ObservationSet& obs, const Matrix& Z);

/// (R_Omega^{1/2} Z)_ij = delta_ij Z_ij / sqrt(p_ij).
Matrix r_omega_sqrt(const ObservationSet& obs, const Matrix& Z);

// ---------------------------------------------------------------------------
// Leverage scores and the weighted norms

/// Normalized leverage scores mu_i = (n1/r)|U^T e_i|^2, nu_j = (n2/r)|V^T e_j|^2.
struct LeverageScores {
  Vector mu;
  Vector nu;
  Index rank = 0;

  /// Largest score over rows and columns (the incoherence parameter mu_0).
  double max_score() const {
    double m = 0.0;
    if (mu.size() > 0) m = std::max(m, mu.maxCoeff());
    if (nu.size() > 0) m = std::max(m, nu.maxCoeff());
    return m;
  }
};

namespace detail {

// 1/sqrt(n/(s r))-style weights: sqrt(n/(s r)), with a zero score mapped to
// +inf. Callers decide whether an infinite weight meets a zero entry.
inline double inverse_score_weight(double score, Index n, Index r) {
  if (score <= 0.0) return std::numeric_limits<double>::infinity();
  return std::sqrt(static_cast<double>(n) / (score * static_cast<double>(r)));
}

inline void check_scores(const LeverageScores& s, Index rows, Index cols, Index r,
                         const char* where) {
  if (s.mu.size() != rows || s.nu.size() != cols) {
    throw DimensionError(std::string(where) + ": score vectors do not match matrix shape");
  }
  if (r < 1) throw ContractError(std::string(where) + ": rank must be positive");
}

}  // namespace detail

/// max_ij |Z_ij| sqrt(n1/(mu_i r)) sqrt(n2/(nu_j r)).
template <typename Derived>
double mu_inf_norm(const Eigen::MatrixBase<Derived>& Z, const LeverageScores& scores,
                   Index r) {
  detail::check_scores(scores, Z.rows(), Z.cols(), r, "mu_inf_norm");
  double best = 0.0;
  for (Index j = 0; j < Z.cols(); ++j) {
    const double wc = detail::inverse_score_weight(scores.nu(j), Z.cols(), r);
    for (Index i = 0; i < Z.rows(); ++i) {
      const double z = std::abs(static_cast<double>(Z(i, j)));
      if (z == 0.0) continue;
      const double wr = detail::inverse_score_weight(scores.mu(i), Z.rows(), r);
      if (std::isinf(wr) || std::isinf(wc)) {
        throw InfiniteWeightError("mu_inf_norm: nonzero entry (" + std::to_string(i) +
                                  ", " + std::to_string(j) + ") at a zero leverage score");
      }
      best = std::max(best, z * wr * wc);
    }
  }
  return best;
}

/// Largest leverage-weighted row or column Euclidean norm.
template <typename Derived>
double mu_inf2_norm(const Eigen::MatrixBase<Derived>& Z, const LeverageScores& scores,
                    Index r) {
  detail::check_scores(scores, Z.rows(), Z.cols(), r, "mu_inf2_norm");
  double best = 0.0;
  for (Index i = 0; i < Z.rows(); ++i) {
    const double norm = static_cast<double>(Z.row(i).norm());
    if (norm == 0.0) continue;
    const double w = detail::inverse_score_weight(scores.mu(i), Z.rows(), r);
    if (std::isinf(w)) {
      throw InfiniteWeightError("mu_inf2_norm: nonzero row " + std::to_string(i) +
                                " with zero leverage score");
    }
    best = std::max(best, w * norm);
  }
  for (Index j = 0; j < Z.cols(); ++j) {
    const double norm = static_cast<double>(Z.col(j).norm());
    if (norm == 0.0) continue;
    const double w = detail::inverse_score_weight(scores.nu(j), Z.cols(), r);
    if (std::isinf(w)) {
      throw InfiniteWeightError("mu_inf2_norm: nonzero column " + std::to_string(j) +
                                " with zero leverage score");
    }
    best = std::max(best, w * norm);
  }
  return best;
}

template <typename Derived>
double mu_inf_norm(const Eigen::MatrixBase<Derived>& Z, const LeverageScores& scores) {
  return mu_inf_norm(Z, scores, scores.rank);
}

template <typename Derived>
double mu_inf2_norm(const Eigen::MatrixBase<Derived>& Z, const LeverageScores& scores) {
  return mu_inf2_norm(Z, scores, scores.rank);
}

/// Largest singular value.
double spectral_norm(const Matrix& Z);

/// Sum of singular values.
double nuclear_norm(const Matrix& Z);

/// |A - B|_F / |B|_F, with |B|_F = 0 treated as 1.
double relative_error(const Matrix& estimate, const Matrix& truth);

}  // namespace levcomp
