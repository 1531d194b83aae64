#include "levcomp/solver.hpp"

#include <cmath>
#include <random>

namespace levcomp {

void SolverConfig::validate() const {
  if (max_outer_iterations < 1) throw ContractError("SolverConfig: max_outer_iterations < 1");
  if (!(relative_residual_tolerance > 0.0)) {
    throw ContractError("SolverConfig: tolerance must be positive");
  }
  if (!(penalty_growth > 1.0)) {
    throw ContractError("SolverConfig: penalty growth must exceed 1");
  }
  if (svd_rank_cap && *svd_rank_cap < 1) throw ContractError("SolverConfig: svd_rank_cap < 1");
}

Matrix svt(const Matrix& M, double tau) {
  if (!(tau >= 0.0)) throw ContractError("svt: tau must be nonnegative");
  if (M.size() == 0) return M;
  Eigen::BDCSVD<Matrix> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) throw ConvergenceError("svt: SVD failed", 0);
  const Vector s = (svd.singularValues().array() - tau).cwiseMax(0.0);
  return svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose();
}

namespace {

struct Thresholded {
  Matrix value;
  double nuclear_norm = 0.0;
  Index rank = 0;
};

// Singular value thresholding of a sequence of slowly varying matrices. The
// partial path keeps a predicted rank and the previous right singular basis,
// runs a short subspace iteration on the warm-started block, and enlarges the
// block until it contains a singular value below the threshold.
class Thresholder {
 public:
  Thresholder(Index rows, Index cols, const SolverConfig& config)
      : max_rank_(std::min(rows, cols)), partial_(config.partial_svd), engine_(0x5eed) {
    if (config.svd_rank_cap) max_rank_ = std::min(max_rank_, *config.svd_rank_cap);
    predicted_ = std::min<Index>(max_rank_, 10);
  }

  Thresholded operator()(const Matrix& T, double tau) {
    const Index full = std::min(T.rows(), T.cols());
    Index block = std::min(full, predicted_ + kOversample);
    while (true) {
      if (!partial_ || 2 * block >= full) return dense(T, tau);
      Thresholded out;
      if (partial(T, tau, block, out)) return out;
      block = std::min(full, 2 * block);
    }
  }

 private:
  static constexpr Index kOversample = 6;
  static constexpr int kPowerSteps = 2;

  Thresholded finish(const Matrix& U, const Vector& s, const Matrix& V, double tau) {
    Index keep = 0;
    while (keep < s.size() && keep < max_rank_ && s(keep) > tau) ++keep;
    Thresholded out;
    const Vector shrunk = (s.head(keep).array() - tau).matrix();
    out.value = U.leftCols(keep) * shrunk.asDiagonal() * V.leftCols(keep).transpose();
    out.nuclear_norm = shrunk.sum();
    out.rank = keep;
    update_prediction(keep);
    return out;
  }

  void update_prediction(Index rank) {
    const Index step = std::max<Index>(1, static_cast<Index>(std::lround(0.05 * max_rank_)));
    predicted_ = rank < predicted_ ? rank + 1 : rank + step;
    predicted_ = std::clamp<Index>(predicted_, 1, max_rank_);
  }

  Thresholded dense(const Matrix& T, double tau) {
    Eigen::BDCSVD<Matrix> svd(T, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (svd.info() != Eigen::Success) throw ConvergenceError("svt: SVD failed", 0);
    basis_.resize(0, 0);
    return finish(svd.matrixU(), svd.singularValues(), svd.matrixV(), tau);
  }

  static Matrix orthonormal(const Matrix& A) {
    Eigen::HouseholderQR<Matrix> qr(A);
    return qr.householderQ() * Matrix::Identity(A.rows(), A.cols());
  }

  bool partial(const Matrix& T, double tau, Index block, Thresholded& out) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Matrix start(T.cols(), block);
    const Index warm = std::min(block, static_cast<Index>(basis_.cols()));
    if (warm > 0 && basis_.rows() == T.cols()) start.leftCols(warm) = basis_.leftCols(warm);
    for (Index j = (basis_.rows() == T.cols() ? warm : 0); j < block; ++j)
      for (Index i = 0; i < T.cols(); ++i) start(i, j) = gauss(engine_);

    Matrix Q = orthonormal(T * start);
    for (int step = 0; step < kPowerSteps; ++step) {
      const Matrix P = orthonormal(T.transpose() * Q);
      Q = orthonormal(T * P);
    }
    const Matrix B = Q.transpose() * T;  // block x n2
    Eigen::BDCSVD<Matrix> svd(B, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (svd.info() != Eigen::Success) throw ConvergenceError("svt: block SVD failed", 0);
    const Vector& s = svd.singularValues();

    // The trailing Ritz values are the least accurate; require a margin of
    // them below the threshold before trusting the block.
    Index above = 0;
    while (above < s.size() && s(above) > tau) ++above;
    const bool capped = above >= max_rank_;
    if (above > block - kOversample / 2 && !capped) return false;

    basis_ = svd.matrixV();
    out = finish(Q * svd.matrixU(), s, svd.matrixV(), tau);
    return true;
  }

  Index max_rank_;
  bool partial_;
  Index predicted_ = 10;
  Matrix basis_;
  std::mt19937_64 engine_;
};

}  // namespace

SolveReport complete_nuclear(const ObservationSet& obs, const SolverConfig& config) {
  config.validate();
  if (obs.empty()) throw ContractError("complete_nuclear: empty observation set");

  const Index n1 = obs.rows();
  const Index n2 = obs.cols();
  const Matrix D = obs.values();
  const Matrix mask = obs.mask();
  const Matrix unobserved = Matrix::Ones(n1, n2) - mask;
  const double d_norm = D.norm();
  const double denom = std::max(1.0, d_norm);

  SolveReport report;
  if (d_norm == 0.0) {
    // Every observed value is zero: the zero matrix is the unique minimizer.
    report.X_hat = Matrix::Zero(n1, n2);
    report.converged = true;
    return report;
  }

  double mu = config.penalty_initial > 0.0 ? config.penalty_initial : 1.0 / spectral_norm(D);
  const double growth = config.penalty_growth;

  Thresholder threshold(n1, n2, config);
  Matrix Y = Matrix::Zero(n1, n2);
  Matrix E = Matrix::Zero(n1, n2);
  Matrix A = Matrix::Zero(n1, n2);

  for (int it = 1; it <= config.max_outer_iterations; ++it) {
    const Thresholded step = threshold(D - E + Y / mu, 1.0 / mu);
    A = step.value;
    // E fills the unobserved entries so that D - A - E vanishes off Omega.
    E = -unobserved.cwiseProduct(A);
    const Matrix Z = mask.cwiseProduct(D - A);
    Y += mu * Z;
    mu *= growth;

    report.iterations = it;
    report.nuclear_norm_value = step.nuclear_norm;
    report.final_constraint_residual = Z.norm() / denom;
    if (config.record_history) {
      report.nuclear_norm_history.push_back(step.nuclear_norm);
      report.residual_history.push_back(report.final_constraint_residual);
    }
    if (report.final_constraint_residual <= config.relative_residual_tolerance) {
      report.converged = true;
      break;
    }
  }
  report.X_hat = std::move(A);
  return report;
}

SolveReport complete_weighted(const ObservationSet& obs, const WeightMatrices& W,
                              const SolverConfig& config) {
  if (W.R.size() != obs.rows() || W.C.size() != obs.cols()) {
    throw DimensionError("complete_weighted: weight vectors do not match the observation shape");
  }
  if (!(W.R.array() > 0.0).all() || !(W.C.array() > 0.0).all() || !W.R.allFinite() ||
      !W.C.allFinite()) {
    throw ContractError("complete_weighted: weights must be finite and strictly positive");
  }
  std::vector<Entry> scaled = obs.entries();
  for (Entry& e : scaled) e.value *= W.R(e.row) * W.C(e.col);
  std::optional<std::vector<double>> probs;
  if (obs.has_probabilities()) probs = obs.probabilities();
  const ObservationSet scaled_obs(obs.rows(), obs.cols(), std::move(scaled), std::move(probs));

  // |P_Omega(X - M)|_F <= |P_Omega(Xbar - Mbar)|_F / min_ij R_i C_j, so the
  // scaled solve runs to a proportionally tighter tolerance.
  SolverConfig inner = config;
  const double original_scale = std::max(1.0, obs.values().norm());
  const double scaled_scale = std::max(1.0, scaled_obs.values().norm());
  inner.relative_residual_tolerance *=
      std::min(1.0, W.R.minCoeff() * W.C.minCoeff() * original_scale / scaled_scale);
  SolveReport report = complete_nuclear(scaled_obs, inner);
  const Vector r_inv = W.R.cwiseInverse();
  const Vector c_inv = W.C.cwiseInverse();
  report.X_hat = r_inv.asDiagonal() * report.X_hat * c_inv.asDiagonal();

  double residual = 0.0;
  for (const Entry& e : obs.entries()) {
    const double d = report.X_hat(e.row, e.col) - e.value;
    residual += d * d;
  }
  report.final_constraint_residual = std::sqrt(residual) / std::max(1.0, obs.values().norm());
  report.converged =
      report.converged && report.final_constraint_residual <= config.relative_residual_tolerance;
  return report;
}

WeightMatrices choose_weights(const Vector& p_row, const Vector& p_col) {
  if (p_row.size() == 0 || p_col.size() == 0) throw DimensionError("choose_weights: empty marginals");
  if (!(p_row.array() > 0.0).all() || !(p_col.array() > 0.0).all()) {
    throw ContractError("choose_weights: marginals must be strictly positive");
  }
  WeightMatrices W;
  W.R = (p_row * p_col.mean()).cwiseSqrt();
  W.C = (p_col * p_row.mean()).cwiseSqrt();
  return W;
}

}  // namespace levcomp
