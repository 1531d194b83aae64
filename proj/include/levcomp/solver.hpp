#pragma once

// Equality-constrained nuclear-norm minimization
//
//   min |X|_*  s.t.  X_ij = M_ij for (i, j) in Omega
//
// by the inexact augmented Lagrangian method. Each outer iteration performs
// one singular value thresholding step, one dual ascent step on the
// observed entries, and grows the penalty geometrically. The weighted
// variant min |R X C|_* is reduced to the unweighted one by rescaling the
// observations.

#include <optional>
#include <vector>

#include "levcomp/core.hpp"

namespace levcomp {

struct SolverConfig {
  int max_outer_iterations = 500;
  /// Initial penalty; a value <= 0 selects 1 / |P_Omega(M)|_2.
  double penalty_initial = 0.0;
  /// Penalty growth per outer iteration.
  double penalty_growth = 1.05;
  double relative_residual_tolerance = 1e-7;
  /// Upper bound on the rank of any thresholded iterate, when the caller can
  /// assert one. Never changes the problem being solved.
  std::optional<Index> svd_rank_cap;
  /// Thresholding through a warm-started randomized partial SVD instead of a
  /// dense SVD at every iteration.
  bool partial_svd = true;
  bool record_history = false;

  void validate() const;
};

struct SolveReport {
  Matrix X_hat;
  int iterations = 0;
  /// |P_Omega(X_hat - M)|_F / max(1, |P_Omega(M)|_F).
  double final_constraint_residual = 0.0;
  /// |X_hat|_* (|R X_hat C|_* for the weighted solver).
  double nuclear_norm_value = 0.0;
  bool converged = false;
  /// Per-iteration nuclear norm of the primal iterate, when recorded.
  std::vector<double> nuclear_norm_history;
  std::vector<double> residual_history;
};

/// Positive diagonals of R (length n1) and C (length n2).
struct WeightMatrices {
  Vector R;
  Vector C;
};

/// U max(S - tau, 0) V^T from a dense SVD of M.
Matrix svt(const Matrix& M, double tau);

SolveReport complete_nuclear(const ObservationSet& obs, const SolverConfig& config = {});

/// R^{-1} (unweighted solve on R_i M_ij C_j) C^{-1}.
SolveReport complete_weighted(const ObservationSet& obs, const WeightMatrices& W,
                              const SolverConfig& config = {});

/// R_i = sqrt(p_i^r mean(p^c)), C_j = sqrt(p_j^c mean(p^r)).
WeightMatrices choose_weights(const Vector& p_row, const Vector& p_col);

}  // namespace levcomp
