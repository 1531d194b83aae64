#pragma once

// Leverage scores of a factorization and the sampling distributions built
// from them (or compared against them).

#include "levcomp/core.hpp"

namespace levcomp {

/// Per-entry observation probabilities. `floor` is the lower clamp applied
/// when the matrix came from leveraged_distribution (0 otherwise).
struct ProbabilityMatrix {
  Matrix p;
  double floor = 0.0;

  Index rows() const { return p.rows(); }
  Index cols() const { return p.cols(); }
  double expected_count() const { return p.sum(); }
};

/// A normalized weight per entry (weights sum to one), plus the number of
/// draws the sampler should make from it when that is known.
struct EntryWeights {
  Matrix weights;
  Index budget = 0;
};

enum class ComparisonKind { uniform, l1, l2 };

LeverageScores leverage_scores(const Factorization& F);

/// mu_str with |U V^T|_inf^2 = r mu_str / (n1 n2).
double joint_incoherence(const Factorization& F);

/// c0 such that the uncapped expected sample count of leveraged sampling
/// equals 10 n log n on an n x n rank-r matrix.
double calibrated_c0(Index n, Index r);

/// Uncapped rates c0 (mu_i + nu_j) r log^2(n1 + n2) / min(n1, n2).
Matrix leveraged_rates(const LeverageScores& scores, double c0);

/// min(rate, 1), then clamped below at min(n1, n2)^-10.
ProbabilityMatrix leveraged_distribution(const LeverageScores& scores, double c0);

/// The c0 at which leveraged_distribution has expected sample count
/// `expected_count` after capping. Saturates when the count is unreachable.
double leveraged_c0_for_budget(const LeverageScores& scores, double expected_count);

/// Product-form probabilities p_ij = p_row(i) p_col(j).
ProbabilityMatrix product_distribution(const Vector& p_row, const Vector& p_col);

/// Weights proportional to mu_i + nu_j, normalized to sum to one.
EntryWeights estimated_distribution(const LeverageScores& scores, Index budget);

/// Uniform, |M|-proportional or M^2-proportional weights.
EntryWeights comparison_distribution(ComparisonKind kind, const Matrix& estimate);

}  // namespace levcomp
