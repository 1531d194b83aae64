#pragma once

// End-to-end completion procedures that decide where to sample:
//
//  * two-phase sampling: a uniform phase estimates leverage scores from the
//    rank-r SVD of the zero-filled observations, a second phase samples the
//    rest of the budget from the estimated scores, then one nuclear-norm
//    solve runs on the union;
//  * row-coherent completion: whole rows are sampled to learn the row space
//    exactly, then leveraged sampling with a known column-space bound.
//
// "Oracle access" to M means the pipelines read any entry they decide to
// sample from the matrix held in memory.

#include <vector>

#include "levcomp/core.hpp"
#include "levcomp/leverage.hpp"
#include "levcomp/sampling.hpp"
#include "levcomp/solver.hpp"

namespace levcomp {

/// Distribution used for the second phase.
enum class PhaseTwoKind { leverage, l1, l2 };

struct TwoPhaseConfig {
  Index rank_parameter = 1;
  Index budget = 1;
  double beta = 2.0 / 3.0;
  PhaseTwoKind phase_two = PhaseTwoKind::leverage;
  SolverConfig solver;

  Index phase_one_size() const;
  void validate(Index rows, Index cols) const;
};

struct TwoPhaseResult {
  SolveReport report;
  ObservationSet phase_one;
  ObservationSet phase_two;
  /// Scores of the rank-r approximation of P_Omega(M); empty when the first
  /// phase saw no nonzero value.
  LeverageScores estimated_scores;
  /// Rank actually available from the first phase (< rank_parameter when
  /// P_Omega(M) is rank deficient).
  Index effective_rank = 0;
  bool rank_deficient = false;
  /// The first phase could not define a distribution and the second phase
  /// fell back to uniform weights.
  bool phase_two_uniform_fallback = false;
};

TwoPhaseResult two_phase_complete(const Matrix& M, const TwoPhaseConfig& config, RandomStream& rng);

struct RowCoherentResult {
  SolveReport report;
  std::vector<Index> sampled_rows;
  /// Row-space leverage scores of the sampled rows.
  Vector nu_estimate;
  /// Rank of the sampled rows.
  Index row_rank = 0;
  /// The sampled rows have rank r, so their row space is the row space of M.
  bool row_space_captured = false;
  double row_probability = 0.0;
  std::size_t row_samples = 0;
  std::size_t leveraged_samples = 0;
  /// Distinct entries observed across both stages.
  std::size_t total_samples = 0;
  /// Expected number of samples p n1 n2 + sum_ij p_ij.
  double expected_samples = 0.0;
};

/// Row probability min(1, c0 mu0 r log n / n); then p_ij =
/// min(c0 (mu0 + nu_j) r log^2 n / n, 1) with nu taken from the sampled rows.
RowCoherentResult row_coherent_complete(const Matrix& M, double mu0, Index r, double c0,
                                        RandomStream& rng, const SolverConfig& solver = {});

}  // namespace levcomp
