#pragma once

// Numerical checks of the dual-certificate argument: the sampling operator
// P_T R_Omega P_T - P_T, the golfing construction of Y, and the ratio
// |(R_Omega - I) Z| / (|Z|_mu(inf) + |Z|_mu(inf,2)).

#include <cstdint>
#include <vector>

#include "levcomp/core.hpp"
#include "levcomp/leverage.hpp"
#include "levcomp/sampling.hpp"

namespace levcomp {

struct OperatorNormOptions {
  double tol = 1e-9;
  int max_iterations = 1000;
  /// Largest max(n1, n2) accepted; the operator acts on n1 n2 dimensions.
  Index size_cap = 64;
  std::uint64_t seed = 0x0b5e;
};

/// Power-iteration estimate of |P_T R_Omega P_T - P_T|_op. `obs` must carry
/// probabilities.
double operator_norm_tangent(const ObservationSet& obs, const Factorization& F,
                             const OperatorNormOptions& options = {});

/// The operator X -> P_T R_Omega P_T X - P_T X itself.
Matrix sampling_operator_apply(const ObservationSet& obs, const Factorization& F, const Matrix& X);

/// ceil(20 log n).
int golfing_batches(Index n);

/// q = 1 - (1 - p)^(1/k0), so that k0 independent Bernoulli(q) batches
/// have union Bernoulli(p).
Matrix batch_probabilities(const ProbabilityMatrix& P, int k0);

struct CertificateReport {
  int k0 = 0;
  /// |P_T R_Omega P_T - P_T|_op on the union of the batches (NaN above the
  /// size cap).
  double operator_norm_estimate = 0.0;
  /// |Delta_k|_F for k = 0..k0, Delta_k = U V^T - P_T(W_k).
  std::vector<double> delta_frobenius_trace;
  /// |Delta_k|_F / |Delta_{k-1}|_F for k = 1..k0 (0 once Delta is at
  /// round-off, n eps sqrt(r)).
  std::vector<double> contraction_ratios;
  double median_contraction = 0.0;
  /// |P_T(Y) - U V^T|_F.
  double tangent_residual = 0.0;
  /// |P_T_perp(Y)|_2.
  double offspace_spectral = 0.0;

  bool condition_operator = false;        // operator norm <= 1/2
  bool condition_tangent_literal = false; // tangent residual <= 1/(4 n^5)
  bool condition_tangent_decay = false;   // |Delta_k|_F <= max(2^-k sqrt(r), n eps sqrt(r)) for all k
  bool condition_offspace = false;        // |P_T_perp(Y)| <= 1/2
  /// n1 != n2: square-case formulas applied with n = max(n1, n2).
  bool non_square = false;

  std::vector<ObservationSet> batches;
  /// Union of the batches, carrying the original probabilities p.
  ObservationSet omega;
  Matrix Y;
};

CertificateReport golfing_certificate(const Matrix& M, const Factorization& F,
                                      const ProbabilityMatrix& P, RandomStream& rng,
                                      const OperatorNormOptions& options = {});

struct ConcentrationReport {
  std::vector<double> ratios;
  double median = 0.0;
  double p95 = 0.0;
  /// |Z|_mu(inf) + |Z|_mu(inf,2).
  double denominator = 0.0;
};

ConcentrationReport concentration_ratio(const Matrix& Z, const Factorization& F,
                                        const ProbabilityMatrix& P, int trials,
                                        RandomStream& rng);

}  // namespace levcomp
