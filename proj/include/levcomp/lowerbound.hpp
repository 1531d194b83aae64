#pragma once

// Block-diagonal hard instances for leverage-based sampling: a matrix
// M0 = A B^T with prescribed leverage scores and a perturbation M1 that
// differs from M0 on a single row segment, together with a Monte-Carlo
// estimate of the probability that this segment is never observed.

#include <vector>

#include "levcomp/core.hpp"
#include "levcomp/leverage.hpp"
#include "levcomp/sampling.hpp"

namespace levcomp {

/// Block sizes are not integers, or the targets violate the hypotheses.
class ConstructionError : public Error {
 public:
  ConstructionError(const std::string& what, Index block) : Error(what), block_(block) {}
  /// Offending block index k, or -1 when the failure is not block-specific.
  Index block() const { return block_; }

 private:
  Index block_;
};

struct HardInstance {
  Index n = 0;
  Index r = 0;
  std::vector<double> a;
  std::vector<double> b;
  std::vector<Index> s;
  std::vector<Index> t;
  /// First row (column) of block k; block k spans s[k] rows and t[k] columns.
  std::vector<Index> row_start;
  std::vector<Index> col_start;
  double s_bar = 0.0;
  Matrix A;
  Matrix A_bar;
  Matrix B;
  Matrix M0;
  Matrix M1;
  Index i0 = 0;
  Index j0 = 0;
  Index i_star = 0;
  Index k1 = 0;
  Index k2 = 0;

  /// Target scores mu_i = a_k on I_k and nu_j = b_k on J_k.
  LeverageScores targets() const;
  Index block_of_row(Index i) const;
  Index block_of_col(Index j) const;
};

/// s_k = 2n/(a_k r), t_k = 2n/(b_k r) must be integers summing to n, which
/// forces sum_k 1/a_k = sum_k 1/b_k = r/2. The perturbed row is i_star
/// (defaults to i0) and A_bar(i_star, k2) = -sqrt(1/s_bar).
HardInstance construct_hard_pair(Index n, Index r, const std::vector<double>& a,
                                 const std::vector<double>& b, double s_bar, Index i0, Index j0,
                                 std::optional<Index> i_star = std::nullopt);

/// Targets near `a` whose block sizes 2n/(a_k r) are integers summing to n.
std::vector<double> suggest_targets(Index n, Index r, const std::vector<double>& a);

/// log(1/eta) / (2 t_{k2}).
double boundary_probability(const HardInstance& inst, double eta);

/// Throws ContractError naming the first pair of identical rows (or
/// columns) of M0 whose probabilities differ.
void check_location_invariant(const HardInstance& inst, const ProbabilityMatrix& P);

struct IndistinguishabilityResult {
  int trials = 0;
  /// Fraction of trials in which some row of I_{k1} has no observed entry in
  /// J_{k2}.
  double frequency = 0.0;
  double standard_error = 0.0;
  /// 3 standard errors.
  double half_width = 0.0;
  /// 1 - prod_{i in I_k1} (1 - prod_{j in J_k2} (1 - p_ij)).
  double analytic = 0.0;
};

IndistinguishabilityResult indistinguishability_test(const HardInstance& inst,
                                                     const ProbabilityMatrix& P, int trials,
                                                     RandomStream& rng);

}  // namespace levcomp
