#include "levcomp/pipelines.hpp"

#include <cmath>
#include <unordered_set>

namespace levcomp {

Index TwoPhaseConfig::phase_one_size() const {
  return static_cast<Index>(std::floor(beta * static_cast<double>(budget)));
}

void TwoPhaseConfig::validate(Index rows, Index cols) const {
  if (!(beta >= 0.0 && beta <= 1.0)) throw ContractError("TwoPhaseConfig: beta outside [0, 1]");
  if (budget < 1 || budget > rows * cols) {
    throw InfeasibleBudgetError("TwoPhaseConfig: budget " + std::to_string(budget) +
                                " outside [1, n1 n2]");
  }
  if (rank_parameter < 1 || rank_parameter > std::min(rows, cols)) {
    throw DimensionError("TwoPhaseConfig: rank parameter outside [1, min(n1, n2)]");
  }
  solver.validate();
}

TwoPhaseResult two_phase_complete(const Matrix& M, const TwoPhaseConfig& config, RandomStream& rng) {
  config.validate(M.rows(), M.cols());
  TwoPhaseResult out;

  const Index first = config.phase_one_size();
  const Index second = config.budget - first;
  out.phase_one = sample_uniform(M, first, rng);

  // Rank-r approximation of the zero-filled first-phase observations.
  Factorization estimate;
  if (first > 0) estimate = svd_rank_r<double>(out.phase_one.values(), config.rank_parameter);
  out.effective_rank = estimate.rank();
  out.rank_deficient = out.effective_rank < config.rank_parameter;

  Matrix weights;
  if (out.effective_rank > 0) {
    out.estimated_scores = leverage_scores(estimate);
    switch (config.phase_two) {
      case PhaseTwoKind::leverage:
        weights = estimated_distribution(out.estimated_scores, std::max<Index>(second, 1)).weights;
        break;
      case PhaseTwoKind::l1:
        weights = comparison_distribution(ComparisonKind::l1, estimate.reconstruct()).weights;
        break;
      case PhaseTwoKind::l2:
        weights = comparison_distribution(ComparisonKind::l2, estimate.reconstruct()).weights;
        break;
    }
  } else {
    out.phase_two_uniform_fallback = second > 0;
    weights = comparison_distribution(ComparisonKind::uniform, M).weights;
  }

  out.phase_two = sample_without_replacement(M, weights, second, rng, &out.phase_one);
  out.report = complete_nuclear(merge(out.phase_one, out.phase_two), config.solver);
  return out;
}

RowCoherentResult row_coherent_complete(const Matrix& M, double mu0, Index r, double c0,
                                        RandomStream& rng, const SolverConfig& solver) {
  if (!(mu0 >= 1.0)) throw ContractError("row_coherent_complete: mu0 must be at least 1");
  if (!(c0 > 0.0)) throw ContractError("row_coherent_complete: c0 must be positive");
  if (r < 1 || r > std::min(M.rows(), M.cols())) {
    throw DimensionError("row_coherent_complete: rank outside [1, min(n1, n2)]");
  }
  const Index n1 = M.rows();
  const Index n2 = M.cols();
  const double n = static_cast<double>(std::max(n1, n2));
  const double log_n = std::log(n);

  RowCoherentResult out;
  out.row_probability = std::min(1.0, c0 * mu0 * static_cast<double>(r) * log_n / n);
  RowSample rows = sample_full_rows(M, out.row_probability, rng);
  out.sampled_rows = rows.rows;
  out.row_samples = rows.observations.size();

  // Row space of the picked rows P_J(M).
  out.nu_estimate = Vector::Zero(n2);
  if (!rows.rows.empty()) {
    Matrix picked(static_cast<Index>(rows.rows.size()), n2);
    for (std::size_t k = 0; k < rows.rows.size(); ++k) {
      picked.row(static_cast<Index>(k)) = M.row(rows.rows[k]);
    }
    const Index cap = std::min<Index>(r, std::min(picked.rows(), picked.cols()));
    const Factorization f = svd_rank_r<double>(picked, cap);
    out.row_rank = f.rank();
    if (out.row_rank > 0) {
      out.nu_estimate =
          f.V.rowwise().squaredNorm() * (static_cast<double>(n2) / static_cast<double>(r));
    }
  }
  out.row_space_captured = out.row_rank == r;

  ProbabilityMatrix P;
  const double scale = c0 * static_cast<double>(r) * log_n * log_n / n;
  P.p = (Matrix::Constant(n1, n2, mu0) + out.nu_estimate.transpose().replicate(n1, 1)) * scale;
  P.p = P.p.cwiseMin(1.0);
  const ObservationSet leveraged = bernoulli_sample(M, P, rng);
  out.leveraged_samples = leveraged.size();
  out.expected_samples = out.row_probability * static_cast<double>(n1 * n2) + P.p.sum();

  // Union of the two stages; entries of picked rows are already known.
  std::vector<Entry> entries = rows.observations.entries();
  std::vector<char> picked_row(static_cast<std::size_t>(n1), 0);
  for (Index i : rows.rows) picked_row[static_cast<std::size_t>(i)] = 1;
  for (const Entry& e : leveraged.entries()) {
    if (!picked_row[static_cast<std::size_t>(e.row)]) entries.push_back(e);
  }
  out.total_samples = entries.size();
  const ObservationSet all(n1, n2, std::move(entries));
  out.report = complete_nuclear(all, solver);
  return out;
}

}  // namespace levcomp
