#include "levcomp/leverage.hpp"

#include <cmath>

namespace levcomp {

LeverageScores leverage_scores(const Factorization& F) {
  const Index r = F.rank();
  if (r < 1) throw ContractError("leverage_scores: factorization has rank zero");
  if (F.U.cols() != r || F.V.cols() != r) {
    throw DimensionError("leverage_scores: inconsistent factorization");
  }
  LeverageScores s;
  s.rank = r;
  s.mu = F.U.rowwise().squaredNorm() * (static_cast<double>(F.rows()) / r);
  s.nu = F.V.rowwise().squaredNorm() * (static_cast<double>(F.cols()) / r);
  return s;
}

double joint_incoherence(const Factorization& F) {
  if (F.rank() < 1) throw ContractError("joint_incoherence: factorization has rank zero");
  const double m = F.uv().cwiseAbs().maxCoeff();
  return m * m * static_cast<double>(F.rows()) * static_cast<double>(F.cols()) /
         static_cast<double>(F.rank());
}

double calibrated_c0(Index n, Index r) {
  if (n < 2 || r < 1) throw ContractError("calibrated_c0: need n >= 2 and r >= 1");
  const double l2n = std::log(2.0 * static_cast<double>(n));
  return 5.0 * std::log(static_cast<double>(n)) / (static_cast<double>(r) * l2n * l2n);
}

Matrix leveraged_rates(const LeverageScores& scores, double c0) {
  if (!(c0 > 0.0)) throw ContractError("leveraged_rates: c0 must be positive");
  const Index n1 = scores.mu.size();
  const Index n2 = scores.nu.size();
  const double lg = std::log(static_cast<double>(n1 + n2));
  const double scale = c0 * static_cast<double>(scores.rank) * lg * lg /
                       static_cast<double>(std::min(n1, n2));
  Matrix rates = scores.mu.replicate(1, n2) + scores.nu.transpose().replicate(n1, 1);
  return rates * scale;
}

ProbabilityMatrix leveraged_distribution(const LeverageScores& scores, double c0) {
  const double n_min = static_cast<double>(std::min(scores.mu.size(), scores.nu.size()));
  ProbabilityMatrix P;
  P.floor = std::pow(n_min, -10.0);
  P.p = leveraged_rates(scores, c0).cwiseMin(1.0).cwiseMax(P.floor);
  return P;
}

double leveraged_c0_for_budget(const LeverageScores& scores, double expected_count) {
  if (!(expected_count > 0.0)) {
    throw ContractError("leveraged_c0_for_budget: expected count must be positive");
  }
  const Matrix unit = leveraged_rates(scores, 1.0);
  const double n_min = static_cast<double>(std::min(scores.mu.size(), scores.nu.size()));
  const double floor = std::pow(n_min, -10.0);
  auto count = [&](double c0) { return (unit * c0).cwiseMin(1.0).cwiseMax(floor).sum(); };

  double lo = 0.0;
  double hi = 1.0;
  while (count(hi) < expected_count) {
    hi *= 2.0;
    if (hi > 1e12) return hi;  // saturated: every positive-rate entry capped at 1
  }
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (count(mid) < expected_count ? lo : hi) = mid;
  }
  return hi;
}

ProbabilityMatrix product_distribution(const Vector& p_row, const Vector& p_col) {
  if (p_row.size() == 0 || p_col.size() == 0) throw DimensionError("product_distribution: empty marginal");
  if ((p_row.array() < 0.0).any() || (p_row.array() > 1.0).any() || (p_col.array() < 0.0).any() ||
      (p_col.array() > 1.0).any()) {
    throw ContractError("product_distribution: marginals must lie in [0, 1]");
  }
  ProbabilityMatrix P;
  P.p = p_row * p_col.transpose();
  return P;
}

EntryWeights estimated_distribution(const LeverageScores& scores, Index budget) {
  if (budget < 1) throw ContractError("estimated_distribution: budget must be positive");
  const Index n1 = scores.mu.size();
  const Index n2 = scores.nu.size();
  if ((scores.mu.array() < 0.0).any() || (scores.nu.array() < 0.0).any()) {
    throw ContractError("estimated_distribution: negative leverage score");
  }
  Matrix w = scores.mu.replicate(1, n2) + scores.nu.transpose().replicate(n1, 1);
  const double total = w.sum();
  if (!(total > 0.0)) {
    throw DegenerateDistributionError("estimated_distribution: all scores are zero");
  }
  return {w / total, budget};
}

EntryWeights comparison_distribution(ComparisonKind kind, const Matrix& estimate) {
  Matrix w;
  switch (kind) {
    case ComparisonKind::uniform:
      w = Matrix::Ones(estimate.rows(), estimate.cols());
      break;
    case ComparisonKind::l1:
      w = estimate.cwiseAbs();
      break;
    case ComparisonKind::l2:
      w = estimate.cwiseAbs2();
      break;
  }
  const double total = w.sum();
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw DegenerateDistributionError("comparison_distribution: estimate is identically zero");
  }
  return {w / total, 0};
}

}  // namespace levcomp
