#include "levcomp/certify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace levcomp {

namespace {

// Dense matrix of delta_ij / p_ij.
Matrix inverse_probability_mask(const ObservationSet& obs) {
  if (!obs.has_probabilities()) {
    throw ContractError("sampling operator: observation set carries no probabilities");
  }
  Matrix w = Matrix::Zero(obs.rows(), obs.cols());
  const auto& probs = obs.probabilities();
  for (std::size_t k = 0; k < obs.size(); ++k) {
    const Entry& e = obs.entries()[k];
    w(e.row, e.col) = 1.0 / probs[k];
  }
  return w;
}

Matrix apply_operator(const Matrix& weights, const Factorization& F, const Matrix& X) {
  const Matrix PX = project_tangent(F, X);
  return project_tangent(F, weights.cwiseProduct(PX)) - PX;
}

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  return v.size() % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

double quantile_of(std::vector<double> v, double q) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace

Matrix sampling_operator_apply(const ObservationSet& obs, const Factorization& F, const Matrix& X) {
  check_shape(F, X, "sampling_operator_apply");
  return apply_operator(inverse_probability_mask(obs), F, X);
}

double operator_norm_tangent(const ObservationSet& obs, const Factorization& F,
                             const OperatorNormOptions& options) {
  if (obs.rows() != F.rows() || obs.cols() != F.cols()) {
    throw DimensionError("operator_norm_tangent: observation shape does not match factorization");
  }
  const Index n = std::max(obs.rows(), obs.cols());
  if (n > options.size_cap) {
    throw SizeError("operator_norm_tangent: n = " + std::to_string(n) + " exceeds cap " +
                    std::to_string(options.size_cap));
  }
  if (!(options.tol > 0.0) || options.max_iterations < 1) {
    throw ContractError("operator_norm_tangent: bad tolerance or iteration limit");
  }
  const Matrix weights = inverse_probability_mask(obs);

  RandomStream rng(options.seed);
  Matrix x = rng.gaussian_matrix(obs.rows(), obs.cols());
  x /= x.norm();

  // The operator is self-adjoint, so |A x_k| with x_k = A^k x_0 / |A^k x_0|
  // increases monotonically to the largest |eigenvalue|.
  double estimate = 0.0;
  for (int it = 0; it < options.max_iterations; ++it) {
    Matrix y = apply_operator(weights, F, x);
    const double value = y.norm();
    if (value == 0.0) return 0.0;
    const bool done = it > 0 && std::abs(value - estimate) < options.tol * value;
    estimate = value;
    if (done) break;
    x = y / value;
  }
  return estimate;
}

int golfing_batches(Index n) {
  if (n < 2) throw DimensionError("golfing_batches: n must be at least 2");
  return static_cast<int>(std::ceil(20.0 * std::log(static_cast<double>(n))));
}

Matrix batch_probabilities(const ProbabilityMatrix& P, int k0) {
  if (k0 < 1) throw ContractError("batch_probabilities: k0 must be positive");
  return P.p.unaryExpr([k0](double p) {
    if (p >= 1.0) return 1.0;
    return -std::expm1(std::log1p(-p) / static_cast<double>(k0));
  });
}

CertificateReport golfing_certificate(const Matrix& M, const Factorization& F,
                                      const ProbabilityMatrix& P, RandomStream& rng,
                                      const OperatorNormOptions& options) {
  check_shape(F, M, "golfing_certificate");
  if (P.rows() != M.rows() || P.cols() != M.cols()) {
    throw DimensionError("golfing_certificate: probability matrix shape mismatch");
  }
  const Index n1 = M.rows();
  const Index n2 = M.cols();
  const Index n = std::max(n1, n2);

  CertificateReport report;
  report.non_square = n1 != n2;
  report.k0 = golfing_batches(n);
  const Matrix q = batch_probabilities(P, report.k0);
  const Matrix UV = F.uv();

  // Round-off level of |Delta_k|_F; below it the trace carries no signal.
  const double floor = static_cast<double>(n) * std::numeric_limits<double>::epsilon() *
                       std::sqrt(static_cast<double>(F.rank()));

  Matrix observed = Matrix::Zero(n1, n2);
  Matrix W = Matrix::Zero(n1, n2);
  Matrix delta = UV;
  report.delta_frobenius_trace.push_back(delta.norm());

  for (int k = 1; k <= report.k0; ++k) {
    std::vector<Entry> entries;
    std::vector<double> probs;
    Matrix step = Matrix::Zero(n1, n2);
    for (Index i = 0; i < n1; ++i) {
      for (Index j = 0; j < n2; ++j) {
        if (rng.uniform() < q(i, j)) {
          entries.push_back({i, j, M(i, j)});
          probs.push_back(q(i, j));
          step(i, j) = delta(i, j) / q(i, j);
          observed(i, j) = 1.0;
        }
      }
    }
    report.batches.emplace_back(n1, n2, std::move(entries), std::move(probs));
    // delta is already in T, so P_T(delta) = delta.
    W += step;
    delta = UV - project_tangent(F, W);
    const double prev = report.delta_frobenius_trace.back();
    const double cur = delta.norm();
    report.delta_frobenius_trace.push_back(cur);
    report.contraction_ratios.push_back(prev > floor ? cur / prev : 0.0);
  }

  std::vector<Entry> union_entries;
  std::vector<double> union_probs;
  for (Index i = 0; i < n1; ++i) {
    for (Index j = 0; j < n2; ++j) {
      if (observed(i, j) != 0.0) {
        union_entries.push_back({i, j, M(i, j)});
        union_probs.push_back(P.p(i, j));
      }
    }
  }
  report.omega = ObservationSet(n1, n2, std::move(union_entries), std::move(union_probs));

  report.Y = std::move(W);
  report.median_contraction = median_of(report.contraction_ratios);
  report.tangent_residual = (project_tangent(F, report.Y) - UV).norm();
  report.offspace_spectral = spectral_norm(project_tangent_perp(F, report.Y));

  if (n <= options.size_cap) {
    report.operator_norm_estimate = operator_norm_tangent(report.omega, F, options);
  } else {
    report.operator_norm_estimate = std::numeric_limits<double>::quiet_NaN();
  }
  const double nd = static_cast<double>(n);
  const double sqrt_r = std::sqrt(static_cast<double>(F.rank()));
  report.condition_operator = report.operator_norm_estimate <= 0.5;
  report.condition_tangent_literal = report.tangent_residual <= 1.0 / (4.0 * std::pow(nd, 5));
  report.condition_tangent_decay = true;
  for (std::size_t k = 0; k < report.delta_frobenius_trace.size(); ++k) {
    const double bound = std::max(std::ldexp(sqrt_r, -static_cast<int>(k)), floor);
    if (report.delta_frobenius_trace[k] > bound * (1.0 + 1e-12)) {
      report.condition_tangent_decay = false;
    }
  }
  report.condition_offspace = report.offspace_spectral <= 0.5;
  return report;
}

ConcentrationReport concentration_ratio(const Matrix& Z, const Factorization& F,
                                        const ProbabilityMatrix& P, int trials,
                                        RandomStream& rng) {
  check_shape(F, Z, "concentration_ratio");
  if (trials < 1) throw ContractError("concentration_ratio: trials must be positive");
  const LeverageScores scores = leverage_scores(F);

  ConcentrationReport report;
  report.denominator = mu_inf_norm(Z, scores) + mu_inf2_norm(Z, scores);
  for (int t = 0; t < trials; ++t) {
    const ObservationSet obs = bernoulli_sample(Z, P, rng);
    const double num = spectral_norm(r_omega(obs, Z) - Z);
    report.ratios.push_back(report.denominator > 0.0 ? num / report.denominator : 0.0);
  }
  report.median = median_of(report.ratios);
  report.p95 = quantile_of(report.ratios, 0.95);
  return report;
}

}  // namespace levcomp
