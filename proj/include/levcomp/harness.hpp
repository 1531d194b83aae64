#pragma once

// Experiment driver: power-law test matrices, Gaussian perturbations and
// Monte-Carlo success-rate sweeps over the sample budget for each sampling
// scheme, emitted as CSV.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "levcomp/core.hpp"
#include "levcomp/pipelines.hpp"
#include "levcomp/sampling.hpp"
#include "levcomp/solver.hpp"

namespace levcomp {

enum class Scheme { oracle_leverage, two_phase, uniform, l1, l2 };

std::string to_string(Scheme scheme);
Scheme parse_scheme(const std::string& name);

struct PowerLawInstance {
  Matrix M;
  Factorization factors;
};

/// M = D G H^T D / |D G H^T D|_F with G, H n x r standard Gaussian and
/// D = diag(i^-alpha), i = 1..n.
PowerLawInstance power_law_matrix(Index n, Index r, double alpha, RandomStream& rng);

/// Incoherent column space, coherent row space: M = U G V^T normalized,
/// with U the Q factor of a Gaussian n x r matrix and V the Q factor of a
/// Gaussian matrix whose row j is scaled by (j + 1)^-gamma.
PowerLawInstance row_coherent_matrix(Index n, Index r, double gamma, RandomStream& rng);

/// M + Z with Z Gaussian, rescaled so that |Z|_F = sigma |M|_F exactly.
Matrix add_noise(const Matrix& M, double sigma, RandomStream& rng);

struct ExperimentConfig {
  Index n = 200;
  Index r = 5;
  double alpha = 0.5;
  Scheme scheme = Scheme::two_phase;
  double beta = 2.0 / 3.0;
  /// Candidate sample budgets, ascending.
  std::vector<Index> sample_grid;
  int trials = 40;
  double noise_sigma = 0.0;
  std::uint64_t seed = 1;
  /// Fixed c0 for the oracle scheme; <= 0 matches the expected sample count
  /// to each budget m instead.
  double c0 = 0.0;
  double success_threshold = 0.01;
  double success_quantile = 0.95;
  SolverConfig solver;
  /// Evaluate every grid point instead of searching for the minimal budget.
  bool full_grid = false;
  /// Stop a budget's trials once the success quantile is out of reach; the
  /// row then reports the trials actually run. Sequential evaluation only.
  bool stop_when_decided = false;
  /// Record wall time in the CSV (0 otherwise, for byte-identical output).
  bool record_time = true;
  unsigned threads = 1;

  void validate() const;
};

struct TrialOutcome {
  double relative_error = 0.0;
  /// |M - X_hat|_F against the clean matrix.
  double absolute_error = 0.0;
  std::size_t samples = 0;
  bool converged = false;
  bool success = false;
};

/// One Monte-Carlo trial of `config` at budget m. Trial t always uses the
/// same instance (stream 2t) and sampling randomness (stream 2t + 1).
TrialOutcome run_trial(const ExperimentConfig& config, Index m, int trial);

struct SweepRow {
  Scheme scheme = Scheme::uniform;
  double alpha = 0.0;
  double beta = 0.0;
  Index n = 0;
  Index r = 0;
  Index m = 0;
  int trials = 0;
  double success_frac = 0.0;
  double ci_halfwidth = 0.0;
  double median_rel_err = 0.0;
  double mean_samples = 0.0;
  double seconds = 0.0;
  /// Per-trial sample counts and errors behind the summary columns.
  std::vector<std::size_t> samples;
  std::vector<double> relative_errors;

  bool successful(double quantile) const { return success_frac >= quantile; }
};

/// All trials of `config` at budget m.
SweepRow evaluate_budget(const ExperimentConfig& config, Index m);

struct SweepResult {
  std::vector<SweepRow> rows;
  std::optional<Index> minimal_successful_m;
};

/// Success rates over the sample grid. Unless `full_grid` is set, grid
/// points are visited by doubling the grid index until the first success and
/// then bisecting, assuming success is monotone in m.
SweepResult success_sweep(const ExperimentConfig& config);

/// success_sweep at each beta (scheme forced to two-phase).
std::vector<SweepResult> beta_sweep(const ExperimentConfig& config, const std::vector<double>& betas);

/// success_sweep at each n, with budgets factor * n log n.
std::vector<SweepResult> scaling_sweep(const ExperimentConfig& config, const std::vector<Index>& sizes,
                                       const std::vector<double>& grid_factors);

/// Budgets round(f n log n), deduplicated and clipped to [1, n^2].
std::vector<Index> budget_grid(Index n, const std::vector<double>& factors);

inline constexpr const char* kCsvHeader =
    "scheme,alpha,beta,n,r,m,trials,success_frac,ci_halfwidth,median_rel_err,mean_samples,seconds";

void write_csv(std::ostream& out, const std::vector<SweepRow>& rows, bool header = true);

/// Parse rows written by write_csv (per-trial vectors are not serialized).
std::vector<SweepRow> read_csv(std::istream& in);

double median(std::vector<double> values);
double quantile(std::vector<double> values, double q);

}  // namespace levcomp
