#include "levcomp/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

#include "levcomp/leverage.hpp"

namespace levcomp {

std::string to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::oracle_leverage: return "oracle-leverage";
    case Scheme::two_phase: return "two-phase";
    case Scheme::uniform: return "uniform";
    case Scheme::l1: return "l1";
    case Scheme::l2: return "l2";
  }
  return "unknown";
}

Scheme parse_scheme(const std::string& name) {
  for (Scheme s : {Scheme::oracle_leverage, Scheme::two_phase, Scheme::uniform, Scheme::l1,
                   Scheme::l2}) {
    if (to_string(s) == name) return s;
  }
  throw ParseError("unknown sampling scheme: " + name);
}

PowerLawInstance power_law_matrix(Index n, Index r, double alpha, RandomStream& rng) {
  if (r < 1 || r > n) throw DimensionError("power_law_matrix: need 1 <= r <= n");
  if (!(alpha >= 0.0)) throw ContractError("power_law_matrix: alpha must be nonnegative");
  const Matrix G = rng.gaussian_matrix(n, r);
  const Matrix H = rng.gaussian_matrix(n, r);
  Vector d(n);
  for (Index i = 0; i < n; ++i) d(i) = std::pow(static_cast<double>(i + 1), -alpha);
  Matrix M = d.asDiagonal() * G * H.transpose() * d.asDiagonal();
  M /= M.norm();
  PowerLawInstance out;
  out.factors = svd_rank_r<double>(M, r);
  out.M = std::move(M);
  return out;
}

PowerLawInstance row_coherent_matrix(Index n, Index r, double gamma, RandomStream& rng) {
  if (r < 1 || r > n) throw DimensionError("row_coherent_matrix: need 1 <= r <= n");
  if (!(gamma >= 0.0)) throw ContractError("row_coherent_matrix: gamma must be nonnegative");
  const auto q_factor = [r](const Matrix& A) -> Matrix {
    Eigen::HouseholderQR<Matrix> qr(A);
    return qr.householderQ() * Matrix::Identity(A.rows(), r);
  };
  const Matrix U = q_factor(rng.gaussian_matrix(n, r));
  Matrix H = rng.gaussian_matrix(n, r);
  for (Index j = 0; j < n; ++j) H.row(j) *= std::pow(static_cast<double>(j + 1), -gamma);
  const Matrix V = q_factor(H);
  Matrix M = U * rng.gaussian_matrix(r, r) * V.transpose();
  M /= M.norm();
  PowerLawInstance out;
  out.factors = svd_rank_r<double>(M, r);
  out.M = std::move(M);
  return out;
}

Matrix add_noise(const Matrix& M, double sigma, RandomStream& rng) {
  if (!(sigma >= 0.0)) throw ContractError("add_noise: sigma must be nonnegative");
  if (sigma == 0.0) return M;
  Matrix Z = rng.gaussian_matrix(M.rows(), M.cols());
  Z *= sigma * M.norm() / Z.norm();
  return M + Z;
}

void ExperimentConfig::validate() const {
  if (n < 2 || r < 1 || r > n) throw DimensionError("ExperimentConfig: need 1 <= r <= n, n >= 2");
  if (trials < 1) throw ContractError("ExperimentConfig: trials must be at least 1");
  if (!(beta >= 0.0 && beta <= 1.0)) throw ContractError("ExperimentConfig: beta outside [0, 1]");
  if (!(noise_sigma >= 0.0)) throw ContractError("ExperimentConfig: noise_sigma must be >= 0");
  for (Index m : sample_grid) {
    if (m < 1 || m > n * n) throw ContractError("ExperimentConfig: grid value outside [1, n^2]");
  }
  if (!std::is_sorted(sample_grid.begin(), sample_grid.end())) {
    throw ContractError("ExperimentConfig: sample grid must be ascending");
  }
  solver.validate();
}

TrialOutcome run_trial(const ExperimentConfig& config, Index m, int trial) {
  RandomStream instance_rng(config.seed, 2 * static_cast<std::uint64_t>(trial));
  RandomStream sample_rng(config.seed, 2 * static_cast<std::uint64_t>(trial) + 1);
  const PowerLawInstance inst = power_law_matrix(config.n, config.r, config.alpha, instance_rng);
  const Matrix observed = add_noise(inst.M, config.noise_sigma, instance_rng);

  TrialOutcome out;
  try {
    SolveReport report;
    switch (config.scheme) {
      case Scheme::oracle_leverage: {
        const LeverageScores scores = leverage_scores(inst.factors);
        const double c0 = config.c0 > 0.0
                              ? config.c0
                              : leveraged_c0_for_budget(scores, static_cast<double>(m));
        const ObservationSet obs =
            bernoulli_sample(observed, leveraged_distribution(scores, c0), sample_rng);
        out.samples = obs.size();
        report = complete_nuclear(obs, config.solver);
        break;
      }
      case Scheme::uniform: {
        const ObservationSet obs = sample_uniform(observed, m, sample_rng);
        out.samples = obs.size();
        report = complete_nuclear(obs, config.solver);
        break;
      }
      case Scheme::two_phase:
      case Scheme::l1:
      case Scheme::l2: {
        TwoPhaseConfig tp;
        tp.rank_parameter = config.r;
        tp.budget = m;
        tp.beta = config.beta;
        tp.solver = config.solver;
        tp.phase_two = config.scheme == Scheme::two_phase ? PhaseTwoKind::leverage
                       : config.scheme == Scheme::l1      ? PhaseTwoKind::l1
                                                          : PhaseTwoKind::l2;
        const TwoPhaseResult result = two_phase_complete(observed, tp, sample_rng);
        out.samples = result.phase_one.size() + result.phase_two.size();
        report = result.report;
        break;
      }
    }
    out.converged = report.converged;
    out.relative_error = relative_error(report.X_hat, inst.M);
    out.absolute_error = (report.X_hat - inst.M).norm();
  } catch (const Error&) {
    // Infeasible draws and solver failures count as failed trials.
    out.converged = false;
    out.relative_error = std::numeric_limits<double>::infinity();
    out.absolute_error = std::numeric_limits<double>::infinity();
  }
  out.success = out.converged && out.relative_error <= config.success_threshold;
  return out;
}

double median(std::vector<double> values) { return quantile(std::move(values), 0.5); }

double quantile(std::vector<double> values, double q) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  if (lo == hi || std::isinf(values[hi])) return values[lo];
  const double frac = pos - static_cast<double>(lo);
  return values[lo] * (1.0 - frac) + values[hi] * frac;
}

SweepRow evaluate_budget(const ExperimentConfig& config, Index m) {
  const auto start = std::chrono::steady_clock::now();
  std::vector<TrialOutcome> outcomes(static_cast<std::size_t>(config.trials));
  const unsigned workers = std::max(1u, std::min<unsigned>(config.threads, config.trials));
  if (workers == 1) {
    const int needed = static_cast<int>(std::ceil(config.success_quantile * config.trials - 1e-9));
    int successes = 0;
    for (int t = 0; t < config.trials; ++t) {
      outcomes[static_cast<std::size_t>(t)] = run_trial(config, m, t);
      successes += outcomes[static_cast<std::size_t>(t)].success ? 1 : 0;
      if (config.stop_when_decided && successes + (config.trials - 1 - t) < needed) {
        outcomes.resize(static_cast<std::size_t>(t) + 1);
        break;
      }
    }
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (int t = static_cast<int>(w); t < config.trials; t += static_cast<int>(workers)) {
          outcomes[static_cast<std::size_t>(t)] = run_trial(config, m, t);
        }
      });
    }
    for (auto& th : pool) th.join();
  }

  SweepRow row;
  row.scheme = config.scheme;
  row.alpha = config.alpha;
  row.beta = config.beta;
  row.n = config.n;
  row.r = config.r;
  row.m = m;
  row.trials = static_cast<int>(outcomes.size());
  int successes = 0;
  double total_samples = 0.0;
  for (const TrialOutcome& o : outcomes) {
    successes += o.success ? 1 : 0;
    total_samples += static_cast<double>(o.samples);
    row.samples.push_back(o.samples);
    row.relative_errors.push_back(o.relative_error);
  }
  row.success_frac = static_cast<double>(successes) / row.trials;
  row.ci_halfwidth = 3.0 * std::sqrt(row.success_frac * (1.0 - row.success_frac) / row.trials);
  row.median_rel_err = median(row.relative_errors);
  row.mean_samples = total_samples / row.trials;
  if (config.record_time) {
    row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  return row;
}

SweepResult success_sweep(const ExperimentConfig& config) {
  config.validate();
  const auto& grid = config.sample_grid;
  SweepResult result;
  if (grid.empty()) return result;

  std::map<std::size_t, SweepRow> visited;
  auto succeeds = [&](std::size_t idx) {
    auto it = visited.find(idx);
    if (it == visited.end()) it = visited.emplace(idx, evaluate_budget(config, grid[idx])).first;
    return it->second.successful(config.success_quantile);
  };

  if (config.full_grid) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (succeeds(i) && !result.minimal_successful_m) result.minimal_successful_m = grid[i];
    }
  } else {
    // Doubling over grid indices, then bisection between the last failure and
    // the first success.
    std::optional<std::size_t> fail;
    std::optional<std::size_t> hit;
    for (std::size_t step = 0;; step = step == 0 ? 1 : 2 * step) {
      const std::size_t idx = std::min(step, grid.size() - 1);
      if (succeeds(idx)) {
        hit = idx;
        break;
      }
      fail = idx;
      if (idx == grid.size() - 1) break;
    }
    if (hit) {
      std::size_t lo = fail ? *fail : 0;
      std::size_t hi = *hit;
      if (!fail) hi = 0;
      while (hi > lo + 1) {
        const std::size_t mid = lo + (hi - lo) / 2;
        (succeeds(mid) ? hi : lo) = mid;
      }
      result.minimal_successful_m = grid[hi];
    }
  }
  for (auto& [idx, row] : visited) result.rows.push_back(std::move(row));
  return result;
}

std::vector<SweepResult> beta_sweep(const ExperimentConfig& config, const std::vector<double>& betas) {
  std::vector<SweepResult> out;
  for (double beta : betas) {
    ExperimentConfig c = config;
    c.scheme = Scheme::two_phase;
    c.beta = beta;
    out.push_back(success_sweep(c));
  }
  return out;
}

std::vector<Index> budget_grid(Index n, const std::vector<double>& factors) {
  const double base = static_cast<double>(n) * std::log(static_cast<double>(n));
  std::vector<Index> grid;
  for (double f : factors) {
    const auto m = static_cast<Index>(std::llround(f * base));
    grid.push_back(std::clamp<Index>(m, 1, n * n));
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

std::vector<SweepResult> scaling_sweep(const ExperimentConfig& config, const std::vector<Index>& sizes,
                                       const std::vector<double>& grid_factors) {
  std::vector<SweepResult> out;
  for (Index n : sizes) {
    ExperimentConfig c = config;
    c.n = n;
    c.sample_grid = budget_grid(n, grid_factors);
    out.push_back(success_sweep(c));
  }
  return out;
}

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

}  // namespace

void write_csv(std::ostream& out, const std::vector<SweepRow>& rows, bool header) {
  if (header) out << kCsvHeader << '\n';
  for (const SweepRow& r : rows) {
    out << to_string(r.scheme) << ',' << fmt(r.alpha) << ',' << fmt(r.beta) << ',' << r.n << ','
        << r.r << ',' << r.m << ',' << r.trials << ',' << fmt(r.success_frac) << ','
        << fmt(r.ci_halfwidth) << ',' << fmt(r.median_rel_err) << ',' << fmt(r.mean_samples)
        << ',' << fmt(r.seconds) << '\n';
  }
}

std::vector<SweepRow> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("read_csv: empty input");
  if (line != kCsvHeader) throw ParseError("read_csv: unexpected header: " + line);
  std::vector<SweepRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 12) throw ParseError("read_csv: expected 12 columns: " + line);
    try {
      SweepRow r;
      r.scheme = parse_scheme(cells[0]);
      r.alpha = std::stod(cells[1]);
      r.beta = std::stod(cells[2]);
      r.n = std::stoll(cells[3]);
      r.r = std::stoll(cells[4]);
      r.m = std::stoll(cells[5]);
      r.trials = std::stoi(cells[6]);
      r.success_frac = std::stod(cells[7]);
      r.ci_halfwidth = std::stod(cells[8]);
      r.median_rel_err = std::stod(cells[9]);
      r.mean_samples = std::stod(cells[10]);
      r.seconds = std::stod(cells[11]);
      rows.push_back(std::move(r));
    } catch (const std::logic_error& e) {
      throw ParseError(std::string("read_csv: bad number in: ") + line);
    }
  }
  return rows;
}

}  // namespace levcomp
