// End-to-end acceptance run: one PASS/FAIL line per criterion. Sweep tables
// are written as CSV next to the run for plotting.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "levcomp/certify.hpp"
#include "levcomp/harness.hpp"
#include "levcomp/lowerbound.hpp"
#include "levcomp/pipelines.hpp"
#include "oracles.hpp"

using namespace levcomp;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v, int digits = 4) {
  std::ostringstream ss;
  ss.precision(digits);
  ss << v;
  return ss.str();
}

std::filesystem::path csv_dir;

void save_rows(const std::string& name, const std::vector<SweepRow>& rows) {
  std::ofstream out(csv_dir / name);
  write_csv(out, rows);
}

double nlogn(Index n) { return static_cast<double>(n) * std::log(static_cast<double>(n)); }

ExperimentConfig desk_config(double alpha, Scheme scheme) {
  ExperimentConfig c;
  c.n = 200;
  c.r = 5;
  c.alpha = alpha;
  c.scheme = scheme;
  c.trials = 40;
  c.seed = 1;
  c.stop_when_decided = true;
  std::vector<double> factors;
  for (int k = 0; k <= 20; ++k) factors.push_back(2.0 * std::pow(2.0, k / 4.0));
  c.sample_grid = budget_grid(c.n, factors);
  return c;
}

double minimal_or_inf(const SweepResult& r) {
  return r.minimal_successful_m ? static_cast<double>(*r.minimal_successful_m)
                                : std::numeric_limits<double>::infinity();
}

// ---------------------------------------------------------------------------

Verdict incoherent_baseline() {
  const auto start = Clock::now();
  const Index n = 100, r = 2;
  const double p = 10.0 * nlogn(n) / double(n * n);
  ProbabilityMatrix P;
  P.p = Matrix::Constant(n, n, p);
  int success = 0;
  for (int t = 0; t < 40; ++t) {
    RandomStream inst_rng(101, 2 * static_cast<std::uint64_t>(t));
    RandomStream rng(101, 2 * static_cast<std::uint64_t>(t) + 1);
    const Matrix M = power_law_matrix(n, r, 0.0, inst_rng).M;
    const SolveReport rep = complete_nuclear(bernoulli_sample(M, P, rng));
    success += rep.converged && relative_error(rep.X_hat, M) <= 0.01;
  }
  const double secs = seconds_since(start);
  return {success >= 38 && secs <= 300.0,
          "success " + std::to_string(success) + "/40 at p = " + fmt(p) + ", " + fmt(secs) + " s"};
}

Verdict alpha_divergence() {
  const auto start = Clock::now();
  std::vector<SweepRow> rows;
  std::string detail;
  bool pass = true;
  for (double alpha : {0.9, 0.3}) {
    ExperimentConfig oracle_cfg = desk_config(alpha, Scheme::oracle_leverage);
    oracle_cfg.c0 = calibrated_c0(oracle_cfg.n, oracle_cfg.r);
    oracle_cfg.stop_when_decided = false;
    const SweepRow o = evaluate_budget(oracle_cfg, 1);
    const auto m = static_cast<Index>(std::llround(o.mean_samples));
    SweepRow ob = o;
    ob.m = m;
    ExperimentConfig uniform_cfg = oracle_cfg;
    uniform_cfg.scheme = Scheme::uniform;
    const SweepRow u = evaluate_budget(uniform_cfg, m);
    rows.push_back(ob);
    rows.push_back(u);
    const bool ok = alpha > 0.5 ? (o.success_frac >= 0.95 && u.success_frac < 0.5)
                                : (o.success_frac >= 0.95 && u.success_frac >= 0.95);
    pass = pass && ok;
    detail += "alpha " + fmt(alpha) + ": m = " + std::to_string(m) + " oracle " +
              fmt(o.success_frac) + " uniform " + fmt(u.success_frac) + "; ";
  }
  save_rows("alpha_divergence.csv", rows);
  const double secs = seconds_since(start);
  return {pass && secs <= 3600.0, detail + fmt(secs) + " s"};
}

Verdict two_phase_parity() {
  const auto start = Clock::now();
  const SweepResult oracle = success_sweep(desk_config(0.5, Scheme::oracle_leverage));
  ExperimentConfig tp = desk_config(0.5, Scheme::two_phase);
  tp.beta = 2.0 / 3.0;
  const SweepResult two = success_sweep(tp);
  std::vector<SweepRow> rows = oracle.rows;
  rows.insert(rows.end(), two.rows.begin(), two.rows.end());
  save_rows("parity.csv", rows);
  const double mo = minimal_or_inf(oracle), mt = minimal_or_inf(two);
  const double secs = seconds_since(start);
  return {mt <= 1.5 * mo && secs <= 3600.0,
          "minimal m oracle " + fmt(mo, 6) + " two-phase " + fmt(mt, 6) + " ratio " +
              fmt(mt / mo) + ", " + fmt(secs) + " s"};
}

Verdict beta_shape() {
  const std::vector<double> betas = {0.1, 0.3, 0.5, 2.0 / 3.0, 0.8, 0.9, 1.0};
  const std::vector<SweepResult> results = beta_sweep(desk_config(0.7, Scheme::two_phase), betas);
  std::vector<SweepRow> rows;
  double best_inside = std::numeric_limits<double>::infinity();
  double best = best_inside, at09 = best, at10 = best;
  std::string detail;
  for (std::size_t k = 0; k < betas.size(); ++k) {
    rows.insert(rows.end(), results[k].rows.begin(), results[k].rows.end());
    const double m = minimal_or_inf(results[k]);
    best = std::min(best, m);
    if (betas[k] >= 0.4 && betas[k] <= 0.9) best_inside = std::min(best_inside, m);
    if (betas[k] == 0.9) at09 = m;
    if (betas[k] == 1.0) at10 = m;
    detail += fmt(betas[k], 3) + ":" + fmt(m, 6) + " ";
  }
  save_rows("beta_sweep.csv", rows);
  return {best_inside == best && at09 < at10, "minimal m by beta " + detail};
}

Verdict sample_count_identity() {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const Index n1 = 20 + t % 31, n2 = 15 + t % 17, r = 1 + t % 5;
    LeverageScores s;
    s.rank = r;
    s.mu = Vector::NullaryExpr(n1, [&] { return u(rng); });
    s.nu = Vector::NullaryExpr(n2, [&] { return u(rng); });
    s.mu *= double(n1) / s.mu.sum();
    s.nu *= double(n2) / s.nu.sum();
    const double c0 = 0.05 + 0.01 * t;
    const double lg = std::log(double(n1 + n2));
    const double expected = 2.0 * c0 * double(std::max(n1, n2)) * double(r) * lg * lg;
    worst = std::max(worst, std::abs(leveraged_rates(s, c0).sum() / expected - 1.0));
  }
  return {worst <= 1e-9, "max relative deviation " + fmt(worst)};
}

Verdict norm_identities() {
  std::mt19937_64 rng(6);
  double dev2 = 0.0, inf_max = 0.0;
  for (int t = 0; t < 100; ++t) {
    const Index n1 = 8 + t % 23, n2 = 6 + t % 19, r = 1 + t % 4;
    Factorization F;
    F.U = oracle::random_orthonormal(n1, r, rng);
    F.V = oracle::random_orthonormal(n2, r, rng);
    F.S = Vector::Ones(r);
    const LeverageScores s = leverage_scores(F);
    dev2 = std::max(dev2, std::abs(mu_inf2_norm(F.uv(), s) - 1.0));
    inf_max = std::max(inf_max, mu_inf_norm(F.uv(), s));
  }
  return {dev2 <= 1e-10 && inf_max <= 1.0 + 1e-10,
          "max |mu(inf,2) - 1| " + fmt(dev2) + ", max mu(inf) " + fmt(inf_max, 6)};
}

Verdict operator_norm_bound() {
  int ok = 0;
  std::vector<double> norms;
  for (int t = 0; t < 100; ++t) {
    RandomStream rng(7, static_cast<std::uint64_t>(t));
    const PowerLawInstance inst = power_law_matrix(50, 2, 0.5, rng);
    const ProbabilityMatrix P =
        leveraged_distribution(leverage_scores(inst.factors), calibrated_c0(50, 2));
    norms.push_back(operator_norm_tangent(bernoulli_sample(inst.M, P, rng), inst.factors));
    ok += norms.back() <= 0.5;
  }
  double worst = 0.0;
  for (std::uint64_t t = 0; t < 3; ++t) {
    RandomStream rng(8, t);
    const PowerLawInstance inst = power_law_matrix(20, 2, 0.6, rng);
    const ProbabilityMatrix P =
        leveraged_distribution(leverage_scores(inst.factors), calibrated_c0(20, 2));
    const ObservationSet obs = bernoulli_sample(inst.M, P, rng);
    Matrix w = Matrix::Zero(20, 20);
    for (std::size_t k = 0; k < obs.size(); ++k) {
      w(obs.entries()[k].row, obs.entries()[k].col) = 1.0 / obs.probabilities()[k];
    }
    const double exact = oracle::symmetric_spectral_radius(
        oracle::sampling_operator(inst.factors.U, inst.factors.V, w));
    OperatorNormOptions opts;
    opts.tol = 1e-12;
    opts.max_iterations = 100000;
    worst = std::max(worst, std::abs(operator_norm_tangent(obs, inst.factors, opts) - exact));
  }
  return {ok >= 95 && worst <= 1e-6,
          "norm <= 1/2 in " + std::to_string(ok) + "/100 (median " + fmt(median(norms)) +
              ", 95th percentile " + fmt(quantile(norms, 0.95)) + "); estimator vs explicit operator " +
              fmt(worst)};
}

Verdict golfing() {
  const Index n = 40, r = 2;
  double marginal = 0.0;
  int ok = 0;
  std::vector<double> medians, offspace;
  for (int t = 0; t < 50; ++t) {
    RandomStream rng(9, static_cast<std::uint64_t>(t));
    const PowerLawInstance inst = power_law_matrix(n, r, 0.5, rng);
    const ProbabilityMatrix P =
        leveraged_distribution(leverage_scores(inst.factors), calibrated_c0(n, r));
    const int k0 = golfing_batches(n);
    const Matrix q = batch_probabilities(P, k0);
    const Matrix union_p = (1.0 - (1.0 - q.array()).pow(k0)).matrix();
    marginal = std::max(marginal, (union_p - P.p).cwiseAbs().maxCoeff());
    const CertificateReport rep = golfing_certificate(inst.M, inst.factors, P, rng);
    medians.push_back(rep.median_contraction);
    offspace.push_back(rep.offspace_spectral);
    ok += rep.median_contraction <= 0.5 && rep.offspace_spectral <= 0.5;
  }
  return {marginal <= 1e-12 && ok >= 45,
          "marginal error " + fmt(marginal) + "; both conditions in " + std::to_string(ok) +
              "/50; median contraction " + fmt(median(medians)) + ", median offspace " +
              fmt(median(offspace))};
}

Verdict necessity() {
  const HardInstance inst =
      construct_hard_pair(24, 3, {4.0, 2.0, 4.0 / 3.0}, {2.0, 2.0, 2.0}, 4.0, 0, 8);
  const double p = boundary_probability(inst, 1.0 / double(inst.s[inst.k1]));
  ProbabilityMatrix P;
  P.p = Matrix::Constant(24, 24, p);
  RandomStream rng(10);
  const IndistinguishabilityResult res = indistinguishability_test(inst, P, 10000, rng);
  const bool freq_ok = res.frequency >= 0.25 - res.half_width &&
                       std::abs(res.frequency - res.analytic) <= res.half_width;

  const auto scores = [](const Matrix& M) {
    const oracle::Svd s = oracle::jacobi_svd(M);
    return std::make_pair(Vector(s.U.leftCols(3).rowwise().squaredNorm() * 8.0),
                          Vector(s.V.leftCols(3).rowwise().squaredNorm() * 8.0));
  };
  const auto [mu0, nu0] = scores(inst.M0);
  const auto [mu1, nu1] = scores(inst.M1);
  const double row_excess = (mu1 - 2.0 * mu0).maxCoeff();
  const double col_gap = (nu1 - nu0).cwiseAbs().maxCoeff();
  const bool lev_ok = row_excess <= 1e-10 && col_gap <= 1e-10;
  return {freq_ok && lev_ok, "frequency " + fmt(res.frequency) + " +- " + fmt(res.half_width) +
                                 " analytic " + fmt(res.analytic) + "; max(mu1 - 2 mu0) " +
                                 fmt(row_excess) + ", max |nu1 - nu0| " + fmt(col_gap)};
}

Verdict row_coherent() {
  const Index n = 100, r = 3;
  const double c0 = calibrated_c0(n, r);
  int success = 0, within = 0, captured = 0;
  double score_err = 0.0;
  for (int t = 0; t < 40; ++t) {
    RandomStream inst_rng(11, 2 * static_cast<std::uint64_t>(t));
    RandomStream rng(11, 2 * static_cast<std::uint64_t>(t) + 1);
    const PowerLawInstance inst = row_coherent_matrix(n, r, 2.0, inst_rng);
    const double mu0 = std::max(1.0, leverage_scores(inst.factors).mu.maxCoeff());
    const RowCoherentResult res = row_coherent_complete(inst.M, mu0, r, c0, rng);
    const double bound = 3.0 * c0 * mu0 * double(r) * double(n) * std::pow(std::log(double(n)), 2);
    within += double(res.total_samples) <= bound;
    success += res.report.converged && relative_error(res.report.X_hat, inst.M) <= 0.01;
    if (res.row_space_captured) {
      ++captured;
      const oracle::Svd s = oracle::jacobi_svd(inst.M);
      const Vector nu = s.V.leftCols(r).rowwise().squaredNorm() * (double(n) / r);
      score_err = std::max(score_err, (res.nu_estimate - nu).cwiseAbs().maxCoeff());
    }
  }
  return {captured > 0 && score_err <= 1e-9 && success >= 38 && within == 40,
          "success " + std::to_string(success) + "/40, within sample bound " +
              std::to_string(within) + "/40, row space captured " + std::to_string(captured) +
              "/40 with max |nu~ - nu| " + fmt(score_err)};
}

Verdict weighted() {
  const Index n = 200, r = 3;
  // Row marginals proportional to i^-2, scaled so the least sampled row
  // expects 12 samples; every column sampled at rate 1.
  Vector pr(n);
  for (Index i = 0; i < n; ++i) pr(i) = std::pow(double(i + 1), -2.0);
  pr *= 12.0 / (double(n) * pr(n - 1));
  pr = pr.cwiseMin(1.0);
  const Vector pc = Vector::Ones(n);
  const ProbabilityMatrix P = product_distribution(pr, pc);
  const WeightMatrices W = choose_weights(pr, pc);
  int plain = 0, weighted_ok = 0;
  for (int t = 0; t < 40; ++t) {
    RandomStream inst_rng(12, 2 * static_cast<std::uint64_t>(t));
    RandomStream rng(12, 2 * static_cast<std::uint64_t>(t) + 1);
    const Matrix M = power_law_matrix(n, r, 0.0, inst_rng).M;
    const ObservationSet obs = bernoulli_sample(M, P, rng);
    const SolveReport a = complete_nuclear(obs);
    const SolveReport b = complete_weighted(obs, W);
    plain += a.converged && relative_error(a.X_hat, M) <= 0.01;
    weighted_ok += b.converged && relative_error(b.X_hat, M) <= 0.01;
  }

  // Identity weights reproduce the unweighted solver.
  RandomStream rng(13);
  const Matrix M = power_law_matrix(60, 2, 0.5, rng).M;
  ProbabilityMatrix half;
  half.p = Matrix::Constant(60, 60, 0.3);
  const ObservationSet obs = bernoulli_sample(M, half, rng);
  const bool identity_ok =
      complete_weighted(obs, {Vector::Ones(60), Vector::Ones(60)}).X_hat == complete_nuclear(obs).X_hat;

  // Scaled leverage bound on random incoherent matrices.
  std::mt19937_64 g(14);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  double slack = std::numeric_limits<double>::infinity();
  for (int t = 0; t < 20; ++t) {
    const Index m = 60, k = 2;
    const Matrix U0 = oracle::random_orthonormal(m, k, g);
    const Matrix V0 = oracle::random_orthonormal(m, k, g);
    const Vector p_row = Vector::NullaryExpr(m, [&] { return u(g); });
    const WeightMatrices Wt = choose_weights(p_row, Vector::Constant(m, 0.5));
    const double mu0 = (U0.rowwise().squaredNorm() * (double(m) / k)).maxCoeff();
    const oracle::Svd s = oracle::jacobi_svd(Wt.R.asDiagonal() * U0 * V0.transpose() * Wt.C.asDiagonal());
    const Vector mubar = s.U.leftCols(k).rowwise().squaredNorm() * (double(m) / k);
    std::vector<double> sq;
    for (Index i = 0; i < m; ++i) sq.push_back(Wt.R(i) * Wt.R(i));
    std::sort(sq.begin(), sq.end());
    const auto count = static_cast<std::size_t>(std::floor(double(m) / (mu0 * k)));
    double denom = 0.0;
    for (std::size_t i = 0; i < count; ++i) denom += sq[i];
    for (Index i = 0; i < m; ++i) {
      slack = std::min(slack, Wt.R(i) * Wt.R(i) / denom - mubar(i) * k / double(m));
    }
  }
  return {plain < 20 && weighted_ok >= 36 && identity_ok && slack >= -1e-12,
          "unweighted " + std::to_string(plain) + "/40, weighted " + std::to_string(weighted_ok) +
              "/40 (expected samples " + fmt(P.expected_count(), 6) + "); identity weights " +
              (identity_ok ? "match" : "differ") + "; min bound slack " + fmt(slack)};
}

Verdict noise_ordering() {
  std::vector<SweepRow> rows;
  const auto m = static_cast<Index>(std::llround(15.0 * nlogn(200)));
  std::map<Scheme, double> med;
  for (Scheme s : {Scheme::oracle_leverage, Scheme::two_phase, Scheme::uniform}) {
    ExperimentConfig c = desk_config(0.7, s);
    c.noise_sigma = 0.1;
    c.trials = 20;
    c.stop_when_decided = false;
    rows.push_back(evaluate_budget(c, m));
    med[s] = rows.back().median_rel_err;
  }
  save_rows("noise.csv", rows);
  const double o = med[Scheme::oracle_leverage], t = med[Scheme::two_phase], u = med[Scheme::uniform];
  return {t <= 1.5 * o && o <= 1.5 * t && o < u && t < u,
          "m = " + std::to_string(m) + " median errors oracle " + fmt(o) + " two-phase " + fmt(t) +
              " uniform " + fmt(u)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app("acceptance run");
  std::string out_dir = "acceptance_csv";
  std::vector<std::string> only;
  app.add_option("--csv-dir", out_dir, "Directory for sweep CSV files");
  app.add_option("--only", only, "Run only these criteria")->delimiter(',');
  CLI11_PARSE(app, argc, argv);
  csv_dir = out_dir;
  std::filesystem::create_directories(csv_dir);

  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"incoherent-baseline", incoherent_baseline},
      {"alpha-divergence", alpha_divergence},
      {"two-phase-parity", two_phase_parity},
      {"beta-sweep-shape", beta_shape},
      {"sample-count-identity", sample_count_identity},
      {"norm-identities", norm_identities},
      {"operator-norm-bound", operator_norm_bound},
      {"golfing-scheme", golfing},
      {"necessity-construction", necessity},
      {"row-coherent-procedure", row_coherent},
      {"weighted-nuclear-norm", weighted},
      {"noise-ordering", noise_ordering},
  };
  const std::set<std::string> selected(only.begin(), only.end());
  int failures = 0;
  for (const auto& [name, run] : criteria) {
    if (!selected.empty() && !selected.count(name)) continue;
    const auto start = Clock::now();
    Verdict v;
    try {
      v = run();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    failures += v.pass ? 0 : 1;
    std::cout << (v.pass ? "PASS " : "FAIL ") << name << ": " << v.detail << " ["
              << fmt(seconds_since(start)) << " s]" << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
