#include <gtest/gtest.h>

#include <sstream>

#include "levcomp/harness.hpp"
#include "oracles.hpp"

using namespace levcomp;

TEST(PowerLaw, NormalizationAndRank) {
  RandomStream rng(1);
  const PowerLawInstance inst = power_law_matrix(30, 3, 0.7, rng);
  EXPECT_NEAR(inst.M.norm(), 1.0, 1e-12);
  const oracle::Svd s = oracle::jacobi_svd(inst.M);
  EXPECT_GT(s.S(2), 1e-8);
  EXPECT_LT(s.S(3), 1e-12);
  EXPECT_LE((inst.factors.reconstruct() - inst.M).norm(), 1e-12);
}

TEST(PowerLaw, AlphaZeroIsGaussianProduct) {
  RandomStream a(2), b(2);
  const PowerLawInstance inst = power_law_matrix(12, 2, 0.0, a);
  const Matrix G = b.gaussian_matrix(12, 2);
  const Matrix H = b.gaussian_matrix(12, 2);
  const Matrix expected = G * H.transpose() / (G * H.transpose()).norm();
  EXPECT_LE((inst.M - expected).norm(), 1e-14);
}

TEST(PowerLaw, CoherenceGrowsWithAlpha) {
  double previous = 0.0;
  for (double alpha : {0.0, 0.5, 1.0}) {
    RandomStream rng(3);
    const PowerLawInstance inst = power_law_matrix(100, 3, alpha, rng);
    const double mu0 = leverage_scores(inst.factors).max_score();
    EXPECT_GT(mu0, previous);
    previous = mu0;
  }
  EXPECT_THROW(
      [] {
        RandomStream rng(4);
        power_law_matrix(10, 2, -0.1, rng);
      }(),
      ContractError);
}

TEST(Noise, ExactRelativeLevel) {
  RandomStream rng(5);
  const Matrix M = power_law_matrix(20, 2, 0.3, rng).M;
  const Matrix noisy = add_noise(M, 0.1, rng);
  EXPECT_NEAR((noisy - M).norm(), 0.1 * M.norm(), 1e-12);
  EXPECT_EQ(add_noise(M, 0.0, rng), M);
  EXPECT_THROW(add_noise(M, -1.0, rng), ContractError);
}

TEST(RowCoherentMatrix, Coherence) {
  RandomStream rng(6);
  const PowerLawInstance inst = row_coherent_matrix(80, 3, 2.0, rng);
  const LeverageScores s = leverage_scores(inst.factors);
  EXPECT_NEAR(inst.M.norm(), 1.0, 1e-12);
  EXPECT_GT(s.nu.maxCoeff(), 0.8 * 80.0 / 3.0);
  EXPECT_LT(s.mu.maxCoeff(), 8.0);
}

TEST(Schemes, NamesRoundTrip) {
  for (Scheme s : {Scheme::oracle_leverage, Scheme::two_phase, Scheme::uniform, Scheme::l1, Scheme::l2}) {
    EXPECT_EQ(parse_scheme(to_string(s)), s);
  }
  EXPECT_EQ(to_string(Scheme::oracle_leverage), "oracle-leverage");
  EXPECT_THROW(parse_scheme("bogus"), ParseError);
}

TEST(BudgetGrid, RoundsDedupsAndClips) {
  const double base = 10 * std::log(10.0);
  const std::vector<Index> grid = budget_grid(10, {3.0, 1.0, 1.0001, 50.0});
  EXPECT_EQ(grid, (std::vector<Index>{static_cast<Index>(std::llround(base)),
                                      static_cast<Index>(std::llround(3 * base)), 100}));
}

TEST(Quantiles, Basics) {
  EXPECT_DOUBLE_EQ(median({3.0, 1.0, 2.0}), 2.0);
  EXPECT_DOUBLE_EQ(median({4.0, 1.0, 2.0, 3.0}), 2.5);
  EXPECT_DOUBLE_EQ(quantile({0.0, 10.0}, 0.95), 9.5);
  EXPECT_TRUE(std::isnan(median({})));
}

TEST(Csv, RoundTrip) {
  SweepRow a;
  a.scheme = Scheme::two_phase;
  a.alpha = 0.7;
  a.beta = 2.0 / 3.0;
  a.n = 200;
  a.r = 5;
  a.m = 10597;
  a.trials = 40;
  a.success_frac = 0.975;
  a.ci_halfwidth = 0.0740416;
  a.median_rel_err = 1.234567891e-7;
  a.mean_samples = 10597;
  a.seconds = 12.5;
  SweepRow b = a;
  b.scheme = Scheme::oracle_leverage;
  b.median_rel_err = std::numeric_limits<double>::infinity();

  std::stringstream ss;
  write_csv(ss, {a, b});
  const std::string text = ss.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), kCsvHeader);
  const std::vector<SweepRow> back = read_csv(ss);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].scheme, Scheme::two_phase);
  EXPECT_NEAR(back[0].beta, 2.0 / 3.0, 1e-10);
  EXPECT_EQ(back[0].m, 10597);
  EXPECT_EQ(back[0].trials, 40);
  EXPECT_DOUBLE_EQ(back[0].success_frac, 0.975);
  EXPECT_NEAR(back[0].median_rel_err, 1.234567891e-7, 1e-16);
  EXPECT_TRUE(std::isinf(back[1].median_rel_err));

  std::stringstream again;
  write_csv(again, back);
  EXPECT_EQ(again.str(), text);
}

TEST(Csv, RejectsMalformedInput) {
  std::stringstream bad_header("scheme,alpha\n");
  EXPECT_THROW(read_csv(bad_header), ParseError);
  std::stringstream short_row(std::string(kCsvHeader) + "\nuniform,0.5,0\n");
  EXPECT_THROW(read_csv(short_row), ParseError);
  std::stringstream bad_scheme(std::string(kCsvHeader) + "\nfoo,0,0,1,1,1,1,0,0,0,0,0\n");
  EXPECT_THROW(read_csv(bad_scheme), ParseError);
}

TEST(Trials, DeterministicAndThreadIndependent) {
  ExperimentConfig config;
  config.n = 30;
  config.r = 2;
  config.alpha = 0.5;
  config.trials = 4;
  config.record_time = false;
  config.scheme = Scheme::two_phase;
  const SweepRow a = evaluate_budget(config, 400);
  config.threads = 3;
  const SweepRow b = evaluate_budget(config, 400);
  EXPECT_EQ(a.relative_errors, b.relative_errors);
  EXPECT_EQ(a.samples, b.samples);
  EXPECT_EQ(a.seconds, 0.0);
  std::stringstream x, y;
  write_csv(x, {a});
  write_csv(y, {b});
  EXPECT_EQ(x.str(), y.str());

  const TrialOutcome t1 = run_trial(config, 400, 2);
  const TrialOutcome t2 = run_trial(config, 400, 2);
  EXPECT_EQ(t1.relative_error, t2.relative_error);
  EXPECT_EQ(t1.samples, 400u);
}

TEST(Trials, SchemesShareInstances) {
  // Trial t draws the same matrix whatever the scheme, so full observation
  // gives the same (zero) error for each.
  ExperimentConfig config;
  config.n = 12;
  config.r = 2;
  config.trials = 1;
  for (Scheme s : {Scheme::uniform, Scheme::two_phase, Scheme::l2}) {
    config.scheme = s;
    const TrialOutcome out = run_trial(config, 144, 0);
    EXPECT_TRUE(out.success);
    EXPECT_EQ(out.samples, 144u);
    EXPECT_LE(out.relative_error, 1e-6);
  }
}

TEST(Trials, LibraryErrorsCountAsFailures) {
  ExperimentConfig config;
  config.n = 10;
  config.r = 2;
  config.trials = 1;
  for (Scheme s : {Scheme::uniform, Scheme::two_phase}) {
    config.scheme = s;
    const TrialOutcome out = run_trial(config, 101, 0);
    EXPECT_FALSE(out.success);
    EXPECT_FALSE(out.converged);
    EXPECT_TRUE(std::isinf(out.relative_error));
  }
}

TEST(Sweep, MonotoneSearchFindsFirstSuccess) {
  ExperimentConfig config;
  config.n = 20;
  config.r = 1;
  config.alpha = 0.0;
  config.scheme = Scheme::uniform;
  config.trials = 4;
  config.record_time = false;
  config.sample_grid = {10, 40, 80, 120, 160, 200, 300, 400};
  const SweepResult fast = success_sweep(config);
  config.full_grid = true;
  const SweepResult full = success_sweep(config);
  ASSERT_TRUE(full.minimal_successful_m.has_value());
  ASSERT_TRUE(fast.minimal_successful_m.has_value());
  EXPECT_EQ(full.rows.size(), config.sample_grid.size());
  EXPECT_LE(fast.rows.size(), full.rows.size());
  // The search agrees with the full grid whenever success is monotone.
  bool monotone = true;
  for (std::size_t i = 1; i < full.rows.size(); ++i) {
    if (full.rows[i - 1].successful(0.95) && !full.rows[i].successful(0.95)) monotone = false;
  }
  if (monotone) EXPECT_EQ(*fast.minimal_successful_m, *full.minimal_successful_m);
  EXPECT_EQ(full.rows.back().success_frac, 1.0);
  EXPECT_EQ(full.rows.front().success_frac, 0.0);
}

TEST(Sweep, ConfigValidation) {
  ExperimentConfig config;
  config.n = 10;
  config.sample_grid = {5, 200};
  EXPECT_THROW(success_sweep(config), ContractError);
  config.sample_grid = {50, 20};
  EXPECT_THROW(success_sweep(config), ContractError);
  config.sample_grid = {20};
  config.trials = 0;
  EXPECT_THROW(success_sweep(config), ContractError);
}

TEST(Sweep, BetaAndScalingDrivers) {
  ExperimentConfig config;
  config.n = 16;
  config.r = 1;
  config.trials = 2;
  config.record_time = false;
  config.sample_grid = {100, 256};
  const auto betas = beta_sweep(config, {1.0, 0.5});
  ASSERT_EQ(betas.size(), 2u);
  for (const auto& res : betas) {
    for (const SweepRow& row : res.rows) EXPECT_EQ(row.scheme, Scheme::two_phase);
  }
  EXPECT_EQ(betas[1].rows.front().beta, 0.5);
  const auto sizes = scaling_sweep(config, {12, 16}, {20.0});
  ASSERT_EQ(sizes.size(), 2u);
  EXPECT_EQ(sizes[0].rows.front().n, 12);
  EXPECT_EQ(sizes[0].rows.front().m, 144);
}

TEST(Trials, StopWhenDecided) {
  ExperimentConfig config;
  config.n = 20;
  config.r = 2;
  config.alpha = 0.3;
  config.scheme = Scheme::uniform;
  config.trials = 10;
  config.record_time = false;
  const SweepRow full = evaluate_budget(config, 60);
  config.stop_when_decided = true;
  const SweepRow cut = evaluate_budget(config, 60);
  ASSERT_LT(full.success_frac, 0.95);
  EXPECT_LT(cut.trials, full.trials);
  EXPECT_EQ(cut.trials, static_cast<int>(cut.relative_errors.size()));
  for (std::size_t t = 0; t < cut.relative_errors.size(); ++t) {
    EXPECT_EQ(cut.relative_errors[t], full.relative_errors[t]);
  }
  EXPECT_FALSE(cut.successful(0.95));

  // A budget that succeeds runs every trial.
  const SweepRow easy = evaluate_budget(config, 400);
  EXPECT_EQ(easy.trials, 10);
  EXPECT_TRUE(easy.successful(0.95));
}
