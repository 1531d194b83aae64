#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "levcomp/certify.hpp"
#include "levcomp/core.hpp"
#include "levcomp/harness.hpp"
#include "levcomp/io.hpp"
#include "levcomp/leverage.hpp"
#include "levcomp/lowerbound.hpp"
#include "levcomp/pipelines.hpp"
#include "levcomp/sampling.hpp"
#include "levcomp/solver.hpp"

using namespace levcomp;
using json = nlohmann::json;

namespace {

void emit(const json& j) { std::cout << j.dump() << '\n'; }

json vec_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

struct SolverFlags {
  double tol = 1e-7;
  int max_iter = 500;
  double growth = 1.05;
  double penalty = 0.0;
  bool dense_svd = false;

  void attach(CLI::App* app) {
    app->add_option("--tol", tol, "Relative residual tolerance");
    app->add_option("--max-iter", max_iter, "Outer iteration limit");
    app->add_option("--growth", growth, "Penalty growth factor");
    app->add_option("--penalty", penalty, "Initial penalty (0: 1/|P_Omega(M)|_2)");
    app->add_flag("--dense-svd", dense_svd, "Dense SVD at every iteration");
  }
  SolverConfig config() const {
    SolverConfig c;
    c.relative_residual_tolerance = tol;
    c.max_outer_iterations = max_iter;
    c.penalty_growth = growth;
    c.penalty_initial = penalty;
    c.partial_svd = !dense_svd;
    return c;
  }
};

json report_json(const SolveReport& r) {
  return {{"iterations", r.iterations},
          {"residual", r.final_constraint_residual},
          {"nuclear_norm", r.nuclear_norm_value},
          {"converged", r.converged}};
}

Matrix load_or_generate(const std::string& path, Index n, Index r, double alpha, std::uint64_t seed,
                        Factorization* factors) {
  if (!path.empty()) {
    Matrix M = io::load_matrix(path);
    if (factors) *factors = svd_rank_r<double>(M, r);
    return M;
  }
  RandomStream rng(seed);
  PowerLawInstance inst = power_law_matrix(n, r, alpha, rng);
  if (factors) *factors = inst.factors;
  return inst.M;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Leverage-score sampling and nuclear-norm matrix completion"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Read options from an INI file ([subcommand] sections)");

  // generate
  auto* gen = app.add_subcommand("generate", "Write a power-law test matrix");
  Index g_n = 200, g_r = 5;
  double g_alpha = 0.5, g_noise = 0.0;
  std::uint64_t g_seed = 1;
  std::string g_out, g_clean;
  gen->add_option("--n", g_n, "Dimension");
  gen->add_option("--r", g_r, "Rank");
  gen->add_option("--alpha", g_alpha, "Power-law exponent");
  gen->add_option("--noise", g_noise, "Relative noise level sigma");
  gen->add_option("--seed", g_seed, "Random seed");
  gen->add_option("--out", g_out, "Output matrix file")->required();
  gen->add_option("--clean-out", g_clean, "Also write the noiseless matrix here");

  // sample
  auto* smp = app.add_subcommand("sample", "Draw an observation set from a matrix");
  std::string s_matrix, s_out, s_scheme = "leverage";
  Index s_rank = 5, s_m = 0;
  double s_c0 = 0.0, s_p = 0.0;
  std::uint64_t s_seed = 1;
  smp->add_option("--matrix", s_matrix, "Input matrix file")->required();
  smp->add_option("--out", s_out, "Output observation file")->required();
  smp->add_option("--scheme", s_scheme, "leverage | uniform | rows")
      ->check(CLI::IsMember({"leverage", "uniform", "rows"}));
  smp->add_option("--rank", s_rank, "Rank used for leverage scores");
  smp->add_option("--m", s_m, "Sample count (uniform) or expected count (leverage)");
  smp->add_option("--c0", s_c0, "Leveraged-sampling constant (0: calibrated)");
  smp->add_option("--p", s_p, "Row probability (rows)");
  smp->add_option("--seed", s_seed, "Random seed");

  // complete
  auto* cmp = app.add_subcommand("complete", "Nuclear-norm completion of an observation file");
  std::string c_obs, c_out, c_weights;
  SolverFlags c_solver;
  cmp->add_option("--obs", c_obs, "Observation file")->required();
  cmp->add_option("--out", c_out, "Output matrix file")->required();
  cmp->add_option("--weights", c_weights, "Weights file (R diagonal, C diagonal)");
  c_solver.attach(cmp);

  // twophase
  auto* tp = app.add_subcommand("twophase", "Two-phase estimated-leverage completion");
  std::string t_matrix, t_out, t_kind = "leverage";
  Index t_n = 200, t_r = 5, t_m = 0;
  double t_alpha = 0.5, t_beta = 2.0 / 3.0, t_threshold = 0.01;
  int t_trials = 1;
  std::uint64_t t_seed = 1;
  SolverFlags t_solver;
  tp->add_option("--matrix", t_matrix, "Matrix file (default: power-law instance)");
  tp->add_option("--n", t_n, "Power-law dimension");
  tp->add_option("--alpha", t_alpha, "Power-law exponent");
  tp->add_option("--rank", t_r, "Rank parameter r");
  tp->add_option("--budget", t_m, "Sample budget m")->required();
  tp->add_option("--beta", t_beta, "Uniform fraction of the budget");
  tp->add_option("--phase-two", t_kind, "leverage | l1 | l2")
      ->check(CLI::IsMember({"leverage", "l1", "l2"}));
  tp->add_option("--trials", t_trials, "Independent trials");
  tp->add_option("--seed", t_seed, "Random seed");
  tp->add_option("--threshold", t_threshold, "Success threshold on relative error");
  tp->add_option("--out", t_out, "Write the first trial's completion here");
  t_solver.attach(tp);

  // rowcoherent
  auto* rc = app.add_subcommand("rowcoherent", "Row sampling, then leveraged sampling");
  std::string rc_matrix, rc_out;
  Index rc_r = 3;
  double rc_mu0 = 1.0, rc_c0 = 0.0, rc_threshold = 0.01;
  int rc_trials = 1;
  std::uint64_t rc_seed = 1;
  SolverFlags rc_solver;
  rc->add_option("--matrix", rc_matrix, "Matrix file")->required();
  rc->add_option("--rank", rc_r, "Rank r");
  rc->add_option("--mu0", rc_mu0, "Column-space incoherence bound");
  rc->add_option("--c0", rc_c0, "Sampling constant (0: calibrated)");
  rc->add_option("--trials", rc_trials, "Independent trials");
  rc->add_option("--seed", rc_seed, "Random seed");
  rc->add_option("--threshold", rc_threshold, "Success threshold on relative error");
  rc->add_option("--out", rc_out, "Write the first trial's completion here");
  rc_solver.attach(rc);

  // certify
  auto* cert = app.add_subcommand("certify", "Golfing certificate and operator-norm checks");
  std::string ce_matrix;
  Index ce_n = 40, ce_r = 2, ce_cap = 64;
  double ce_alpha = 0.0, ce_c0 = 0.0, ce_tol = 1e-9;
  int ce_trials = 1;
  std::uint64_t ce_seed = 1;
  cert->add_option("--matrix", ce_matrix, "Matrix file (default: power-law instance)");
  cert->add_option("--n", ce_n, "Power-law dimension");
  cert->add_option("--r", ce_r, "Rank");
  cert->add_option("--alpha", ce_alpha, "Power-law exponent");
  cert->add_option("--c0", ce_c0, "Leveraged-sampling constant (0: calibrated)");
  cert->add_option("--trials", ce_trials, "Independent trials");
  cert->add_option("--seed", ce_seed, "Random seed");
  cert->add_option("--tol", ce_tol, "Power-iteration tolerance");
  cert->add_option("--size-cap", ce_cap, "Largest dimension for the operator norm");

  // lowerbound
  auto* lb = app.add_subcommand("lowerbound", "Hard instance pair and indistinguishability");
  Index lb_n = 24, lb_r = 3, lb_i0 = 0, lb_j0 = 8;
  std::vector<double> lb_a{4.0, 2.0, 4.0 / 3.0}, lb_b{2.0, 2.0, 2.0};
  double lb_sbar = 0.0, lb_eta = 0.0;
  int lb_trials = 10000;
  std::uint64_t lb_seed = 1;
  std::string lb_m0, lb_m1;
  lb->add_option("--n", lb_n, "Dimension");
  lb->add_option("--r", lb_r, "Rank");
  lb->add_option("--a", lb_a, "Row leverage targets a_k")->delimiter(',');
  lb->add_option("--b", lb_b, "Column leverage targets b_k")->delimiter(',');
  lb->add_option("--s-bar", lb_sbar, "Perturbation scale (default s_k1)");
  lb->add_option("--i0", lb_i0, "Row index i0");
  lb->add_option("--j0", lb_j0, "Column index j0");
  lb->add_option("--eta", lb_eta, "Boundary parameter eta (default 1/s_k1)");
  lb->add_option("--trials", lb_trials, "Monte-Carlo trials");
  lb->add_option("--seed", lb_seed, "Random seed");
  lb->add_option("--m0", lb_m0, "Write M0 here");
  lb->add_option("--m1", lb_m1, "Write M1 here");

  // sweep
  auto* sw = app.add_subcommand("sweep", "Success-rate sweep, written as CSV");
  ExperimentConfig cfg;
  std::string sw_scheme = "two-phase", sw_out;
  std::vector<Index> sw_grid, sw_sizes;
  std::vector<double> sw_factors, sw_betas;
  bool sw_no_time = false, sw_stop = false;
  SolverFlags sw_solver;
  sw->add_option("--scheme", sw_scheme, "oracle-leverage | two-phase | uniform | l1 | l2");
  sw->add_option("--n", cfg.n, "Dimension");
  sw->add_option("--r", cfg.r, "Rank");
  sw->add_option("--alpha", cfg.alpha, "Power-law exponent");
  sw->add_option("--beta", cfg.beta, "Uniform fraction (two-phase schemes)");
  sw->add_option("--grid", sw_grid, "Sample budgets m")->delimiter(',');
  sw->add_option("--grid-factors", sw_factors, "Budgets as multiples of n log n")->delimiter(',');
  sw->add_option("--betas", sw_betas, "Run a beta sweep over these values")->delimiter(',');
  sw->add_option("--sizes", sw_sizes, "Run a scaling sweep over these n")->delimiter(',');
  sw->add_option("--trials", cfg.trials, "Trials per budget");
  sw->add_option("--noise", cfg.noise_sigma, "Relative noise level sigma");
  sw->add_option("--seed", cfg.seed, "Random seed");
  sw->add_option("--c0", cfg.c0, "Oracle constant (0: match each budget)");
  sw->add_option("--threshold", cfg.success_threshold, "Success threshold on relative error");
  sw->add_option("--quantile", cfg.success_quantile, "Required success fraction");
  sw->add_flag("--full-grid", cfg.full_grid, "Evaluate every budget");
  sw->add_flag("--no-time", sw_no_time, "Write 0 in the seconds column");
  sw->add_flag("--stop-when-decided", sw_stop,
               "Stop a budget's trials once the success quantile is out of reach");
  sw->add_option("--threads", cfg.threads, "Worker threads");
  sw->add_option("--out", sw_out, "CSV output (default stdout)");
  sw_solver.attach(sw);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      RandomStream rng(g_seed);
      PowerLawInstance inst = power_law_matrix(g_n, g_r, g_alpha, rng);
      const Matrix noisy = add_noise(inst.M, g_noise, rng);
      io::save_matrix(g_out, noisy);
      if (!g_clean.empty()) io::save_matrix(g_clean, inst.M);
      const LeverageScores s = leverage_scores(inst.factors);
      emit({{"n", g_n}, {"r", g_r}, {"alpha", g_alpha}, {"noise", g_noise}, {"seed", g_seed},
            {"mu0", s.max_score()}, {"mu_str", joint_incoherence(inst.factors)}});
    } else if (*smp) {
      const Matrix M = io::load_matrix(s_matrix);
      RandomStream rng(s_seed);
      ObservationSet obs;
      json meta{{"scheme", s_scheme}, {"seed", s_seed}};
      if (s_scheme == "leverage") {
        const LeverageScores scores = leverage_scores(svd_rank_r<double>(M, s_rank));
        double c0 = s_c0;
        if (c0 <= 0.0) {
          c0 = s_m > 0 ? leveraged_c0_for_budget(scores, static_cast<double>(s_m))
                       : calibrated_c0(std::max(M.rows(), M.cols()), s_rank);
        }
        const ProbabilityMatrix P = leveraged_distribution(scores, c0);
        obs = bernoulli_sample(M, P, rng);
        meta["c0"] = c0;
        meta["expected"] = P.expected_count();
      } else if (s_scheme == "uniform") {
        if (s_m < 1) throw ContractError("sample: uniform sampling needs --m");
        obs = sample_uniform(M, s_m, rng);
      } else {
        const RowSample rows = sample_full_rows(M, s_p, rng);
        obs = rows.observations;
        meta["rows"] = rows.rows;
      }
      io::save_observations(s_out, obs);
      meta["m"] = obs.size();
      emit(meta);
    } else if (*cmp) {
      const ObservationSet obs = io::load_observations(c_obs);
      SolveReport rep;
      if (c_weights.empty()) {
        rep = complete_nuclear(obs, c_solver.config());
      } else {
        auto [R, C] = io::load_weights(c_weights);
        rep = complete_weighted(obs, WeightMatrices{R, C}, c_solver.config());
      }
      io::save_matrix(c_out, rep.X_hat);
      emit(report_json(rep));
    } else if (*tp) {
      const Matrix M = load_or_generate(t_matrix, t_n, t_r, t_alpha, t_seed, nullptr);
      TwoPhaseConfig c;
      c.rank_parameter = t_r;
      c.budget = t_m;
      c.beta = t_beta;
      c.phase_two = t_kind == "leverage" ? PhaseTwoKind::leverage
                    : t_kind == "l1"     ? PhaseTwoKind::l1
                                         : PhaseTwoKind::l2;
      c.solver = t_solver.config();
      for (int t = 0; t < t_trials; ++t) {
        RandomStream rng(t_seed, static_cast<std::uint64_t>(t) + 1);
        const TwoPhaseResult res = two_phase_complete(M, c, rng);
        const double err = relative_error(res.report.X_hat, M);
        if (t == 0 && !t_out.empty()) io::save_matrix(t_out, res.report.X_hat);
        json j{{"seed", t_seed},
               {"trial", t},
               {"m", t_m},
               {"beta", t_beta},
               {"phase_one", res.phase_one.size()},
               {"phase_two", res.phase_two.size()},
               {"effective_rank", res.effective_rank},
               {"rank_deficient", res.rank_deficient},
               {"relative_error", err},
               {"success", res.report.converged && err <= t_threshold}};
        j.update(report_json(res.report));
        emit(j);
      }
    } else if (*rc) {
      const Matrix M = io::load_matrix(rc_matrix);
      const Index n = std::max(M.rows(), M.cols());
      const double c0 = rc_c0 > 0.0 ? rc_c0 : calibrated_c0(n, rc_r);
      const double bound =
          3.0 * c0 * rc_mu0 * static_cast<double>(rc_r * n) * std::pow(std::log(double(n)), 2);
      for (int t = 0; t < rc_trials; ++t) {
        RandomStream rng(rc_seed, static_cast<std::uint64_t>(t) + 1);
        const RowCoherentResult res =
            row_coherent_complete(M, rc_mu0, rc_r, c0, rng, rc_solver.config());
        const double err = relative_error(res.report.X_hat, M);
        if (t == 0 && !rc_out.empty()) io::save_matrix(rc_out, res.report.X_hat);
        json j{{"seed", rc_seed},
               {"trial", t},
               {"c0", c0},
               {"rows", res.sampled_rows.size()},
               {"row_rank", res.row_rank},
               {"row_space_captured", res.row_space_captured},
               {"row_samples", res.row_samples},
               {"leveraged_samples", res.leveraged_samples},
               {"total_samples", res.total_samples},
               {"sample_bound", bound},
               {"relative_error", err},
               {"success", res.report.converged && err <= rc_threshold}};
        j.update(report_json(res.report));
        emit(j);
      }
    } else if (*cert) {
      Factorization F;
      const Matrix M = load_or_generate(ce_matrix, ce_n, ce_r, ce_alpha, ce_seed, &F);
      const LeverageScores scores = leverage_scores(F);
      const double c0 = ce_c0 > 0.0 ? ce_c0 : calibrated_c0(std::max(M.rows(), M.cols()), F.rank());
      const ProbabilityMatrix P = leveraged_distribution(scores, c0);
      OperatorNormOptions opts;
      opts.tol = ce_tol;
      opts.size_cap = ce_cap;
      for (int t = 0; t < ce_trials; ++t) {
        RandomStream rng(ce_seed, static_cast<std::uint64_t>(t) + 1);
        const CertificateReport rep = golfing_certificate(M, F, P, rng, opts);
        emit({{"seed", ce_seed},
              {"trial", t},
              {"c0", c0},
              {"k0", rep.k0},
              {"samples", rep.omega.size()},
              {"operator_norm_estimate", rep.operator_norm_estimate},
              {"delta_frobenius_trace", rep.delta_frobenius_trace},
              {"median_contraction", rep.median_contraction},
              {"tangent_residual", rep.tangent_residual},
              {"offspace_spectral", rep.offspace_spectral},
              {"condition_operator", rep.condition_operator},
              {"condition_tangent_literal", rep.condition_tangent_literal},
              {"condition_tangent_decay", rep.condition_tangent_decay},
              {"condition_offspace", rep.condition_offspace},
              {"non_square", rep.non_square}});
      }
    } else if (*lb) {
      HardInstance probe = construct_hard_pair(lb_n, lb_r, lb_a, lb_b, 1e300, lb_i0, lb_j0);
      const double s_bar = lb_sbar > 0.0 ? lb_sbar : static_cast<double>(probe.s[probe.k1]);
      const HardInstance inst = construct_hard_pair(lb_n, lb_r, lb_a, lb_b, s_bar, lb_i0, lb_j0);
      const double eta = lb_eta > 0.0 ? lb_eta : 1.0 / static_cast<double>(inst.s[inst.k1]);
      ProbabilityMatrix P;
      P.p = Matrix::Constant(lb_n, lb_n, boundary_probability(inst, eta));
      RandomStream rng(lb_seed);
      const IndistinguishabilityResult res = indistinguishability_test(inst, P, lb_trials, rng);
      if (!lb_m0.empty()) io::save_matrix(lb_m0, inst.M0);
      if (!lb_m1.empty()) io::save_matrix(lb_m1, inst.M1);
      emit({{"n", lb_n},
            {"r", lb_r},
            {"s", inst.s},
            {"t", inst.t},
            {"k1", inst.k1},
            {"k2", inst.k2},
            {"i_star", inst.i_star},
            {"s_bar", s_bar},
            {"eta", eta},
            {"p", P.p(0, 0)},
            {"trials", res.trials},
            {"frequency", res.frequency},
            {"half_width", res.half_width},
            {"analytic", res.analytic},
            {"relative_difference", (inst.M1 - inst.M0).squaredNorm() / inst.M0.squaredNorm()}});
    } else if (*sw) {
      cfg.scheme = parse_scheme(sw_scheme);
      cfg.solver = sw_solver.config();
      cfg.record_time = !sw_no_time;
      cfg.stop_when_decided = sw_stop;
      std::vector<SweepResult> results;
      if (!sw_sizes.empty()) {
        if (sw_factors.empty()) throw ContractError("sweep: --sizes needs --grid-factors");
        results = scaling_sweep(cfg, sw_sizes, sw_factors);
      } else {
        cfg.sample_grid = sw_grid.empty() ? budget_grid(cfg.n, sw_factors) : sw_grid;
        if (cfg.sample_grid.empty()) throw ContractError("sweep: need --grid or --grid-factors");
        if (!sw_betas.empty()) {
          results = beta_sweep(cfg, sw_betas);
        } else {
          results.push_back(success_sweep(cfg));
        }
      }
      std::ofstream file;
      if (!sw_out.empty()) {
        file.open(sw_out);
        if (!file) throw ParseError("sweep: cannot open " + sw_out);
      }
      std::ostream& out = sw_out.empty() ? std::cout : file;
      bool header = true;
      for (const SweepResult& r : results) {
        write_csv(out, r.rows, header);
        header = false;
      }
      for (const SweepResult& r : results) {
        json j{{"minimal_successful_m", nullptr}};
        if (!r.rows.empty()) {
          j["alpha"] = r.rows.front().alpha;
          j["beta"] = r.rows.front().beta;
          j["n"] = r.rows.front().n;
        }
        if (r.minimal_successful_m) j["minimal_successful_m"] = *r.minimal_successful_m;
        (sw_out.empty() ? std::cerr : std::cout) << j.dump() << '\n';
      }
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
