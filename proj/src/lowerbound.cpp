#include "levcomp/lowerbound.hpp"

#include <cmath>
#include <numeric>

namespace levcomp {

namespace {

Index integral_block(Index n, Index r, double target, Index k, const char* name) {
  const double size = 2.0 * static_cast<double>(n) / (target * static_cast<double>(r));
  const double rounded = std::round(size);
  if (std::abs(size - rounded) > 1e-9 * std::max(1.0, size)) {
    throw ConstructionError(std::string("construct_hard_pair: ") + name + "_" + std::to_string(k) +
                                " = " + std::to_string(size) + " is not an integer",
                            k);
  }
  if (rounded < 1.0 || rounded > static_cast<double>(n)) {
    throw ConstructionError(std::string("construct_hard_pair: ") + name + "_" + std::to_string(k) +
                                " outside [1, n]",
                            k);
  }
  return static_cast<Index>(rounded);
}

std::vector<Index> starts(const std::vector<Index>& sizes) {
  std::vector<Index> out(sizes.size(), 0);
  for (std::size_t k = 1; k < sizes.size(); ++k) out[k] = out[k - 1] + sizes[k - 1];
  return out;
}

Index block_of(const std::vector<Index>& start, const std::vector<Index>& size, Index x) {
  for (std::size_t k = 0; k < start.size(); ++k) {
    if (x >= start[k] && x < start[k] + size[k]) return static_cast<Index>(k);
  }
  throw DimensionError("index " + std::to_string(x) + " outside every block");
}

}  // namespace

LeverageScores HardInstance::targets() const {
  LeverageScores out;
  out.rank = r;
  out.mu.resize(n);
  out.nu.resize(n);
  for (Index k = 0; k < r; ++k) {
    out.mu.segment(row_start[k], s[k]).setConstant(a[k]);
    out.nu.segment(col_start[k], t[k]).setConstant(b[k]);
  }
  return out;
}

Index HardInstance::block_of_row(Index i) const { return block_of(row_start, s, i); }
Index HardInstance::block_of_col(Index j) const { return block_of(col_start, t, j); }

HardInstance construct_hard_pair(Index n, Index r, const std::vector<double>& a,
                                 const std::vector<double>& b, double s_bar, Index i0, Index j0,
                                 std::optional<Index> i_star) {
  if (r < 1 || n < r) throw DimensionError("construct_hard_pair: need 1 <= r <= n");
  if (static_cast<Index>(a.size()) != r || static_cast<Index>(b.size()) != r) {
    throw DimensionError("construct_hard_pair: a and b must have r entries");
  }
  if (i0 < 0 || i0 >= n || j0 < 0 || j0 >= n) {
    throw DimensionError("construct_hard_pair: (i0, j0) out of range");
  }
  const double lo = 2.0 / static_cast<double>(r);
  const double hi = 2.0 * static_cast<double>(n) / static_cast<double>(r);
  for (Index k = 0; k < r; ++k) {
    for (double v : {a[k], b[k]}) {
      if (!(v >= lo - 1e-12 && v <= hi + 1e-12)) {
        throw ConstructionError("construct_hard_pair: target outside [2/r, 2n/r] at k = " +
                                    std::to_string(k),
                                k);
      }
    }
  }

  HardInstance inst;
  inst.n = n;
  inst.r = r;
  inst.a = a;
  inst.b = b;
  for (Index k = 0; k < r; ++k) {
    inst.s.push_back(integral_block(n, r, a[k], k, "s"));
    inst.t.push_back(integral_block(n, r, b[k], k, "t"));
  }
  if (std::accumulate(inst.s.begin(), inst.s.end(), Index{0}) != n ||
      std::accumulate(inst.t.begin(), inst.t.end(), Index{0}) != n) {
    throw ConstructionError("construct_hard_pair: block sizes do not sum to n "
                            "(need sum 1/a_k = sum 1/b_k = r/2)",
                            -1);
  }
  inst.row_start = starts(inst.s);
  inst.col_start = starts(inst.t);
  inst.i0 = i0;
  inst.j0 = j0;
  inst.k1 = inst.block_of_row(i0);
  inst.k2 = inst.block_of_col(j0);
  inst.i_star = i_star.value_or(i0);
  if (inst.block_of_row(inst.i_star) != inst.k1) {
    throw ContractError("construct_hard_pair: i_star must lie in the block of i0");
  }
  if (!(s_bar >= static_cast<double>(inst.s[inst.k1]))) {
    throw ContractError("construct_hard_pair: s_bar must be at least s_{k1}");
  }
  inst.s_bar = s_bar;

  inst.A = Matrix::Zero(n, r);
  inst.B = Matrix::Zero(n, r);
  for (Index k = 0; k < r; ++k) {
    inst.A.block(inst.row_start[k], k, inst.s[k], 1)
        .setConstant(std::sqrt(1.0 / static_cast<double>(inst.s[k])));
    inst.B.block(inst.col_start[k], k, inst.t[k], 1)
        .setConstant(std::sqrt(1.0 / static_cast<double>(inst.t[k])));
  }
  inst.A_bar = inst.A;
  inst.A_bar(inst.i_star, inst.k2) = -std::sqrt(1.0 / s_bar);
  inst.M0 = inst.A * inst.B.transpose();
  inst.M1 = inst.A_bar * inst.B.transpose();
  return inst;
}

std::vector<double> suggest_targets(Index n, Index r, const std::vector<double>& a) {
  if (static_cast<Index>(a.size()) != r || r < 1 || n < r) {
    throw DimensionError("suggest_targets: need r targets and 1 <= r <= n");
  }
  std::vector<Index> s;
  for (double v : a) {
    if (!(v > 0.0)) throw ContractError("suggest_targets: targets must be positive");
    const double size = 2.0 * static_cast<double>(n) / (v * static_cast<double>(r));
    s.push_back(std::clamp<Index>(static_cast<Index>(std::llround(size)), 1, n));
  }
  // Repair the total by adjusting the largest (or smallest) blocks one unit
  // at a time.
  Index total = std::accumulate(s.begin(), s.end(), Index{0});
  while (total != n) {
    if (total > n) {
      auto it = std::max_element(s.begin(), s.end());
      if (*it <= 1) throw ContractError("suggest_targets: r exceeds n");
      --*it;
      --total;
    } else {
      ++*std::min_element(s.begin(), s.end());
      ++total;
    }
  }
  std::vector<double> out;
  for (Index size : s) {
    out.push_back(2.0 * static_cast<double>(n) / (static_cast<double>(size) * static_cast<double>(r)));
  }
  return out;
}

double boundary_probability(const HardInstance& inst, double eta) {
  if (!(eta > 0.0 && eta <= 1.0)) throw ContractError("boundary_probability: eta outside (0, 1]");
  return std::log(1.0 / eta) / (2.0 * static_cast<double>(inst.t[inst.k2]));
}

void check_location_invariant(const HardInstance& inst, const ProbabilityMatrix& P) {
  if (P.rows() != inst.n || P.cols() != inst.n) {
    throw DimensionError("check_location_invariant: probability matrix shape mismatch");
  }
  auto same = [](double x, double y) { return std::abs(x - y) <= 1e-12 * std::max(1.0, std::abs(x)); };
  // Rows (columns) of M0 are identical exactly when they share a block.
  for (Index k = 0; k < inst.r; ++k) {
    const Index first = inst.row_start[k];
    for (Index i = first + 1; i < first + inst.s[k]; ++i) {
      for (Index j = 0; j < inst.n; ++j) {
        if (!same(P.p(first, j), P.p(i, j))) {
          throw ContractError("location invariance violated: rows " + std::to_string(first) +
                              " and " + std::to_string(i) + " differ at column " +
                              std::to_string(j));
        }
      }
    }
    const Index first_col = inst.col_start[k];
    for (Index j = first_col + 1; j < first_col + inst.t[k]; ++j) {
      for (Index i = 0; i < inst.n; ++i) {
        if (!same(P.p(i, first_col), P.p(i, j))) {
          throw ContractError("location invariance violated: columns " +
                              std::to_string(first_col) + " and " + std::to_string(j) +
                              " differ at row " + std::to_string(i));
        }
      }
    }
  }
}

IndistinguishabilityResult indistinguishability_test(const HardInstance& inst,
                                                     const ProbabilityMatrix& P, int trials,
                                                     RandomStream& rng) {
  if (trials < 1) throw ContractError("indistinguishability_test: trials must be positive");
  check_location_invariant(inst, P);
  const Index r0 = inst.row_start[inst.k1];
  const Index rows = inst.s[inst.k1];
  const Index c0 = inst.col_start[inst.k2];
  const Index cols = inst.t[inst.k2];

  double all_rows_hit = 1.0;
  for (Index i = r0; i < r0 + rows; ++i) {
    double miss = 1.0;
    for (Index j = c0; j < c0 + cols; ++j) miss *= 1.0 - P.p(i, j);
    all_rows_hit *= 1.0 - miss;
  }

  int events = 0;
  for (int trial = 0; trial < trials; ++trial) {
    bool event = false;
    for (Index i = r0; i < r0 + rows; ++i) {
      bool seen = false;
      // Draw every entry so the stream advances identically across trials.
      for (Index j = c0; j < c0 + cols; ++j) seen = (rng.uniform() < P.p(i, j)) || seen;
      event = event || !seen;
    }
    events += event ? 1 : 0;
  }

  IndistinguishabilityResult out;
  out.trials = trials;
  out.frequency = static_cast<double>(events) / trials;
  out.standard_error = std::sqrt(out.frequency * (1.0 - out.frequency) / trials);
  out.half_width = 3.0 * out.standard_error;
  out.analytic = 1.0 - all_rows_hit;
  return out;
}

}  // namespace levcomp
