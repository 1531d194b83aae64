#include "levcomp/sampling.hpp"

#include <algorithm>
#include <numeric>
#include <utility>

namespace levcomp {

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t stream)
    : seed_(seed), stream_(stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(stream >> 32), 0x6c65766cu};
  engine_.seed(seq);
}

double RandomStream::uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }

double RandomStream::normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }

double RandomStream::exponential() {
  return std::exponential_distribution<double>(1.0)(engine_);
}

Matrix RandomStream::gaussian_matrix(Index rows, Index cols) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Matrix G(rows, cols);
  // Fill row-major so the draw order does not depend on storage order.
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) G(i, j) = dist(engine_);
  return G;
}

ObservationSet bernoulli_sample(const Matrix& M, const ProbabilityMatrix& P, RandomStream& rng) {
  if (P.rows() != M.rows() || P.cols() != M.cols()) {
    throw DimensionError("bernoulli_sample: probability matrix shape mismatch");
  }
  std::vector<Entry> entries;
  std::vector<double> probs;
  for (Index i = 0; i < M.rows(); ++i) {
    for (Index j = 0; j < M.cols(); ++j) {
      const double p = P.p(i, j);
      if (p < 0.0 || p > 1.0) throw ContractError("bernoulli_sample: probability outside [0, 1]");
      const double u = rng.uniform();
      if (u < p) {
        entries.push_back({i, j, M(i, j)});
        probs.push_back(p);
      }
    }
  }
  return ObservationSet(M.rows(), M.cols(), std::move(entries), std::move(probs));
}

ObservationSet sample_without_replacement(const Matrix& M, const Matrix& weights, Index m,
                                          RandomStream& rng, const ObservationSet* exclude) {
  if (weights.rows() != M.rows() || weights.cols() != M.cols()) {
    throw DimensionError("sample_without_replacement: weight shape mismatch");
  }
  if (m < 0) throw ContractError("sample_without_replacement: negative sample count");
  Matrix excluded = Matrix::Zero(M.rows(), M.cols());
  if (exclude != nullptr) {
    if (exclude->rows() != M.rows() || exclude->cols() != M.cols()) {
      throw DimensionError("sample_without_replacement: exclusion set shape mismatch");
    }
    excluded = exclude->mask();
  }

  // Exponential race: key = E / w with E ~ Exp(1); the m smallest keys are a
  // sequential weighted draw without replacement, in draw order.
  struct Candidate {
    double key;
    Index row;
    Index col;
  };
  std::vector<Candidate> pool;
  pool.reserve(static_cast<std::size_t>(M.size()));
  for (Index i = 0; i < M.rows(); ++i) {
    for (Index j = 0; j < M.cols(); ++j) {
      const double e = rng.exponential();
      const double w = weights(i, j);
      if (w < 0.0 || !std::isfinite(w)) {
        throw ContractError("sample_without_replacement: weights must be finite and nonnegative");
      }
      if (w > 0.0 && excluded(i, j) == 0.0) pool.push_back({e / w, i, j});
    }
  }
  if (static_cast<Index>(pool.size()) < m) {
    throw InfeasibleBudgetError("sample_without_replacement: requested " + std::to_string(m) +
                                " entries but only " + std::to_string(pool.size()) +
                                " have positive weight outside the exclusion set");
  }
  const auto by_key = [](const Candidate& a, const Candidate& b) {
    if (a.key != b.key) return a.key < b.key;
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  };
  std::partial_sort(pool.begin(), pool.begin() + m, pool.end(), by_key);

  std::vector<Entry> entries;
  entries.reserve(static_cast<std::size_t>(m));
  for (Index k = 0; k < m; ++k) {
    const Candidate& c = pool[static_cast<std::size_t>(k)];
    entries.push_back({c.row, c.col, M(c.row, c.col)});
  }
  return ObservationSet(M.rows(), M.cols(), std::move(entries));
}

ObservationSet sample_uniform(const Matrix& M, Index m, RandomStream& rng,
                              const ObservationSet* exclude) {
  return sample_without_replacement(M, Matrix::Ones(M.rows(), M.cols()), m, rng, exclude);
}

RowSample sample_full_rows(const Matrix& M, double p, RandomStream& rng) {
  if (!(p >= 0.0 && p <= 1.0)) throw ContractError("sample_full_rows: p outside [0, 1]");
  RowSample out;
  std::vector<Entry> entries;
  for (Index i = 0; i < M.rows(); ++i) {
    if (rng.uniform() < p) {
      out.rows.push_back(i);
      for (Index j = 0; j < M.cols(); ++j) entries.push_back({i, j, M(i, j)});
    }
  }
  std::optional<std::vector<double>> probs;
  if (p > 0.0) probs = std::vector<double>(entries.size(), p);
  out.observations = ObservationSet(M.rows(), M.cols(), std::move(entries), std::move(probs));
  return out;
}

}  // namespace levcomp
