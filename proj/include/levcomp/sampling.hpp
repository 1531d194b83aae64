#pragma once

// Observation-set generation: independent Bernoulli draws, fixed-size
// weighted draws without replacement, and whole-row sampling.

#include <cstdint>
#include <random>
#include <vector>

#include "levcomp/core.hpp"
#include "levcomp/leverage.hpp"

namespace levcomp {

/// Reproducible random source identified by (seed, stream id). Two streams
/// built from the same pair produce identical draws.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  double uniform();
  double normal();
  double exponential();
  Matrix gaussian_matrix(Index rows, Index cols);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
};

/// Entry (i, j) is included independently with probability P(i, j).
/// Probabilities are recorded in the returned set.
ObservationSet bernoulli_sample(const Matrix& M, const ProbabilityMatrix& P, RandomStream& rng);

/// m distinct entries outside `exclude`, drawn sequentially with probability
/// proportional to `weights` and renormalized after each draw (realized as an
/// exponential race). Entries are returned in draw order.
ObservationSet sample_without_replacement(const Matrix& M, const Matrix& weights, Index m,
                                          RandomStream& rng,
                                          const ObservationSet* exclude = nullptr);

/// m entries uniformly at random without replacement.
ObservationSet sample_uniform(const Matrix& M, Index m, RandomStream& rng,
                              const ObservationSet* exclude = nullptr);

struct RowSample {
  std::vector<Index> rows;
  ObservationSet observations;
};

/// Each row kept independently with probability p; every entry of a kept
/// row is observed.
RowSample sample_full_rows(const Matrix& M, double p, RandomStream& rng);

}  // namespace levcomp
