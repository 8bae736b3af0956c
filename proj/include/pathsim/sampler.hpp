#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "pathsim/types.hpp"

namespace pathsim {

// Reproducible random stream keyed by (seed, stream_id).
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  std::uint64_t next_u64() { return engine_(); }
  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return double(engine_() >> 11) * 0x1.0p-53; }
  // Uniform integer in [0, n), n > 0.
  std::uint64_t below(std::uint64_t n);

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
};

std::uint64_t sample_count(double epsilon, double delta, double b);

Index sample_discrete(std::span<const double> weights, RngStream& rng);

bool coin(double prob_heads, RngStream& rng);

// l with probability b^l / (l! e^b), by sequential conditional coins.
std::uint64_t sample_poisson_like_tail(double b, RngStream& rng);

// Walker/Vose alias table for distributions that are sampled many times.
class AliasTable {
 public:
  AliasTable() = default;
  explicit AliasTable(std::span<const double> weights);

  Index size() const { return prob_.size(); }
  double probability(Index i) const { return p_[i]; }
  Index sample(RngStream& rng) const;

 private:
  std::vector<double> prob_;
  std::vector<Index> alias_;
  std::vector<double> p_;
};

class StreamingMean {
 public:
  void add(Complex x);
  void merge(const StreamingMean& other);

  std::uint64_t count() const { return n_; }
  Complex mean() const { return mean_; }
  // Sample standard deviation of |x - mean|; 0 for fewer than two values.
  double std() const;

 private:
  std::uint64_t n_ = 0;
  Complex mean_{0.0, 0.0};
  double m2_ = 0.0;
};

struct EstimateReport {
  Complex estimate{0.0, 0.0};
  std::uint64_t sample_count = 1;
  double empirical_std = 0.0;
  double b = 0.0;
  double epsilon = 0.0;
  double delta = 0.0;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  double elapsed_seconds = 0.0;
  std::string method = "markov";
};

}  // namespace pathsim
