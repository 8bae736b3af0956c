#include "pathsim/sampler.hpp"

#include <cmath>

namespace pathsim {

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id) {
  std::seed_seq seq{std::uint32_t(seed), std::uint32_t(seed >> 32), std::uint32_t(stream_id),
                    std::uint32_t(stream_id >> 32)};
  engine_.seed(seq);
}

std::uint64_t RngStream::below(std::uint64_t n) {
  if (n == 0) throw Error(ErrorCode::InvalidParameter, "below(0)");
  if ((n & (n - 1)) == 0) return engine_() & (n - 1);
  // Rejection keeps the result exactly uniform.
  const std::uint64_t limit = std::uint64_t(-1) - std::uint64_t(-1) % n;
  for (;;) {
    std::uint64_t x = engine_();
    if (x < limit) return x % n;
  }
}

std::uint64_t sample_count(double epsilon, double delta, double b) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon))
    throw Error(ErrorCode::InvalidParameter, "epsilon must be positive and finite");
  if (!(delta > 0.0 && delta < 4.0))
    throw Error(ErrorCode::InvalidParameter, "delta must lie in (0, 4)");
  if (!(b >= 0.0) || !std::isfinite(b))
    throw Error(ErrorCode::InvalidParameter, "b must be nonnegative and finite");
  const double k = 4.0 * std::log(4.0 / delta) * b * b / (epsilon * epsilon);
  if (!(k < 9.0e18)) throw Error(ErrorCode::InvalidParameter, "sample count overflows");
  // Absorb last-ulp noise so that exact integers are not rounded up.
  const double rounded = std::ceil(k * (1.0 - 1e-12));
  return rounded < 1.0 ? 1 : std::uint64_t(rounded);
}

Index sample_discrete(std::span<const double> weights, RngStream& rng) {
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w))
      throw Error(ErrorCode::InvalidParameter, "weights must be finite and nonnegative");
    total += w;
  }
  if (!(total > 0.0)) throw Error(ErrorCode::InvalidParameter, "weights sum to zero");
  const double target = rng.uniform() * total;
  double acc = 0.0;
  Index last = 0;
  for (Index i = 0; i < weights.size(); ++i) {
    if (weights[i] == 0.0) continue;
    acc += weights[i];
    last = i;
    if (target < acc) return i;
  }
  return last;
}

bool coin(double prob_heads, RngStream& rng) { return rng.uniform() < prob_heads; }

std::uint64_t sample_poisson_like_tail(double b, RngStream& rng) {
  if (!(b >= 0.0) || !std::isfinite(b))
    throw Error(ErrorCode::InvalidParameter, "b must be nonnegative and finite");
  double w = std::exp(-b);
  double used = 0.0;
  for (std::uint64_t l = 0;; ++l) {
    const double left = 1.0 - used;
    if (left <= w || coin(w / left, rng)) return l;
    used += w;
    w *= b / double(l + 1);
    if (w == 0.0) return l + 1;  // remaining mass is rounding noise
  }
}

AliasTable::AliasTable(std::span<const double> weights) {
  const Index n = weights.size();
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w))
      throw Error(ErrorCode::InvalidParameter, "weights must be finite and nonnegative");
    total += w;
  }
  if (!(total > 0.0)) throw Error(ErrorCode::InvalidParameter, "weights sum to zero");
  p_.resize(n);
  prob_.assign(n, 0.0);
  alias_.assign(n, 0);
  std::vector<double> scaled(n);
  std::vector<Index> small, large;
  for (Index i = 0; i < n; ++i) {
    p_[i] = weights[i] / total;
    scaled[i] = p_[i] * double(n);
    (scaled[i] < 1.0 ? small : large).push_back(i);
  }
  while (!small.empty() && !large.empty()) {
    Index s = small.back(), l = large.back();
    small.pop_back();
    prob_[s] = scaled[s];
    alias_[s] = l;
    scaled[l] = (scaled[l] + scaled[s]) - 1.0;
    if (scaled[l] < 1.0) {
      large.pop_back();
      small.push_back(l);
    }
  }
  for (Index i : large) {
    prob_[i] = 1.0;
    alias_[i] = i;
  }
  // Leftovers from rounding: keep them only if they carry mass.
  for (Index i : small) {
    prob_[i] = 1.0;
    alias_[i] = i;
    if (p_[i] == 0.0) {
      for (Index j = 0; j < n; ++j)
        if (p_[j] > 0.0) {
          prob_[i] = 0.0;
          alias_[i] = j;
          break;
        }
    }
  }
}

Index AliasTable::sample(RngStream& rng) const {
  const Index i = Index(rng.below(prob_.size()));
  return rng.uniform() < prob_[i] ? i : alias_[i];
}

void StreamingMean::add(Complex x) {
  ++n_;
  const Complex d = x - mean_;
  mean_ += d / double(n_);
  m2_ += std::real(std::conj(d) * (x - mean_));
}

void StreamingMean::merge(const StreamingMean& o) {
  if (o.n_ == 0) return;
  if (n_ == 0) {
    *this = o;
    return;
  }
  const double n = double(n_ + o.n_);
  const Complex d = o.mean_ - mean_;
  mean_ += d * (double(o.n_) / n);
  m2_ += o.m2_ + std::norm(d) * double(n_) * double(o.n_) / n;
  n_ += o.n_;
}

double StreamingMean::std() const {
  if (n_ < 2) return 0.0;
  return std::sqrt(std::max(0.0, m2_) / double(n_ - 1));
}

}  // namespace pathsim
