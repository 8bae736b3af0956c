#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "pathsim/eps.hpp"

namespace pathsim {

// A vector with computable amplitudes and a sampler for |psi_i|^r / ||psi||_r^r.
class CtState {
 public:
  virtual ~CtState() = default;
  virtual Index dim() const = 0;
  virtual Complex amplitude(Index i) const = 0;
  // l_r norm of the amplitude vector, r in [1, inf].
  virtual double norm(double r) const = 0;
  // Draws i with probability |psi_i|^r / ||psi||_r^r, r in (0, inf).
  virtual Index sample(double r, RngStream& rng) const = 0;
  // Probability of i under the same law.
  virtual double probability(Index i, double r) const;

  ComplexVector dense() const;
};

using CtPtr = std::shared_ptr<const CtState>;

CtPtr basis_state(Index dim, Index index);
// Tensor product; the first factor is the most significant digit.
CtPtr product_state(std::vector<std::vector<Complex>> factors);
// (1/sqrt(N)) sum_x e^{i theta(x)} |x>.
CtPtr phase_state(Index dim, std::function<double(Index)> theta);
CtPtr uniform_state(Index dim);
// Explicit amplitude vector; no normalization required.
CtPtr vector_state(std::vector<Complex> amplitudes);

// Chain head / tail: sigma with unconditional P(n, k) over columns and
// Q(m, k) over rows. Every state here has a single k.
struct EndpointDraw {
  Index index;
  std::uint64_t k;
};

struct StateTerm {
  Index row;
  Index col;
  std::uint64_t k;
  Complex alpha;
  double prob_p;  // P(n, k)
  double prob_q;  // Q(m, k)
};

class EhtState {
 public:
  EhtState(Index rows, Index cols, double bound, NormPair norms)
      : rows_(rows), cols_(cols), bound_(bound), norms_(norms) {}
  virtual ~EhtState() = default;

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  double bound() const { return bound_; }
  NormPair norms() const { return norms_; }

  virtual EndpointDraw sample_col(RngStream& rng) const = 0;
  virtual EndpointDraw sample_row(RngStream& rng) const = 0;
  // alpha / P(n, k) and alpha / Q(m, k).
  virtual Transition ratios(Index m, Index n, std::uint64_t k) const = 0;

  virtual std::uint64_t k_count() const { return 1; }
  virtual Complex alpha(Index m, Index n, std::uint64_t k) const = 0;
  virtual double prob_col(Index n, std::uint64_t k) const = 0;
  virtual double prob_row(Index m, std::uint64_t k) const = 0;

  // All (m, n, k) with P(n, k) > 0 or Q(m, k) > 0; small dimensions only.
  std::vector<StateTerm> enumerate() const;
  ComplexMatrix dense() const;

 private:
  Index rows_;
  Index cols_;
  double bound_;
  NormPair norms_;
};

using EhtPtr = std::shared_ptr<const EhtState>;

// sigma = |phi><psi|, i.e. sigma_mn = phi_m conj(psi_n).
EhtPtr dyad(CtPtr phi, CtPtr psi, NormPair pq = {});
// Positive semidefinite, unit trace; p = 2 only.
EhtPtr density(ComplexMatrix rho);

struct LowRankTerm {
  Complex s;
  CtPtr u;  // column factor, ||u||_p = 1
  CtPtr v;  // row factor, ||v||_q = 1
};
// sigma_mn = sum_i s_i v_{i,m} u_{i,n}.
EhtPtr low_rank(std::vector<LowRankTerm> terms, NormPair pq = {});

// The head as an operator: forward draws from P(n, k), backward from Q(m, k).
EpsPtr as_operator(EhtPtr sigma);

struct StateCertificate {
  double max_alpha_error = 0.0;
  double max_cost_ratio = 0.0;
  double p_normalization_error = 0.0;
  double q_normalization_error = 0.0;
};
StateCertificate certify(const EhtState& sigma, const ComplexMatrix& reference);

}  // namespace pathsim
