#pragma once

#include <atomic>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pathsim/linalg.hpp"
#include "pathsim/sampler.hpp"

namespace pathsim {

// One conditional step of a path. The k tag is not carried on sampled steps;
// it is only materialized by support enumeration.
struct Transition {
  Index next;
  Complex ratio_p;  // alpha / P
  Complex ratio_q;  // alpha / Q
};

using KTag = std::vector<std::int64_t>;

// One (m, n, k) element of an operator's support together with its weights.
struct SupportTerm {
  Index row;
  Index col;
  KTag k;
  Complex alpha;
  double prob_p;  // P(n, k | m)
  double prob_q;  // Q(m, k | n)
};

struct EnumerationLimits {
  // exp() keeps series orders until the remaining Poisson tail drops below this.
  double exp_tail = 1e-15;
  std::size_t max_terms = std::size_t(1) << 22;
};

class EpsOperator {
 public:
  EpsOperator(Index rows, Index cols, double bound, NormPair norms)
      : rows_(rows), cols_(cols), bound_(bound), norms_(norms) {}
  virtual ~EpsOperator() = default;

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  double bound() const { return bound_; }
  NormPair norms() const { return norms_; }

  // nullopt: the row (column) carries no mass and the path contributes 0.
  virtual std::optional<Transition> sample_forward(Index m, RngStream& rng) const = 0;
  virtual std::optional<Transition> sample_backward(Index n, RngStream& rng) const = 0;

  virtual std::vector<SupportTerm> enumerate_row(Index m, const EnumerationLimits& lim) const = 0;
  virtual std::vector<SupportTerm> enumerate_col(Index n, const EnumerationLimits& lim) const = 0;

  virtual ComplexMatrix dense() const = 0;

  // ||abs(A)||_q when the structure gives it in closed form.
  virtual std::optional<double> structured_imax() const { return std::nullopt; }

 private:
  Index rows_;
  Index cols_;
  double bound_;
  NormPair norms_;
};

using EpsPtr = std::shared_ptr<const EpsOperator>;

// Counts evaluations of an oracle function. Shared by reference between the
// caller and every operator built from it.
class QueryCounter {
 public:
  void add(std::uint64_t n = 1) { count_.fetch_add(n, std::memory_order_relaxed); }
  std::uint64_t count() const { return count_.load(std::memory_order_relaxed); }
  void reset() { count_.store(0, std::memory_order_relaxed); }

 private:
  std::atomic<std::uint64_t> count_{0};
};

// Bidirectional conversion between global indices and (block, local) pairs.
struct BlockIndex {
  Index block;
  Index local;
};

class BlockLayout {
 public:
  virtual ~BlockLayout() = default;
  virtual Index blocks() const = 0;
  virtual Index rows() const = 0;
  virtual Index cols() const = 0;
  virtual Index block_rows(Index r) const = 0;
  virtual Index block_cols(Index r) const = 0;
  virtual BlockIndex split_row(Index m) const = 0;
  virtual BlockIndex split_col(Index n) const = 0;
  virtual Index join_row(BlockIndex b) const = 0;
  virtual Index join_col(BlockIndex b) const = 0;
};

using LayoutPtr = std::shared_ptr<const BlockLayout>;

// Blocks laid out contiguously along the diagonal.
LayoutPtr direct_sum_layout(std::vector<Index> block_rows, std::vector<Index> block_cols);
// I_left (x) A (x) I_right: block (a, c) holds rows a*rows*right + i*right + c.
LayoutPtr tensor_layout(Index left, Index rows, Index cols, Index right);

struct DenseOptions {
  PowerOptions power;
};

// Dense matrices used by the operator zoo.
ComplexMatrix fourier_matrix(Index n);
ComplexMatrix hadamard_matrix(int qubits);

EpsPtr from_dense_optimal(const ComplexMatrix& a, NormPair pq = {}, const DenseOptions& opts = {});
EpsPtr from_rowcol(const ComplexMatrix& a, NormPair pq = {});
EpsPtr sparse_ecs(const SparseEntries& s, NormPair pq = {});

// Dense-optimal Fourier / Hadamard carrying the closed-form imax sqrt(N).
EpsPtr fourier(int qubits, NormPair pq = {});
EpsPtr hadamard(int qubits, NormPair pq = {});

EpsPtr identity(Index n, NormPair pq = {});
// Row m holds phases[m] in column perm[m].
EpsPtr permutation(std::vector<Index> perm, std::vector<Complex> phases = {}, NormPair pq = {});
EpsPtr diagonal_unitary(Index n, std::function<Complex(Index)> phase, NormPair pq = {});
EpsPtr diagonal_unitary(std::vector<Complex> phases, NormPair pq = {});
// Characters from {I, X, Y, Z}; the first character acts on the most significant qubit.
EpsPtr pauli_string(const std::string& spec, NormPair pq = {});
EpsPtr grover_reflection(int qubits, NormPair pq = {});
EpsPtr haar_wavelet(int qubits, NormPair pq = {});
// |x, y> -> |x, (y + g(x)) mod y_dim>, index x * y_dim + y.
EpsPtr oracle_op(std::function<Index(Index)> g, Index x_dim, Index y_dim,
                 std::shared_ptr<QueryCounter> counter = nullptr, NormPair pq = {});

EpsPtr scale(Complex s, EpsPtr a);
// The transpose and adjoint exchange the roles of P and Q, so their norm pair
// is the swapped (q, p) pair; at p = 2 nothing changes.
EpsPtr adjoint(EpsPtr a);
EpsPtr transpose(EpsPtr a);

struct SumTerm {
  Complex s;
  EpsPtr op;
};
EpsPtr sum(std::vector<SumTerm> terms, std::optional<std::vector<double>> weights = std::nullopt);
// A1 A2 ... AS; forward sampling walks left to right.
EpsPtr product(std::vector<EpsPtr> factors);
EpsPtr exp(EpsPtr a);

EpsPtr block_diagonal(std::vector<EpsPtr> blocks, LayoutPtr layout);
// sum_r |r><r| (x) A_r with equally sized blocks.
EpsPtr controlled(std::vector<EpsPtr> family);
EpsPtr tensor_embed(EpsPtr a, Index dim_left, Index dim_right);

// Certificate over full support enumeration, compared against a reference matrix.
struct CertificateReport {
  double max_alpha_error = 0.0;
  double max_cost_ratio = 0.0;
  double max_p_normalization_error = 0.0;
  double max_q_normalization_error = 0.0;
  bool consistent = true;  // row and column enumerations list the same terms
  std::size_t terms = 0;
};

double cost_ratio(Complex alpha, double prob_p, double prob_q, NormPair pq);
CertificateReport certify(const EpsOperator& op, const ComplexMatrix& reference,
                          const EnumerationLimits& lim = {});

}  // namespace pathsim
