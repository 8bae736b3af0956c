#pragma once

#include <span>
#include <vector>

#include "pathsim/types.hpp"

namespace pathsim {

struct Triplet {
  Index row;
  Index col;
  Complex value;
};

// Coordinate-list matrix with per-row and per-column access.
class SparseEntries {
 public:
  SparseEntries(Index rows, Index cols, std::vector<Triplet> triplets);

  static SparseEntries from_dense(const ComplexMatrix& a);

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  const std::vector<Triplet>& triplets() const { return triplets_; }
  // Positions into triplets(), sorted by column (row view) or by row (column view).
  std::span<const Index> row(Index m) const;
  std::span<const Index> col(Index n) const;

  ComplexMatrix to_dense() const;

 private:
  Index rows_;
  Index cols_;
  std::vector<Triplet> triplets_;
  std::vector<Index> row_start_, row_items_;
  std::vector<Index> col_start_, col_items_;
};

struct NormEstimate {
  double value = 0.0;
  bool converged = true;
  int iterations = 0;
};

struct PowerOptions {
  double tolerance = 1e-12;          // on successive norm estimates
  double vector_tolerance = 1e-12;   // max change of the iterate v
  int max_iterations = 10000;
  int restarts = 3;  // used only when p is not 1, 2 or inf
  std::uint64_t seed = 0x9e3779b97f4a7c15ULL;
};

struct Component {
  std::vector<Index> rows;
  std::vector<Index> cols;
};

struct PositiveVectorPair {
  RealVector u;
  RealVector v;
  double norm_estimate = 0.0;
  bool converged = true;
  int iterations = 0;
};

RealMatrix entrywise_abs(const ComplexMatrix& a);

// Connected components of the bipartite support graph. Zero rows and zero
// columns come back as singleton components with an empty partner set.
std::vector<Component> block_decompose(const RealMatrix& b);

// Induced l_q -> l_q norm of a nonnegative matrix.
NormEstimate induced_norm(const RealMatrix& b, double q, const PowerOptions& opts = {});

// Positive u, v with (B^T u)_n <= v_n^{q/p} ||B||_q and (B v)_m <= u_m^{p/q} ||B||_q.
// Requires 1 < p < inf.
PositiveVectorPair generalized_singular_vectors(const RealMatrix& b, NormPair pq,
                                                const PowerOptions& opts = {});

// Tr{A1 A2 ... AS sigma}, evaluated right to left.
Complex exact_oracle(const ComplexMatrix& sigma, std::span<const ComplexMatrix> ops,
                     Index cap = kDefaultOracleCap);

ComplexMatrix dense_exp(const ComplexMatrix& a, Index cap = kDefaultOracleCap);

}  // namespace pathsim
