#pragma once

#include <vector>

#include "pathsim/eps.hpp"

namespace pathsim::detail {

struct TableEntry {
  Index row;
  Index col;
  Complex alpha;
  double prob_p;
  double prob_q;
};

// Operator with an explicit support list and per-row / per-column alias tables.
// Backs the dense, row/column and sparse constructions.
class TableOperator final : public EpsOperator {
 public:
  TableOperator(Index rows, Index cols, double bound, NormPair pq, std::vector<TableEntry> entries,
                std::optional<double> imax = std::nullopt);

  std::optional<Transition> sample_forward(Index m, RngStream& rng) const override;
  std::optional<Transition> sample_backward(Index n, RngStream& rng) const override;
  std::vector<SupportTerm> enumerate_row(Index m, const EnumerationLimits& lim) const override;
  std::vector<SupportTerm> enumerate_col(Index n, const EnumerationLimits& lim) const override;
  ComplexMatrix dense() const override;
  std::optional<double> structured_imax() const override { return imax_; }

 private:
  std::vector<TableEntry> entries_;  // row-major
  std::vector<Index> row_start_;
  std::vector<Index> col_items_;
  std::vector<Index> col_start_;
  std::vector<AliasTable> row_alias_;
  std::vector<AliasTable> col_alias_;
  std::optional<double> imax_;
};

// Row/column construction that tolerates zero rows and columns.
EpsPtr rowcol_allow_empty(const ComplexMatrix& a, NormPair pq);

}  // namespace pathsim::detail
