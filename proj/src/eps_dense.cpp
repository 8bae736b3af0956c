#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <numeric>

#include "pathsim/eps.hpp"
#include "table_operator.hpp"

namespace pathsim {
namespace detail {

TableOperator::TableOperator(Index rows, Index cols, double bound, NormPair pq,
                             std::vector<TableEntry> entries, std::optional<double> imax)
    : EpsOperator(rows, cols, bound, pq), entries_(std::move(entries)), imax_(imax) {
  std::sort(entries_.begin(), entries_.end(), [](const TableEntry& a, const TableEntry& b) {
    return std::tie(a.row, a.col) < std::tie(b.row, b.col);
  });
  row_start_.assign(rows + 1, 0);
  col_start_.assign(cols + 1, 0);
  for (const auto& e : entries_) {
    ++row_start_[e.row + 1];
    ++col_start_[e.col + 1];
  }
  std::partial_sum(row_start_.begin(), row_start_.end(), row_start_.begin());
  std::partial_sum(col_start_.begin(), col_start_.end(), col_start_.begin());
  col_items_.resize(entries_.size());
  std::vector<Index> fill(col_start_.begin(), col_start_.end() - 1);
  for (Index i = 0; i < entries_.size(); ++i) col_items_[fill[entries_[i].col]++] = i;

  row_alias_.resize(rows);
  col_alias_.resize(cols);
  std::vector<double> w;
  for (Index m = 0; m < rows; ++m) {
    w.clear();
    for (Index i = row_start_[m]; i < row_start_[m + 1]; ++i) w.push_back(entries_[i].prob_p);
    if (!w.empty()) row_alias_[m] = AliasTable(w);
  }
  for (Index n = 0; n < cols; ++n) {
    w.clear();
    for (Index i = col_start_[n]; i < col_start_[n + 1]; ++i) w.push_back(entries_[col_items_[i]].prob_q);
    if (!w.empty()) col_alias_[n] = AliasTable(w);
  }
}

std::optional<Transition> TableOperator::sample_forward(Index m, RngStream& rng) const {
  if (row_alias_[m].size() == 0) return std::nullopt;
  const auto& e = entries_[row_start_[m] + row_alias_[m].sample(rng)];
  return Transition{e.col, e.alpha / e.prob_p, e.alpha / e.prob_q};
}

std::optional<Transition> TableOperator::sample_backward(Index n, RngStream& rng) const {
  if (col_alias_[n].size() == 0) return std::nullopt;
  const auto& e = entries_[col_items_[col_start_[n] + col_alias_[n].sample(rng)]];
  return Transition{e.row, e.alpha / e.prob_p, e.alpha / e.prob_q};
}

std::vector<SupportTerm> TableOperator::enumerate_row(Index m, const EnumerationLimits&) const {
  std::vector<SupportTerm> out;
  for (Index i = row_start_[m]; i < row_start_[m + 1]; ++i) {
    const auto& e = entries_[i];
    out.push_back({e.row, e.col, {}, e.alpha, e.prob_p, e.prob_q});
  }
  return out;
}

std::vector<SupportTerm> TableOperator::enumerate_col(Index n, const EnumerationLimits&) const {
  std::vector<SupportTerm> out;
  for (Index i = col_start_[n]; i < col_start_[n + 1]; ++i) {
    const auto& e = entries_[col_items_[i]];
    out.push_back({e.row, e.col, {}, e.alpha, e.prob_p, e.prob_q});
  }
  return out;
}

ComplexMatrix TableOperator::dense() const {
  ComplexMatrix a = ComplexMatrix::Zero(Eigen::Index(rows()), Eigen::Index(cols()));
  for (const auto& e : entries_) a(Eigen::Index(e.row), Eigen::Index(e.col)) += e.alpha;
  return a;
}

}  // namespace detail

namespace {

using detail::TableEntry;
using detail::TableOperator;

void check_finite(const ComplexMatrix& a) {
  if (!a.allFinite()) throw Error(ErrorCode::InvalidParameter, "matrix entries must be finite");
}

EpsPtr rowcol_from_triplets(Index rows, Index cols, const std::vector<Triplet>& t, NormPair pq,
                            bool allow_empty, std::optional<double> imax = std::nullopt) {
  std::vector<double> rowsum(rows, 0.0), colsum(cols, 0.0);
  for (const auto& e : t) {
    rowsum[e.row] += std::abs(e.value);
    colsum[e.col] += std::abs(e.value);
  }
  if (!allow_empty) {
    for (Index m = 0; m < rows; ++m)
      if (rowsum[m] == 0.0) throw Error(ErrorCode::DeadRow, "row " + std::to_string(m) + " is zero");
    for (Index n = 0; n < cols; ++n)
      if (colsum[n] == 0.0) throw Error(ErrorCode::DeadColumn, "column " + std::to_string(n) + " is zero");
  }
  std::vector<TableEntry> entries;
  for (const auto& e : t) {
    const double a = std::abs(e.value);
    if (a == 0.0) continue;
    entries.push_back({e.row, e.col, e.value, a / rowsum[e.row], a / colsum[e.col]});
  }
  const double row_max = rows ? *std::max_element(rowsum.begin(), rowsum.end()) : 0.0;
  const double col_max = cols ? *std::max_element(colsum.begin(), colsum.end()) : 0.0;
  const double b = std::pow(row_max, pq.inv_p()) * std::pow(col_max, pq.inv_q());
  return std::make_shared<TableOperator>(rows, cols, b, pq, std::move(entries), imax);
}

std::vector<Triplet> dense_triplets(const ComplexMatrix& a) {
  std::vector<Triplet> t;
  for (Eigen::Index m = 0; m < a.rows(); ++m)
    for (Eigen::Index n = 0; n < a.cols(); ++n)
      if (a(m, n) != Complex(0.0)) t.push_back({Index(m), Index(n), a(m, n)});
  return t;
}

EpsPtr dense_optimal_impl(const ComplexMatrix& a, NormPair pq, const DenseOptions& opts,
                          std::optional<double> imax) {
  check_finite(a);
  const Index rows = Index(a.rows()), cols = Index(a.cols());
  if (pq.p() == 1.0 || std::isinf(pq.p()))
    return rowcol_from_triplets(rows, cols, dense_triplets(a), pq, true, imax);

  const RealMatrix abs_a = entrywise_abs(a);
  const PositiveVectorPair uv = generalized_singular_vectors(abs_a, pq, opts.power);
  const RealVector av = abs_a * uv.v;
  const RealVector atu = abs_a.transpose() * uv.u;
  std::vector<TableEntry> entries;
  double b = 0.0;
  for (Index m = 0; m < rows; ++m)
    for (Index n = 0; n < cols; ++n) {
      const double x = abs_a(Eigen::Index(m), Eigen::Index(n));
      if (x == 0.0) continue;
      const double vn = uv.v[Eigen::Index(n)], um = uv.u[Eigen::Index(m)];
      const double pr = x * vn / av[Eigen::Index(m)];
      const double qr = x * um / atu[Eigen::Index(n)];
      entries.push_back({m, n, a(Eigen::Index(m), Eigen::Index(n)), pr, qr});
      // Exact cost of this entry; b is its maximum over the support.
      b = std::max(b, std::pow(x / pr, pq.inv_p()) * std::pow(x / qr, pq.inv_q()));
    }
  return std::make_shared<TableOperator>(rows, cols, b, pq, std::move(entries), imax);
}

}  // namespace

ComplexMatrix fourier_matrix(Index n) {
  if (n == 0) throw Error(ErrorCode::InvalidParameter, "Fourier dimension must be positive");
  ComplexMatrix f(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  const double norm = 1.0 / std::sqrt(double(n));
  for (Index j = 0; j < n; ++j)
    for (Index k = 0; k < n; ++k) {
      const double angle = 2.0 * std::numbers::pi * double((j * k) % n) / double(n);
      f(Eigen::Index(j), Eigen::Index(k)) = std::polar(norm, angle);
    }
  return f;
}

ComplexMatrix hadamard_matrix(int qubits) {
  if (qubits < 0 || qubits > 20) throw Error(ErrorCode::InvalidParameter, "qubit count out of range");
  const Index n = Index(1) << qubits;
  const double norm = 1.0 / std::sqrt(double(n));
  ComplexMatrix h(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (Index j = 0; j < n; ++j)
    for (Index k = 0; k < n; ++k)
      h(Eigen::Index(j), Eigen::Index(k)) = (std::popcount(j & k) % 2) ? -norm : norm;
  return h;
}

EpsPtr from_dense_optimal(const ComplexMatrix& a, NormPair pq, const DenseOptions& opts) {
  return dense_optimal_impl(a, pq, opts, std::nullopt);
}

EpsPtr from_rowcol(const ComplexMatrix& a, NormPair pq) {
  check_finite(a);
  return rowcol_from_triplets(Index(a.rows()), Index(a.cols()), dense_triplets(a), pq, false);
}

EpsPtr sparse_ecs(const SparseEntries& s, NormPair pq) {
  return rowcol_from_triplets(s.rows(), s.cols(), s.triplets(), pq, false);
}

EpsPtr fourier(int qubits, NormPair pq) {
  if (qubits < 0 || qubits > 12) throw Error(ErrorCode::InvalidParameter, "qubit count out of range");
  const Index n = Index(1) << qubits;
  // abs(F) = J / sqrt(N) and ||J||_q = N for every q.
  return dense_optimal_impl(fourier_matrix(n), pq, {}, std::sqrt(double(n)));
}

EpsPtr hadamard(int qubits, NormPair pq) {
  if (qubits < 0 || qubits > 12) throw Error(ErrorCode::InvalidParameter, "qubit count out of range");
  const Index n = Index(1) << qubits;
  return dense_optimal_impl(hadamard_matrix(qubits), pq, {}, std::sqrt(double(n)));
}

namespace detail {
EpsPtr rowcol_allow_empty(const ComplexMatrix& a, NormPair pq) {
  check_finite(a);
  return rowcol_from_triplets(Index(a.rows()), Index(a.cols()), dense_triplets(a), pq, true);
}
}  // namespace detail

}  // namespace pathsim
