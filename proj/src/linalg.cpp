#include "pathsim/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace pathsim {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidParameter: return "InvalidParameter";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::OracleCapExceeded: return "OracleCapExceeded";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::InvalidWeights: return "InvalidWeights";
    case ErrorCode::IndexMapInconsistent: return "IndexMapInconsistent";
    case ErrorCode::NonUnitPhase: return "NonUnitPhase";
    case ErrorCode::DeadRow: return "DeadRow";
    case ErrorCode::DeadColumn: return "DeadColumn";
    case ErrorCode::NotNormalized: return "NotNormalized";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::NormViolation: return "NormViolation";
    case ErrorCode::HistoryCapExceeded: return "HistoryCapExceeded";
    case ErrorCode::NegativeMassOverflow: return "NegativeMassOverflow";
    case ErrorCode::SchemaError: return "SchemaError";
  }
  return "Error";
}

NormPair::NormPair(double p) : p_(p) {
  if (!(p >= 1.0)) throw Error(ErrorCode::InvalidParameter, "p must lie in [1, inf]");
  if (p == 1.0) {
    q_ = kInf;
    inv_p_ = 1.0;
  } else if (std::isinf(p)) {
    q_ = 1.0;
    inv_p_ = 0.0;
  } else {
    q_ = p / (p - 1.0);
    inv_p_ = 1.0 / p;
  }
}

NormPair NormPair::from_q(double q) {
  if (!(q >= 1.0)) throw Error(ErrorCode::InvalidParameter, "q must lie in [1, inf]");
  if (q == 1.0) return NormPair(kInf);
  if (std::isinf(q)) return NormPair(1.0);
  return NormPair(q / (q - 1.0));
}

double lp_norm(const RealVector& x, double r) {
  if (x.size() == 0) return 0.0;
  if (std::isinf(r)) return x.cwiseAbs().maxCoeff();
  if (r == 1.0) return x.cwiseAbs().sum();
  if (r == 2.0) return x.norm();
  double scale = x.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  double s = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) s += std::pow(std::abs(x[i]) / scale, r);
  return scale * std::pow(s, 1.0 / r);
}

SparseEntries::SparseEntries(Index rows, Index cols, std::vector<Triplet> triplets)
    : rows_(rows), cols_(cols), triplets_(std::move(triplets)) {
  for (const auto& t : triplets_) {
    if (t.row >= rows_ || t.col >= cols_)
      throw Error(ErrorCode::DimensionMismatch, "sparse entry outside the matrix");
    if (!std::isfinite(t.value.real()) || !std::isfinite(t.value.imag()))
      throw Error(ErrorCode::InvalidParameter, "sparse entry is not finite");
  }
  std::vector<Index> order(triplets_.size());
  std::iota(order.begin(), order.end(), Index{0});

  std::sort(order.begin(), order.end(), [&](Index a, Index b) {
    const auto& x = triplets_[a];
    const auto& y = triplets_[b];
    return std::tie(x.row, x.col) < std::tie(y.row, y.col);
  });
  for (std::size_t i = 1; i < order.size(); ++i) {
    const auto& x = triplets_[order[i - 1]];
    const auto& y = triplets_[order[i]];
    if (x.row == y.row && x.col == y.col)
      throw Error(ErrorCode::InvalidParameter, "duplicate sparse entry");
  }
  row_items_ = order;
  row_start_.assign(rows_ + 1, 0);
  for (const auto& t : triplets_) ++row_start_[t.row + 1];
  std::partial_sum(row_start_.begin(), row_start_.end(), row_start_.begin());

  std::sort(order.begin(), order.end(), [&](Index a, Index b) {
    const auto& x = triplets_[a];
    const auto& y = triplets_[b];
    return std::tie(x.col, x.row) < std::tie(y.col, y.row);
  });
  col_items_ = order;
  col_start_.assign(cols_ + 1, 0);
  for (const auto& t : triplets_) ++col_start_[t.col + 1];
  std::partial_sum(col_start_.begin(), col_start_.end(), col_start_.begin());
}

SparseEntries SparseEntries::from_dense(const ComplexMatrix& a) {
  std::vector<Triplet> t;
  for (Eigen::Index m = 0; m < a.rows(); ++m)
    for (Eigen::Index n = 0; n < a.cols(); ++n)
      if (a(m, n) != Complex(0.0)) t.push_back({Index(m), Index(n), a(m, n)});
  return SparseEntries(Index(a.rows()), Index(a.cols()), std::move(t));
}

std::span<const Index> SparseEntries::row(Index m) const {
  return {row_items_.data() + row_start_[m], row_start_[m + 1] - row_start_[m]};
}

std::span<const Index> SparseEntries::col(Index n) const {
  return {col_items_.data() + col_start_[n], col_start_[n + 1] - col_start_[n]};
}

ComplexMatrix SparseEntries::to_dense() const {
  ComplexMatrix a = ComplexMatrix::Zero(Eigen::Index(rows_), Eigen::Index(cols_));
  for (const auto& t : triplets_) a(Eigen::Index(t.row), Eigen::Index(t.col)) = t.value;
  return a;
}

RealMatrix entrywise_abs(const ComplexMatrix& a) { return a.cwiseAbs(); }

namespace {

Index find_root(std::vector<Index>& parent, Index x) {
  while (parent[x] != x) {
    parent[x] = parent[parent[x]];
    x = parent[x];
  }
  return x;
}

struct ComponentSolution {
  RealVector u, v;
  double value = 0.0;
  bool converged = true;
  int iterations = 0;
};

RealVector power_of(const RealVector& x, double scale, double exponent) {
  RealVector y(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) y[i] = std::pow(x[i] / scale, exponent);
  return y;
}

// Alternates the support-functional maps of a connected nonnegative block.
ComponentSolution solve_component(const RealMatrix& b, NormPair pq, RealVector v,
                                  const PowerOptions& opts) {
  const double p = pq.p(), q = pq.q();
  v /= lp_norm(v, q);
  ComponentSolution s;
  double prev = -1.0;
  s.converged = false;
  for (int it = 1; it <= opts.max_iterations; ++it) {
    RealVector w = b * v;
    double wn = lp_norm(w, q);
    if (wn == 0.0) {
      s.converged = true;
      s.iterations = it;
      break;
    }
    RealVector u = power_of(w, wn, q / p);
    RealVector z = b.transpose() * u;
    RealVector next = power_of(z, lp_norm(z, p), p / q);
    const double moved = (next - v).cwiseAbs().maxCoeff();
    v = std::move(next);
    s.iterations = it;
    // The norm settles quadratically faster than the vectors, so both must be stable.
    if (std::abs(wn - prev) <= opts.tolerance * std::max(1.0, wn)) {
      s.converged = true;
      if (moved <= opts.vector_tolerance) break;
    }
    prev = wn;
  }
  RealVector w = b * v;
  s.value = lp_norm(w, q);
  s.u = s.value > 0.0 ? power_of(w, s.value, q / p) : RealVector::Ones(w.size());
  s.v = v;
  return s;
}

RealMatrix extract(const RealMatrix& b, const Component& c) {
  RealMatrix sub(Eigen::Index(c.rows.size()), Eigen::Index(c.cols.size()));
  for (std::size_t i = 0; i < c.rows.size(); ++i)
    for (std::size_t j = 0; j < c.cols.size(); ++j)
      sub(Eigen::Index(i), Eigen::Index(j)) = b(Eigen::Index(c.rows[i]), Eigen::Index(c.cols[j]));
  return sub;
}

bool needs_restarts(NormPair pq) { return pq.p() != 2.0; }

ComponentSolution best_solution(const RealMatrix& sub, NormPair pq, const PowerOptions& opts) {
  ComponentSolution best = solve_component(sub, pq, RealVector::Ones(sub.cols()), opts);
  if (!needs_restarts(pq)) return best;
  std::mt19937_64 gen(opts.seed);
  for (int r = 0; r < opts.restarts; ++r) {
    RealVector v0(sub.cols());
    for (Eigen::Index j = 0; j < v0.size(); ++j)
      v0[j] = 0.1 + double(gen() >> 11) * 0x1.0p-53;
    ComponentSolution s = solve_component(sub, pq, v0, opts);
    if (s.value > best.value) best = std::move(s);
  }
  return best;
}

void check_nonnegative(const RealMatrix& b) {
  if (b.size() > 0 && !(b.minCoeff() >= 0.0))
    throw Error(ErrorCode::InvalidParameter, "matrix must be entrywise nonnegative and finite");
  if (!b.allFinite()) throw Error(ErrorCode::InvalidParameter, "matrix entries must be finite");
}

}  // namespace

std::vector<Component> block_decompose(const RealMatrix& b) {
  const Index r = Index(b.rows()), c = Index(b.cols());
  std::vector<Index> parent(r + c);
  std::iota(parent.begin(), parent.end(), Index{0});
  for (Index m = 0; m < r; ++m)
    for (Index n = 0; n < c; ++n)
      if (b(Eigen::Index(m), Eigen::Index(n)) > 0.0) {
        Index x = find_root(parent, m), y = find_root(parent, r + n);
        if (x != y) parent[std::max(x, y)] = std::min(x, y);
      }
  std::vector<Component> out;
  std::vector<Index> slot(r + c, Index(-1));
  for (Index i = 0; i < r + c; ++i) {
    Index root = find_root(parent, i);
    if (slot[root] == Index(-1)) {
      slot[root] = out.size();
      out.emplace_back();
    }
    if (i < r)
      out[slot[root]].rows.push_back(i);
    else
      out[slot[root]].cols.push_back(i - r);
  }
  return out;
}

NormEstimate induced_norm(const RealMatrix& b, double q, const PowerOptions& opts) {
  check_nonnegative(b);
  if (!(q >= 1.0)) throw Error(ErrorCode::InvalidParameter, "q must lie in [1, inf]");
  NormEstimate est;
  if (b.size() == 0) return est;
  if (q == 1.0) {
    est.value = b.colwise().sum().maxCoeff();
    return est;
  }
  if (std::isinf(q)) {
    est.value = b.rowwise().sum().maxCoeff();
    return est;
  }
  NormPair pq = NormPair::from_q(q);
  for (const auto& c : block_decompose(b)) {
    if (c.rows.empty() || c.cols.empty()) continue;
    ComponentSolution s = best_solution(extract(b, c), pq, opts);
    est.value = std::max(est.value, s.value);
    est.converged = est.converged && s.converged;
    est.iterations = std::max(est.iterations, s.iterations);
  }
  return est;
}

PositiveVectorPair generalized_singular_vectors(const RealMatrix& b, NormPair pq,
                                                const PowerOptions& opts) {
  check_nonnegative(b);
  if (pq.p() == 1.0 || std::isinf(pq.p()))
    throw Error(ErrorCode::InvalidParameter, "generalized singular vectors need 1 < p < inf");
  PositiveVectorPair out;
  out.u = RealVector::Ones(b.rows());
  out.v = RealVector::Ones(b.cols());
  for (const auto& c : block_decompose(b)) {
    if (c.rows.empty() || c.cols.empty()) continue;
    ComponentSolution s = best_solution(extract(b, c), pq, opts);
    for (std::size_t i = 0; i < c.rows.size(); ++i) out.u[Eigen::Index(c.rows[i])] = s.u[Eigen::Index(i)];
    for (std::size_t j = 0; j < c.cols.size(); ++j) out.v[Eigen::Index(c.cols[j])] = s.v[Eigen::Index(j)];
    out.norm_estimate = std::max(out.norm_estimate, s.value);
    out.converged = out.converged && s.converged;
    out.iterations = std::max(out.iterations, s.iterations);
  }
  return out;
}

Complex exact_oracle(const ComplexMatrix& sigma, std::span<const ComplexMatrix> ops, Index cap) {
  auto check_cap = [cap](const ComplexMatrix& a) {
    if (Index(a.rows()) > cap || Index(a.cols()) > cap)
      throw Error(ErrorCode::OracleCapExceeded, "dimension exceeds the oracle cap");
  };
  check_cap(sigma);
  ComplexMatrix x = sigma;
  for (auto it = ops.rbegin(); it != ops.rend(); ++it) {
    check_cap(*it);
    if (it->cols() != x.rows())
      throw Error(ErrorCode::DimensionMismatch, "operator chain dimensions do not match");
    x = (*it) * x;
  }
  if (x.rows() != x.cols())
    throw Error(ErrorCode::DimensionMismatch, "chain does not close into a square product");
  return x.trace();
}

ComplexMatrix dense_exp(const ComplexMatrix& a, Index cap) {
  if (a.rows() != a.cols()) throw Error(ErrorCode::DimensionMismatch, "dense_exp needs a square matrix");
  if (Index(a.rows()) > cap) throw Error(ErrorCode::OracleCapExceeded, "dimension exceeds the oracle cap");
  const Eigen::Index n = a.rows();
  if (n == 0) return a;
  double norm1 = a.cwiseAbs().colwise().sum().maxCoeff();
  int s = norm1 > 0.5 ? int(std::ceil(std::log2(norm1 / 0.5))) : 0;
  ComplexMatrix x = a / std::ldexp(1.0, s);
  ComplexMatrix term = ComplexMatrix::Identity(n, n);
  ComplexMatrix sum = term;
  for (int k = 1; k <= 40; ++k) {
    term = term * x / double(k);
    sum += term;
    if (term.cwiseAbs().maxCoeff() <= 1e-18 * sum.cwiseAbs().maxCoeff()) break;
  }
  for (int i = 0; i < s; ++i) sum = sum * sum;
  return sum;
}

}  // namespace pathsim
