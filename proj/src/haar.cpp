#include <algorithm>
#include <bit>
#include <cmath>

#include "pathsim/eps.hpp"

namespace pathsim {
namespace {

// Haar wavelet transform G_n on n qubits. Qubit 0 is the most significant bit.
// Row x = 0 is <+|^n / uniform; a row whose first set qubit is m spreads
// uniformly over its 2^(m+1) nonzero columns. Every column has n + 1 nonzero
// rows, sampled uniformly.
class HaarOp final : public EpsOperator {
 public:
  HaarOp(int n, double bound, NormPair pq)
      : EpsOperator(Index(1) << n, Index(1) << n, bound, pq), n_(n) {}

  std::optional<Transition> sample_forward(Index x, RngStream& rng) const override {
    const int level = first_set(x);
    const int free_bits = level < 0 ? n_ : level + 1;
    const Index low = low_mask(free_bits);
    const Index y = (Index(rng.below(std::uint64_t(1) << free_bits)) << (n_ - free_bits)) | (x & low);
    return transition(x, y);
  }

  std::optional<Transition> sample_backward(Index y, RngStream& rng) const override {
    const Index c = Index(rng.below(std::uint64_t(n_) + 1));
    const Index x = row_for(c, y);
    Transition t = transition(x, y);
    t.next = x;
    return t;
  }

  std::vector<SupportTerm> enumerate_row(Index x, const EnumerationLimits&) const override {
    const int level = first_set(x);
    const int free_bits = level < 0 ? n_ : level + 1;
    std::vector<SupportTerm> out;
    for (Index r = 0; r < (Index(1) << free_bits); ++r) {
      const Index y = (r << (n_ - free_bits)) | (x & low_mask(free_bits));
      out.push_back(term(x, y));
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.col < b.col; });
    return out;
  }

  std::vector<SupportTerm> enumerate_col(Index y, const EnumerationLimits&) const override {
    std::vector<SupportTerm> out;
    for (Index c = 0; c <= Index(n_); ++c) out.push_back(term(row_for(c, y), y));
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.row < b.row; });
    return out;
  }

  ComplexMatrix dense() const override {
    if (rows() > kDefaultOracleCap) throw Error(ErrorCode::OracleCapExceeded, "Haar transform too large");
    ComplexMatrix a = ComplexMatrix::Zero(Eigen::Index(rows()), Eigen::Index(cols()));
    for (Index x = 0; x < rows(); ++x)
      for (const auto& t : enumerate_row(x, {})) a(Eigen::Index(t.row), Eigen::Index(t.col)) = t.alpha;
    return a;
  }

  std::optional<double> structured_imax() const override {
    if (norms().p() == 2.0) return std::sqrt(double(n_) + 1.0);
    return std::nullopt;
  }

 private:
  // Position (from the most significant qubit) of the first set bit, -1 for x = 0.
  int first_set(Index x) const {
    if (x == 0) return -1;
    return std::countl_zero(std::uint64_t(x)) - (64 - n_);
  }
  // Mask of the qubits after the first `free_bits` ones.
  Index low_mask(int free_bits) const { return (Index(1) << (n_ - free_bits)) - 1; }

  Index row_for(Index c, Index y) const {
    if (c == Index(n_)) return 0;
    const int m = int(c);
    return (Index(1) << (n_ - 1 - m)) | (y & low_mask(m + 1));
  }

  // alpha, P and Q for a support element (x, y).
  SupportTerm term(Index x, Index y) const {
    const int level = first_set(x);
    const int s = level < 0 ? n_ : level + 1;
    double sign = 1.0;
    if (level >= 0 && ((y >> (n_ - 1 - level)) & 1)) sign = -1.0;
    const double alpha = sign / std::sqrt(std::ldexp(1.0, s));
    return {x, y, {}, Complex(alpha), std::ldexp(1.0, -s), 1.0 / (double(n_) + 1.0)};
  }

  Transition transition(Index x, Index y) const {
    const int level = first_set(x);
    const int s = level < 0 ? n_ : level + 1;
    double sign = 1.0;
    if (level >= 0 && ((y >> (n_ - 1 - level)) & 1)) sign = -1.0;
    const double root = std::sqrt(std::ldexp(1.0, s));
    return {y, Complex(sign * root), Complex(sign * (double(n_) + 1.0) / root)};
  }

  int n_;
};

}  // namespace

EpsPtr haar_wavelet(int qubits, NormPair pq) {
  if (qubits < 1 || qubits > 62) throw Error(ErrorCode::InvalidParameter, "qubit count out of range");
  // Cost of a support element with 2^s entries in its row:
  // (2^{s/2})^{1/p} ((n+1) 2^{-s/2})^{1/q}; b is the maximum over s = 1..n.
  double b = 0.0;
  for (int s = 1; s <= qubits; ++s) {
    const double half = std::sqrt(std::ldexp(1.0, s));
    b = std::max(b, std::pow(half, pq.inv_p()) * std::pow((qubits + 1.0) / half, pq.inv_q()));
  }
  if (pq.p() == 2.0) b = std::sqrt(qubits + 1.0);
  return std::make_shared<HaarOp>(qubits, b, pq);
}

}  // namespace pathsim
