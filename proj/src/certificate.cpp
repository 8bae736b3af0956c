#include <cmath>
#include <map>
#include <tuple>

#include "pathsim/eps.hpp"

namespace pathsim {

CertificateReport certify(const EpsOperator& op, const ComplexMatrix& reference, const EnumerationLimits& lim) {
  if (Index(reference.rows()) != op.rows() || Index(reference.cols()) != op.cols())
    throw Error(ErrorCode::DimensionMismatch, "reference shape differs from the operator");
  CertificateReport rep;
  using Key = std::tuple<Index, Index, KTag>;
  std::map<Key, SupportTerm> seen;
  ComplexMatrix acc = ComplexMatrix::Zero(reference.rows(), reference.cols());

  for (Index m = 0; m < op.rows(); ++m) {
    auto terms = op.enumerate_row(m, lim);
    double total = 0.0;
    for (auto& t : terms) {
      if (t.row != m) rep.consistent = false;
      total += t.prob_p;
      acc(Eigen::Index(t.row), Eigen::Index(t.col)) += t.alpha;
      rep.max_cost_ratio = std::max(rep.max_cost_ratio, cost_ratio(t.alpha, t.prob_p, t.prob_q, op.norms()));
      // Zero-alpha terms only pad the sampling law; they need no counterpart.
      if (t.alpha != Complex(0.0) && !seen.emplace(Key{t.row, t.col, t.k}, t).second) rep.consistent = false;
    }
    if (!terms.empty()) rep.max_p_normalization_error = std::max(rep.max_p_normalization_error, std::abs(total - 1.0));
  }
  rep.terms = seen.size();
  rep.max_alpha_error = (acc - reference).cwiseAbs().maxCoeff();

  std::size_t matched = 0;
  for (Index n = 0; n < op.cols(); ++n) {
    auto terms = op.enumerate_col(n, lim);
    double total = 0.0;
    for (auto& t : terms) {
      total += t.prob_q;
      if (t.alpha == Complex(0.0)) continue;
      auto it = seen.find(Key{t.row, t.col, t.k});
      if (t.col != n || it == seen.end()) {
        rep.consistent = false;
        continue;
      }
      const auto& f = it->second;
      const double tol = 1e-12;
      if (std::abs(f.alpha - t.alpha) > tol * std::max(1.0, std::abs(t.alpha)) ||
          std::abs(f.prob_p - t.prob_p) > tol || std::abs(f.prob_q - t.prob_q) > tol)
        rep.consistent = false;
      ++matched;
    }
    if (!terms.empty()) rep.max_q_normalization_error = std::max(rep.max_q_normalization_error, std::abs(total - 1.0));
  }
  if (matched != seen.size()) rep.consistent = false;
  return rep;
}

}  // namespace pathsim
