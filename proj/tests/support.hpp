#pragma once

#include <cmath>
#include <complex>
#include <random>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "pathsim/engine.hpp"

namespace pathsim::test {

inline ComplexMatrix random_complex(Index rows, Index cols, std::mt19937_64& gen, double scale = 1.0) {
  std::normal_distribution<double> d(0.0, 1.0);
  ComplexMatrix a(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) a(i, j) = scale * Complex(d(gen), d(gen));
  return a;
}

inline RealMatrix random_nonnegative(Index rows, Index cols, std::mt19937_64& gen, double zero_fraction = 0.0) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  RealMatrix a(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) a(i, j) = u(gen) < zero_fraction ? 0.0 : u(gen);
  return a;
}

inline ComplexMatrix random_unitary(Index n, std::mt19937_64& gen) {
  Eigen::HouseholderQR<ComplexMatrix> qr(random_complex(n, n, gen));
  return qr.householderQ();
}

inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline ComplexMatrix basis_projector(Index n, Index i) {
  ComplexMatrix p = ComplexMatrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  p(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = 1.0;
  return p;
}

// Top singular value via Eigen's SVD.
inline double svd_norm(const RealMatrix& b) {
  Eigen::JacobiSVD<RealMatrix> svd(b);
  return svd.singularValues()(0);
}

// Rebuilds A from sampled transitions alone: for each row m (column n),
// E[[next = n] * ratio_p] = A_mn under P(.|m), and likewise backward with ratio_q.
// Every entry must sit within 5 standard errors of the reference; deterministic
// rows and columns must match to 1e-12.
inline void expect_sampled_reconstruction(const EpsOperator& op, const ComplexMatrix& ref, int draws,
                                          std::uint64_t seed = 7) {
  ASSERT_EQ(Index(ref.rows()), op.rows());
  ASSERT_EQ(Index(ref.cols()), op.cols());
  RngStream rng(seed, 0);
  const double inv_p = op.norms().inv_p();
  for (int dir = 0; dir < 2; ++dir) {
    // The forward chain is never run when p = inf and the backward chain never when p = 1.
    if (dir == 0 && inv_p == 0.0) continue;
    if (dir == 1 && inv_p == 1.0) continue;
    const Index outer = dir == 0 ? op.rows() : op.cols();
    const Index inner = dir == 0 ? op.cols() : op.rows();
    for (Index a = 0; a < outer; ++a) {
      std::vector<Complex> sum(inner, 0.0);
      std::vector<double> sum_sq(inner, 0.0);
      for (int t = 0; t < draws; ++t) {
        auto s = dir == 0 ? op.sample_forward(a, rng) : op.sample_backward(a, rng);
        if (!s) continue;
        ASSERT_LT(s->next, inner);
        const Complex r = dir == 0 ? s->ratio_p : s->ratio_q;
        ASSERT_TRUE(std::isfinite(r.real()) && std::isfinite(r.imag()));
        ASSERT_EQ(s->ratio_p == Complex(0.0), s->ratio_q == Complex(0.0));
        sum[s->next] += r;
        sum_sq[s->next] += std::norm(r);
      }
      for (Index c = 0; c < inner; ++c) {
        const Complex mean = sum[c] / double(draws);
        const double var = std::max(0.0, sum_sq[c] / draws - std::norm(mean));
        const double se = std::sqrt(var / draws);
        const Complex want = dir == 0 ? ref(Eigen::Index(a), Eigen::Index(c)) : ref(Eigen::Index(c), Eigen::Index(a));
        EXPECT_LE(std::abs(mean - want), 5.0 * se + 1e-12)
            << (dir == 0 ? "forward" : "backward") << " from " << a << " to " << c;
      }
    }
  }
}

// Every sampled transition must be one of the enumerated support terms.
inline void expect_samples_in_support(const EpsOperator& op, int draws, std::uint64_t seed = 11) {
  RngStream rng(seed, 0);
  for (Index m = 0; m < op.rows(); ++m) {
    const auto terms = op.enumerate_row(m, {});
    for (int t = 0; t < draws; ++t) {
      auto s = op.sample_forward(m, rng);
      if (!s) {
        EXPECT_TRUE(terms.empty());
        continue;
      }
      bool found = false;
      for (const auto& term : terms)
        if (term.col == s->next && term.prob_p > 0.0 &&
            std::abs(term.alpha / term.prob_p - s->ratio_p) <= 1e-9 * (1.0 + std::abs(s->ratio_p)))
          found = true;
      EXPECT_TRUE(found) << "forward " << m << " -> " << s->next;
    }
  }
  for (Index n = 0; n < op.cols(); ++n) {
    const auto terms = op.enumerate_col(n, {});
    for (int t = 0; t < draws; ++t) {
      auto s = op.sample_backward(n, rng);
      if (!s) {
        EXPECT_TRUE(terms.empty());
        continue;
      }
      bool found = false;
      for (const auto& term : terms)
        if (term.row == s->next && term.prob_q > 0.0 &&
            std::abs(term.alpha / term.prob_q - s->ratio_q) <= 1e-9 * (1.0 + std::abs(s->ratio_q)))
          found = true;
      EXPECT_TRUE(found) << "backward " << n << " -> " << s->next;
    }
  }
}

inline void expect_certified(const EpsOperator& op, const ComplexMatrix& ref, double lower_tol = 1e-6) {
  const CertificateReport c = certify(op, ref);
  EXPECT_LE(c.max_alpha_error, 1e-12);
  EXPECT_LE(c.max_cost_ratio, op.bound() + 1e-9);
  EXPECT_LE(c.max_p_normalization_error, 1e-12);
  EXPECT_LE(c.max_q_normalization_error, 1e-12);
  EXPECT_TRUE(c.consistent);
  const double qn = induced_norm(entrywise_abs(ref), op.norms().q()).value;
  EXPECT_GE(op.bound(), qn - lower_tol);
}

// Pearson chi-square statistic against expected probabilities.
inline double chi_square(const std::vector<std::uint64_t>& counts, const std::vector<double>& probs) {
  double total = 0.0;
  for (auto c : counts) total += double(c);
  double chi = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double e = probs[i] * total;
    if (e > 0.0) chi += (double(counts[i]) - e) * (double(counts[i]) - e) / e;
    else EXPECT_EQ(counts[i], 0u);
  }
  return chi;
}

// Upper 0.001 quantile of chi-square with k degrees of freedom (Wilson-Hilferty).
inline double chi_square_critical(int k) {
  const double z = 3.090232;
  const double a = 2.0 / (9.0 * k);
  return k * std::pow(1.0 - a + z * std::sqrt(a), 3.0);
}

}  // namespace pathsim::test
