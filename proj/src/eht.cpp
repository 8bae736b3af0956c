#include "pathsim/eht.hpp"

#include <cmath>

namespace pathsim {

double CtState::probability(Index i, double r) const {
  const double z = std::pow(norm(r), r);
  return std::pow(std::abs(amplitude(i)), r) / z;
}

ComplexVector CtState::dense() const {
  ComplexVector v(static_cast<Eigen::Index>(dim()));
  for (Index i = 0; i < dim(); ++i) v[Eigen::Index(i)] = amplitude(i);
  return v;
}

namespace {

constexpr double kNormTolerance = 1e-9;

// Sampling exponent used for a norm index; at infinity any full-support law
// works because the probability enters with exponent 0.
double law_exponent(double r) { return std::isinf(r) ? 1.0 : r; }

class BasisState final : public CtState {
 public:
  BasisState(Index dim, Index index) : dim_(dim), index_(index) {
    if (index >= dim) throw Error(ErrorCode::InvalidParameter, "basis index out of range");
  }
  Index dim() const override { return dim_; }
  Complex amplitude(Index i) const override { return i == index_ ? 1.0 : 0.0; }
  double norm(double) const override { return 1.0; }
  Index sample(double, RngStream&) const override { return index_; }
  double probability(Index i, double) const override { return i == index_ ? 1.0 : 0.0; }

 private:
  Index dim_, index_;
};

class ProductState final : public CtState {
 public:
  explicit ProductState(std::vector<std::vector<Complex>> factors) : factors_(std::move(factors)) {
    if (factors_.empty()) throw Error(ErrorCode::InvalidParameter, "product state needs factors");
    dim_ = 1;
    for (const auto& f : factors_) {
      if (f.empty()) throw Error(ErrorCode::InvalidParameter, "empty product factor");
      double s = 0.0;
      for (Complex a : f) s += std::norm(a);
      if (std::abs(std::sqrt(s) - 1.0) > kNormTolerance)
        throw Error(ErrorCode::NotNormalized, "product factor is not normalized");
      dim_ *= f.size();
    }
  }
  Index dim() const override { return dim_; }
  Complex amplitude(Index i) const override {
    Complex a = 1.0;
    for (auto it = factors_.rbegin(); it != factors_.rend(); ++it) {
      a *= (*it)[i % it->size()];
      i /= it->size();
    }
    return a;
  }
  double norm(double r) const override {
    double n = 1.0;
    for (const auto& f : factors_) n *= factor_norm(f, r);
    return n;
  }
  Index sample(double r, RngStream& rng) const override {
    Index i = 0;
    std::vector<double> w;
    for (const auto& f : factors_) {
      w.resize(f.size());
      for (std::size_t j = 0; j < f.size(); ++j) w[j] = std::pow(std::abs(f[j]), r);
      i = i * f.size() + sample_discrete(w, rng);
    }
    return i;
  }
  double probability(Index i, double r) const override {
    double p = 1.0;
    for (auto it = factors_.rbegin(); it != factors_.rend(); ++it) {
      const Index d = it->size();
      p *= std::pow(std::abs((*it)[i % d]), r) / std::pow(factor_norm(*it, r), r);
      i /= d;
    }
    return p;
  }

 private:
  static double factor_norm(const std::vector<Complex>& f, double r) {
    RealVector a(static_cast<Eigen::Index>(f.size()));
    for (std::size_t j = 0; j < f.size(); ++j) a[Eigen::Index(j)] = std::abs(f[j]);
    return lp_norm(a, r);
  }
  std::vector<std::vector<Complex>> factors_;
  Index dim_;
};

class PhaseState final : public CtState {
 public:
  PhaseState(Index dim, std::function<double(Index)> theta) : dim_(dim), theta_(std::move(theta)) {
    if (dim == 0) throw Error(ErrorCode::InvalidParameter, "state dimension must be positive");
  }
  Index dim() const override { return dim_; }
  Complex amplitude(Index i) const override {
    const double a = 1.0 / std::sqrt(double(dim_));
    return theta_ ? std::polar(a, theta_(i)) : Complex(a);
  }
  double norm(double r) const override {
    const double a = 1.0 / std::sqrt(double(dim_));
    return std::isinf(r) ? a : a * std::pow(double(dim_), 1.0 / r);
  }
  Index sample(double, RngStream& rng) const override { return Index(rng.below(dim_)); }
  double probability(Index, double) const override { return 1.0 / double(dim_); }

 private:
  Index dim_;
  std::function<double(Index)> theta_;
};

class VectorState final : public CtState {
 public:
  explicit VectorState(std::vector<Complex> a) : a_(std::move(a)) {
    if (a_.empty()) throw Error(ErrorCode::InvalidParameter, "state dimension must be positive");
    abs_.resize(Eigen::Index(a_.size()));
    for (std::size_t i = 0; i < a_.size(); ++i) {
      if (!std::isfinite(a_[i].real()) || !std::isfinite(a_[i].imag()))
        throw Error(ErrorCode::InvalidParameter, "amplitude is not finite");
      abs_[Eigen::Index(i)] = std::abs(a_[i]);
    }
    if (abs_.maxCoeff() > 0.0) {
      for (double r : {1.0, 2.0}) {
        std::vector<double> w(a_.size());
        for (std::size_t i = 0; i < a_.size(); ++i) w[i] = std::pow(abs_[Eigen::Index(i)], r);
        tables_.emplace_back(w);
      }
    }
  }
  Index dim() const override { return a_.size(); }
  Complex amplitude(Index i) const override { return a_[i]; }
  double norm(double r) const override { return lp_norm(abs_, r); }
  Index sample(double r, RngStream& rng) const override {
    if (tables_.empty()) throw Error(ErrorCode::ZeroVector, "cannot sample the zero vector");
    if (r == 1.0) return tables_[0].sample(rng);
    if (r == 2.0) return tables_[1].sample(rng);
    std::vector<double> w(a_.size());
    for (std::size_t i = 0; i < a_.size(); ++i) w[i] = std::pow(abs_[Eigen::Index(i)], r);
    return sample_discrete(w, rng);
  }

 private:
  std::vector<Complex> a_;
  RealVector abs_;
  std::vector<AliasTable> tables_;
};

Transition make_ratios(Complex alpha, double p, double q) {
  if (alpha == Complex(0.0)) return {0, Complex(0.0), Complex(0.0)};
  return {0, alpha / p, alpha / q};
}

class DyadState final : public EhtState {
 public:
  DyadState(CtPtr phi, CtPtr psi, NormPair pq, double bound)
      : EhtState(phi->dim(), psi->dim(), bound, pq),
        phi_(std::move(phi)),
        psi_(std::move(psi)),
        ep_(law_exponent(pq.p())),
        eq_(law_exponent(pq.q())),
        zp_(std::pow(psi_->norm(ep_), ep_)),
        zq_(std::pow(phi_->norm(eq_), eq_)) {}

  EndpointDraw sample_col(RngStream& rng) const override { return {psi_->sample(ep_, rng), 0}; }
  EndpointDraw sample_row(RngStream& rng) const override { return {phi_->sample(eq_, rng), 0}; }
  Transition ratios(Index m, Index n, std::uint64_t k) const override {
    Transition t = make_ratios(alpha(m, n, k), prob_col(n, k), prob_row(m, k));
    t.next = n;
    return t;
  }
  Complex alpha(Index m, Index n, std::uint64_t) const override {
    return phi_->amplitude(m) * std::conj(psi_->amplitude(n));
  }
  double prob_col(Index n, std::uint64_t) const override { return std::pow(std::abs(psi_->amplitude(n)), ep_) / zp_; }
  double prob_row(Index m, std::uint64_t) const override { return std::pow(std::abs(phi_->amplitude(m)), eq_) / zq_; }

 private:
  CtPtr phi_, psi_;
  double ep_, eq_, zp_, zq_;
};

class DensityState final : public EhtState {
 public:
  explicit DensityState(ComplexMatrix rho)
      : EhtState(Index(rho.rows()), Index(rho.cols()), 1.0, NormPair(2.0)), rho_(std::move(rho)) {
    std::vector<double> d(Index(rho_.rows()));
    for (Eigen::Index i = 0; i < rho_.rows(); ++i) d[Index(i)] = std::max(0.0, rho_(i, i).real());
    diag_ = AliasTable(d);
  }

  EndpointDraw sample_col(RngStream& rng) const override { return {diag_.sample(rng), 0}; }
  EndpointDraw sample_row(RngStream& rng) const override { return {diag_.sample(rng), 0}; }
  Transition ratios(Index m, Index n, std::uint64_t k) const override {
    const Complex a = alpha(m, n, k);
    const double pm = prob_row(m, k), pn = prob_col(n, k);
    if (std::abs(a) > std::sqrt(pm * pn) * (1.0 + 1e-9))
      throw Error(ErrorCode::NormViolation, "density entry violates |rho_mn|^2 <= rho_mm rho_nn");
    Transition t = make_ratios(a, pn, pm);
    t.next = n;
    return t;
  }
  Complex alpha(Index m, Index n, std::uint64_t) const override {
    return rho_(Eigen::Index(m), Eigen::Index(n));
  }
  double prob_col(Index n, std::uint64_t) const override { return diag_.probability(n); }
  double prob_row(Index m, std::uint64_t) const override { return diag_.probability(m); }

 private:
  ComplexMatrix rho_;
  AliasTable diag_;
};

class LowRankState final : public EhtState {
 public:
  LowRankState(std::vector<LowRankTerm> terms, NormPair pq, double w)
      : EhtState(terms.front().v->dim(), terms.front().u->dim(), w, pq),
        terms_(std::move(terms)),
        ep_(law_exponent(pq.p())),
        eq_(law_exponent(pq.q())) {
    std::vector<double> mix;
    for (const auto& t : terms_) {
      mix.push_back(std::abs(t.s) / w);
      zu_.push_back(std::pow(t.u->norm(ep_), ep_));
      zv_.push_back(std::pow(t.v->norm(eq_), eq_));
    }
    mix_ = AliasTable(mix);
  }

  EndpointDraw sample_col(RngStream& rng) const override {
    const Index i = mix_.sample(rng);
    return {terms_[i].u->sample(ep_, rng), 0};
  }
  EndpointDraw sample_row(RngStream& rng) const override {
    const Index i = mix_.sample(rng);
    return {terms_[i].v->sample(eq_, rng), 0};
  }
  Transition ratios(Index m, Index n, std::uint64_t k) const override {
    Transition t = make_ratios(alpha(m, n, k), prob_col(n, k), prob_row(m, k));
    t.next = n;
    return t;
  }
  Complex alpha(Index m, Index n, std::uint64_t) const override {
    Complex a = 0.0;
    for (const auto& t : terms_) a += t.s * t.v->amplitude(m) * t.u->amplitude(n);
    return a;
  }
  double prob_col(Index n, std::uint64_t) const override {
    double p = 0.0;
    for (Index i = 0; i < terms_.size(); ++i)
      p += mix_.probability(i) * std::pow(std::abs(terms_[i].u->amplitude(n)), ep_) / zu_[i];
    return p;
  }
  double prob_row(Index m, std::uint64_t) const override {
    double p = 0.0;
    for (Index i = 0; i < terms_.size(); ++i)
      p += mix_.probability(i) * std::pow(std::abs(terms_[i].v->amplitude(m)), eq_) / zv_[i];
    return p;
  }

 private:
  std::vector<LowRankTerm> terms_;
  double ep_, eq_;
  std::vector<double> zu_, zv_;
  AliasTable mix_;
};

class HeadOperator final : public EpsOperator {
 public:
  explicit HeadOperator(EhtPtr s) : EpsOperator(s->rows(), s->cols(), s->bound(), s->norms()), s_(std::move(s)) {}

  std::optional<Transition> sample_forward(Index m, RngStream& rng) const override {
    const EndpointDraw d = s_->sample_col(rng);
    Transition t = s_->ratios(m, d.index, d.k);
    t.next = d.index;
    return t;
  }
  std::optional<Transition> sample_backward(Index n, RngStream& rng) const override {
    const EndpointDraw d = s_->sample_row(rng);
    Transition t = s_->ratios(d.index, n, d.k);
    t.next = d.index;
    return t;
  }
  std::vector<SupportTerm> enumerate_row(Index m, const EnumerationLimits&) const override {
    std::vector<SupportTerm> out;
    for (std::uint64_t k = 0; k < s_->k_count(); ++k)
      for (Index n = 0; n < cols(); ++n) {
        const double p = s_->prob_col(n, k);
        if (p > 0.0) out.push_back({m, n, {std::int64_t(k)}, s_->alpha(m, n, k), p, s_->prob_row(m, k)});
      }
    return out;
  }
  std::vector<SupportTerm> enumerate_col(Index n, const EnumerationLimits&) const override {
    std::vector<SupportTerm> out;
    for (std::uint64_t k = 0; k < s_->k_count(); ++k)
      for (Index m = 0; m < rows(); ++m) {
        const double q = s_->prob_row(m, k);
        if (q > 0.0) out.push_back({m, n, {std::int64_t(k)}, s_->alpha(m, n, k), s_->prob_col(n, k), q});
      }
    return out;
  }
  ComplexMatrix dense() const override { return s_->dense(); }

 private:
  EhtPtr s_;
};

void check_dense_cap(Index rows, Index cols) {
  if (rows > kDefaultOracleCap || cols > kDefaultOracleCap)
    throw Error(ErrorCode::OracleCapExceeded, "state too large for dense evaluation");
}

}  // namespace

CtPtr basis_state(Index dim, Index index) { return std::make_shared<BasisState>(dim, index); }
CtPtr product_state(std::vector<std::vector<Complex>> factors) {
  return std::make_shared<ProductState>(std::move(factors));
}
CtPtr phase_state(Index dim, std::function<double(Index)> theta) {
  if (!theta) throw Error(ErrorCode::InvalidParameter, "missing phase function");
  return std::make_shared<PhaseState>(dim, std::move(theta));
}
CtPtr uniform_state(Index dim) { return std::make_shared<PhaseState>(dim, nullptr); }
CtPtr vector_state(std::vector<Complex> amplitudes) { return std::make_shared<VectorState>(std::move(amplitudes)); }

std::vector<StateTerm> EhtState::enumerate() const {
  check_dense_cap(rows(), cols());
  std::vector<StateTerm> out;
  for (std::uint64_t k = 0; k < k_count(); ++k)
    for (Index m = 0; m < rows(); ++m)
      for (Index n = 0; n < cols(); ++n) {
        const double p = prob_col(n, k), q = prob_row(m, k);
        if (p > 0.0 || q > 0.0) out.push_back({m, n, k, alpha(m, n, k), p, q});
      }
  return out;
}

ComplexMatrix EhtState::dense() const {
  check_dense_cap(rows(), cols());
  ComplexMatrix a = ComplexMatrix::Zero(Eigen::Index(rows()), Eigen::Index(cols()));
  for (std::uint64_t k = 0; k < k_count(); ++k)
    for (Index m = 0; m < rows(); ++m)
      for (Index n = 0; n < cols(); ++n) a(Eigen::Index(m), Eigen::Index(n)) += alpha(m, n, k);
  return a;
}

EhtPtr dyad(CtPtr phi, CtPtr psi, NormPair pq) {
  if (!phi || !psi) throw Error(ErrorCode::InvalidParameter, "null state");
  const double np = psi->norm(pq.p()), nq = phi->norm(pq.q());
  if (!(np > 0.0) || !(nq > 0.0)) throw Error(ErrorCode::ZeroVector, "dyad factor is the zero vector");
  return std::make_shared<DyadState>(std::move(phi), std::move(psi), pq, np * nq);
}

EhtPtr density(ComplexMatrix rho) {
  if (rho.rows() != rho.cols() || rho.rows() == 0)
    throw Error(ErrorCode::DimensionMismatch, "density matrix must be square");
  if (!rho.allFinite()) throw Error(ErrorCode::InvalidParameter, "density entries must be finite");
  const Complex tr = rho.trace();
  if (std::abs(tr - Complex(1.0)) > kNormTolerance) throw Error(ErrorCode::NotNormalized, "density trace is not 1");
  for (Eigen::Index i = 0; i < rho.rows(); ++i)
    if (rho(i, i).real() < -kNormTolerance || std::abs(rho(i, i).imag()) > kNormTolerance)
      throw Error(ErrorCode::NormViolation, "density diagonal must be real and nonnegative");
  return std::make_shared<DensityState>(std::move(rho));
}

EhtPtr low_rank(std::vector<LowRankTerm> terms, NormPair pq) {
  std::vector<LowRankTerm> kept;
  double w = 0.0;
  for (auto& t : terms) {
    if (!t.u || !t.v) throw Error(ErrorCode::InvalidParameter, "null state");
    if (std::abs(std::abs(t.u->norm(pq.p())) - 1.0) > kNormTolerance ||
        std::abs(std::abs(t.v->norm(pq.q())) - 1.0) > kNormTolerance)
      throw Error(ErrorCode::NotNormalized, "low-rank factors need ||u||_p = ||v||_q = 1");
    if (!kept.empty() && (t.u->dim() != kept.front().u->dim() || t.v->dim() != kept.front().v->dim()))
      throw Error(ErrorCode::DimensionMismatch, "low-rank factors differ in dimension");
    if (t.s == Complex(0.0)) continue;
    w += std::abs(t.s);
    kept.push_back(std::move(t));
  }
  if (kept.empty()) throw Error(ErrorCode::ZeroVector, "low-rank decomposition is zero");
  return std::make_shared<LowRankState>(std::move(kept), pq, w);
}

EpsPtr as_operator(EhtPtr sigma) {
  if (!sigma) throw Error(ErrorCode::InvalidParameter, "null state");
  return std::make_shared<HeadOperator>(std::move(sigma));
}

StateCertificate certify(const EhtState& sigma, const ComplexMatrix& reference) {
  if (Index(reference.rows()) != sigma.rows() || Index(reference.cols()) != sigma.cols())
    throw Error(ErrorCode::DimensionMismatch, "reference shape differs from the state");
  StateCertificate c;
  c.max_alpha_error = (sigma.dense() - reference).cwiseAbs().maxCoeff();
  for (const auto& t : sigma.enumerate())
    c.max_cost_ratio = std::max(c.max_cost_ratio, cost_ratio(t.alpha, t.prob_p, t.prob_q, sigma.norms()));
  double sp = 0.0, sq = 0.0;
  for (std::uint64_t k = 0; k < sigma.k_count(); ++k) {
    for (Index n = 0; n < sigma.cols(); ++n) sp += sigma.prob_col(n, k);
    for (Index m = 0; m < sigma.rows(); ++m) sq += sigma.prob_row(m, k);
  }
  c.p_normalization_error = std::abs(sp - 1.0);
  c.q_normalization_error = std::abs(sq - 1.0);
  return c;
}

}  // namespace pathsim
