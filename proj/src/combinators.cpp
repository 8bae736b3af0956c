#include <cmath>
#include <map>

#include "pathsim/eps.hpp"

namespace pathsim {
namespace {

void check_limit(std::size_t n, const EnumerationLimits& lim) {
  if (n > lim.max_terms) throw Error(ErrorCode::InvalidParameter, "support enumeration exceeds max_terms");
}

class ScaleOp final : public EpsOperator {
 public:
  ScaleOp(Complex s, EpsPtr a)
      : EpsOperator(a->rows(), a->cols(), std::abs(s) * a->bound(), a->norms()), s_(s), a_(std::move(a)) {}

  std::optional<Transition> sample_forward(Index m, RngStream& rng) const override {
    return scaled(a_->sample_forward(m, rng));
  }
  std::optional<Transition> sample_backward(Index n, RngStream& rng) const override {
    return scaled(a_->sample_backward(n, rng));
  }
  std::vector<SupportTerm> enumerate_row(Index m, const EnumerationLimits& lim) const override {
    return scaled(a_->enumerate_row(m, lim));
  }
  std::vector<SupportTerm> enumerate_col(Index n, const EnumerationLimits& lim) const override {
    return scaled(a_->enumerate_col(n, lim));
  }
  ComplexMatrix dense() const override { return s_ * a_->dense(); }
  std::optional<double> structured_imax() const override {
    if (auto v = a_->structured_imax()) return std::abs(s_) * *v;
    return std::nullopt;
  }

 private:
  std::optional<Transition> scaled(std::optional<Transition> t) const {
    if (t) {
      t->ratio_p *= s_;
      t->ratio_q *= s_;
    }
    return t;
  }
  std::vector<SupportTerm> scaled(std::vector<SupportTerm> terms) const {
    for (auto& t : terms) t.alpha *= s_;
    return terms;
  }
  Complex s_;
  EpsPtr a_;
};

// Transpose (conjugate = false) or adjoint (conjugate = true).
class FlipOp final : public EpsOperator {
 public:
  FlipOp(EpsPtr a, bool conjugate)
      : EpsOperator(a->cols(), a->rows(), a->bound(), a->norms().swapped()),
        a_(std::move(a)),
        conjugate_(conjugate) {}

  std::optional<Transition> sample_forward(Index n, RngStream& rng) const override {
    return flipped(a_->sample_backward(n, rng));
  }
  std::optional<Transition> sample_backward(Index m, RngStream& rng) const override {
    return flipped(a_->sample_forward(m, rng));
  }
  std::vector<SupportTerm> enumerate_row(Index n, const EnumerationLimits& lim) const override {
    return flipped(a_->enumerate_col(n, lim));
  }
  std::vector<SupportTerm> enumerate_col(Index m, const EnumerationLimits& lim) const override {
    return flipped(a_->enumerate_row(m, lim));
  }
  ComplexMatrix dense() const override {
    return conjugate_ ? ComplexMatrix(a_->dense().adjoint()) : ComplexMatrix(a_->dense().transpose());
  }
  // ||abs(A)^T||_p = ||abs(A)||_q, and the flipped operator is measured with q' = p.
  std::optional<double> structured_imax() const override { return a_->structured_imax(); }

 private:
  Complex c(Complex z) const { return conjugate_ ? std::conj(z) : z; }
  std::optional<Transition> flipped(std::optional<Transition> t) const {
    if (!t) return t;
    return Transition{t->next, c(t->ratio_q), c(t->ratio_p)};
  }
  std::vector<SupportTerm> flipped(std::vector<SupportTerm> terms) const {
    for (auto& t : terms) {
      std::swap(t.row, t.col);
      std::swap(t.prob_p, t.prob_q);
      t.alpha = c(t.alpha);
    }
    return terms;
  }
  EpsPtr a_;
  bool conjugate_;
};

class SumOp final : public EpsOperator {
 public:
  SumOp(std::vector<SumTerm> terms, std::vector<double> weights, double bound)
      : EpsOperator(terms.front().op->rows(), terms.front().op->cols(), bound, terms.front().op->norms()),
        terms_(std::move(terms)),
        weights_(std::move(weights)) {
    for (double w : weights_) total_ += w;
  }

  std::optional<Transition> sample_forward(Index m, RngStream& rng) const override {
    if (!(total_ > 0.0)) return std::nullopt;
    const Index l = sample_discrete(weights_, rng);
    return weighted(l, terms_[l].op->sample_forward(m, rng));
  }
  std::optional<Transition> sample_backward(Index n, RngStream& rng) const override {
    if (!(total_ > 0.0)) return std::nullopt;
    const Index l = sample_discrete(weights_, rng);
    return weighted(l, terms_[l].op->sample_backward(n, rng));
  }
  std::vector<SupportTerm> enumerate_row(Index m, const EnumerationLimits& lim) const override {
    return gather([&](const EpsOperator& op) { return op.enumerate_row(m, lim); }, lim);
  }
  std::vector<SupportTerm> enumerate_col(Index n, const EnumerationLimits& lim) const override {
    return gather([&](const EpsOperator& op) { return op.enumerate_col(n, lim); }, lim);
  }
  ComplexMatrix dense() const override {
    ComplexMatrix a = ComplexMatrix::Zero(Eigen::Index(rows()), Eigen::Index(cols()));
    for (const auto& t : terms_)
      if (t.s != Complex(0.0)) a += t.s * t.op->dense();
    return a;
  }

 private:
  std::optional<Transition> weighted(Index l, std::optional<Transition> t) const {
    if (t) {
      const Complex f = terms_[l].s / weights_[l];
      t->ratio_p *= f;
      t->ratio_q *= f;
    }
    return t;
  }
  template <class F>
  std::vector<SupportTerm> gather(F&& f, const EnumerationLimits& lim) const {
    std::vector<SupportTerm> out;
    for (Index l = 0; l < terms_.size(); ++l) {
      if (!(weights_[l] > 0.0)) continue;
      for (auto& t : f(*terms_[l].op)) {
        t.alpha *= terms_[l].s;
        t.prob_p *= weights_[l];
        t.prob_q *= weights_[l];
        t.k.insert(t.k.begin(), std::int64_t(l));
        out.push_back(std::move(t));
      }
      check_limit(out.size(), lim);
    }
    return out;
  }

  std::vector<SumTerm> terms_;
  std::vector<double> weights_;
  double total_ = 0.0;
};

// Expands a chain of factors into full-support terms. Tags list, per factor,
// the length of its own tag, the tag, and then the index it leads to.
class ChainEnumerator {
 public:
  ChainEnumerator(const std::vector<EpsPtr>& factors, const EnumerationLimits& lim)
      : factors_(factors), lim_(lim), chosen_(factors.size()) {}

  std::vector<SupportTerm> from_row(Index m) {
    forward(0, m);
    return std::move(out_);
  }
  std::vector<SupportTerm> from_col(Index n) {
    backward(factors_.size(), n);
    return std::move(out_);
  }

 private:
  void forward(std::size_t j, Index at) {
    if (j == factors_.size()) return emit();
    for (auto& t : factors_[j]->enumerate_row(at, lim_)) {
      chosen_[j] = t;
      forward(j + 1, t.col);
    }
  }
  void backward(std::size_t j, Index at) {
    if (j == 0) return emit();
    for (auto& t : factors_[j - 1]->enumerate_col(at, lim_)) {
      chosen_[j - 1] = t;
      backward(j - 1, t.row);
    }
  }
  void emit() {
    SupportTerm s{chosen_.front().row, chosen_.back().col, {}, Complex(1.0), 1.0, 1.0};
    for (std::size_t j = 0; j < chosen_.size(); ++j) {
      const auto& t = chosen_[j];
      s.alpha *= t.alpha;
      s.prob_p *= t.prob_p;
      s.prob_q *= t.prob_q;
      s.k.push_back(std::int64_t(t.k.size()));
      s.k.insert(s.k.end(), t.k.begin(), t.k.end());
      if (j + 1 < chosen_.size()) s.k.push_back(std::int64_t(t.col));
    }
    out_.push_back(std::move(s));
    check_limit(out_.size(), lim_);
  }

  const std::vector<EpsPtr>& factors_;
  const EnumerationLimits& lim_;
  std::vector<SupportTerm> chosen_;
  std::vector<SupportTerm> out_;
};

class ProductOp final : public EpsOperator {
 public:
  ProductOp(std::vector<EpsPtr> factors, double bound)
      : EpsOperator(factors.front()->rows(), factors.back()->cols(), bound, factors.front()->norms()),
        factors_(std::move(factors)) {}

  std::optional<Transition> sample_forward(Index m, RngStream& rng) const override {
    Transition acc{m, Complex(1.0), Complex(1.0)};
    for (const auto& f : factors_) {
      auto t = f->sample_forward(acc.next, rng);
      if (!t) return std::nullopt;
      acc = {t->next, acc.ratio_p * t->ratio_p, acc.ratio_q * t->ratio_q};
    }
    return acc;
  }
  std::optional<Transition> sample_backward(Index n, RngStream& rng) const override {
    Transition acc{n, Complex(1.0), Complex(1.0)};
    for (auto it = factors_.rbegin(); it != factors_.rend(); ++it) {
      auto t = (*it)->sample_backward(acc.next, rng);
      if (!t) return std::nullopt;
      acc = {t->next, acc.ratio_p * t->ratio_p, acc.ratio_q * t->ratio_q};
    }
    return acc;
  }
  std::vector<SupportTerm> enumerate_row(Index m, const EnumerationLimits& lim) const override {
    return ChainEnumerator(factors_, lim).from_row(m);
  }
  std::vector<SupportTerm> enumerate_col(Index n, const EnumerationLimits& lim) const override {
    return ChainEnumerator(factors_, lim).from_col(n);
  }
  ComplexMatrix dense() const override {
    ComplexMatrix a = factors_.front()->dense();
    for (std::size_t j = 1; j < factors_.size(); ++j) a = a * factors_[j]->dense();
    return a;
  }

 private:
  std::vector<EpsPtr> factors_;
};

class ExpOp final : public EpsOperator {
 public:
  explicit ExpOp(EpsPtr a)
      : EpsOperator(a->rows(), a->cols(), std::exp(a->bound()), a->norms()), a_(std::move(a)) {}

  std::optional<Transition> sample_forward(Index m, RngStream& rng) const override {
    const std::uint64_t l = sample_poisson_like_tail(a_->bound(), rng);
    Transition acc{m, Complex(factor(l)), Complex(factor(l))};
    for (std::uint64_t i = 0; i < l; ++i) {
      auto t = a_->sample_forward(acc.next, rng);
      if (!t) return std::nullopt;
      acc = {t->next, acc.ratio_p * t->ratio_p, acc.ratio_q * t->ratio_q};
    }
    return acc;
  }
  std::optional<Transition> sample_backward(Index n, RngStream& rng) const override {
    const std::uint64_t l = sample_poisson_like_tail(a_->bound(), rng);
    Transition acc{n, Complex(factor(l)), Complex(factor(l))};
    for (std::uint64_t i = 0; i < l; ++i) {
      auto t = a_->sample_backward(acc.next, rng);
      if (!t) return std::nullopt;
      acc = {t->next, acc.ratio_p * t->ratio_p, acc.ratio_q * t->ratio_q};
    }
    return acc;
  }
  std::vector<SupportTerm> enumerate_row(Index m, const EnumerationLimits& lim) const override {
    return series(lim, [&](ChainEnumerator& c) { return c.from_row(m); }, m);
  }
  std::vector<SupportTerm> enumerate_col(Index n, const EnumerationLimits& lim) const override {
    return series(lim, [&](ChainEnumerator& c) { return c.from_col(n); }, n);
  }
  ComplexMatrix dense() const override { return dense_exp(a_->dense()); }

 private:
  // s_l / W(l) = e^b / b^l.
  double factor(std::uint64_t l) const {
    const double b = a_->bound();
    return l == 0 ? std::exp(b) : std::exp(b) / std::pow(b, double(l));
  }

  // Truncates where the Poisson tail is below lim.exp_tail; the sampler never truncates.
  template <class F>
  std::vector<SupportTerm> series(const EnumerationLimits& lim, F&& chain, Index start) const {
    const double b = a_->bound();
    std::vector<SupportTerm> out;
    double w = std::exp(-b);  // W(l)
    double inv_fact = 1.0;
    for (std::uint64_t l = 0;; ++l) {
      if (w > 0.0) {
        if (l == 0) {
          out.push_back({start, start, {0}, Complex(1.0), w, w});
        } else {
          std::vector<EpsPtr> copies(l, a_);
          ChainEnumerator c(copies, lim);
          for (auto& t : chain(c)) {
            t.alpha *= inv_fact;
            t.prob_p *= w;
            t.prob_q *= w;
            t.k.insert(t.k.begin(), std::int64_t(l));
            out.push_back(std::move(t));
          }
          check_limit(out.size(), lim);
        }
      }
      const double next = w * b / double(l + 1);
      // Tail bound sum_{j>l} W(j) <= W(l+1) / (1 - b/(l+2)) once l + 2 > b.
      if (double(l + 2) > b && (next == 0.0 || next / (1.0 - b / double(l + 2)) < lim.exp_tail)) break;
      w = next;
      inv_fact /= double(l + 1);
    }
    return out;
  }

  EpsPtr a_;
};

class BlockDiagonalOp final : public EpsOperator {
 public:
  BlockDiagonalOp(std::vector<EpsPtr> blocks, LayoutPtr layout, double bound)
      : EpsOperator(layout->rows(), layout->cols(), bound, blocks.front()->norms()),
        blocks_(std::move(blocks)),
        layout_(std::move(layout)) {}

  std::optional<Transition> sample_forward(Index m, RngStream& rng) const override {
    const BlockIndex b = layout_->split_row(m);
    auto t = blocks_[b.block]->sample_forward(b.local, rng);
    if (t) t->next = layout_->join_col({b.block, t->next});
    return t;
  }
  std::optional<Transition> sample_backward(Index n, RngStream& rng) const override {
    const BlockIndex b = layout_->split_col(n);
    auto t = blocks_[b.block]->sample_backward(b.local, rng);
    if (t) t->next = layout_->join_row({b.block, t->next});
    return t;
  }
  std::vector<SupportTerm> enumerate_row(Index m, const EnumerationLimits& lim) const override {
    const BlockIndex b = layout_->split_row(m);
    return relabel(b.block, blocks_[b.block]->enumerate_row(b.local, lim));
  }
  std::vector<SupportTerm> enumerate_col(Index n, const EnumerationLimits& lim) const override {
    const BlockIndex b = layout_->split_col(n);
    return relabel(b.block, blocks_[b.block]->enumerate_col(b.local, lim));
  }
  ComplexMatrix dense() const override {
    ComplexMatrix a = ComplexMatrix::Zero(Eigen::Index(rows()), Eigen::Index(cols()));
    std::map<const EpsOperator*, ComplexMatrix> cache;
    for (Index r = 0; r < blocks_.size(); ++r) {
      auto it = cache.find(blocks_[r].get());
      if (it == cache.end()) it = cache.emplace(blocks_[r].get(), blocks_[r]->dense()).first;
      const ComplexMatrix& blk = it->second;
      for (Eigen::Index i = 0; i < blk.rows(); ++i)
        for (Eigen::Index j = 0; j < blk.cols(); ++j)
          if (blk(i, j) != Complex(0.0))
            a(Eigen::Index(layout_->join_row({r, Index(i)})), Eigen::Index(layout_->join_col({r, Index(j)}))) =
                blk(i, j);
    }
    return a;
  }
  std::optional<double> structured_imax() const override {
    double v = 0.0;
    for (const auto& b : blocks_) {
      auto x = b->structured_imax();
      if (!x) return std::nullopt;
      v = std::max(v, *x);
    }
    return v;
  }

 private:
  std::vector<SupportTerm> relabel(Index r, std::vector<SupportTerm> terms) const {
    for (auto& t : terms) {
      t.row = layout_->join_row({r, t.row});
      t.col = layout_->join_col({r, t.col});
    }
    return terms;
  }
  std::vector<EpsPtr> blocks_;
  LayoutPtr layout_;
};

void require(const EpsPtr& a) {
  if (!a) throw Error(ErrorCode::InvalidParameter, "null operator");
}

}  // namespace

double cost_ratio(Complex alpha, double prob_p, double prob_q, NormPair pq) {
  const double a = std::abs(alpha);
  if (a == 0.0) return 0.0;
  const double fp = pq.inv_p() == 0.0 ? 1.0 : std::pow(prob_p, pq.inv_p());
  const double fq = pq.inv_q() == 0.0 ? 1.0 : std::pow(prob_q, pq.inv_q());
  if (fp == 0.0 || fq == 0.0) return kInf;
  return a / (fp * fq);
}

EpsPtr scale(Complex s, EpsPtr a) {
  require(a);
  return std::make_shared<ScaleOp>(s, std::move(a));
}

EpsPtr adjoint(EpsPtr a) {
  require(a);
  return std::make_shared<FlipOp>(std::move(a), true);
}

EpsPtr transpose(EpsPtr a) {
  require(a);
  return std::make_shared<FlipOp>(std::move(a), false);
}

EpsPtr sum(std::vector<SumTerm> terms, std::optional<std::vector<double>> weights) {
  if (terms.empty()) throw Error(ErrorCode::InvalidParameter, "sum needs at least one term");
  for (const auto& t : terms) {
    require(t.op);
    if (t.op->rows() != terms.front().op->rows() || t.op->cols() != terms.front().op->cols())
      throw Error(ErrorCode::ShapeMismatch, "sum terms differ in shape");
    if (!(t.op->norms() == terms.front().op->norms()))
      throw Error(ErrorCode::ShapeMismatch, "sum terms use different norm pairs");
    if (!std::isfinite(t.s.real()) || !std::isfinite(t.s.imag()))
      throw Error(ErrorCode::InvalidParameter, "sum coefficient is not finite");
  }
  const Index n = terms.size();
  double total = 0.0;
  for (const auto& t : terms) total += std::abs(t.s) * t.op->bound();
  std::vector<double> w(n, 0.0);
  double b = total;
  if (!weights) {
    if (total > 0.0)
      for (Index l = 0; l < n; ++l) w[l] = std::abs(terms[l].s) * terms[l].op->bound() / total;
  } else {
    if (weights->size() != n) throw Error(ErrorCode::InvalidWeights, "weight count differs from term count");
    double s = 0.0;
    for (double x : *weights) {
      if (!(x >= 0.0) || !std::isfinite(x)) throw Error(ErrorCode::InvalidWeights, "weights must be nonnegative");
      s += x;
    }
    if (std::abs(s - 1.0) > 1e-9) throw Error(ErrorCode::InvalidWeights, "weights must sum to 1");
    w = *weights;
    b = 0.0;
    for (Index l = 0; l < n; ++l) {
      const double c = std::abs(terms[l].s) * terms[l].op->bound();
      if (c == 0.0) continue;
      if (w[l] == 0.0) throw Error(ErrorCode::InvalidWeights, "a nonzero term has zero weight");
      b = std::max(b, c / w[l]);
    }
  }
  return std::make_shared<SumOp>(std::move(terms), std::move(w), b);
}

EpsPtr product(std::vector<EpsPtr> factors) {
  if (factors.empty()) throw Error(ErrorCode::InvalidParameter, "product needs at least one factor");
  for (const auto& f : factors) require(f);
  double b = factors.front()->bound();
  for (std::size_t j = 1; j < factors.size(); ++j) {
    if (factors[j - 1]->cols() != factors[j]->rows())
      throw Error(ErrorCode::ShapeMismatch, "adjacent product factors do not chain");
    if (!(factors[j]->norms() == factors.front()->norms()))
      throw Error(ErrorCode::ShapeMismatch, "product factors use different norm pairs");
    b *= factors[j]->bound();
  }
  return std::make_shared<ProductOp>(std::move(factors), b);
}

EpsPtr exp(EpsPtr a) {
  require(a);
  if (a->rows() != a->cols()) throw Error(ErrorCode::ShapeMismatch, "exp needs a square operator");
  return std::make_shared<ExpOp>(std::move(a));
}

EpsPtr block_diagonal(std::vector<EpsPtr> blocks, LayoutPtr layout) {
  if (blocks.empty() || !layout) throw Error(ErrorCode::InvalidParameter, "block_diagonal needs blocks and a layout");
  if (layout->blocks() != blocks.size()) throw Error(ErrorCode::IndexMapInconsistent, "layout block count differs");
  double b = 0.0;
  for (Index r = 0; r < blocks.size(); ++r) {
    require(blocks[r]);
    if (blocks[r]->rows() != layout->block_rows(r) || blocks[r]->cols() != layout->block_cols(r))
      throw Error(ErrorCode::IndexMapInconsistent, "block shape differs from the layout");
    if (!(blocks[r]->norms() == blocks.front()->norms()))
      throw Error(ErrorCode::ShapeMismatch, "blocks use different norm pairs");
    b = std::max(b, blocks[r]->bound());
  }
  // Round-trip check of the index maps where it is affordable.
  if (layout->rows() <= 4096 && layout->cols() <= 4096) {
    Index rows = 0, cols = 0;
    for (Index r = 0; r < blocks.size(); ++r) {
      rows += layout->block_rows(r);
      cols += layout->block_cols(r);
    }
    if (rows != layout->rows() || cols != layout->cols())
      throw Error(ErrorCode::IndexMapInconsistent, "blocks do not tile the layout");
    for (Index m = 0; m < layout->rows(); ++m) {
      const BlockIndex s = layout->split_row(m);
      if (s.block >= blocks.size() || s.local >= layout->block_rows(s.block) || layout->join_row(s) != m)
        throw Error(ErrorCode::IndexMapInconsistent, "row maps are not inverse");
    }
    for (Index n = 0; n < layout->cols(); ++n) {
      const BlockIndex s = layout->split_col(n);
      if (s.block >= blocks.size() || s.local >= layout->block_cols(s.block) || layout->join_col(s) != n)
        throw Error(ErrorCode::IndexMapInconsistent, "column maps are not inverse");
    }
  }
  return std::make_shared<BlockDiagonalOp>(std::move(blocks), std::move(layout), b);
}

EpsPtr controlled(std::vector<EpsPtr> family) {
  if (family.empty()) throw Error(ErrorCode::InvalidParameter, "controlled needs at least one block");
  std::vector<Index> rows, cols;
  for (const auto& a : family) {
    require(a);
    if (a->rows() != family.front()->rows() || a->cols() != family.front()->cols())
      throw Error(ErrorCode::IndexMapInconsistent, "controlled blocks differ in shape");
    rows.push_back(a->rows());
    cols.push_back(a->cols());
  }
  auto layout = direct_sum_layout(std::move(rows), std::move(cols));
  return block_diagonal(std::move(family), std::move(layout));
}

EpsPtr tensor_embed(EpsPtr a, Index dim_left, Index dim_right) {
  require(a);
  if (dim_left == 0 || dim_right == 0) throw Error(ErrorCode::IndexMapInconsistent, "empty tensor factor");
  auto layout = tensor_layout(dim_left, a->rows(), a->cols(), dim_right);
  std::vector<EpsPtr> blocks(dim_left * dim_right, a);
  return block_diagonal(std::move(blocks), std::move(layout));
}

}  // namespace pathsim
