#include <algorithm>
#include <cmath>

#include "pathsim/eht.hpp"
#include "pathsim/eps.hpp"

namespace pathsim {
namespace {

constexpr double kPhaseTolerance = 1e-9;

void check_phase(Complex z) {
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag()) || std::abs(std::abs(z) - 1.0) > kPhaseTolerance)
    throw Error(ErrorCode::NonUnitPhase, "phase is not of unit modulus");
}

class PermutationOp final : public EpsOperator {
 public:
  PermutationOp(std::vector<Index> perm, std::vector<Complex> phases, NormPair pq)
      : EpsOperator(perm.size(), perm.size(), 1.0, pq), perm_(std::move(perm)), phases_(std::move(phases)) {
    inverse_.assign(perm_.size(), Index(-1));
    for (Index m = 0; m < perm_.size(); ++m) {
      if (perm_[m] >= perm_.size() || inverse_[perm_[m]] != Index(-1))
        throw Error(ErrorCode::InvalidParameter, "not a permutation");
      inverse_[perm_[m]] = m;
    }
    if (phases_.empty()) phases_.assign(perm_.size(), Complex(1.0));
    if (phases_.size() != perm_.size())
      throw Error(ErrorCode::DimensionMismatch, "phase count differs from permutation length");
    for (Complex z : phases_) check_phase(z);
  }

  std::optional<Transition> sample_forward(Index m, RngStream&) const override {
    return Transition{perm_[m], phases_[m], phases_[m]};
  }
  std::optional<Transition> sample_backward(Index n, RngStream&) const override {
    const Index m = inverse_[n];
    return Transition{m, phases_[m], phases_[m]};
  }
  std::vector<SupportTerm> enumerate_row(Index m, const EnumerationLimits&) const override {
    return {{m, perm_[m], {}, phases_[m], 1.0, 1.0}};
  }
  std::vector<SupportTerm> enumerate_col(Index n, const EnumerationLimits&) const override {
    const Index m = inverse_[n];
    return {{m, n, {}, phases_[m], 1.0, 1.0}};
  }
  ComplexMatrix dense() const override {
    ComplexMatrix a = ComplexMatrix::Zero(Eigen::Index(rows()), Eigen::Index(cols()));
    for (Index m = 0; m < perm_.size(); ++m) a(Eigen::Index(m), Eigen::Index(perm_[m])) = phases_[m];
    return a;
  }
  std::optional<double> structured_imax() const override { return 1.0; }

 private:
  std::vector<Index> perm_;
  std::vector<Index> inverse_;
  std::vector<Complex> phases_;
};

class DiagonalOp final : public EpsOperator {
 public:
  DiagonalOp(Index n, std::function<Complex(Index)> phase, NormPair pq)
      : EpsOperator(n, n, 1.0, pq), phase_(std::move(phase)) {
    if (!phase_) throw Error(ErrorCode::InvalidParameter, "missing phase function");
  }

  std::optional<Transition> sample_forward(Index m, RngStream&) const override {
    const Complex z = at(m);
    return Transition{m, z, z};
  }
  std::optional<Transition> sample_backward(Index n, RngStream& rng) const override {
    return sample_forward(n, rng);
  }
  std::vector<SupportTerm> enumerate_row(Index m, const EnumerationLimits&) const override {
    return {{m, m, {}, at(m), 1.0, 1.0}};
  }
  std::vector<SupportTerm> enumerate_col(Index n, const EnumerationLimits& lim) const override {
    return enumerate_row(n, lim);
  }
  ComplexMatrix dense() const override {
    ComplexMatrix a = ComplexMatrix::Zero(Eigen::Index(rows()), Eigen::Index(cols()));
    for (Index m = 0; m < rows(); ++m) a(Eigen::Index(m), Eigen::Index(m)) = at(m);
    return a;
  }
  std::optional<double> structured_imax() const override { return 1.0; }

 private:
  Complex at(Index m) const {
    const Complex z = phase_(m);
    check_phase(z);
    return z;
  }
  std::function<Complex(Index)> phase_;
};

class OracleOp final : public EpsOperator {
 public:
  OracleOp(std::function<Index(Index)> g, Index x_dim, Index y_dim, std::shared_ptr<QueryCounter> counter,
           NormPair pq)
      : EpsOperator(x_dim * y_dim, x_dim * y_dim, 1.0, pq),
        g_(std::move(g)),
        y_dim_(y_dim),
        counter_(std::move(counter)) {
    if (!g_ || x_dim == 0 || y_dim == 0) throw Error(ErrorCode::InvalidParameter, "invalid oracle");
  }

  std::optional<Transition> sample_forward(Index m, RngStream&) const override {
    return Transition{forward(m), Complex(1.0), Complex(1.0)};
  }
  std::optional<Transition> sample_backward(Index n, RngStream&) const override {
    return Transition{backward(n), Complex(1.0), Complex(1.0)};
  }
  std::vector<SupportTerm> enumerate_row(Index m, const EnumerationLimits&) const override {
    return {{m, forward(m), {}, Complex(1.0), 1.0, 1.0}};
  }
  std::vector<SupportTerm> enumerate_col(Index n, const EnumerationLimits&) const override {
    return {{backward(n), n, {}, Complex(1.0), 1.0, 1.0}};
  }
  ComplexMatrix dense() const override {
    ComplexMatrix a = ComplexMatrix::Zero(Eigen::Index(rows()), Eigen::Index(cols()));
    for (Index m = 0; m < rows(); ++m) a(Eigen::Index(m), Eigen::Index(forward(m))) = 1.0;
    return a;
  }
  std::optional<double> structured_imax() const override { return 1.0; }

 private:
  Index shift(Index x) const {
    if (counter_) counter_->add();
    return g_(x) % y_dim_;
  }
  // O_g has its 1 at row (x, y + g(x)), column (x, y).
  Index forward(Index m) const {
    const Index x = m / y_dim_, y = m % y_dim_;
    return x * y_dim_ + (y + y_dim_ - shift(x)) % y_dim_;
  }
  Index backward(Index n) const {
    const Index x = n / y_dim_, y = n % y_dim_;
    return x * y_dim_ + (y + shift(x)) % y_dim_;
  }

  std::function<Index(Index)> g_;
  Index y_dim_;
  std::shared_ptr<QueryCounter> counter_;
};

// Forwards everything to an inner operator but declares a closed-form imax.
class WithImax final : public EpsOperator {
 public:
  WithImax(EpsPtr inner, double imax)
      : EpsOperator(inner->rows(), inner->cols(), inner->bound(), inner->norms()),
        inner_(std::move(inner)),
        imax_(imax) {}

  std::optional<Transition> sample_forward(Index m, RngStream& rng) const override {
    return inner_->sample_forward(m, rng);
  }
  std::optional<Transition> sample_backward(Index n, RngStream& rng) const override {
    return inner_->sample_backward(n, rng);
  }
  std::vector<SupportTerm> enumerate_row(Index m, const EnumerationLimits& lim) const override {
    return inner_->enumerate_row(m, lim);
  }
  std::vector<SupportTerm> enumerate_col(Index n, const EnumerationLimits& lim) const override {
    return inner_->enumerate_col(n, lim);
  }
  ComplexMatrix dense() const override { return inner_->dense(); }
  std::optional<double> structured_imax() const override { return imax_; }

 private:
  EpsPtr inner_;
  double imax_;
};

class DirectSumLayout final : public BlockLayout {
 public:
  DirectSumLayout(std::vector<Index> rows, std::vector<Index> cols)
      : rows_(std::move(rows)), cols_(std::move(cols)) {
    if (rows_.size() != cols_.size()) throw Error(ErrorCode::IndexMapInconsistent, "block count mismatch");
    row_off_.assign(1, 0);
    col_off_.assign(1, 0);
    for (Index r = 0; r < rows_.size(); ++r) {
      row_off_.push_back(row_off_.back() + rows_[r]);
      col_off_.push_back(col_off_.back() + cols_[r]);
    }
  }
  Index blocks() const override { return rows_.size(); }
  Index rows() const override { return row_off_.back(); }
  Index cols() const override { return col_off_.back(); }
  Index block_rows(Index r) const override { return rows_[r]; }
  Index block_cols(Index r) const override { return cols_[r]; }
  BlockIndex split_row(Index m) const override { return split(row_off_, m); }
  BlockIndex split_col(Index n) const override { return split(col_off_, n); }
  Index join_row(BlockIndex b) const override { return row_off_[b.block] + b.local; }
  Index join_col(BlockIndex b) const override { return col_off_[b.block] + b.local; }

 private:
  static BlockIndex split(const std::vector<Index>& off, Index i) {
    auto it = std::upper_bound(off.begin(), off.end(), i);
    Index r = Index(it - off.begin()) - 1;
    return {r, i - off[r]};
  }
  std::vector<Index> rows_, cols_, row_off_, col_off_;
};

class TensorLayout final : public BlockLayout {
 public:
  TensorLayout(Index left, Index rows, Index cols, Index right)
      : left_(left), rows_(rows), cols_(cols), right_(right) {
    if (left == 0 || right == 0) throw Error(ErrorCode::IndexMapInconsistent, "empty tensor factor");
  }
  Index blocks() const override { return left_ * right_; }
  Index rows() const override { return left_ * rows_ * right_; }
  Index cols() const override { return left_ * cols_ * right_; }
  Index block_rows(Index) const override { return rows_; }
  Index block_cols(Index) const override { return cols_; }
  BlockIndex split_row(Index m) const override { return split(m, rows_); }
  BlockIndex split_col(Index n) const override { return split(n, cols_); }
  Index join_row(BlockIndex b) const override { return join(b, rows_); }
  Index join_col(BlockIndex b) const override { return join(b, cols_); }

 private:
  BlockIndex split(Index i, Index d) const {
    const Index a = i / (d * right_), rem = i % (d * right_);
    return {a * right_ + rem % right_, rem / right_};
  }
  Index join(BlockIndex b, Index d) const {
    return ((b.block / right_) * d + b.local) * right_ + b.block % right_;
  }
  Index left_, rows_, cols_, right_;
};

}  // namespace

LayoutPtr direct_sum_layout(std::vector<Index> block_rows, std::vector<Index> block_cols) {
  return std::make_shared<DirectSumLayout>(std::move(block_rows), std::move(block_cols));
}

LayoutPtr tensor_layout(Index left, Index rows, Index cols, Index right) {
  return std::make_shared<TensorLayout>(left, rows, cols, right);
}

EpsPtr identity(Index n, NormPair pq) {
  std::vector<Index> perm(n);
  for (Index i = 0; i < n; ++i) perm[i] = i;
  return permutation(std::move(perm), {}, pq);
}

EpsPtr permutation(std::vector<Index> perm, std::vector<Complex> phases, NormPair pq) {
  return std::make_shared<PermutationOp>(std::move(perm), std::move(phases), pq);
}

EpsPtr diagonal_unitary(Index n, std::function<Complex(Index)> phase, NormPair pq) {
  return std::make_shared<DiagonalOp>(n, std::move(phase), pq);
}

EpsPtr diagonal_unitary(std::vector<Complex> phases, NormPair pq) {
  for (Complex z : phases) check_phase(z);
  const Index n = phases.size();
  return std::make_shared<DiagonalOp>(
      n, [ph = std::move(phases)](Index i) { return ph[i]; }, pq);
}

EpsPtr pauli_string(const std::string& spec, NormPair pq) {
  const int n = int(spec.size());
  if (n == 0 || n > 24) throw Error(ErrorCode::InvalidParameter, "Pauli string length out of range");
  Index flip = 0;
  for (int j = 0; j < n; ++j) {
    const char c = spec[std::size_t(j)];
    if (c != 'I' && c != 'X' && c != 'Y' && c != 'Z')
      throw Error(ErrorCode::InvalidParameter, "Pauli string may only contain I, X, Y, Z");
    if (c == 'X' || c == 'Y') flip |= Index(1) << (n - 1 - j);
  }
  const Index dim = Index(1) << n;
  std::vector<Index> perm(dim);
  std::vector<Complex> phases(dim, Complex(1.0));
  for (Index m = 0; m < dim; ++m) {
    perm[m] = m ^ flip;
    for (int j = 0; j < n; ++j) {
      const bool bit = (m >> (n - 1 - j)) & 1;
      const char c = spec[std::size_t(j)];
      if (c == 'Z' && bit) phases[m] *= -1.0;
      if (c == 'Y') phases[m] *= bit ? Complex(0.0, 1.0) : Complex(0.0, -1.0);
    }
  }
  return permutation(std::move(perm), std::move(phases), pq);
}

EpsPtr grover_reflection(int qubits, NormPair pq) {
  if (qubits < 1 || qubits > 30) throw Error(ErrorCode::InvalidParameter, "qubit count out of range");
  const Index n = Index(1) << qubits;
  auto plus = uniform_state(n);
  EpsPtr refl = sum({{Complex(1.0), identity(n, pq)}, {Complex(-2.0), as_operator(dyad(plus, plus, pq))}});
  // abs(I - 2J/N) has constant row and column sums 3 - 4/N.
  return std::make_shared<WithImax>(refl, 3.0 - 4.0 / double(n));
}

EpsPtr oracle_op(std::function<Index(Index)> g, Index x_dim, Index y_dim, std::shared_ptr<QueryCounter> counter,
                 NormPair pq) {
  return std::make_shared<OracleOp>(std::move(g), x_dim, y_dim, std::move(counter), pq);
}

}  // namespace pathsim
