#include <chrono>
#include <cmath>

#include "pathsim/engine.hpp"
#include "table_operator.hpp"

namespace pathsim {

DecoherenceReport decoherence_matrix(const Circuit& c, Index history_cap) {
  c.validate();
  const Index n = c.dim();
  const Index steps = c.unitaries.size();
  double count = 1.0;
  for (Index t = 0; t <= steps; ++t) count *= double(n);
  if (count > double(history_cap)) throw Error(ErrorCode::HistoryCapExceeded, "too many histories");
  const Index h = Index(count);

  const ComplexMatrix rho = c.initial->dense();
  const ComplexMatrix m = c.measurement->dense();
  std::vector<ComplexMatrix> u;
  for (const auto& op : c.unitaries) u.push_back(op->dense());

  // History j = (j_0, ..., j_T) with j_0 the most significant digit.
  std::vector<Complex> w(h);
  std::vector<Index> first(h), last(h);
  std::vector<Index> digits(steps + 1);
  for (Index j = 0; j < h; ++j) {
    Index x = j;
    for (Index t = steps + 1; t-- > 0;) {
      digits[t] = x % n;
      x /= n;
    }
    Complex a = 1.0;
    for (Index t = 1; t <= steps; ++t) a *= u[t - 1](Eigen::Index(digits[t]), Eigen::Index(digits[t - 1]));
    w[j] = a;
    first[j] = digits.front();
    last[j] = digits.back();
  }

  DecoherenceReport rep;
  rep.histories = h;
  rep.d = ComplexMatrix::Zero(Eigen::Index(h), Eigen::Index(h));
  for (Index j = 0; j < h; ++j)
    for (Index k = 0; k < h; ++k) {
      const Complex v = w[j] * std::conj(w[k]) * m(Eigen::Index(last[k]), Eigen::Index(last[j])) *
                        rho(Eigen::Index(first[j]), Eigen::Index(first[k]));
      rep.d(Eigen::Index(j), Eigen::Index(k)) = v;
      rep.path_sum += v;
      rep.abs_sum += std::abs(v);
      if (j != k) rep.max_off_diagonal = std::max(rep.max_off_diagonal, std::abs(v));
    }
  return rep;
}

double mana(const RealMatrix& a) { return std::log(a.cwiseAbs().colwise().sum().maxCoeff()); }

double mana(const RealVector& x) { return std::log(x.cwiseAbs().sum()); }

StochasticReport stochastic_mode_estimate(const StochasticCircuit& c, const EstimateOptions& opts, double b_cap) {
  const NormPair pq = NormPair::stochastic();
  Index dim = Index(c.initial.size());
  for (const auto& a : c.ops) {
    if (Index(a.cols()) != dim) throw Error(ErrorCode::DimensionMismatch, "stochastic chain dimensions do not match");
    dim = Index(a.rows());
  }
  if (Index(c.final.size()) != dim) throw Error(ErrorCode::DimensionMismatch, "final functional has the wrong length");

  StochasticReport out;
  double b = c.final.cwiseAbs().maxCoeff() * c.initial.cwiseAbs().sum();
  for (const auto& a : c.ops) {
    const double n1 = a.cwiseAbs().colwise().sum().maxCoeff();
    out.operator_mana.push_back(std::log(n1));
    b *= n1;
  }
  out.initial_mana = mana(c.initial);
  if (!(b <= b_cap)) throw Error(ErrorCode::NegativeMassOverflow, "cost bound exceeds the configured cap");

  auto to_complex = [](const RealVector& x) {
    std::vector<Complex> v(std::size_t(x.size()));
    for (Eigen::Index i = 0; i < x.size(); ++i) v[std::size_t(i)] = x[i];
    return v;
  };
  // <final| A_T ... A_1 |initial> = Tr{A_T ... A_1 |initial><final|}.
  EhtPtr sigma = dyad(vector_state(to_complex(c.initial)), vector_state(to_complex(c.final)), pq);
  EpsPtr chain;
  if (c.ops.empty()) {
    chain = identity(dim, pq);
  } else {
    std::vector<EpsPtr> factors;
    for (auto it = c.ops.rbegin(); it != c.ops.rend(); ++it)
      factors.push_back(detail::rowcol_allow_empty(it->cast<Complex>(), pq));
    chain = product(std::move(factors));
  }
  out.report = estimate_trace(*sigma, *chain, opts);
  out.report.method = "stochastic";
  return out;
}

EstimateReport optimal_distribution_estimate(const ComplexMatrix& sigma, const std::vector<ComplexMatrix>& ops,
                                             const EstimateOptions& opts, Index path_cap) {
  // Path (i_0, ..., i_S) carries A1[i_0,i_1] ... AS[i_{S-1},i_S] sigma[i_S,i_0].
  Index expected_rows = ops.empty() ? Index(sigma.cols()) : Index(ops.front().rows());
  Index at = expected_rows;
  for (const auto& a : ops) {
    if (Index(a.rows()) != at) throw Error(ErrorCode::DimensionMismatch, "operator chain dimensions do not match");
    at = Index(a.cols());
  }
  if (Index(sigma.rows()) != at || Index(sigma.cols()) != expected_rows)
    throw Error(ErrorCode::DimensionMismatch, "sigma does not close the chain");

  std::vector<Complex> values;
  std::vector<Index> path(ops.size() + 1);
  auto walk = [&](auto&& self, std::size_t j, Complex v) -> void {
    if (j == ops.size()) {
      const Complex s = sigma(Eigen::Index(path[j]), Eigen::Index(path[0]));
      if (s != Complex(0.0)) {
        values.push_back(v * s);
        if (values.size() > path_cap) throw Error(ErrorCode::OracleCapExceeded, "too many paths");
      }
      return;
    }
    const auto& a = ops[j];
    for (Eigen::Index n = 0; n < a.cols(); ++n) {
      const Complex x = a(Eigen::Index(path[j]), n);
      if (x == Complex(0.0)) continue;
      path[j + 1] = Index(n);
      self(self, j + 1, v * x);
    }
  };
  for (Index i = 0; i < expected_rows; ++i) {
    path[0] = i;
    walk(walk, 0, Complex(1.0));
  }

  EstimateReport rep;
  rep.method = "optimal";
  rep.epsilon = opts.epsilon;
  rep.delta = opts.delta;
  rep.seed = opts.seed;
  rep.workers = 1;
  std::vector<double> weights;
  for (Complex v : values) {
    weights.push_back(std::abs(v));
    rep.b += std::abs(v);
  }
  rep.sample_count = sample_count(opts.epsilon, opts.delta, rep.b);
  if (values.empty()) return rep;
  const auto t0 = std::chrono::steady_clock::now();
  AliasTable table(weights);
  RngStream rng(opts.seed, 0);
  StreamingMean acc;
  for (std::uint64_t i = 0; i < rep.sample_count; ++i) {
    const Complex v = values[table.sample(rng)];
    acc.add(rep.b * v / std::abs(v));
  }
  rep.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  rep.estimate = acc.mean();
  rep.empirical_std = acc.std();
  return rep;
}

}  // namespace pathsim
