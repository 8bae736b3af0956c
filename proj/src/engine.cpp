#include "pathsim/engine.hpp"

#include <chrono>
#include <cmath>
#include <exception>

#include <omp.h>

namespace pathsim {

PathLedger sample_path(const EhtState& sigma, const EpsOperator& a, RngStream& rng) {
  PathLedger path;
  path.forward = coin(sigma.norms().inv_p(), rng);
  EndpointDraw head;
  std::optional<Transition> step;
  if (path.forward) {
    head = sigma.sample_col(rng);
    step = a.sample_forward(head.index, rng);
  } else {
    head = sigma.sample_row(rng);
    step = a.sample_backward(head.index, rng);
  }
  path.start = head.index;
  if (!step) {
    path.dead = true;
    return path;
  }
  path.end = step->next;
  // sigma's entry sits at (row n, column m) where A runs from row m to column n.
  const Transition s = path.forward ? sigma.ratios(step->next, head.index, head.k)
                                    : sigma.ratios(head.index, step->next, head.k);
  path.ratio_p = s.ratio_p * step->ratio_p;
  path.ratio_q = s.ratio_q * step->ratio_q;
  return path;
}

Complex path_value(const PathLedger& path, NormPair pq) {
  if (path.dead || path.ratio_p == Complex(0.0) || path.ratio_q == Complex(0.0)) return 0.0;
  if (pq.inv_p() == 0.0) return path.ratio_q;
  if (pq.inv_q() == 0.0) return path.ratio_p;
  return path.ratio_p * path.ratio_q / (pq.inv_p() * path.ratio_q + pq.inv_q() * path.ratio_p);
}

namespace {

std::uint64_t share(std::uint64_t k, unsigned workers, unsigned w) {
  return k / workers + (w < k % workers ? 1 : 0);
}

StreamingMean run_worker(const EhtState& sigma, const EpsOperator& a, std::uint64_t count, std::uint64_t seed,
                         unsigned w) {
  RngStream rng(seed, w);
  StreamingMean acc;
  const NormPair pq = sigma.norms();
  for (std::uint64_t i = 0; i < count; ++i) acc.add(path_value(sample_path(sigma, a, rng), pq));
  return acc;
}

StreamingMean merge_in_order(const std::vector<StreamingMean>& parts) {
  StreamingMean total;
  for (const auto& p : parts) total.merge(p);
  return total;
}

void check_workers(unsigned workers) {
  if (workers == 0) throw Error(ErrorCode::InvalidParameter, "workers must be at least 1");
}

void check_trace_shapes(const EhtState& sigma, const EpsOperator& a) {
  if (a.rows() != sigma.cols() || a.cols() != sigma.rows())
    throw Error(ErrorCode::DimensionMismatch, "Tr{A sigma} needs A rows = sigma cols and A cols = sigma rows");
  if (!(a.norms() == sigma.norms())) throw Error(ErrorCode::InvalidParameter, "A and sigma use different norm pairs");
}

template <class Runner>
EstimateReport estimate_with(const EhtState& sigma, const EpsOperator& a, const EstimateOptions& opts, Runner run) {
  check_trace_shapes(sigma, a);
  check_workers(opts.workers);
  EstimateReport rep;
  rep.b = sigma.bound() * a.bound();
  rep.epsilon = opts.epsilon;
  rep.delta = opts.delta;
  rep.seed = opts.seed;
  rep.workers = opts.workers;
  rep.sample_count = sample_count(opts.epsilon, opts.delta, rep.b);
  const auto t0 = std::chrono::steady_clock::now();
  const StreamingMean acc = run(sigma, a, rep.sample_count, opts.seed, opts.workers);
  rep.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  rep.estimate = acc.mean();
  rep.empirical_std = acc.std();
  return rep;
}

}  // namespace

StreamingMean run_paths_parallel(const EhtState& sigma, const EpsOperator& a, std::uint64_t k, std::uint64_t seed,
                                 unsigned workers) {
  check_workers(workers);
  std::vector<StreamingMean> parts(workers);
  std::vector<std::exception_ptr> errors(workers);
#pragma omp parallel for schedule(static, 1) num_threads(int(workers))
  for (int w = 0; w < int(workers); ++w) {
    try {
      parts[std::size_t(w)] = run_worker(sigma, a, share(k, workers, unsigned(w)), seed, unsigned(w));
    } catch (...) {
      errors[std::size_t(w)] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return merge_in_order(parts);
}

StreamingMean run_paths_serial(const EhtState& sigma, const EpsOperator& a, std::uint64_t k, std::uint64_t seed,
                               unsigned workers) {
  check_workers(workers);
  std::vector<StreamingMean> parts(workers);
  for (unsigned w = 0; w < workers; ++w) parts[w] = run_worker(sigma, a, share(k, workers, w), seed, w);
  return merge_in_order(parts);
}

EstimateReport estimate_trace(const EhtState& sigma, const EpsOperator& a, const EstimateOptions& opts) {
  return estimate_with(sigma, a, opts, run_paths_parallel);
}

EstimateReport estimate_trace_serial(const EhtState& sigma, const EpsOperator& a, const EstimateOptions& opts) {
  return estimate_with(sigma, a, opts, run_paths_serial);
}

Index Circuit::dim() const { return initial ? initial->rows() : 0; }

void Circuit::validate() const {
  if (!initial || !measurement) throw Error(ErrorCode::InvalidParameter, "circuit needs a state and a measurement");
  const Index n = initial->rows();
  if (initial->cols() != n) throw Error(ErrorCode::DimensionMismatch, "initial state must be square");
  auto check = [&](const EpsPtr& op, const char* what) {
    if (!op) throw Error(ErrorCode::InvalidParameter, std::string("null ") + what);
    if (op->rows() != n || op->cols() != n)
      throw Error(ErrorCode::DimensionMismatch, std::string(what) + " does not match the circuit dimension");
    if (!(op->norms() == norms)) throw Error(ErrorCode::InvalidParameter, std::string(what) + " uses another norm pair");
  };
  for (const auto& u : unitaries) check(u, "unitary");
  check(measurement, "measurement");
  if (!(initial->norms() == norms)) throw Error(ErrorCode::InvalidParameter, "initial state uses another norm pair");
}

EpsPtr expectation_operator(const Circuit& c) {
  c.validate();
  if (!(c.norms == c.norms.swapped()) && !c.unitaries.empty())
    throw Error(ErrorCode::InvalidParameter,
                "expectation circuits with unitaries need p = 2; adjoints are only EPS for the swapped pair");
  std::vector<EpsPtr> chain;
  for (const auto& u : c.unitaries) chain.push_back(adjoint(u));
  chain.push_back(c.measurement);
  for (auto it = c.unitaries.rbegin(); it != c.unitaries.rend(); ++it) chain.push_back(*it);
  return product(std::move(chain));
}

EstimateReport estimate_expectation(const Circuit& c, const EstimateOptions& opts) {
  EpsPtr a = expectation_operator(c);
  EstimateReport rep = estimate_trace(*c.initial, *a, opts);
  rep.method = "markov";
  return rep;
}

AmplitudeReport estimate_amplitude(CtPtr phi, CtPtr psi, const std::vector<EpsPtr>& unitaries,
                                   const EstimateOptions& opts, NormPair pq) {
  if (!phi || !psi) throw Error(ErrorCode::InvalidParameter, "null state");
  EhtPtr sigma = dyad(psi, phi, pq);
  EpsPtr a;
  if (unitaries.empty()) {
    a = identity(psi->dim(), pq);
  } else {
    std::vector<EpsPtr> chain(unitaries.rbegin(), unitaries.rend());
    a = product(std::move(chain));
  }
  AmplitudeReport out;
  out.amplitude = estimate_trace(*sigma, *a, opts);
  out.amplitude.method = "amplitude";
  const double mag = std::abs(out.amplitude.estimate);
  out.abs_squared = mag * mag;
  out.abs_squared_bound = 2.0 * mag * opts.epsilon + opts.epsilon * opts.epsilon;
  return out;
}

namespace {

void check_cap(Index n, Index cap) {
  if (n > cap) throw Error(ErrorCode::OracleCapExceeded, "dimension exceeds the oracle cap");
}

}  // namespace

Complex exact_expectation(const Circuit& c, Index cap) {
  c.validate();
  check_cap(c.dim(), cap);
  std::vector<ComplexMatrix> ops;
  for (const auto& u : c.unitaries) ops.push_back(u->dense().adjoint());
  ops.push_back(c.measurement->dense());
  for (auto it = c.unitaries.rbegin(); it != c.unitaries.rend(); ++it) ops.push_back((*it)->dense());
  return exact_oracle(c.initial->dense(), ops, cap);
}

double interference_exact(const Circuit& c, Index cap) {
  c.validate();
  check_cap(c.dim(), cap);
  RealMatrix x = entrywise_abs(c.initial->dense());
  std::vector<RealMatrix> abs_u;
  for (const auto& u : c.unitaries) abs_u.push_back(entrywise_abs(u->dense()));
  for (const auto& u : abs_u) x = u * x;
  x = entrywise_abs(c.measurement->dense()) * x;
  for (auto it = abs_u.rbegin(); it != abs_u.rend(); ++it) x = it->transpose() * x;
  return x.trace();
}

double interference_state_exact(const std::vector<EpsPtr>& unitaries, const EhtState& rho, Index cap) {
  check_cap(rho.rows(), cap);
  RealMatrix x = entrywise_abs(rho.dense());
  for (const auto& u : unitaries) {
    if (u->rows() != rho.rows() || u->cols() != rho.rows())
      throw Error(ErrorCode::DimensionMismatch, "unitary does not match the state dimension");
    const RealMatrix a = entrywise_abs(u->dense());
    x = a * x * a.transpose();
  }
  return x.trace();
}

double imax(const ComplexMatrix& a, NormPair pq) { return induced_norm(entrywise_abs(a), pq.q()).value; }

std::optional<double> imax_dense(const EpsOperator& a, Index cap) {
  if (a.rows() > cap || a.cols() > cap) return std::nullopt;
  return imax(a.dense(), a.norms());
}

std::optional<double> imax(const EpsOperator& a, Index cap) {
  if (auto v = a.structured_imax()) return v;
  return imax_dense(a, cap);
}

double mana(const ComplexMatrix& a) { return std::log(a.cwiseAbs().colwise().sum().maxCoeff()); }

}  // namespace pathsim
