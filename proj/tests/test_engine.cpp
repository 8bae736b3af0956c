#include <numbers>

#include "support.hpp"

namespace pathsim {
namespace {

using test::kron;

ComplexMatrix h1() {
  const double r = 1.0 / std::sqrt(2.0);
  ComplexMatrix h(2, 2);
  h << r, r, r, -r;
  return h;
}

ComplexMatrix pauli_z() {
  ComplexMatrix z = ComplexMatrix::Zero(2, 2);
  z(0, 0) = 1.0;
  z(1, 1) = -1.0;
  return z;
}

ComplexMatrix pauli_reference_zi() { return kron(pauli_z(), ComplexMatrix::Identity(2, 2)); }

ComplexMatrix abs_of(const ComplexMatrix& a) { return entrywise_abs(a).cast<Complex>(); }

Circuit pure_circuit(CtPtr psi, std::vector<EpsPtr> us, EpsPtr m) {
  Circuit c;
  c.initial = dyad(psi, psi);
  c.unitaries = std::move(us);
  c.measurement = std::move(m);
  c.norms = NormPair(2.0);
  return c;
}

// <psi| U1^dag ... UT^dag M UT ... U1 |psi> from dense matrices.
Complex dense_expectation(const ComplexVector& psi, const std::vector<ComplexMatrix>& us, const ComplexMatrix& m) {
  ComplexVector v = psi;
  for (const auto& u : us) v = u * v;
  return v.dot(m * v);
}

// Tr{|U1^dag| ... |UT^dag| |M| |UT| ... |U1| |rho|} from dense matrices.
double dense_interference(const ComplexMatrix& rho, const std::vector<ComplexMatrix>& us, const ComplexMatrix& m) {
  ComplexMatrix x = abs_of(m);
  for (auto it = us.rbegin(); it != us.rend(); ++it) x = abs_of(it->adjoint()) * x * abs_of(*it);
  return (x * abs_of(rho)).trace().real();
}

// Three-qubit test circuit: product state, oracle on (2 + 1) qubits, Grover, projector family.
struct OracleCircuit {
  Circuit circuit;
  ComplexVector psi;
  std::vector<ComplexMatrix> us;
  ComplexMatrix m;
};

OracleCircuit oracle_circuit() {
  OracleCircuit o;
  const double r = 1.0 / std::sqrt(2.0);
  const CtPtr psi = product_state({{r, r}, {0.6, Complex(0, 0.8)}, {r, -r}});
  const std::vector<Index> g{1, 0, 0, 1};
  const EpsPtr oracle = oracle_op([g](Index x) { return g[x]; }, 4, 2);
  const EpsPtr grover = grover_reflection(3);
  std::vector<EpsPtr> blocks;
  for (Index x = 0; x < 4; ++x) {
    const Index gx = g[x];
    const CtPtr v = phase_state(2, [gx](Index j) { return -std::numbers::pi * double(j * gx); });
    blocks.push_back(as_operator(dyad(v, v)));
  }
  const EpsPtr proj = controlled(blocks);
  o.circuit = pure_circuit(psi, {oracle, grover}, proj);

  o.psi = kron(kron(ComplexVector(ComplexVector::Constant(2, r)), (ComplexVector(2) << 0.6, Complex(0, 0.8)).finished()),
               (ComplexVector(2) << r, -r).finished());
  ComplexMatrix om = ComplexMatrix::Zero(8, 8);
  for (Index x = 0; x < 4; ++x)
    for (Index y = 0; y < 2; ++y) om(Eigen::Index(2 * x + (y + g[x]) % 2), Eigen::Index(2 * x + y)) = 1.0;
  const ComplexMatrix gm = ComplexMatrix::Identity(8, 8) - ComplexMatrix::Constant(8, 8, 2.0 / 8.0);
  o.us = {om, gm};
  o.m = ComplexMatrix::Zero(8, 8);
  for (Index x = 0; x < 4; ++x) {
    ComplexVector k(2);
    k << r, (g[x] ? -r : r);
    o.m.block(Eigen::Index(2 * x), Eigen::Index(2 * x), 2, 2) = k * k.adjoint();
  }
  return o;
}

TEST(EstimateTrace, Examples) {
  const EstimateOptions opts{0.05, 0.01, 3, 1};
  const EstimateReport a = estimate_trace(*dyad(basis_state(2, 0), basis_state(2, 0)), *identity(2), opts);
  EXPECT_NEAR(a.estimate.real(), 1.0, opts.epsilon);
  EXPECT_EQ(a.b, 1.0);

  std::mt19937_64 gen(4);
  const ComplexMatrix rand = test::random_complex(8, 8, gen, 0.3);
  const EpsPtr op = from_dense_optimal(rand);
  // Tr{A |j><i|} = A_ij.
  for (auto [i, j] : {std::pair<Index, Index>{2, 5}, {7, 0}, {3, 3}}) {
    const EstimateReport r = estimate_trace(*dyad(basis_state(8, j), basis_state(8, i)), *op, {0.05, 0.01, 11, 1});
    EXPECT_LE(std::abs(r.estimate - rand(Eigen::Index(i), Eigen::Index(j))), 0.05) << i << "," << j;
  }

  const EstimateReport g = estimate_trace(*density(ComplexMatrix::Identity(8, 8) / 8.0), *grover_reflection(3), opts);
  EXPECT_NEAR(g.estimate.real(), 0.75, opts.epsilon);
  EXPECT_EQ(g.b, 3.0);
  EXPECT_EQ(g.sample_count, sample_count(0.05, 0.01, 3.0));
}

TEST(EstimateTrace, ShapeMismatch) {
  EXPECT_THROW(estimate_trace(*dyad(basis_state(2, 0), basis_state(2, 0)), *identity(3), {}), Error);
}

TEST(EstimateTrace, EndpointNormPairs) {
  // p = 1 runs only the forward chain, p = inf only the backward chain.
  std::mt19937_64 gen(6);
  const ComplexMatrix a = test::random_complex(5, 5, gen, 0.4);
  const ComplexVector phi = test::random_complex(5, 1, gen), psi = test::random_complex(5, 1, gen);
  const Complex exact = (a * phi * psi.adjoint()).trace();
  for (double p : {1.0, kInf, 1.5, 3.0}) {
    const NormPair pq(p);
    auto state = [](const ComplexVector& v) { return vector_state(std::vector<Complex>(v.data(), v.data() + v.size())); };
    const EhtPtr sigma = dyad(state(phi), state(psi), pq);
    const EpsPtr op = p == 1.0 || std::isinf(p) ? from_rowcol(a, pq) : from_dense_optimal(a, pq);
    const StreamingMean m = run_paths_serial(*sigma, *op, 200000, 19, 1);
    EXPECT_LE(std::abs(m.mean() - exact), 5.0 * m.std() / std::sqrt(200000.0)) << p;
  }
}

TEST(EstimateExpectation, Examples) {
  const EstimateOptions opts{0.05, 0.01, 1, 1};
  const Circuit hc = pure_circuit(basis_state(2, 0), {hadamard(1)}, as_operator(dyad(basis_state(2, 0), basis_state(2, 0))));
  EXPECT_NEAR(estimate_expectation(hc, opts).estimate.real(), 0.5, opts.epsilon);

  const Circuit gc = pure_circuit(uniform_state(8), {haar_wavelet(3)}, identity(8));
  const EstimateReport gr = estimate_expectation(gc, opts);
  EXPECT_NEAR(gr.estimate.real(), 1.0, opts.epsilon);
  EXPECT_NEAR(gr.b, 4.0, 1e-12);
}

TEST(EstimateExpectation, OracleCircuitMatchesDense) {
  const OracleCircuit o = oracle_circuit();
  const Complex exact = dense_expectation(o.psi, o.us, o.m);
  EXPECT_NEAR(std::abs(exact_expectation(o.circuit) - exact), 0.0, 1e-12);
  EXPECT_LE((o.circuit.measurement->dense() - o.m).norm(), 1e-14);
  const EstimateReport r = estimate_expectation(o.circuit, {0.1, 0.01, 5, 1});
  EXPECT_LE(std::abs(r.estimate - exact), 0.1);
}

TEST(EstimateExpectation, CostAccounting) {
  const OracleCircuit o = oracle_circuit();
  const EstimateReport r = estimate_expectation(o.circuit, {0.2, 0.05, 2, 1});
  double want = o.circuit.initial->bound() * o.circuit.measurement->bound();
  for (const auto& u : o.circuit.unitaries) want *= u->bound() * u->bound();
  EXPECT_NEAR(r.b, want, 1e-12 * want);
  EXPECT_EQ(r.sample_count, sample_count(0.2, 0.05, r.b));
  EXPECT_EQ(r.seed, 2u);
  EXPECT_EQ(r.method, "markov");
}

TEST(EstimateExpectation, RequiresSelfDualPairWithUnitaries) {
  Circuit c;
  c.norms = NormPair(3.0);
  c.initial = dyad(basis_state(2, 0), basis_state(2, 0), c.norms);
  c.unitaries = {hadamard(1, c.norms)};
  c.measurement = identity(2, c.norms);
  EXPECT_THROW(estimate_expectation(c, {}), Error);
  c.unitaries.clear();
  EXPECT_NEAR(estimate_expectation(c, {0.1, 0.1, 0, 1}).estimate.real(), 1.0, 0.1);
}

TEST(EstimateExpectation, Unbiased) {
  const OracleCircuit o = oracle_circuit();
  const Complex exact = dense_expectation(o.psi, o.us, o.m);
  const EpsPtr a = expectation_operator(o.circuit);
  const std::uint64_t k = 1000000;
  const StreamingMean m = run_paths_serial(*o.circuit.initial, *a, k, 77, 1);
  EXPECT_LE(std::abs(m.mean() - exact), 4.0 * m.std() / std::sqrt(double(k)));
}

TEST(EstimateExpectation, ChernoffFailureRate) {
  const double r = 1.0 / std::sqrt(2.0);
  const Circuit c = pure_circuit(product_state({{0.6, 0.8}, {r, Complex(0, r)}, {1.0, 0.0}}),
                                 {tensor_embed(hadamard(1), 1, 4)}, pauli_string("ZZI"));
  const Complex exact = exact_expectation(c);
  int failures = 0;
  const int runs = 300;
  for (int s = 0; s < runs; ++s)
    if (std::abs(estimate_expectation(c, {0.1, 0.05, std::uint64_t(1000 + s), 1}).estimate - exact) > 0.1) ++failures;
  EXPECT_LE(double(failures) / runs, 0.05 + 0.03);
}

TEST(Amplitude, Examples) {
  const EstimateOptions opts{0.05, 0.01, 8, 1};
  const AmplitudeReport t0 = estimate_amplitude(basis_state(4, 2), basis_state(4, 2), {}, opts);
  EXPECT_NEAR(t0.amplitude.estimate.real(), 1.0, 1e-12);
  const AmplitudeReport x = estimate_amplitude(basis_state(2, 1), basis_state(2, 0), {pauli_string("X")}, opts);
  EXPECT_NEAR(x.amplitude.estimate.real(), 1.0, opts.epsilon);
  const AmplitudeReport g = estimate_amplitude(basis_state(8, 0), uniform_state(8), {haar_wavelet(3)}, opts);
  const ComplexVector u = ComplexVector::Constant(8, 1.0 / std::sqrt(8.0));
  const Complex want = (haar_wavelet(3)->dense() * u)(0);
  EXPECT_NEAR(std::abs(want - 1.0), 0.0, 1e-12);
  EXPECT_LE(std::abs(g.amplitude.estimate - want), opts.epsilon);
  EXPECT_NEAR(g.abs_squared, std::norm(g.amplitude.estimate), 1e-15);
  EXPECT_NEAR(g.abs_squared_bound, 2.0 * std::abs(g.amplitude.estimate) * 0.05 + 0.0025, 1e-15);
}

TEST(Amplitude, CostIsSingleSided) {
  const std::vector<EpsPtr> us{haar_wavelet(3), hadamard(3), grover_reflection(3)};
  const AmplitudeReport a = estimate_amplitude(basis_state(8, 1), uniform_state(8), us, {0.5, 0.1, 0, 1});
  double want = dyad(uniform_state(8), basis_state(8, 1))->bound();
  for (const auto& u : us) want *= u->bound();
  EXPECT_NEAR(a.amplitude.b, want, 1e-12 * want);
  EXPECT_EQ(a.amplitude.method, "amplitude");
}

TEST(Parallel, BitIdenticalToSerial) {
  const OracleCircuit o = oracle_circuit();
  const EpsPtr a = expectation_operator(o.circuit);
  for (unsigned w : {1u, 2u, 3u, 4u, 7u}) {
    const StreamingMean p = run_paths_parallel(*o.circuit.initial, *a, 20011, 42, w);
    const StreamingMean s = run_paths_serial(*o.circuit.initial, *a, 20011, 42, w);
    EXPECT_EQ(p.count(), 20011u);
    EXPECT_EQ(p.mean(), s.mean()) << w;
    EXPECT_EQ(p.std(), s.std()) << w;
  }
  const EstimateOptions opts{0.1, 0.05, 9, 3};
  const EstimateReport r1 = estimate_trace(*o.circuit.initial, *a, opts);
  const EstimateReport r2 = estimate_trace_serial(*o.circuit.initial, *a, opts);
  const EstimateReport r3 = estimate_trace(*o.circuit.initial, *a, opts);
  EXPECT_EQ(r1.estimate, r2.estimate);
  EXPECT_EQ(r1.estimate, r3.estimate);
  EXPECT_EQ(r1.workers, 3u);
}

TEST(Parallel, WorkerCountChangesTheStreamNotTheLaw) {
  const OracleCircuit o = oracle_circuit();
  const EpsPtr a = expectation_operator(o.circuit);
  const Complex exact = dense_expectation(o.psi, o.us, o.m);
  for (unsigned w : {1u, 4u}) {
    const StreamingMean m = run_paths_parallel(*o.circuit.initial, *a, 200000, 3, w);
    EXPECT_LE(std::abs(m.mean() - exact), 5.0 * m.std() / std::sqrt(200000.0));
  }
}

TEST(Interference, Examples) {
  // Uniform state, Fourier, identity measurement.
  for (int n : {2, 3, 4}) {
    const Index dim = Index(1) << n;
    const Circuit c = pure_circuit(uniform_state(dim), {fourier(n)}, identity(dim));
    const ComplexMatrix rho = ComplexMatrix::Constant(Eigen::Index(dim), Eigen::Index(dim), 1.0 / double(dim));
    const double want = dense_interference(rho, {fourier_matrix(dim)}, ComplexMatrix::Identity(Eigen::Index(dim), Eigen::Index(dim)));
    EXPECT_NEAR(interference_exact(c), want, 1e-9);
    EXPECT_NEAR(want, double(dim), 1e-9);
  }
  const Circuit hh = pure_circuit(uniform_state(4), {hadamard(2)}, identity(4));
  EXPECT_NEAR(interference_exact(hh), 4.0, 1e-12);

  const EpsPtr p1 = permutation({2, 0, 3, 1}), p2 = permutation({1, 3, 2, 0}, {1.0, -1.0, 1.0, Complex(0, 1)});
  const Circuit pc = pure_circuit(basis_state(4, 2), {p1, p2}, as_operator(dyad(basis_state(4, 1), basis_state(4, 1))));
  EXPECT_NEAR(interference_exact(pc), exact_expectation(pc).real(), 1e-12);
}

TEST(Interference, MatchesDenseDefinition) {
  const OracleCircuit o = oracle_circuit();
  const ComplexMatrix rho = o.psi * o.psi.adjoint();
  EXPECT_NEAR(interference_exact(o.circuit), dense_interference(rho, o.us, o.m), 1e-10);
  EXPECT_GE(interference_exact(o.circuit) + 1e-12, std::abs(exact_expectation(o.circuit)));
}

TEST(Interference, StateForm) {
  const EhtPtr b = dyad(basis_state(4, 1), basis_state(4, 1));
  EXPECT_NEAR(interference_state_exact({}, *b), 1.0, 1e-15);
  EXPECT_NEAR(interference_state_exact({permutation({1, 2, 3, 0}), permutation({3, 2, 1, 0})}, *b), 1.0, 1e-15);
  const EpsPtr hi = tensor_embed(hadamard(1), 1, 2);
  std::vector<EpsPtr> us;
  double last = interference_state_exact(us, *b);
  for (int t = 0; t < 4; ++t) {
    us.push_back(t % 2 ? hi : haar_wavelet(2));
    const double now = interference_state_exact(us, *b);
    EXPECT_GE(now + 1e-12, last) << t;
    last = now;
  }
  // Tr{|H| |rho| |H^dag|} with rho = |0><0| on one qubit.
  EXPECT_NEAR(interference_state_exact({hadamard(1)}, *dyad(basis_state(2, 0), basis_state(2, 0))), 1.0, 1e-12);
  const ComplexMatrix abs_h = abs_of(h1());
  EXPECT_NEAR(interference_state_exact({hadamard(1)}, *dyad(uniform_state(2), uniform_state(2))),
              (abs_h * ComplexMatrix::Constant(2, 2, 0.5) * abs_h).trace().real(), 1e-12);
}

TEST(Imax, Table) {
  EXPECT_NEAR(*imax(*fourier(4)), 4.0, 1e-12);
  EXPECT_NEAR(imax(fourier_matrix(16)), 4.0, 1e-9);
  EXPECT_NEAR(*imax(*identity(7)), 1.0, 1e-12);
  EXPECT_NEAR(*imax(*grover_reflection(3)), 2.5, 1e-12);
  EXPECT_NEAR(*imax_dense(*grover_reflection(3)), 2.5, 1e-9);
  for (int n = 1; n <= 5; ++n) {
    EXPECT_NEAR(*imax(*haar_wavelet(n)), std::sqrt(n + 1.0), 1e-12);
    EXPECT_NEAR(*imax_dense(*haar_wavelet(n)), std::sqrt(n + 1.0), 1e-9);
    EXPECT_NEAR(*imax(*hadamard(n)), std::pow(2.0, n / 2.0), 1e-12);
  }
  EXPECT_NEAR(*imax(*permutation({3, 1, 0, 2}, {1.0, -1.0, Complex(0, 1), 1.0})), 1.0, 1e-12);
  EXPECT_FALSE(imax_dense(*identity(64), 32).has_value());
}

TEST(Imax, DominatesInterference) {
  std::vector<Circuit> cs;
  cs.push_back(oracle_circuit().circuit);
  cs.push_back(pure_circuit(uniform_state(16), {fourier(4)}, identity(16)));
  cs.push_back(pure_circuit(phase_state(8, [](Index x) { return 0.3 * double(x * x); }),
                            {haar_wavelet(3), hadamard(3), grover_reflection(3)}, pauli_string("ZXZ")));
  for (const auto& c : cs) {
    double cap = *imax(*c.measurement);
    for (const auto& u : c.unitaries) cap *= *imax(*u) * *imax(*u);
    EXPECT_LE(interference_exact(c), cap + 1e-9);
  }
}

TEST(Mana, Examples) {
  RealMatrix st(2, 2);
  st << 0.3, 0.6, 0.7, 0.4;
  EXPECT_NEAR(mana(st), 0.0, 1e-15);
  RealMatrix neg(2, 2);
  neg << 1.1, 0.0, -0.1, 1.0;
  EXPECT_NEAR(mana(neg), std::log(1.2), 1e-15);
  EXPECT_NEAR(mana(h1()), std::log(std::sqrt(2.0)), 1e-15);
  RealVector q(3);
  q << 0.6, 0.5, -0.1;
  EXPECT_NEAR(mana(q), std::log(1.2), 1e-15);
}

TEST(Decoherence, Examples) {
  const Circuit h = pure_circuit(basis_state(2, 0), {hadamard(1)}, as_operator(dyad(basis_state(2, 0), basis_state(2, 0))));
  const DecoherenceReport dh = decoherence_matrix(h);
  EXPECT_EQ(dh.histories, 4u);
  EXPECT_NEAR(std::abs(dh.path_sum - 0.5), 0.0, 1e-12);

  const Circuit perm = pure_circuit(basis_state(4, 1), {permutation({2, 3, 1, 0}), permutation({1, 0, 3, 2})},
                                    sum({{1.0, as_operator(dyad(basis_state(4, 0), basis_state(4, 0)))},
                                         {1.0, as_operator(dyad(basis_state(4, 2), basis_state(4, 2)))}}));
  const DecoherenceReport dp = decoherence_matrix(perm);
  EXPECT_EQ(dp.max_off_diagonal, 0.0);
  EXPECT_NEAR(std::abs(dp.path_sum - exact_expectation(perm)), 0.0, 1e-12);
  for (Eigen::Index j = 0; j < dp.d.rows(); ++j)
    for (Eigen::Index k = 0; k < dp.d.cols(); ++k)
      if (j != k) {
        EXPECT_EQ(dp.d(j, k), Complex(0.0));
      }
}

TEST(Decoherence, SumsMatchExpectationAndInterference) {
  std::vector<Circuit> cs;
  cs.push_back(pure_circuit(uniform_state(4), {tensor_embed(hadamard(1), 1, 2)}, pauli_string("ZI")));
  cs.push_back(pure_circuit(product_state({{0.6, 0.8}, {0.8, Complex(0, 0.6)}}),
                            {haar_wavelet(2), tensor_embed(hadamard(1), 2, 1)}, as_operator(dyad(basis_state(4, 3), basis_state(4, 3)))));
  Circuit mixed;
  mixed.norms = NormPair(2.0);
  ComplexMatrix rho(2, 2);
  rho << 0.7, Complex(0.1, 0.2), Complex(0.1, -0.2), 0.3;
  mixed.initial = density(rho);
  mixed.unitaries = {hadamard(1), pauli_string("Y")};
  mixed.measurement = pauli_string("Z");
  cs.push_back(mixed);
  for (const auto& c : cs) {
    const DecoherenceReport d = decoherence_matrix(c);
    EXPECT_NEAR(std::abs(d.path_sum - exact_expectation(c)), 0.0, 1e-9);
    EXPECT_NEAR(d.abs_sum, interference_exact(c), 1e-9);
  }
  // Independent check of the interference side for the first circuit.
  const ComplexMatrix rho0 = ComplexMatrix::Constant(4, 4, 0.25);
  EXPECT_NEAR(decoherence_matrix(cs[0]).abs_sum,
              dense_interference(rho0, {kron(h1(), ComplexMatrix::Identity(2, 2))}, pauli_reference_zi()), 1e-10);
}

TEST(Decoherence, HistoryCap) {
  const Circuit c = pure_circuit(uniform_state(8), {hadamard(3), hadamard(3), hadamard(3), hadamard(3)}, identity(8));
  try {
    decoherence_matrix(c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::HistoryCapExceeded);
  }
}

TEST(StochasticMode, MarkovChain) {
  RealMatrix a(3, 3), b(3, 3);
  a << 0.5, 0.2, 0.0, 0.5, 0.3, 0.4, 0.0, 0.5, 0.6;
  b << 0.9, 0.1, 0.3, 0.1, 0.8, 0.3, 0.0, 0.1, 0.4;
  RealVector init(3), fin(3);
  init << 0.2, 0.5, 0.3;
  fin << 1.0, 0.0, 0.5;
  const StochasticReport r = stochastic_mode_estimate({init, {a, b}, fin}, {0.02, 0.01, 4, 1});
  EXPECT_NEAR(r.report.b, 1.0, 1e-12);
  EXPECT_NEAR(r.report.estimate.real(), fin.dot(b * a * init), 0.02);
  EXPECT_NEAR(r.operator_mana[0], 0.0, 1e-15);
  EXPECT_NEAR(r.operator_mana[1], 0.0, 1e-15);
  EXPECT_NEAR(r.initial_mana, 0.0, 1e-15);
}

TEST(StochasticMode, NegativeEntries) {
  RealMatrix a(2, 2);
  a << 1.1, 0.0, -0.1, 1.0;
  RealVector init(2), fin(2);
  init << 0.5, 0.5;
  fin << 1.0, -1.0;
  const StochasticReport r = stochastic_mode_estimate({init, {a, a}, fin}, {0.05, 0.01, 1, 1});
  EXPECT_NEAR(r.operator_mana[0], std::log(1.2), 1e-15);
  EXPECT_NEAR(r.report.b, 1.2 * 1.2, 1e-12);
  EXPECT_NEAR(r.report.estimate.real(), fin.dot(a * a * init), 0.05);
  try {
    stochastic_mode_estimate({init, {a, a, a, a}, fin}, {}, 2.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NegativeMassOverflow);
  }
}

TEST(OptimalLaw, ReferenceEstimator) {
  const ComplexMatrix h = h1();
  const ComplexMatrix sigma = ComplexMatrix::Constant(2, 2, 0.5);
  const std::vector<ComplexMatrix> ops{h, h.adjoint() * pauli_z(), h};
  const Complex exact = (ops[0] * ops[1] * ops[2] * sigma).trace();
  const EstimateReport r = optimal_distribution_estimate(sigma, ops, {0.05, 0.01, 2, 1});
  EXPECT_LE(std::abs(r.estimate - exact), 0.05);
  // b is the path-sum of |V|, never larger than the product of Markov bounds.
  EXPECT_LE(r.b, 1.0 * std::sqrt(2.0) * std::sqrt(2.0) * std::sqrt(2.0) + 1e-12);
  EXPECT_EQ(r.method, "optimal");
}

}  // namespace
}  // namespace pathsim
