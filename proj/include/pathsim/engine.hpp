#pragma once

#include <optional>
#include <vector>

#include "pathsim/eht.hpp"
#include "pathsim/eps.hpp"

namespace pathsim {

struct EstimateOptions {
  double epsilon = 0.05;
  double delta = 0.01;
  std::uint64_t seed = 0;
  unsigned workers = 1;
};

// One sampled path through Tr{A sigma}.
struct PathLedger {
  bool forward = true;
  Index start = 0;  // first index drawn from sigma
  Index end = 0;    // index reached through A
  Complex ratio_p{0.0, 0.0};
  Complex ratio_q{0.0, 0.0};
  bool dead = false;
};

PathLedger sample_path(const EhtState& sigma, const EpsOperator& a, RngStream& rng);
// V/R for the mixture of forward and backward chains.
Complex path_value(const PathLedger& path, NormPair pq);

// Runs K paths split statically over `workers` streams (stream id = worker
// index) and merges the per-worker accumulators in worker order.
StreamingMean run_paths_parallel(const EhtState& sigma, const EpsOperator& a, std::uint64_t k,
                                 std::uint64_t seed, unsigned workers);
// Same partition and merge order without threads; bit-identical to the above.
StreamingMean run_paths_serial(const EhtState& sigma, const EpsOperator& a, std::uint64_t k,
                               std::uint64_t seed, unsigned workers);

EstimateReport estimate_trace(const EhtState& sigma, const EpsOperator& a, const EstimateOptions& opts);
EstimateReport estimate_trace_serial(const EhtState& sigma, const EpsOperator& a, const EstimateOptions& opts);

struct Circuit {
  EhtPtr initial;
  std::vector<EpsPtr> unitaries;  // applied first to last
  EpsPtr measurement;
  NormPair norms;

  Index dim() const;
  // Throws DimensionMismatch / InvalidParameter on an inconsistent circuit.
  void validate() const;
};

// product(U1^dag, ..., UT^dag, M, UT, ..., U1).
EpsPtr expectation_operator(const Circuit& c);
EstimateReport estimate_expectation(const Circuit& c, const EstimateOptions& opts);

struct AmplitudeReport {
  EstimateReport amplitude;   // estimate of <phi| UT ... U1 |psi>
  double abs_squared = 0.0;
  double abs_squared_bound = 0.0;  // 2|a| eps + eps^2
};
AmplitudeReport estimate_amplitude(CtPtr phi, CtPtr psi, const std::vector<EpsPtr>& unitaries,
                                   const EstimateOptions& opts, NormPair pq = {});

Complex exact_expectation(const Circuit& c, Index cap = kDefaultOracleCap);
double interference_exact(const Circuit& c, Index cap = kDefaultOracleCap);
// Tr{|UT| ... |U1| |rho| |U1^dag| ... |UT^dag|}.
double interference_state_exact(const std::vector<EpsPtr>& unitaries, const EhtState& rho,
                                Index cap = kDefaultOracleCap);

double imax(const ComplexMatrix& a, NormPair pq = {});
// Closed form when the operator declares one, otherwise dense; nullopt above cap.
std::optional<double> imax(const EpsOperator& a, Index cap = kDefaultOracleCap);
std::optional<double> imax_dense(const EpsOperator& a, Index cap = kDefaultOracleCap);
// ln ||A||_1 (maximum absolute column sum).
double mana(const ComplexMatrix& a);

struct DecoherenceReport {
  ComplexMatrix d;  // D(j; k), histories in mixed radix with j_0 most significant
  Complex path_sum{0.0, 0.0};
  double abs_sum = 0.0;
  double max_off_diagonal = 0.0;
  Index histories = 0;
};
DecoherenceReport decoherence_matrix(const Circuit& c, Index history_cap = 4096);

struct StochasticCircuit {
  RealVector initial;            // quasi-probability vector
  std::vector<RealMatrix> ops;   // applied first to last
  RealVector final;              // final functional
};
struct StochasticReport {
  EstimateReport report;
  std::vector<double> operator_mana;
  double initial_mana = 0.0;
};
// p = inf, q = 1: only the column-stochastic (backward) chain runs.
StochasticReport stochastic_mode_estimate(const StochasticCircuit& c, const EstimateOptions& opts,
                                          double b_cap = 1e6);
double mana(const RealMatrix& a);
double mana(const RealVector& x);

// Reference estimator drawing whole paths from the optimal law R* proportional
// to |V|. Enumerates every path, so only for tiny chains.
EstimateReport optimal_distribution_estimate(const ComplexMatrix& sigma, const std::vector<ComplexMatrix>& ops,
                                             const EstimateOptions& opts, Index path_cap = Index(1) << 20);

}  // namespace pathsim
