#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "pathsim/engine.hpp"

namespace pathsim::file {

inline constexpr int kSchemaVersion = 1;

// Heap box with value semantics so that specs can nest.
template <class T>
class Box {
 public:
  Box() : p_(std::make_unique<T>()) {}
  Box(T v) : p_(std::make_unique<T>(std::move(v))) {}
  Box(const Box& o) : p_(std::make_unique<T>(*o.p_)) {}
  Box(Box&&) noexcept = default;
  Box& operator=(const Box& o) {
    p_ = std::make_unique<T>(*o.p_);
    return *this;
  }
  Box& operator=(Box&&) noexcept = default;

  const T& operator*() const { return *p_; }
  const T* operator->() const { return p_.get(); }
  bool operator==(const Box& o) const { return *p_ == *o.p_; }

 private:
  std::unique_ptr<T> p_;
};

using MatrixRows = std::vector<std::vector<Complex>>;

// Computationally tractable vectors.
struct BasisSpec {
  Index index = 0;
  bool operator==(const BasisSpec&) const = default;
};
struct ProductSpec {
  std::vector<std::vector<Complex>> factors;
  bool operator==(const ProductSpec&) const = default;
};
struct PhaseSpec {
  std::vector<double> theta;
  bool operator==(const PhaseSpec&) const = default;
};
struct UniformSpec {
  bool operator==(const UniformSpec&) const = default;
};
struct VectorSpec {
  std::vector<Complex> amplitudes;
  bool operator==(const VectorSpec&) const = default;
};
using CtSpec = std::variant<BasisSpec, ProductSpec, PhaseSpec, UniformSpec, VectorSpec>;

// Initial states.
struct PureSpec {
  CtSpec state;
  bool operator==(const PureSpec&) const = default;
};
struct DyadSpec {
  CtSpec ket;
  CtSpec bra;
  bool operator==(const DyadSpec&) const = default;
};
struct DensitySpec {
  MatrixRows matrix;  // empty when `path` is used
  std::string path;
  bool operator==(const DensitySpec&) const = default;
};
struct LowRankTermSpec {
  Complex s;
  std::vector<Complex> u;
  std::vector<Complex> v;
  bool operator==(const LowRankTermSpec&) const = default;
};
struct LowRankSpec {
  std::vector<LowRankTermSpec> terms;
  bool operator==(const LowRankSpec&) const = default;
};
using StateSpec = std::variant<PureSpec, DyadSpec, DensitySpec, LowRankSpec>;

struct OpSpec;

struct DenseSpec {
  MatrixRows matrix;
  std::string construction = "optimal";  // optimal | rowcol
  bool operator==(const DenseSpec&) const = default;
};
struct SparseEntrySpec {
  Index row;
  Index col;
  Complex value;
  bool operator==(const SparseEntrySpec&) const = default;
};
struct SparseSpec {
  Index rows = 0;
  Index cols = 0;
  std::vector<SparseEntrySpec> entries;
  bool operator==(const SparseSpec&) const = default;
};
struct PermutationSpec {
  std::vector<Index> perm;
  std::vector<Complex> phases;
  bool operator==(const PermutationSpec&) const = default;
};
struct DiagonalSpec {
  std::vector<Complex> phases;
  bool operator==(const DiagonalSpec&) const = default;
};
struct PauliSpec {
  std::string string;
  bool operator==(const PauliSpec&) const = default;
};
// grover, haar, fourier, hadamard
struct QubitOpSpec {
  std::string kind;
  int qubits = 1;
  bool operator==(const QubitOpSpec&) const = default;
};
struct IdentitySpec {
  Index dim = 1;
  bool operator==(const IdentitySpec&) const = default;
};
struct OracleSpec {
  Index x_dim = 1;
  Index y_dim = 1;
  std::vector<Index> table;
  bool operator==(const OracleSpec&) const = default;
};
struct SumTermSpec {
  Complex s;
  Box<OpSpec> op;
  bool operator==(const SumTermSpec&) const = default;
};
struct SumSpec {
  std::vector<SumTermSpec> terms;
  std::optional<std::vector<double>> weights;
  bool operator==(const SumSpec&) const = default;
};
struct ProductOpSpec {
  std::vector<OpSpec> factors;
  bool operator==(const ProductOpSpec&) const;
};
struct ExpSpec {
  Box<OpSpec> op;
  bool operator==(const ExpSpec&) const = default;
};
struct ScaleSpec {
  Complex s;
  Box<OpSpec> op;
  bool operator==(const ScaleSpec&) const = default;
};
// adjoint, transpose
struct FlipSpec {
  std::string kind;
  Box<OpSpec> op;
  bool operator==(const FlipSpec&) const = default;
};
// controlled (equal blocks) or block_diagonal (any shapes)
struct BlocksSpec {
  std::string kind;
  std::vector<OpSpec> blocks;
  bool operator==(const BlocksSpec&) const;
};
struct TensorEmbedSpec {
  Box<OpSpec> op;
  Index left = 1;
  Index right = 1;
  bool operator==(const TensorEmbedSpec&) const = default;
};
// sum_x |x><x| (x) F^dag |g(x)><g(x)| F
struct ProjectorFamilySpec {
  Index x_dim = 1;
  Index y_dim = 1;
  std::vector<Index> table;
  bool operator==(const ProjectorFamilySpec&) const = default;
};
struct ProjectorSpec {
  CtSpec state;
  bool operator==(const ProjectorSpec&) const = default;
};

struct OpSpec {
  std::variant<DenseSpec, SparseSpec, PermutationSpec, DiagonalSpec, PauliSpec, QubitOpSpec, IdentitySpec,
               OracleSpec, SumSpec, ProductOpSpec, ExpSpec, ScaleSpec, FlipSpec, BlocksSpec, TensorEmbedSpec,
               ProjectorFamilySpec, ProjectorSpec>
      v;
  bool operator==(const OpSpec&) const = default;
};

struct CircuitFile {
  int schema_version = kSchemaVersion;
  std::vector<Index> n_levels;
  double p = 2.0;
  StateSpec state;
  std::vector<OpSpec> ops;
  OpSpec measurement;
  bool operator==(const CircuitFile&) const = default;
};

// Throws Error(SchemaError) on malformed input.
CircuitFile parse(const std::string& text);
CircuitFile load(const std::filesystem::path& path);
std::string serialize(const CircuitFile& f);

struct BuildOptions {
  std::filesystem::path base_dir;  // resolves density paths
  std::shared_ptr<QueryCounter> queries;
};

Index dimension(const CircuitFile& f);
NormPair norms(const CircuitFile& f);
CtPtr build_state(const CtSpec& s, Index dim);
EhtPtr build_initial(const CircuitFile& f, const BuildOptions& opts = {});
EpsPtr build_op(const OpSpec& s, NormPair pq, const BuildOptions& opts = {});
Circuit build(const CircuitFile& f, const BuildOptions& opts = {});

}  // namespace pathsim::file
