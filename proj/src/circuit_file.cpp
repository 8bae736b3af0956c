#include "pathsim/circuit_file.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include <json.hpp>

namespace pathsim::file {

bool ProductOpSpec::operator==(const ProductOpSpec&) const = default;
bool BlocksSpec::operator==(const BlocksSpec&) const = default;

namespace {

using json = nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::SchemaError, where + ": " + what);
}

void allow_keys(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
  if (!j.is_object()) fail(where, "expected an object");
  std::set<std::string> ok(keys.begin(), keys.end());
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!ok.count(it.key())) fail(where, "unknown field '" + it.key() + "'");
}

const json& need(const json& j, const std::string& where, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) fail(where, std::string("missing field '") + key + "'");
  return *it;
}

double to_double(const json& j, const std::string& where) {
  if (!j.is_number()) fail(where, "expected a number");
  const double x = j.get<double>();
  if (!std::isfinite(x)) fail(where, "number is not finite");
  return x;
}

Index to_index(const json& j, const std::string& where) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0))
    fail(where, "expected a nonnegative integer");
  return j.get<Index>();
}

int to_int(const json& j, const std::string& where) {
  if (!j.is_number_integer()) fail(where, "expected an integer");
  return j.get<int>();
}

std::string to_string(const json& j, const std::string& where) {
  if (!j.is_string()) fail(where, "expected a string");
  return j.get<std::string>();
}

Complex to_complex(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2) fail(where, "expected a [re, im] pair");
  return {to_double(j[0], where), to_double(j[1], where)};
}

template <class T, class F>
std::vector<T> to_list(const json& j, const std::string& where, F&& f) {
  if (!j.is_array()) fail(where, "expected an array");
  std::vector<T> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(f(j[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

std::vector<Complex> to_complex_list(const json& j, const std::string& where) {
  return to_list<Complex>(j, where, to_complex);
}

std::vector<Index> to_index_list(const json& j, const std::string& where) {
  return to_list<Index>(j, where, to_index);
}

MatrixRows to_matrix(const json& j, const std::string& where) {
  MatrixRows rows = to_list<std::vector<Complex>>(j, where, to_complex_list);
  for (const auto& r : rows)
    if (r.size() != rows.front().size()) fail(where, "matrix rows differ in length");
  if (rows.empty() || rows.front().empty()) fail(where, "matrix is empty");
  return rows;
}

json from_complex(Complex z) { return json::array({z.real(), z.imag()}); }

json from_complex_list(const std::vector<Complex>& v) {
  json a = json::array();
  for (Complex z : v) a.push_back(from_complex(z));
  return a;
}

json from_matrix(const MatrixRows& m) {
  json a = json::array();
  for (const auto& r : m) a.push_back(from_complex_list(r));
  return a;
}

// ---- CT vectors ----

CtSpec parse_ct(const json& j, const std::string& where) {
  const std::string type = to_string(need(j, where, "type"), where + ".type");
  if (type == "basis") {
    allow_keys(j, where, {"type", "index"});
    return BasisSpec{to_index(need(j, where, "index"), where + ".index")};
  }
  if (type == "product") {
    allow_keys(j, where, {"type", "factors"});
    return ProductSpec{to_list<std::vector<Complex>>(need(j, where, "factors"), where + ".factors", to_complex_list)};
  }
  if (type == "phase") {
    allow_keys(j, where, {"type", "theta"});
    return PhaseSpec{to_list<double>(need(j, where, "theta"), where + ".theta", to_double)};
  }
  if (type == "uniform") {
    allow_keys(j, where, {"type"});
    return UniformSpec{};
  }
  if (type == "vector") {
    allow_keys(j, where, {"type", "amplitudes"});
    return VectorSpec{to_complex_list(need(j, where, "amplitudes"), where + ".amplitudes")};
  }
  fail(where, "unknown state type '" + type + "'");
}

bool is_ct_type(const std::string& t) {
  return t == "basis" || t == "product" || t == "phase" || t == "uniform" || t == "vector";
}

json write_ct(const CtSpec& s) {
  return std::visit(
      [](const auto& x) -> json {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, BasisSpec>) return {{"type", "basis"}, {"index", x.index}};
        if constexpr (std::is_same_v<T, ProductSpec>) {
          json f = json::array();
          for (const auto& v : x.factors) f.push_back(from_complex_list(v));
          return {{"type", "product"}, {"factors", f}};
        }
        if constexpr (std::is_same_v<T, PhaseSpec>) return {{"type", "phase"}, {"theta", x.theta}};
        if constexpr (std::is_same_v<T, UniformSpec>) return {{"type", "uniform"}};
        if constexpr (std::is_same_v<T, VectorSpec>)
          return {{"type", "vector"}, {"amplitudes", from_complex_list(x.amplitudes)}};
      },
      s);
}

// ---- initial states ----

StateSpec parse_state(const json& j, const std::string& where) {
  const std::string type = to_string(need(j, where, "type"), where + ".type");
  if (is_ct_type(type)) return PureSpec{parse_ct(j, where)};
  if (type == "dyad") {
    allow_keys(j, where, {"type", "ket", "bra"});
    return DyadSpec{parse_ct(need(j, where, "ket"), where + ".ket"), parse_ct(need(j, where, "bra"), where + ".bra")};
  }
  if (type == "density") {
    allow_keys(j, where, {"type", "matrix", "path"});
    const bool has_m = j.contains("matrix"), has_p = j.contains("path");
    if (has_m == has_p) fail(where, "density needs exactly one of 'matrix' or 'path'");
    DensitySpec d;
    if (has_m) d.matrix = to_matrix(j["matrix"], where + ".matrix");
    if (has_p) d.path = to_string(j["path"], where + ".path");
    return d;
  }
  if (type == "low_rank") {
    allow_keys(j, where, {"type", "terms"});
    return LowRankSpec{to_list<LowRankTermSpec>(need(j, where, "terms"), where + ".terms",
                                                [](const json& t, const std::string& w) {
                                                  allow_keys(t, w, {"s", "u", "v"});
                                                  return LowRankTermSpec{to_complex(need(t, w, "s"), w + ".s"),
                                                                         to_complex_list(need(t, w, "u"), w + ".u"),
                                                                         to_complex_list(need(t, w, "v"), w + ".v")};
                                                })};
  }
  fail(where, "unknown state type '" + type + "'");
}

json write_state(const StateSpec& s) {
  return std::visit(
      [](const auto& x) -> json {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, PureSpec>) return write_ct(x.state);
        if constexpr (std::is_same_v<T, DyadSpec>)
          return {{"type", "dyad"}, {"ket", write_ct(x.ket)}, {"bra", write_ct(x.bra)}};
        if constexpr (std::is_same_v<T, DensitySpec>) {
          json d = {{"type", "density"}};
          if (x.path.empty())
            d["matrix"] = from_matrix(x.matrix);
          else
            d["path"] = x.path;
          return d;
        }
        if constexpr (std::is_same_v<T, LowRankSpec>) {
          json terms = json::array();
          for (const auto& t : x.terms)
            terms.push_back({{"s", from_complex(t.s)}, {"u", from_complex_list(t.u)}, {"v", from_complex_list(t.v)}});
          return {{"type", "low_rank"}, {"terms", terms}};
        }
      },
      s);
}

// ---- operators ----

OpSpec parse_op(const json& j, const std::string& where);

std::vector<OpSpec> parse_ops(const json& j, const std::string& where) { return to_list<OpSpec>(j, where, parse_op); }

OpSpec parse_op(const json& j, const std::string& where) {
  if (!j.is_object()) fail(where, "expected an object");
  const std::string type = to_string(need(j, where, "type"), where + ".type");
  auto sub = [&](const char* key) { return Box<OpSpec>(parse_op(need(j, where, key), where + "." + key)); };
  if (type == "dense") {
    allow_keys(j, where, {"type", "matrix", "construction"});
    DenseSpec d{to_matrix(need(j, where, "matrix"), where + ".matrix")};
    if (j.contains("construction")) d.construction = to_string(j["construction"], where + ".construction");
    if (d.construction != "optimal" && d.construction != "rowcol") fail(where, "construction must be optimal or rowcol");
    return {d};
  }
  if (type == "sparse") {
    allow_keys(j, where, {"type", "rows", "cols", "entries"});
    SparseSpec s{to_index(need(j, where, "rows"), where + ".rows"), to_index(need(j, where, "cols"), where + ".cols"), {}};
    s.entries = to_list<SparseEntrySpec>(need(j, where, "entries"), where + ".entries",
                                         [](const json& e, const std::string& w) {
                                           if (!e.is_array() || e.size() != 3) fail(w, "expected [m, n, [re, im]]");
                                           return SparseEntrySpec{to_index(e[0], w), to_index(e[1], w),
                                                                  to_complex(e[2], w)};
                                         });
    return {s};
  }
  if (type == "permutation") {
    allow_keys(j, where, {"type", "perm", "phases"});
    PermutationSpec p{to_index_list(need(j, where, "perm"), where + ".perm"), {}};
    if (j.contains("phases")) p.phases = to_complex_list(j["phases"], where + ".phases");
    return {p};
  }
  if (type == "diagonal") {
    allow_keys(j, where, {"type", "phases"});
    return {DiagonalSpec{to_complex_list(need(j, where, "phases"), where + ".phases")}};
  }
  if (type == "pauli") {
    allow_keys(j, where, {"type", "string"});
    return {PauliSpec{to_string(need(j, where, "string"), where + ".string")}};
  }
  if (type == "grover" || type == "haar" || type == "fourier" || type == "hadamard") {
    allow_keys(j, where, {"type", "qubits"});
    return {QubitOpSpec{type, to_int(need(j, where, "qubits"), where + ".qubits")}};
  }
  if (type == "identity") {
    allow_keys(j, where, {"type", "dim"});
    return {IdentitySpec{to_index(need(j, where, "dim"), where + ".dim")}};
  }
  if (type == "oracle") {
    allow_keys(j, where, {"type", "x_dim", "y_dim", "table"});
    return {OracleSpec{to_index(need(j, where, "x_dim"), where + ".x_dim"),
                       to_index(need(j, where, "y_dim"), where + ".y_dim"),
                       to_index_list(need(j, where, "table"), where + ".table")}};
  }
  if (type == "sum") {
    allow_keys(j, where, {"type", "terms", "weights"});
    SumSpec s;
    s.terms = to_list<SumTermSpec>(need(j, where, "terms"), where + ".terms", [](const json& t, const std::string& w) {
      allow_keys(t, w, {"s", "op"});
      return SumTermSpec{to_complex(need(t, w, "s"), w + ".s"), Box<OpSpec>(parse_op(need(t, w, "op"), w + ".op"))};
    });
    if (j.contains("weights")) s.weights = to_list<double>(j["weights"], where + ".weights", to_double);
    return {s};
  }
  if (type == "product") {
    allow_keys(j, where, {"type", "factors"});
    return {ProductOpSpec{parse_ops(need(j, where, "factors"), where + ".factors")}};
  }
  if (type == "exp") {
    allow_keys(j, where, {"type", "op"});
    return {ExpSpec{sub("op")}};
  }
  if (type == "scale") {
    allow_keys(j, where, {"type", "s", "op"});
    return {ScaleSpec{to_complex(need(j, where, "s"), where + ".s"), sub("op")}};
  }
  if (type == "adjoint" || type == "transpose") {
    allow_keys(j, where, {"type", "op"});
    return {FlipSpec{type, sub("op")}};
  }
  if (type == "controlled" || type == "block_diagonal") {
    allow_keys(j, where, {"type", "blocks"});
    return {BlocksSpec{type, parse_ops(need(j, where, "blocks"), where + ".blocks")}};
  }
  if (type == "tensor_embed") {
    allow_keys(j, where, {"type", "op", "left", "right"});
    return {TensorEmbedSpec{sub("op"), to_index(need(j, where, "left"), where + ".left"),
                            to_index(need(j, where, "right"), where + ".right")}};
  }
  if (type == "projector_family") {
    allow_keys(j, where, {"type", "x_dim", "y_dim", "table"});
    return {ProjectorFamilySpec{to_index(need(j, where, "x_dim"), where + ".x_dim"),
                                to_index(need(j, where, "y_dim"), where + ".y_dim"),
                                to_index_list(need(j, where, "table"), where + ".table")}};
  }
  if (type == "projector") {
    allow_keys(j, where, {"type", "state"});
    return {ProjectorSpec{parse_ct(need(j, where, "state"), where + ".state")}};
  }
  fail(where, "unknown operator type '" + type + "'");
}

json write_op(const OpSpec& s);

json write_ops(const std::vector<OpSpec>& ops) {
  json a = json::array();
  for (const auto& o : ops) a.push_back(write_op(o));
  return a;
}

json write_op(const OpSpec& s) {
  return std::visit(
      [](const auto& x) -> json {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, DenseSpec>)
          return {{"type", "dense"}, {"matrix", from_matrix(x.matrix)}, {"construction", x.construction}};
        if constexpr (std::is_same_v<T, SparseSpec>) {
          json e = json::array();
          for (const auto& t : x.entries) e.push_back(json::array({t.row, t.col, from_complex(t.value)}));
          return {{"type", "sparse"}, {"rows", x.rows}, {"cols", x.cols}, {"entries", e}};
        }
        if constexpr (std::is_same_v<T, PermutationSpec>) {
          json p = {{"type", "permutation"}, {"perm", x.perm}};
          if (!x.phases.empty()) p["phases"] = from_complex_list(x.phases);
          return p;
        }
        if constexpr (std::is_same_v<T, DiagonalSpec>)
          return {{"type", "diagonal"}, {"phases", from_complex_list(x.phases)}};
        if constexpr (std::is_same_v<T, PauliSpec>) return {{"type", "pauli"}, {"string", x.string}};
        if constexpr (std::is_same_v<T, QubitOpSpec>) return {{"type", x.kind}, {"qubits", x.qubits}};
        if constexpr (std::is_same_v<T, IdentitySpec>) return {{"type", "identity"}, {"dim", x.dim}};
        if constexpr (std::is_same_v<T, OracleSpec>)
          return {{"type", "oracle"}, {"x_dim", x.x_dim}, {"y_dim", x.y_dim}, {"table", x.table}};
        if constexpr (std::is_same_v<T, SumSpec>) {
          json terms = json::array();
          for (const auto& t : x.terms) terms.push_back({{"s", from_complex(t.s)}, {"op", write_op(*t.op)}});
          json s = {{"type", "sum"}, {"terms", terms}};
          if (x.weights) s["weights"] = *x.weights;
          return s;
        }
        if constexpr (std::is_same_v<T, ProductOpSpec>) return {{"type", "product"}, {"factors", write_ops(x.factors)}};
        if constexpr (std::is_same_v<T, ExpSpec>) return {{"type", "exp"}, {"op", write_op(*x.op)}};
        if constexpr (std::is_same_v<T, ScaleSpec>)
          return {{"type", "scale"}, {"s", from_complex(x.s)}, {"op", write_op(*x.op)}};
        if constexpr (std::is_same_v<T, FlipSpec>) return {{"type", x.kind}, {"op", write_op(*x.op)}};
        if constexpr (std::is_same_v<T, BlocksSpec>) return {{"type", x.kind}, {"blocks", write_ops(x.blocks)}};
        if constexpr (std::is_same_v<T, TensorEmbedSpec>)
          return {{"type", "tensor_embed"}, {"op", write_op(*x.op)}, {"left", x.left}, {"right", x.right}};
        if constexpr (std::is_same_v<T, ProjectorFamilySpec>)
          return {{"type", "projector_family"}, {"x_dim", x.x_dim}, {"y_dim", x.y_dim}, {"table", x.table}};
        if constexpr (std::is_same_v<T, ProjectorSpec>) return {{"type", "projector"}, {"state", write_ct(x.state)}};
      },
      s.v);
}

double parse_p(const json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() == "inf") return kInf;
    fail("p", "expected a number >= 1 or \"inf\"");
  }
  const double p = to_double(j, "p");
  if (!(p >= 1.0)) fail("p", "expected a number >= 1 or \"inf\"");
  return p;
}

MatrixRows read_density_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidParameter, "cannot open density file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    fail(path.string(), e.what());
  }
  return to_matrix(j, path.string());
}

ComplexMatrix to_eigen(const MatrixRows& rows) {
  ComplexMatrix a(Eigen::Index(rows.size()), Eigen::Index(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t k = 0; k < rows[i].size(); ++k) a(Eigen::Index(i), Eigen::Index(k)) = rows[i][k];
  return a;
}

}  // namespace

CircuitFile parse(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail("file", e.what());
  }
  allow_keys(j, "circuit", {"schema_version", "n_levels", "p", "state", "ops", "measurement"});
  CircuitFile f;
  f.schema_version = to_int(need(j, "circuit", "schema_version"), "schema_version");
  if (f.schema_version != kSchemaVersion)
    fail("schema_version", "unsupported version " + std::to_string(f.schema_version));
  f.n_levels = to_index_list(need(j, "circuit", "n_levels"), "n_levels");
  if (f.n_levels.empty()) fail("n_levels", "needs at least one subsystem");
  for (Index d : f.n_levels)
    if (d == 0) fail("n_levels", "subsystem dimensions must be positive");
  if (j.contains("p")) f.p = parse_p(j["p"]);
  f.state = parse_state(need(j, "circuit", "state"), "state");
  f.ops = parse_ops(need(j, "circuit", "ops"), "ops");
  f.measurement = parse_op(need(j, "circuit", "measurement"), "measurement");
  return f;
}

CircuitFile load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::SchemaError, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::string serialize(const CircuitFile& f) {
  json j;
  j["schema_version"] = f.schema_version;
  j["n_levels"] = f.n_levels;
  if (std::isinf(f.p))
    j["p"] = "inf";
  else
    j["p"] = f.p;
  j["state"] = write_state(f.state);
  j["ops"] = write_ops(f.ops);
  j["measurement"] = write_op(f.measurement);
  return j.dump(2) + "\n";
}

Index dimension(const CircuitFile& f) {
  Index n = 1;
  for (Index d : f.n_levels) {
    if (d != 0 && n > (Index(1) << 40) / d) throw Error(ErrorCode::InvalidParameter, "total dimension too large");
    n *= d;
  }
  return n;
}

NormPair norms(const CircuitFile& f) { return NormPair(f.p); }

CtPtr build_state(const CtSpec& s, Index dim) {
  CtPtr out = std::visit(
      [dim](const auto& x) -> CtPtr {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, BasisSpec>) return basis_state(dim, x.index);
        if constexpr (std::is_same_v<T, ProductSpec>) return product_state(x.factors);
        if constexpr (std::is_same_v<T, PhaseSpec>) {
          if (x.theta.size() != dim) throw Error(ErrorCode::DimensionMismatch, "phase table length differs from dimension");
          return phase_state(dim, [t = x.theta](Index i) { return t[i]; });
        }
        if constexpr (std::is_same_v<T, UniformSpec>) return uniform_state(dim);
        if constexpr (std::is_same_v<T, VectorSpec>) return vector_state(x.amplitudes);
      },
      s);
  if (out->dim() != dim) throw Error(ErrorCode::DimensionMismatch, "state dimension differs from the circuit");
  return out;
}

EhtPtr build_initial(const CircuitFile& f, const BuildOptions& opts) {
  const Index dim = dimension(f);
  const NormPair pq = norms(f);
  return std::visit(
      [&](const auto& x) -> EhtPtr {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, PureSpec>) {
          CtPtr s = build_state(x.state, dim);
          return dyad(s, s, pq);
        }
        if constexpr (std::is_same_v<T, DyadSpec>) return dyad(build_state(x.ket, dim), build_state(x.bra, dim), pq);
        if constexpr (std::is_same_v<T, DensitySpec>) {
          if (!(pq == NormPair(2.0))) throw Error(ErrorCode::InvalidParameter, "density states need p = 2");
          const MatrixRows rows = x.path.empty() ? x.matrix : read_density_file(opts.base_dir / x.path);
          ComplexMatrix rho = to_eigen(rows);
          if (Index(rho.rows()) != dim) throw Error(ErrorCode::DimensionMismatch, "density dimension differs");
          return density(std::move(rho));
        }
        if constexpr (std::is_same_v<T, LowRankSpec>) {
          std::vector<LowRankTerm> terms;
          for (const auto& t : x.terms) terms.push_back({t.s, vector_state(t.u), vector_state(t.v)});
          EhtPtr s = low_rank(std::move(terms), pq);
          if (s->rows() != dim || s->cols() != dim)
            throw Error(ErrorCode::DimensionMismatch, "low-rank dimension differs");
          return s;
        }
      },
      f.state);
}

EpsPtr build_op(const OpSpec& s, NormPair pq, const BuildOptions& opts) {
  return std::visit(
      [&](const auto& x) -> EpsPtr {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, DenseSpec>) {
          ComplexMatrix a = to_eigen(x.matrix);
          return x.construction == "rowcol" ? from_rowcol(a, pq) : from_dense_optimal(a, pq);
        }
        if constexpr (std::is_same_v<T, SparseSpec>) {
          std::vector<Triplet> t;
          for (const auto& e : x.entries) t.push_back({e.row, e.col, e.value});
          return sparse_ecs(SparseEntries(x.rows, x.cols, std::move(t)), pq);
        }
        if constexpr (std::is_same_v<T, PermutationSpec>) return permutation(x.perm, x.phases, pq);
        if constexpr (std::is_same_v<T, DiagonalSpec>) return diagonal_unitary(x.phases, pq);
        if constexpr (std::is_same_v<T, PauliSpec>) return pauli_string(x.string, pq);
        if constexpr (std::is_same_v<T, QubitOpSpec>) {
          if (x.kind == "grover") return grover_reflection(x.qubits, pq);
          if (x.kind == "haar") return haar_wavelet(x.qubits, pq);
          if (x.kind == "fourier") return fourier(x.qubits, pq);
          return hadamard(x.qubits, pq);
        }
        if constexpr (std::is_same_v<T, IdentitySpec>) return identity(x.dim, pq);
        if constexpr (std::is_same_v<T, OracleSpec>) {
          if (x.table.size() != x.x_dim) throw Error(ErrorCode::DimensionMismatch, "oracle table length differs from x_dim");
          return oracle_op([t = x.table](Index i) { return t[i]; }, x.x_dim, x.y_dim, opts.queries, pq);
        }
        if constexpr (std::is_same_v<T, SumSpec>) {
          std::vector<SumTerm> terms;
          for (const auto& t : x.terms) terms.push_back({t.s, build_op(*t.op, pq, opts)});
          return sum(std::move(terms), x.weights);
        }
        if constexpr (std::is_same_v<T, ProductOpSpec>) {
          std::vector<EpsPtr> f;
          for (const auto& o : x.factors) f.push_back(build_op(o, pq, opts));
          return product(std::move(f));
        }
        if constexpr (std::is_same_v<T, ExpSpec>) return exp(build_op(*x.op, pq, opts));
        if constexpr (std::is_same_v<T, ScaleSpec>) return scale(x.s, build_op(*x.op, pq, opts));
        if constexpr (std::is_same_v<T, FlipSpec>) {
          // The flipped operator is measured with the swapped pair, so build the inner one with it.
          EpsPtr inner = build_op(*x.op, pq.swapped(), opts);
          return x.kind == "adjoint" ? adjoint(inner) : transpose(inner);
        }
        if constexpr (std::is_same_v<T, BlocksSpec>) {
          std::vector<EpsPtr> b;
          for (const auto& o : x.blocks) b.push_back(build_op(o, pq, opts));
          if (x.kind == "controlled") return controlled(std::move(b));
          std::vector<Index> rows, cols;
          for (const auto& o : b) {
            rows.push_back(o->rows());
            cols.push_back(o->cols());
          }
          return block_diagonal(std::move(b), direct_sum_layout(std::move(rows), std::move(cols)));
        }
        if constexpr (std::is_same_v<T, TensorEmbedSpec>) return tensor_embed(build_op(*x.op, pq, opts), x.left, x.right);
        if constexpr (std::is_same_v<T, ProjectorFamilySpec>) {
          if (x.table.size() != x.x_dim)
            throw Error(ErrorCode::DimensionMismatch, "projector family table length differs from x_dim");
          std::vector<EpsPtr> blocks;
          const double n = double(x.y_dim);
          for (Index g : x.table) {
            // F^dag |g> has amplitudes exp(-2 pi i j g / N) / sqrt(N).
            CtPtr v = phase_state(x.y_dim, [g, n, y = x.y_dim](Index j) {
              return -2.0 * std::numbers::pi * double((j * g) % y) / n;
            });
            blocks.push_back(as_operator(dyad(v, v, pq)));
          }
          return controlled(std::move(blocks));
        }
        if constexpr (std::is_same_v<T, ProjectorSpec>) {
          const Index dim = std::visit(
              [](const auto& c) -> Index {
                using C = std::decay_t<decltype(c)>;
                if constexpr (std::is_same_v<C, PhaseSpec>) return c.theta.size();
                if constexpr (std::is_same_v<C, VectorSpec>) return c.amplitudes.size();
                if constexpr (std::is_same_v<C, ProductSpec>) {
                  Index d = 1;
                  for (const auto& f : c.factors) d *= f.size();
                  return d;
                }
                return 0;
              },
              x.state);
          if (dim == 0) throw Error(ErrorCode::InvalidParameter, "projector state needs an explicit dimension here");
          CtPtr v = build_state(x.state, dim);
          return as_operator(dyad(v, v, pq));
        }
      },
      s.v);
}

Circuit build(const CircuitFile& f, const BuildOptions& opts) {
  Circuit c;
  c.norms = norms(f);
  c.initial = build_initial(f, opts);
  const Index dim = dimension(f);
  for (const auto& o : f.ops) c.unitaries.push_back(build_op(o, c.norms, opts));
  // Basis and uniform projectors take their dimension from the circuit.
  if (const auto* pr = std::get_if<ProjectorSpec>(&f.measurement.v)) {
    CtPtr v = build_state(pr->state, dim);
    c.measurement = as_operator(dyad(v, v, c.norms));
  } else {
    c.measurement = build_op(f.measurement, c.norms, opts);
  }
  c.validate();
  return c;
}

}  // namespace pathsim::file
