#include <cmath>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "pathsim/circuit_file.hpp"

namespace {

using json = nlohmann::ordered_json;
using namespace pathsim;

constexpr int kExitSchema = 2;
constexpr int kExitConstruction = 3;

struct EstimateArgs {
  std::string file;
  double epsilon = 0.05;
  double delta = 0.01;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  std::string method = "markov";
  bool timing = false;
};

json report_json(const EstimateReport& r, Complex value, bool timing) {
  json j;
  j["estimate_re"] = value.real();
  j["estimate_im"] = value.imag();
  j["K"] = r.sample_count;
  j["b"] = r.b;
  j["epsilon"] = r.epsilon;
  j["delta"] = r.delta;
  j["seed"] = r.seed;
  j["workers"] = r.workers;
  j["elapsed_s"] = timing ? json(r.elapsed_seconds) : json(nullptr);
  j["method"] = r.method;
  return j;
}

file::BuildOptions build_options(const std::string& path) {
  file::BuildOptions o;
  o.base_dir = std::filesystem::path(path).parent_path();
  return o;
}

json cmd_estimate(const EstimateArgs& a) {
  const file::CircuitFile f = file::load(a.file);
  EstimateOptions opts{a.epsilon, a.delta, a.seed, a.workers};
  if (a.method == "markov") {
    const Circuit c = file::build(f, build_options(a.file));
    const EstimateReport r = estimate_expectation(c, opts);
    return report_json(r, r.estimate, a.timing);
  }
  // |<phi| U_T ... U_1 |psi>|^2 for a pure initial state and a rank-one projector onto phi.
  const auto* pure = std::get_if<file::PureSpec>(&f.state);
  const auto* proj = std::get_if<file::ProjectorSpec>(&f.measurement.v);
  if (!pure || !proj)
    throw Error(ErrorCode::InvalidParameter, "amplitude method needs a pure state and a projector measurement");
  const Index dim = file::dimension(f);
  const NormPair pq = file::norms(f);
  const file::BuildOptions bo = build_options(a.file);
  std::vector<EpsPtr> us;
  for (const auto& o : f.ops) us.push_back(file::build_op(o, pq, bo));
  const AmplitudeReport r =
      estimate_amplitude(file::build_state(proj->state, dim), file::build_state(pure->state, dim), us, opts, pq);
  return report_json(r.amplitude, r.abs_squared, a.timing);
}

json complex_json(Complex z) { return json::array({z.real(), z.imag()}); }

json cmd_exact(const std::string& path) {
  const Circuit c = file::build(file::load(path), build_options(path));
  json j;
  j["expectation"] = complex_json(exact_expectation(c));
  j["interference"] = interference_exact(c);
  j["interference_state"] = interference_state_exact(c.unitaries, *c.initial);
  return j;
}

json op_report(const EpsOperator& op) {
  json j;
  j["rows"] = op.rows();
  j["cols"] = op.cols();
  j["b_constructed"] = op.bound();
  const std::optional<double> v = imax(op);
  j["imax_exact"] = v ? json(*v) : json(nullptr);
  if (op.rows() <= kDefaultOracleCap && op.cols() <= kDefaultOracleCap)
    j["mana"] = mana(op.dense());
  else
    j["mana"] = nullptr;
  return j;
}

double parse_p(const std::string& s) {
  if (s == "inf") return kInf;
  std::size_t used = 0;
  double p = 0.0;
  try {
    p = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || !(p >= 1.0)) throw Error(ErrorCode::SchemaError, "--p must be a number >= 1 or inf");
  return p;
}

json cmd_imax(const std::string& path, const std::string& op_text, const std::optional<std::string>& p_text) {
  if (path.empty() == op_text.empty()) throw Error(ErrorCode::SchemaError, "give exactly one of FILE or --op");
  if (!op_text.empty()) {
    // Wrap the operator in a minimal circuit so that it goes through the same strict parser.
    const std::string text = R"({"schema_version":1,"n_levels":[1],"state":{"type":"basis","index":0},"ops":[],)"
                             R"("measurement":)" +
                             op_text + "}";
    const file::CircuitFile f = file::parse(text);
    const NormPair pq(p_text ? parse_p(*p_text) : 2.0);
    return op_report(*file::build_op(f.measurement, pq));
  }
  file::CircuitFile f = file::load(path);
  if (p_text) f.p = parse_p(*p_text);
  const Circuit c = file::build(f, build_options(path));
  json j;
  j["ops"] = json::array();
  for (const auto& u : c.unitaries) j["ops"].push_back(op_report(*u));
  j["measurement"] = op_report(*c.measurement);
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Path-sampling estimator for circuit expectation values"};
  app.require_subcommand(1);

  EstimateArgs est;
  auto* estimate = app.add_subcommand("estimate", "Estimate the expectation value of a circuit file");
  estimate->add_option("file", est.file, "Circuit file")->required();
  estimate->add_option("--epsilon", est.epsilon, "Additive error")->capture_default_str();
  estimate->add_option("--delta", est.delta, "Failure probability")->capture_default_str();
  estimate->add_option("--seed", est.seed, "Random seed")->capture_default_str();
  estimate->add_option("--workers", est.workers, "Worker count")->capture_default_str()->check(CLI::PositiveNumber);
  estimate->add_option("--method", est.method, "markov or amplitude")
      ->capture_default_str()
      ->check(CLI::IsMember({"markov", "amplitude"}));
  estimate->add_flag("--timing", est.timing, "Report elapsed_s (otherwise null)");

  std::string exact_file;
  auto* exact = app.add_subcommand("exact", "Dense expectation and interference values");
  exact->add_option("file", exact_file, "Circuit file")->required();

  std::string imax_file, imax_op;
  std::optional<std::string> imax_p;
  auto* imax_cmd = app.add_subcommand("imax", "Constructed bound, capacity and mana per operator");
  imax_cmd->add_option("file", imax_file, "Circuit file");
  imax_cmd->add_option("--op", imax_op, "Single operator spec as JSON text");
  imax_cmd->add_option("--p", imax_p, "Norm index p (number or inf)");

  double s_eps = 0.05, s_delta = 0.01, s_b = 1.0;
  auto* samples = app.add_subcommand("samples", "Print the sample count K");
  samples->add_option("--epsilon", s_eps)->capture_default_str();
  samples->add_option("--delta", s_delta)->capture_default_str();
  samples->add_option("--b", s_b)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitSchema;
  }

  try {
    if (*estimate) {
      std::cout << cmd_estimate(est).dump(2) << "\n";
    } else if (*exact) {
      std::cout << cmd_exact(exact_file).dump(2) << "\n";
    } else if (*imax_cmd) {
      std::cout << cmd_imax(imax_file, imax_op, imax_p).dump(2) << "\n";
    } else if (*samples) {
      std::cout << sample_count(s_eps, s_delta, s_b) << "\n";
    }
  } catch (const Error& e) {
    std::cerr << "pathsim: " << e.what() << "\n";
    return e.code() == ErrorCode::SchemaError ? kExitSchema : kExitConstruction;
  } catch (const std::exception& e) {
    std::cerr << "pathsim: " << e.what() << "\n";
    return kExitConstruction;
  }
  return 0;
}
