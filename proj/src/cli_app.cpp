#include "resilest/cli.hpp"

#include <filesystem>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "resilest/coding_analysis.hpp"
#include "resilest/error_correction.hpp"
#include "resilest/errors.hpp"
#include "resilest/io.hpp"
#include "resilest/plant_sim.hpp"

namespace resilest {

namespace {

std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(10) << v;
  return s.str();
}

std::string fmt(const Eigen::VectorXd& v) {
  std::string out;
  for (Eigen::Index i = 0; i < v.size(); ++i) out += (i ? " " : "") + fmt(v(i));
  return out;
}

nlohmann::json constants_json(const RobustnessConstants& c) {
  return {{"q", c.q},         {"r", c.r},           {"rho", c.rho},
          {"eta", c.eta},     {"kappa_d", c.kappa_d}, {"kappa_e", c.kappa_e},
          {"eta_prime", c.eta_prime}, {"theta", c.theta}, {"kappa_c", c.kappa_c},
          {"kappa_c_prime", c.kappa_c_prime}};
}

int cmd_analyze(const std::string& model_path, std::optional<int> q, std::optional<int> r, bool as_json,
                std::ostream& out) {
  const ModelSpec spec = load_model_file(model_path);
  std::vector<std::pair<int, int>> qr;
  if (q) qr.emplace_back(*q, r.value_or(*q));
  const AnalysisReport rep = analyze_model(spec.model, qr);
  const bool observable = rep.redundancy_degree >= 0;

  if (as_json) {
    nlohmann::json j{{"n", spec.model.n()},
                     {"m", spec.model.m()},
                     {"p", spec.model.p()},
                     {"security_index", rep.security_index},
                     {"observable", observable},
                     {"max_detectable_q", rep.max_detectable_q},
                     {"max_correctable_q", rep.max_correctable_q}};
    j["redundancy_degree"] = observable ? nlohmann::json(rep.redundancy_degree) : nlohmann::json("not observable");
    j["constants"] = nlohmann::json::array();
    for (const auto& [key, c] : rep.per_q_constants) j["constants"].push_back(constants_json(c));
    out << j.dump(2) << '\n';
    return 0;
  }

  out << "n: " << spec.model.n() << ", m: " << spec.model.m() << ", p: " << spec.model.p() << '\n';
  out << "security_index: " << rep.security_index << '\n';
  if (observable) {
    out << "redundancy_degree: " << rep.redundancy_degree << '\n';
  } else {
    out << "redundancy_degree: not observable\n";
  }
  out << "max_detectable_q: " << rep.max_detectable_q << '\n';
  out << "max_correctable_q: " << rep.max_correctable_q << '\n';
  for (const auto& [key, c] : rep.per_q_constants) {
    out << "constants (q=" << c.q << ", r=" << c.r << "):\n";
    out << "  rho: " << fmt(c.rho) << "\n  eta: " << fmt(c.eta) << "\n  kappa_d: " << fmt(c.kappa_d)
        << "\n  kappa_e: " << fmt(c.kappa_e) << "\n  eta_prime: " << fmt(c.eta_prime) << "\n  theta: " << fmt(c.theta)
        << "\n  kappa_c: " << fmt(c.kappa_c) << "\n  kappa_c_prime: " << fmt(c.kappa_c_prime) << '\n';
  }
  return 0;
}

void print_summary(const Trace& trace, std::ostream& out) {
  out << "steps: " << trace.rows.size() << ", max_error: " << fmt(trace.max_error)
      << ", max_bound: " << fmt(trace.max_bound) << ", minimizer_steps: " << trace.minimizer_steps
      << ", bound_violations: " << trace.bound_violations << '\n';
}

int cmd_simulate(const std::string& scenario_path, const std::string& out_path, std::optional<std::uint64_t> seed,
                 std::ostream& out) {
  Scenario sc = load_scenario_file(scenario_path);
  if (seed) sc.noise.seed = *seed;
  const Trace trace = simulate(sc);
  write_trace_csv(out_path, trace, sc.model.n(), sc.model.m(), sc.model.p());
  print_summary(trace, out);
  return 0;
}

int cmd_decode(const std::string& phi_path, const std::string& z_path, int q, std::optional<int> r,
               std::optional<double> vmax, std::ostream& out) {
  const Eigen::MatrixXd entries = read_csv_matrix(phi_path);
  const Eigen::VectorXd zv = read_csv_vector(z_path);
  const int n = static_cast<int>(entries.cols());
  if (entries.rows() % n != 0) throw InputError("Phi must have a multiple of its column count as rows");
  if (zv.size() != entries.rows()) throw InputError("z length does not match the rows of Phi");
  const CodingMatrix phi(entries, n);
  const StackedVector z(zv, n);
  const DecodeResult res = vmax ? decode_noisy(phi, z, q, r, *vmax) : decode_noiseless(phi, z, q, r);
  out << "x_hat: " << fmt(res.estimate) << '\n';
  out << "support: " << res.support_estimate.to_string() << '\n';
  out << "objective: " << res.objective << '\n';
  out << "certified: " << (res.certified ? "true" : "false") << '\n';
  if (vmax) out << "error_bound: " << fmt(res.error_bound) << '\n';
  return 0;
}

std::vector<double> column(const Trace& trace, auto&& pick) {
  std::vector<double> v;
  v.reserve(trace.rows.size());
  for (const auto& row : trace.rows) v.push_back(pick(row));
  return v;
}

int cmd_demo(const std::string& which, const std::string& dir, std::ostream& out) {
  if (which != "three-inertia") throw InputError("unknown demo '" + which + "' (available: three-inertia)");
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("cannot create " + dir + ": " + ec.message());

  const Scenario sc = three_inertia_demo_scenario();
  const fs::path base(dir);
  save_scenario_file(sc, (base / "scenario.json").string());
  const Trace trace = simulate(sc);
  write_trace_csv((base / "trace.csv").string(), trace, sc.model.n(), sc.model.m(), sc.model.p());

  const auto t = column(trace, [](const TraceRow& r) { return r.t; });
  const std::string truth = "#1f77b4", est = "#d62728";
  write_text_file((base / "attack.svg").string(),
                  svg_plot("sensor 1: attack a_1 and measurement ybar_1",
                           {{"ybar_1", t, column(trace, [](const TraceRow& r) { return r.ybar(0); }), truth},
                            {"a_1", t, column(trace, [](const TraceRow& r) { return r.a(0); }), est}}));
  write_text_file((base / "theta1.svg").string(),
                  svg_plot("theta_1 and its estimate",
                           {{"theta_1", t, column(trace, [](const TraceRow& r) { return r.x(0); }), truth},
                            {"theta_1 estimate", t, column(trace, [](const TraceRow& r) { return r.x_hat(0); }), est}}));
  write_text_file((base / "dtheta2.svg").string(),
                  svg_plot("angular velocity of inertia 2 and its estimate",
                           {{"dtheta_2", t, column(trace, [](const TraceRow& r) { return r.x(3); }), truth},
                            {"dtheta_2 estimate", t, column(trace, [](const TraceRow& r) { return r.x_hat(3); }), est}}));
  Controller ref{sc.controller};
  write_text_file((base / "theta3.svg").string(),
                  svg_plot("theta_3 tracking a step reference",
                           {{"theta_3", t, column(trace, [](const TraceRow& r) { return r.x(4); }), truth},
                            {"reference", t, column(trace, [&](const TraceRow& r) { return ref.reference_at(r.k); }),
                             "#2ca02c"}}));

  out << "wrote " << (base / "scenario.json").string() << ", trace.csv, attack.svg, theta1.svg, dtheta2.svg, theta3.svg\n";
  print_summary(trace, out);
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Attack-resilient state estimation toolkit", "resilest"};
  app.require_subcommand(1);

  std::string model_path, scenario_path, out_path, phi_path, z_path, demo_name = "three-inertia", demo_dir = "demo_out";
  std::optional<int> q, r;
  std::optional<std::uint64_t> seed;
  std::optional<double> vmax;
  bool as_json = false;
  int decode_q = 0;

  auto* analyze = app.add_subcommand("analyze", "Security index, redundancy and robustness constants of a model");
  analyze->add_option("--model", model_path, "Model JSON file")->required();
  analyze->add_option("--q", q, "Attack budget for the constants table");
  analyze->add_option("--r", r, "Search parameter (q <= r <= 2q, default q)");
  analyze->add_flag("--json", as_json, "Machine-readable output");

  auto* sim = app.add_subcommand("simulate", "Run a scenario and write its trace");
  sim->add_option("--scenario", scenario_path, "Scenario JSON file")->required();
  sim->add_option("--out", out_path, "Trace CSV path")->required();
  sim->add_option("--seed", seed, "Override the noise seed");

  auto* decode = app.add_subcommand("decode", "Decode a stacked measurement z = Phi x + e (+ v)");
  decode->add_option("--phi", phi_path, "Coding matrix CSV (p*n rows, n columns)")->required();
  decode->add_option("--z", z_path, "Measurement CSV (one value per line)")->required();
  decode->add_option("--q", decode_q, "Number of corrupted blocks to correct")->required();
  decode->add_option("--r", r, "Search parameter (q <= r <= 2q, default q)");
  decode->add_option("--vmax", vmax, "Per-block noise bound; selects bounded-noise decoding");

  auto* demo = app.add_subcommand("demo", "Run the three-inertia benchmark and plot it");
  demo->add_option("name", demo_name, "Demo name (three-inertia)");
  demo->add_option("--out", demo_dir, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    if (*analyze) return cmd_analyze(model_path, q, r, as_json, out);
    if (*sim) return cmd_simulate(scenario_path, out_path, seed, out);
    if (*decode) return cmd_decode(phi_path, z_path, decode_q, r, vmax, out);
    if (*demo) return cmd_demo(demo_name, demo_dir, out);
  } catch (const InputError& e) {
    err << "input error: " << e.what() << '\n';
    return 2;
  } catch (const PreconditionError& e) {
    err << "precondition failed: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace resilest
