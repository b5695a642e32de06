#include "resilest/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "resilest/errors.hpp"

namespace resilest {

using nlohmann::json;

namespace {

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed JSON: ") + e.what());
  }
}

// Wraps nlohmann type errors (wrong field types) as input errors.
template <typename F>
auto guarded(const char* what, F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw InputError(std::string(what) + ": " + e.what());
  }
}

Eigen::MatrixXd matrix_from_json(const json& j, const char* name) {
  if (!j.is_array()) throw InputError(std::string(name) + " must be a nested array");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows == 0 ? Eigen::Index{0} : static_cast<Eigen::Index>(j.at(0).size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = j.at(static_cast<std::size_t>(i));
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw InputError(std::string(name) + " rows have unequal lengths");
    }
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = row.at(static_cast<std::size_t>(c)).get<double>();
  }
  return m;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(i, c));
    out.push_back(std::move(row));
  }
  return out;
}

Eigen::VectorXd vector_from_json(const json& j, const char* name) {
  if (!j.is_array()) throw InputError(std::string(name) + " must be an array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  return v;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

ModelSpec model_from_json(const json& j) {
  if (!j.is_object()) throw InputError("model must be a JSON object");
  ModelSpec spec;
  if (j.contains("builtin")) {
    const auto name = j.at("builtin").get<std::string>();
    if (name != "three_inertia") throw InputError("unknown builtin model '" + name + "'");
    const double Ts = j.value("T_s", 1e-3);
    spec.model = zoh_discretize(three_inertia_model(), Ts, j.value("d_max", 0.0), j.value("n_max", 0.0));
    spec.builtin = name;
    spec.Ts = Ts;
  } else {
    for (const char* key : {"A", "B", "C"}) {
      if (!j.contains(key)) throw InputError(std::string("model is missing \"") + key + "\"");
    }
    spec.model.A = matrix_from_json(j.at("A"), "A");
    spec.model.B = matrix_from_json(j.at("B"), "B");
    spec.model.C = matrix_from_json(j.at("C"), "C");
    const int n = spec.model.n();
    if (spec.model.B.rows() == 0) spec.model.B.resize(n, 0);
    spec.model.d_max = j.value("d_max", 0.0);
    spec.model.n_max = j.value("n_max", 0.0);
    if (j.contains("T_s")) spec.Ts = j.at("T_s").get<double>();
    if (j.contains("n") && j.at("n").get<int>() != spec.model.n()) throw InputError("declared n disagrees with A");
    if (j.contains("m") && j.at("m").get<int>() != spec.model.m()) throw InputError("declared m disagrees with B");
    if (j.contains("p") && j.at("p").get<int>() != spec.model.p()) throw InputError("declared p disagrees with C");
  }
  spec.model.validate();
  return spec;
}

json model_json(const ModelSpec& spec) {
  json j;
  if (spec.builtin) {
    j["builtin"] = *spec.builtin;
    j["T_s"] = spec.Ts.value_or(1e-3);
  } else {
    j["n"] = spec.model.n();
    j["m"] = spec.model.m();
    j["p"] = spec.model.p();
    j["A"] = matrix_to_json(spec.model.A);
    j["B"] = matrix_to_json(spec.model.B);
    j["C"] = matrix_to_json(spec.model.C);
    if (spec.Ts) j["T_s"] = *spec.Ts;
  }
  j["d_max"] = spec.model.d_max;
  j["n_max"] = spec.model.n_max;
  return j;
}

std::complex<double> pole_from_json(const json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2) return {j[0].get<double>(), j[1].get<double>()};
  throw InputError("a pole is a number or a [re, im] pair");
}

json pole_to_json(const std::complex<double>& z) {
  if (z.imag() == 0.0) return z.real();
  return json::array({z.real(), z.imag()});
}

AttackSpec attack_from_json(const json& j) {
  AttackSpec at;
  at.sensor = j.at("sensor").get<int>();
  at.start = j.value("start", 0L);
  if (j.contains("end") && !j.at("end").is_null()) at.end = j.at("end").get<long>();
  const json w = j.value("waveform", json{{"type", "constant"}, {"value", j.value("value", 0.0)}});
  const auto type = w.at("type").get<std::string>();
  if (type == "constant") {
    at.kind = AttackKind::constant;
    at.value = w.at("value").get<double>();
  } else if (type == "ramp") {
    at.kind = AttackKind::ramp;
    at.value = w.at("slope").get<double>();
  } else if (type == "sinusoid") {
    at.kind = AttackKind::sinusoid;
    at.value = w.at("amp").get<double>();
    at.freq = w.at("freq").get<double>();
    at.phase = w.value("phase", 0.0);
  } else if (type == "uniform") {
    at.kind = AttackKind::uniform;
    at.lo = w.at("lo").get<double>();
    at.hi = w.at("hi").get<double>();
    at.seed = w.value("seed", std::uint64_t{0});
  } else {
    throw InputError("unknown attack waveform '" + type + "'");
  }
  return at;
}

json attack_to_json(const AttackSpec& at) {
  json j{{"sensor", at.sensor}, {"start", at.start}};
  j["end"] = at.end ? json(*at.end) : json(nullptr);
  switch (at.kind) {
    case AttackKind::constant:
      j["waveform"] = {{"type", "constant"}, {"value", at.value}};
      break;
    case AttackKind::ramp:
      j["waveform"] = {{"type", "ramp"}, {"slope", at.value}};
      break;
    case AttackKind::sinusoid:
      j["waveform"] = {{"type", "sinusoid"}, {"amp", at.value}, {"freq", at.freq}, {"phase", at.phase}};
      break;
    case AttackKind::uniform:
      j["waveform"] = {{"type", "uniform"}, {"lo", at.lo}, {"hi", at.hi}, {"seed", at.seed}};
      break;
  }
  return j;
}

Scenario scenario_from_json(const json& j) {
  if (!j.is_object()) throw InputError("scenario must be a JSON object");
  Scenario sc;
  const ModelSpec spec = model_from_json(j.at("model"));
  sc.model = spec.model;
  sc.builtin = spec.builtin;
  sc.Ts = j.contains("T_s") ? j.at("T_s").get<double>() : spec.Ts.value_or(1.0);
  sc.horizon = j.at("horizon").get<long>();
  sc.q = j.at("q").get<int>();
  if (j.contains("r") && !j.at("r").is_null()) sc.r = j.at("r").get<int>();
  for (const auto& a : j.value("attacks", json::array())) sc.attacks.push_back(attack_from_json(a));

  const json noise = j.value("noise", json::object());
  sc.noise.seed = noise.value("seed", std::uint64_t{1});
  if (noise.contains("d_max")) sc.model.d_max = noise.at("d_max").get<double>();
  if (noise.contains("n_max")) sc.model.n_max = noise.at("n_max").get<double>();

  if (j.contains("controller") && !j.at("controller").is_null()) {
    const json& c = j.at("controller");
    sc.controller.enabled = true;
    sc.controller.K = matrix_from_json(c.at("K"), "controller.K");
    sc.controller.K_I = vector_from_json(c.at("K_I"), "controller.K_I");
    sc.controller.reference = c.value("reference", 0.0);
    sc.controller.reference_onset = c.value("reference_onset", 0L);
    sc.controller.output_index = c.value("output_index", 3);
  }

  const json obs = j.value("observer", json::object());
  sc.observer.x0_max = obs.value("x0_max", 10.0);
  if (obs.contains("beta") && !obs.at("beta").is_null()) sc.observer.beta = obs.at("beta").get<double>();
  sc.observer.recert_period = obs.value("recert_period", 0L);
  if (obs.contains("poles")) {
    const json& poles = obs.at("poles");
    if (poles.is_object() && poles.contains("radius")) {
      sc.observer.mode = PoleMode::radius;
      sc.observer.radius = poles.at("radius").get<double>();
    } else if (poles.is_object() && poles.contains("real_range")) {
      sc.observer.mode = PoleMode::real_range;
      sc.observer.lo = poles.at("real_range").at(0).get<double>();
      sc.observer.hi = poles.at("real_range").at(1).get<double>();
    } else if (poles.is_array()) {
      sc.observer.mode = PoleMode::explicit_list;
      for (const auto& list : poles) {
        PoleList pl;
        for (const auto& z : list) pl.push_back(pole_from_json(z));
        sc.observer.poles.push_back(std::move(pl));
      }
    } else {
      throw InputError("observer.poles must be {\"radius\":r}, {\"real_range\":[lo,hi]} or a list per sensor");
    }
  }

  sc.x0 = j.contains("x0") ? vector_from_json(j.at("x0"), "x0") : Eigen::VectorXd::Zero(sc.model.n());
  return sc;
}

}  // namespace

ModelSpec parse_model_json(const std::string& text) {
  const json j = parse_json(text);
  return guarded("model", [&] { return model_from_json(j); });
}

ModelSpec load_model_file(const std::string& path) { return parse_model_json(read_text_file(path)); }

std::string model_to_json(const ModelSpec& spec) { return model_json(spec).dump(2); }

Scenario parse_scenario_json(const std::string& text) {
  const json j = parse_json(text);
  return guarded("scenario", [&] { return scenario_from_json(j); });
}

Scenario load_scenario_file(const std::string& path) { return parse_scenario_json(read_text_file(path)); }

std::string scenario_to_json(const Scenario& sc) {
  json j;
  ModelSpec spec{sc.model, sc.builtin, sc.Ts};
  json model = model_json(spec);
  // Bounds live under "noise" so the builtin model stays a two-key object.
  model.erase("d_max");
  model.erase("n_max");
  j["model"] = model;
  j["T_s"] = sc.Ts;
  j["horizon"] = sc.horizon;
  j["q"] = sc.q;
  j["r"] = sc.r ? json(*sc.r) : json(nullptr);
  j["attacks"] = json::array();
  for (const auto& at : sc.attacks) j["attacks"].push_back(attack_to_json(at));
  j["noise"] = {{"seed", sc.noise.seed}, {"d_max", sc.model.d_max}, {"n_max", sc.model.n_max}};
  if (sc.controller.enabled) {
    j["controller"] = {{"K", matrix_to_json(sc.controller.K)},
                       {"K_I", vector_to_json(sc.controller.K_I)},
                       {"reference", sc.controller.reference},
                       {"reference_onset", sc.controller.reference_onset},
                       {"output_index", sc.controller.output_index}};
  } else {
    j["controller"] = nullptr;
  }
  json obs{{"x0_max", sc.observer.x0_max}, {"recert_period", sc.observer.recert_period}};
  obs["beta"] = sc.observer.beta ? json(*sc.observer.beta) : json(nullptr);
  switch (sc.observer.mode) {
    case PoleMode::radius:
      obs["poles"] = {{"radius", sc.observer.radius}};
      break;
    case PoleMode::real_range:
      obs["poles"] = {{"real_range", {sc.observer.lo, sc.observer.hi}}};
      break;
    case PoleMode::explicit_list: {
      json lists = json::array();
      for (const auto& pl : sc.observer.poles) {
        json l = json::array();
        for (const auto& z : pl) l.push_back(pole_to_json(z));
        lists.push_back(std::move(l));
      }
      obs["poles"] = std::move(lists);
      break;
    }
  }
  j["observer"] = std::move(obs);
  j["x0"] = vector_to_json(sc.x0);
  return j.dump(2);
}

void save_scenario_file(const Scenario& sc, const std::string& path) { write_text_file(path, scenario_to_json(sc) + "\n"); }

namespace {

bool parse_row(const std::string& line, std::vector<double>& out) {
  out.clear();
  std::string token;
  std::size_t i = 0;
  while (i <= line.size()) {
    const char ch = i < line.size() ? line[i] : ',';
    if (ch == ',' || ch == ' ' || ch == '\t' || ch == ';' || ch == '\r') {
      if (!token.empty()) {
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
        if (ec != std::errc() || ptr != token.data() + token.size()) return false;
        out.push_back(v);
        token.clear();
      }
    } else {
      token.push_back(ch);
    }
    ++i;
  }
  return true;
}

}  // namespace

Eigen::MatrixXd parse_csv_matrix(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::vector<double>> rows;
  std::vector<double> values;
  bool first = true;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const bool ok = parse_row(line, values);
    if (!ok) {
      if (first) {
        first = false;
        continue;
      }
      throw InputError("CSV line " + std::to_string(line_no) + " is not numeric");
    }
    first = false;
    if (values.empty()) continue;
    if (!rows.empty() && values.size() != rows.front().size()) {
      throw InputError("CSV line " + std::to_string(line_no) + " has a different column count");
    }
    rows.push_back(values);
  }
  if (rows.empty()) throw InputError("CSV holds no numbers");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t c = 0; c < rows[i].size(); ++c) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = rows[i][c];
  }
  return m;
}

Eigen::MatrixXd read_csv_matrix(const std::string& path) { return parse_csv_matrix(read_text_file(path)); }

Eigen::VectorXd read_csv_vector(const std::string& path) {
  const Eigen::MatrixXd m = read_csv_matrix(path);
  const Eigen::MatrixXd mt = m.transpose();  // row-major reading order
  return Eigen::Map<const Eigen::VectorXd>(mt.data(), mt.size());
}

std::string trace_header(int n, int m, int p) {
  std::ostringstream h;
  h << "k,t";
  for (int i = 1; i <= n; ++i) h << ",x_" << i;
  for (int i = 1; i <= n; ++i) h << ",xhat_" << i;
  for (int i = 1; i <= m; ++i) h << ",u_" << i;
  for (int i = 1; i <= p; ++i) h << ",ybar_" << i;
  for (int i = 1; i <= p; ++i) h << ",a_" << i;
  h << ",f,lambda_mask,branch,bound";
  return h.str();
}

void write_trace_csv(std::ostream& out, const Trace& trace, int n, int m, int p) {
  out << trace_header(n, m, p) << '\n';
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  auto put = [&out](const Eigen::VectorXd& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) out << ',' << v(i);
  };
  for (const auto& row : trace.rows) {
    out << row.k << ',' << row.t;
    put(row.x);
    put(row.x_hat);
    put(row.u);
    put(row.ybar);
    put(row.a);
    out << ',' << row.f << ',' << row.lambda_mask << ',' << branch_name(row.branch) << ',' << row.bound << '\n';
  }
}

void write_trace_csv(const std::string& path, const Trace& trace, int n, int m, int p) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  write_trace_csv(out, trace, n, m, p);
  if (!out) throw Error("write failed for " + path);
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << content;
  if (!out) throw Error("write failed for " + path);
}

std::string svg_plot(const std::string& title, const std::vector<PlotSeries>& series, const std::string& x_label) {
  constexpr double W = 800, H = 320, left = 70, right = 20, top = 36, bottom = 44;
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series) {
    for (double v : s.x) x0 = std::min(x0, v), x1 = std::max(x1, v);
    for (double v : s.y) y0 = std::min(y0, v), y1 = std::max(y1, v);
  }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y0 -= 0.5, y1 += 0.5;
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;
  auto sx = [&](double v) { return left + (v - x0) / (x1 - x0) * (W - left - right); };
  auto sy = [&](double v) { return top + (y1 - v) / (y1 - y0) * (H - top - bottom); };

  std::ostringstream s;
  s << std::setprecision(6);
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
    << ' ' << H << "\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">"
    << title << "</text>\n";
  s << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << W - left - right << "\" height=\""
    << H - top - bottom << "\" fill=\"none\" stroke=\"#444\"/>\n";
  s << "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#333\">\n";
  for (int i = 0; i <= 4; ++i) {
    const double yv = y0 + (y1 - y0) * i / 4.0;
    const double xv = x0 + (x1 - x0) * i / 4.0;
    s << "<text x=\"" << left - 6 << "\" y=\"" << sy(yv) + 4 << "\" text-anchor=\"end\">" << yv << "</text>\n";
    s << "<text x=\"" << sx(xv) << "\" y=\"" << H - bottom + 16 << "\" text-anchor=\"middle\">" << xv << "</text>\n";
  }
  s << "<text x=\"" << (left + W - right) / 2 << "\" y=\"" << H - 8 << "\" text-anchor=\"middle\">" << x_label
    << "</text>\n</g>\n";
  double legend_y = top + 14;
  for (const auto& ser : series) {
    s << "<polyline fill=\"none\" stroke=\"" << ser.color << "\" stroke-width=\"1.2\" points=\"";
    const std::size_t count = std::min(ser.x.size(), ser.y.size());
    for (std::size_t i = 0; i < count; ++i) s << sx(ser.x[i]) << ',' << sy(ser.y[i]) << ' ';
    s << "\"/>\n";
    s << "<text x=\"" << W - right - 8 << "\" y=\"" << legend_y << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
      << "font-size=\"12\" fill=\"" << ser.color << "\">" << ser.label << "</text>\n";
    legend_y += 15;
  }
  s << "</svg>\n";
  return s.str();
}

}  // namespace resilest
