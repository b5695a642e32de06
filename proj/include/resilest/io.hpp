#pragma once

// File formats: JSON model and scenario files, CSV matrices/vectors, the
// trace CSV and minimal SVG line plots.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "resilest/coding_analysis.hpp"
#include "resilest/plant_sim.hpp"

namespace resilest {

struct ModelSpec {
  SystemModel model;
  std::optional<std::string> builtin;
  std::optional<double> Ts;
};

/// {"n","m","p","A","B","C","d_max","n_max"} with row-major nested arrays, or
/// {"builtin":"three_inertia","T_s":...,"d_max":...,"n_max":...}.
ModelSpec parse_model_json(const std::string& text);
ModelSpec load_model_file(const std::string& path);
std::string model_to_json(const ModelSpec& spec);

Scenario parse_scenario_json(const std::string& text);
Scenario load_scenario_file(const std::string& path);
std::string scenario_to_json(const Scenario& sc);
void save_scenario_file(const Scenario& sc, const std::string& path);

/// Row-major numeric CSV (commas or whitespace); a non-numeric first line is
/// treated as a header.
Eigen::MatrixXd parse_csv_matrix(const std::string& text);
Eigen::MatrixXd read_csv_matrix(const std::string& path);
/// Every value of the file in reading order.
Eigen::VectorXd read_csv_vector(const std::string& path);

/// k,t,x_1..x_n,xhat_1..xhat_n,u_1..u_m,ybar_1..ybar_p,a_1..a_p,f,lambda_mask,branch,bound
std::string trace_header(int n, int m, int p);
void write_trace_csv(std::ostream& out, const Trace& trace, int n, int m, int p);
void write_trace_csv(const std::string& path, const Trace& trace, int n, int m, int p);

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#1f77b4";
};

std::string svg_plot(const std::string& title, const std::vector<PlotSeries>& series, const std::string& x_label = "t [s]");
void write_text_file(const std::string& path, const std::string& content);

}  // namespace resilest
