#pragma once

// Plant simulation with sensor attacks, bounded noise and disturbance, ZOH
// discretisation and the built-in three-inertia benchmark.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "resilest/coding_analysis.hpp"
#include "resilest/observer_bank.hpp"
#include "resilest/resilient_estimator.hpp"

namespace resilest {

struct ContinuousModel {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
  Eigen::MatrixXd C;
};

struct ThreeInertiaParams {
  std::array<double, 3> J{0.01, 0.01, 0.01};
  std::array<double, 3> b{0.007, 0.007, 0.007};
  std::array<double, 2> k{1.37, 1.37};
};

/// State [th1, dth1, th2, dth2, th3, dth3]; outputs th1, th2, th3, th1-th2, th2-th3.
ContinuousModel three_inertia_model(const ThreeInertiaParams& params = {});

/// Matrix exponential by scaling and squaring of a truncated Taylor series.
Eigen::MatrixXd expm(const Eigen::MatrixXd& m);

/// A = e^{A_c T_s}, B = int_0^{T_s} e^{A_c tau} dtau B_c, from one exponential
/// of [[A_c, B_c], [0, 0]] * T_s.
SystemModel zoh_discretize(const ContinuousModel& cm, double Ts, double d_max = 0.0, double n_max = 0.0);

enum class AttackKind { constant, ramp, sinusoid, uniform };

struct AttackSpec {
  int sensor = 1;            ///< 1-based
  long start = 0;            ///< inclusive
  std::optional<long> end;   ///< exclusive; absent = until the horizon
  AttackKind kind = AttackKind::constant;
  double value = 0.0;        ///< constant level, ramp slope (per second) or sinusoid amplitude
  double freq = 0.0;         ///< Hz
  double phase = 0.0;        ///< rad
  double lo = 0.0;           ///< uniform range
  double hi = 0.0;
  std::uint64_t seed = 0;

  bool active(long k) const { return k >= start && (!end || k < *end); }
};

/// Injected value at step k (0 when inactive). Time since onset is (k - start) * Ts.
double attack_value(const AttackSpec& spec, long k, double Ts);

struct NoiseConfig {
  std::uint64_t seed = 1;
};

struct ControllerConfig {
  bool enabled = false;
  Eigen::MatrixXd K;        ///< m x n
  Eigen::VectorXd K_I;      ///< m
  double reference = 0.0;
  long reference_onset = 0;
  int output_index = 3;     ///< 1-based row of C being tracked
};

/// Integral feedback u = K x_hat + K_I xi, xi(k+1) = xi(k) + ref(k) - c_j x_hat(k).
struct Controller {
  ControllerConfig config;
  double xi = 0.0;

  Eigen::VectorXd step(const Eigen::VectorXd& x_hat, const Eigen::MatrixXd& C, long k, int m);
  double reference_at(long k) const { return k >= config.reference_onset ? config.reference : 0.0; }
};

enum class PoleMode { radius, real_range, explicit_list };

struct ObserverConfig {
  PoleMode mode = PoleMode::radius;
  double radius = 0.5;
  double lo = 0.0;
  double hi = 0.0;
  std::vector<PoleList> poles;  ///< explicit_list: one list per sensor
  double x0_max = 10.0;
  std::optional<double> beta;
  long recert_period = 0;
};

struct Scenario {
  SystemModel model;
  std::optional<std::string> builtin;  ///< "three_inertia" when the model is the built-in one
  double Ts = 1.0;
  long horizon = 1;
  int q = 1;
  std::optional<int> r;
  std::vector<AttackSpec> attacks;
  NoiseConfig noise;
  ControllerConfig controller;
  ObserverConfig observer;
  Eigen::VectorXd x0;

  /// Shape and range checks plus the attack-sparsity condition (InputError);
  /// 2q-redundant observability (PreconditionError).
  void validate(double eps_rel = default_rank_eps()) const;
  EstimatorConfig estimator_config(const SystemModel& model, double eps_rel = default_rank_eps()) const;
};

struct TraceRow {
  long k = 0;
  double t = 0.0;
  Eigen::VectorXd x, x_hat, u, y, ybar, a, noise;
  int f = 0;
  std::uint64_t lambda_mask = 0;
  Branch branch = Branch::calculator;
  double bound = 0.0;
  std::uint64_t solves = 0;
};

struct Trace {
  std::vector<TraceRow> rows;
  RobustnessConstants constants;
  ErrorBoundParams bounds;
  double max_error = 0.0;
  double max_bound = 0.0;
  double max_ratio = 0.0;         ///< max ||x_hat - x|| / bound
  long minimizer_steps = 0;
  long bound_violations = 0;
  std::vector<int> observability_indices;
};

Trace simulate(const Scenario& sc, double eps_rel = default_rank_eps());

/// Splitmix64 finaliser, used for per-step seeded attack values.
std::uint64_t splitmix64(std::uint64_t x);

/// The benchmark run: 1 ms sampling, d_max = n_max = 0.001, step reference of
/// 1 rad on th3, +5 rad injected into sensor 1 from t = 2 s, 6 s horizon.
Scenario three_inertia_demo_scenario();

}  // namespace resilest
