#include "resilest/plant_sim.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <set>
#include <string>

#include "resilest/errors.hpp"

namespace resilest {

ContinuousModel three_inertia_model(const ThreeInertiaParams& prm) {
  for (double j : prm.J) {
    if (!(j > 0.0)) throw InputError("inertias must be positive");
  }
  const auto& [J1, J2, J3] = prm.J;
  const auto& [b1, b2, b3] = prm.b;
  const auto& [k1, k2] = prm.k;
  ContinuousModel cm;
  cm.A = Eigen::MatrixXd::Zero(6, 6);
  cm.A(0, 1) = 1.0;
  cm.A(1, 0) = -k1 / J1;
  cm.A(1, 1) = -b1 / J1;
  cm.A(1, 2) = k1 / J1;
  cm.A(2, 3) = 1.0;
  cm.A(3, 0) = k1 / J2;
  cm.A(3, 2) = -(k1 + k2) / J2;
  cm.A(3, 3) = -b2 / J2;
  cm.A(3, 4) = k2 / J2;
  cm.A(4, 5) = 1.0;
  cm.A(5, 2) = k2 / J3;
  cm.A(5, 4) = -k2 / J3;
  cm.A(5, 5) = -b3 / J3;
  cm.B = Eigen::MatrixXd::Zero(6, 1);
  cm.B(1, 0) = 1.0 / J1;
  cm.C = Eigen::MatrixXd::Zero(5, 6);
  cm.C(0, 0) = 1.0;
  cm.C(1, 2) = 1.0;
  cm.C(2, 4) = 1.0;
  cm.C(3, 0) = 1.0;
  cm.C(3, 2) = -1.0;
  cm.C(4, 2) = 1.0;
  cm.C(4, 4) = -1.0;
  return cm;
}

// Terms are summed until they no longer move the sum; this is well inside
// the 1e-13 truncation budget and keeps scalar cases at a few ulps.
constexpr double kSeriesTol = std::numeric_limits<double>::epsilon() / 2;

Eigen::MatrixXd expm(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) throw InputError("expm needs a square matrix");
  const double norm = m.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  const Eigen::MatrixXd scaled = m / std::ldexp(1.0, squarings);

  Eigen::MatrixXd sum = Eigen::MatrixXd::Identity(m.rows(), m.cols());
  Eigen::MatrixXd term = sum;
  for (int j = 1; j < 100; ++j) {
    term = term * scaled / static_cast<double>(j);
    sum += term;
    if (term.cwiseAbs().maxCoeff() <= kSeriesTol * sum.cwiseAbs().maxCoeff()) break;
  }
  for (int s = 0; s < squarings; ++s) sum = sum * sum;
  return sum;
}

SystemModel zoh_discretize(const ContinuousModel& cm, double Ts, double d_max, double n_max) {
  if (!(Ts > 0.0)) throw InputError("sampling time must be positive");
  const auto n = cm.A.rows();
  const auto m = cm.B.cols();
  if (cm.A.cols() != n || cm.B.rows() != n || cm.C.cols() != n) throw InputError("continuous model shape mismatch");
  Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(n + m, n + m);
  aug.topLeftCorner(n, n) = cm.A * Ts;
  aug.topRightCorner(n, m) = cm.B * Ts;
  const Eigen::MatrixXd e = expm(aug);
  SystemModel out;
  out.A = e.topLeftCorner(n, n);
  out.B = e.topRightCorner(n, m);
  out.C = cm.C;
  out.d_max = d_max;
  out.n_max = n_max;
  return out;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double attack_value(const AttackSpec& spec, long k, double Ts) {
  if (!spec.active(k)) return 0.0;
  const double tau = static_cast<double>(k - spec.start) * Ts;
  switch (spec.kind) {
    case AttackKind::constant:
      return spec.value;
    case AttackKind::ramp:
      return spec.value * tau;
    case AttackKind::sinusoid:
      return spec.value * std::sin(2.0 * std::numbers::pi * spec.freq * tau + spec.phase);
    case AttackKind::uniform: {
      const double unit = static_cast<double>(splitmix64(spec.seed ^ static_cast<std::uint64_t>(k)) >> 11) * 0x1.0p-53;
      return spec.lo + (spec.hi - spec.lo) * unit;
    }
  }
  return 0.0;
}

Eigen::VectorXd Controller::step(const Eigen::VectorXd& x_hat, const Eigen::MatrixXd& C, long k, int m) {
  if (!config.enabled) return Eigen::VectorXd::Zero(m);
  const Eigen::VectorXd u = config.K * x_hat + config.K_I * xi;
  xi += reference_at(k) - C.row(config.output_index - 1).dot(x_hat);
  return u;
}

void Scenario::validate(double eps_rel) const {
  model.validate();
  const int n = model.n();
  const int p = model.p();
  const int m = model.m();
  if (horizon < 1) throw InputError("horizon must be at least 1");
  if (!(Ts > 0.0)) throw InputError("T_s must be positive");
  if (q < 0) throw InputError("q must be nonnegative");
  const int rr = r.value_or(q);
  if (rr < q || rr > 2 * q) throw InputError("r must satisfy q <= r <= 2q");
  if (x0.size() != n) throw InputError("x0 has " + std::to_string(x0.size()) + " entries, expected " + std::to_string(n));
  if (!(observer.x0_max >= 0.0)) throw InputError("x0_max must be nonnegative");
  if (x0.norm() > observer.x0_max) throw InputError("||x0|| exceeds x0_max");
  if (observer.mode == PoleMode::explicit_list && static_cast<int>(observer.poles.size()) != p) {
    throw InputError("explicit observer poles: one list per sensor required");
  }
  if (observer.mode == PoleMode::real_range && !(std::abs(observer.lo) < 1.0 && std::abs(observer.hi) < 1.0)) {
    throw InputError("observer pole range must lie inside (-1, 1)");
  }
  if (controller.enabled) {
    if (controller.K.rows() != m || controller.K.cols() != n) throw InputError("controller K must be m x n");
    if (controller.K_I.size() != m) throw InputError("controller K_I must have m entries");
    if (controller.output_index < 1 || controller.output_index > p) throw InputError("controller output_index out of range");
  }
  std::set<int> attacked;
  for (const auto& at : attacks) {
    if (at.sensor < 1 || at.sensor > p) throw InputError("attack sensor " + std::to_string(at.sensor) + " out of range");
    if (at.start < 0 || (at.end && *at.end < at.start)) throw InputError("attack window is invalid");
    if (at.kind == AttackKind::uniform && at.hi < at.lo) throw InputError("attack range is invalid");
    attacked.insert(at.sensor);
  }
  if (static_cast<int>(attacked.size()) > q) {
    throw InputError("attack sparsity violated: " + std::to_string(attacked.size()) + " sensors attacked but q = " +
                     std::to_string(q));
  }
  if (!is_q_redundant_observable(model, 2 * q, eps_rel)) {
    throw PreconditionError("model is not " + std::to_string(2 * q) + "-redundant observable; cannot correct " +
                            std::to_string(q) + " attacked sensors");
  }
}

EstimatorConfig Scenario::estimator_config(const SystemModel& m, double eps_rel) const {
  EstimatorConfig cfg;
  cfg.q = q;
  cfg.r = r;
  cfg.x0_max = observer.x0_max;
  cfg.beta = observer.beta;
  cfg.recert_period = observer.recert_period;
  if (observer.mode == PoleMode::explicit_list) {
    cfg.poles = observer.poles;
  } else {
    for (int i = 1; i <= m.p(); ++i) {
      const int nu = kalman_decompose(m, i, eps_rel).nu;
      cfg.poles.push_back(observer.mode == PoleMode::radius ? default_poles(nu, observer.radius)
                                                            : real_poles(nu, observer.lo, observer.hi));
    }
  }
  return cfg;
}

namespace {

Eigen::VectorXd sample_ball(std::mt19937_64& rng, int dim, double radius) {
  Eigen::VectorXd v(dim);
  if (radius == 0.0) {
    v.setZero();
    return v;
  }
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  do {
    for (int i = 0; i < dim; ++i) v(i) = normal(rng);
  } while (v.norm() == 0.0);
  return v * (radius * std::pow(uni(rng), 1.0 / dim) / v.norm());
}

}  // namespace

Trace simulate(const Scenario& sc, double eps_rel) {
  sc.validate(eps_rel);
  const SystemModel& model = sc.model;
  const int n = model.n();
  const int m = model.m();
  const int p = model.p();

  ResilientEstimator est(model, sc.estimator_config(model, eps_rel), eps_rel);
  Controller ctrl{sc.controller};
  std::mt19937_64 rng(sc.noise.seed);
  std::uniform_real_distribution<double> meas(-model.n_max, model.n_max);

  Trace trace;
  trace.constants = est.decoder().constants;
  trace.bounds = est.bounds();
  for (const auto& obs : est.bank()) trace.observability_indices.push_back(obs.nu);
  trace.rows.reserve(static_cast<std::size_t>(sc.horizon));

  Eigen::VectorXd x = sc.x0;
  Eigen::VectorXd u_prev = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd ybar_prev = Eigen::VectorXd::Zero(p);
  for (long k = 0; k < sc.horizon; ++k) {
    const EstimateRecord rec = k == 0 ? est.estimate(0) : est.estimator_step(u_prev, ybar_prev, k);

    TraceRow row;
    row.k = k;
    row.t = static_cast<double>(k) * sc.Ts;
    row.x = x;
    row.x_hat = rec.x_hat;
    row.y = model.C * x;
    row.a = Eigen::VectorXd::Zero(p);
    for (const auto& at : sc.attacks) row.a(at.sensor - 1) += attack_value(at, k, sc.Ts);
    row.noise.resize(p);
    for (int i = 0; i < p; ++i) row.noise(i) = model.n_max > 0.0 ? meas(rng) : 0.0;
    row.ybar = row.y + row.noise + row.a;
    row.u = ctrl.step(rec.x_hat, model.C, k, m);
    row.f = rec.f;
    row.lambda_mask = rec.lambda.mask();
    row.branch = rec.branch;
    row.bound = rec.bound;
    row.solves = rec.solves;

    const double err = (rec.x_hat - x).norm();
    trace.max_error = std::max(trace.max_error, err);
    trace.max_bound = std::max(trace.max_bound, rec.bound);
    if (rec.bound > 0.0) trace.max_ratio = std::max(trace.max_ratio, err / rec.bound);
    if (err > rec.bound) ++trace.bound_violations;
    if (rec.branch == Branch::minimizer) ++trace.minimizer_steps;

    const Eigen::VectorXd d = sample_ball(rng, n, model.d_max);
    x = model.A * x + model.B * row.u + d;
    u_prev = row.u;
    ybar_prev = row.ybar;
    trace.rows.push_back(std::move(row));
  }
  return trace;
}

Scenario three_inertia_demo_scenario() {
  Scenario sc;
  sc.builtin = "three_inertia";
  sc.Ts = 1e-3;
  sc.model = zoh_discretize(three_inertia_model(), sc.Ts, 1e-3, 1e-3);
  sc.horizon = 6000;
  sc.q = 1;
  sc.r = 1;
  AttackSpec at;
  at.sensor = 1;
  at.start = 2000;
  at.kind = AttackKind::constant;
  at.value = 5.0;
  sc.attacks.push_back(at);
  sc.noise.seed = 1;
  sc.controller.enabled = true;
  sc.controller.K = Eigen::RowVectorXd{{-2.32, -0.25, 2.47, -0.04, -1.70, -0.12}};
  sc.controller.K_I = Eigen::VectorXd::Constant(1, 0.002);
  sc.controller.reference = 1.0;
  sc.controller.reference_onset = 0;
  sc.controller.output_index = 3;
  sc.observer.mode = PoleMode::real_range;
  sc.observer.lo = 0.97;
  sc.observer.hi = 0.99;
  sc.observer.x0_max = 10.0;
  sc.x0 = Eigen::VectorXd::Zero(6);
  return sc;
}

}  // namespace resilest
