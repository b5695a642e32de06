// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <sstream>
#include <string>

#include "resilest/coding_analysis.hpp"
#include "resilest/error_correction.hpp"
#include "resilest/observer_bank.hpp"
#include "resilest/plant_sim.hpp"
#include "resilest/resilient_estimator.hpp"
#include "test_util.hpp"

using namespace resilest;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(const char* id, const char* title, bool ok, const std::string& detail) {
  std::printf("%s [%s] %s: %s\n", ok ? "PASS" : "FAIL", id, title, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Runs a check, turning unexpected exceptions into a failure line.
void criterion(const char* id, const char* title, const std::function<std::pair<bool, std::string>()>& body) {
  try {
    const auto [ok, detail] = body();
    report(id, title, ok, detail);
  } catch (const std::exception& e) {
    report(id, title, false, std::string("exception: ") + e.what());
  }
}

SystemModel three_inertia_1ms() { return zoh_discretize(three_inertia_model(), 1e-3, 1e-3, 1e-3); }

Scenario scalar_scenario(testutil::Rng& rng) {
  Scenario sc;
  sc.model = SystemModel{Eigen::MatrixXd::Ones(1, 1), Eigen::MatrixXd::Ones(1, 1), Eigen::MatrixXd::Ones(3, 1),
                         1e-3, 1e-3};
  sc.horizon = 400;
  sc.q = 1;
  sc.observer.mode = PoleMode::explicit_list;
  const double pole = testutil::uniform(rng, 0.2, 0.9);
  sc.observer.poles = {{pole}, {pole}, {pole}};
  sc.observer.x0_max = 10.0;
  sc.x0 = Eigen::VectorXd::Constant(1, testutil::uniform(rng, -10.0, 10.0));
  sc.noise.seed = rng();
  return sc;
}

AttackSpec random_attack(testutil::Rng& rng, int p, long horizon, double Ts, double max_mag) {
  AttackSpec at;
  at.sensor = testutil::uniform_int(rng, 1, p);
  at.start = testutil::uniform_int(rng, 0, static_cast<int>(horizon * 3 / 4));
  const double mag = testutil::uniform(rng, 0.0, max_mag);
  switch (testutil::uniform_int(rng, 0, 3)) {
    case 0:
      at.kind = AttackKind::constant;
      at.value = testutil::uniform_int(rng, 0, 1) ? mag : -mag;
      break;
    case 1: {
      const long len = std::max<long>(1, (horizon - at.start) / 2);
      at.kind = AttackKind::ramp;
      at.end = at.start + len;
      at.value = mag / (static_cast<double>(len) * Ts);
      break;
    }
    case 2:
      at.kind = AttackKind::sinusoid;
      at.value = mag;
      at.freq = testutil::uniform(rng, 0.01, 0.4) / Ts;
      at.phase = testutil::uniform(rng, 0.0, 6.0);
      break;
    default:
      at.kind = AttackKind::uniform;
      at.lo = -mag;
      at.hi = mag;
      at.seed = rng();
      break;
  }
  return at;
}

}  // namespace

int main() {
  criterion("1", "three-inertia analysis", [] {
    const auto t0 = Clock::now();
    const SystemModel m = three_inertia_1ms();
    const bool r2 = is_q_redundant_observable(m, 2);
    const bool r3 = is_q_redundant_observable(m, 3);
    const AnalysisReport rep = analyze_model(m, {{1, 1}});
    const double dt = seconds_since(t0);
    std::ostringstream os;
    os << "2-redundant=" << r2 << " 3-redundant=" << r3 << " security_index=" << rep.security_index
       << " max_correctable_q=" << rep.max_correctable_q << " time=" << dt << "s";
    return std::pair{r2 && !r3 && rep.security_index == 3 && rep.max_correctable_q == 1 && dt < 5.0, os.str()};
  });

  criterion("2", "noiseless exact recovery", [] {
    const auto t0 = Clock::now();
    testutil::Rng rng(2024);
    int bad_error = 0, bad_support = 0, decodes = 0;
    double worst = 0.0;
    for (int inst = 0; inst < 200; ++inst) {
      const int n = testutil::uniform_int(rng, 1, 3);
      const int p = testutil::uniform_int(rng, 3, 6);
      const int q = testutil::uniform_int(rng, 1, (p - 1) / 2);
      CodingMatrix phi(testutil::random_matrix(rng, static_cast<Eigen::Index>(n) * p, n), n);
      while (!is_q_error_correctable(phi, q))
        phi = CodingMatrix(testutil::random_matrix(rng, static_cast<Eigen::Index>(n) * p, n), n);
      const Eigen::VectorXd x = testutil::random_matrix(rng, n, 1);
      const int s = testutil::uniform_int(rng, 0, q);
      std::vector<int> idx;
      for (int i = 1; i <= p; ++i) idx.push_back(i);
      std::shuffle(idx.begin(), idx.end(), rng);
      idx.resize(static_cast<std::size_t>(s));
      const IndexSet support(p, idx);
      Eigen::VectorXd z = phi.entries() * x;
      for (int i : support) {
        Eigen::VectorXd e = testutil::random_matrix(rng, n, 1);
        e *= testutil::uniform(rng, 0.1, 100.0) / e.norm();
        z.segment(static_cast<Eigen::Index>(i - 1) * n, n) += e;
      }
      const StackedVector zs(z, n);
      for (int r = q; r <= 2 * q; ++r) {
        const DecodeResult res = decode_noiseless(phi, zs, q, r);
        ++decodes;
        const double rel = (res.estimate - x).norm() / x.norm();
        worst = std::max(worst, rel);
        if (!(rel <= 1e-9)) ++bad_error;
        if (!(res.support_estimate == support)) ++bad_support;
      }
    }
    const double dt = seconds_since(t0);
    std::ostringstream os;
    os << decodes << " decodes, worst relative error " << worst << ", error failures " << bad_error
       << ", support mismatches " << bad_support << ", time=" << dt << "s";
    return std::pair{bad_error == 0 && bad_support == 0 && dt < 30.0, os.str()};
  });

  criterion("3", "oracle equivalences", [] {
    testutil::Rng rng(77);
    int dis_a = 0, dis_b = 0, dis_c = 0, dis_cospark = 0;
    for (int inst = 0; inst < 100; ++inst) {
      const int n = testutil::uniform_int(rng, 1, 3);
      const int p = testutil::uniform_int(rng, 2, 6);
      const CodingMatrix phi = testutil::structured_coding_matrix(rng, n, p);
      const int cs = testutil::cospark_oracle(phi, rng);
      if (cs != stacked_cospark(phi)) ++dis_cospark;
      for (int q = 0; q <= p; ++q) {
        if (is_q_error_detectable(phi, q) != (cs > q)) ++dis_a;
        if (2 * q <= p && is_q_error_correctable(phi, q) != is_q_error_detectable(phi, 2 * q)) ++dis_b;
      }
    }
    for (int inst = 0; inst < 50; ++inst) {
      const int n = testutil::uniform_int(rng, 1, 4);
      const int p = testutil::uniform_int(rng, 2, 5);
      const testutil::SpectralSystem sys = testutil::spectral_system(rng, n, p);
      const int by_cospark = security_index(sys.model);
      const int by_eig = security_index_eigenvector(sys.model);
      if (by_cospark != by_eig || by_eig != sys.expected) ++dis_c;
    }
    std::ostringstream os;
    os << "detectability/cospark " << dis_a << ", correctable/2q-detectable " << dis_b
       << ", security index routes " << dis_c << ", cospark vs kernel oracle " << dis_cospark << " disagreements";
    return std::pair{dis_a + dis_b + dis_c + dis_cospark == 0, os.str()};
  });

  criterion("4", "estimation error bound under sparse attacks", [] {
    testutil::Rng rng(4);
    long steps = 0, violations = 0, minimizer_steps = 0;
    double worst_ratio = 0.0;
    for (int run = 0; run < 25; ++run) {
      Scenario sc = scalar_scenario(rng);
      sc.attacks.push_back(random_attack(rng, 3, sc.horizon, sc.Ts, 1e3 * sc.model.n_max));
      const Trace t = simulate(sc);
      for (const auto& row : t.rows) {
        ++steps;
        if (!((row.x_hat - row.x).norm() <= row.bound)) ++violations;
      }
      minimizer_steps += t.minimizer_steps;
      worst_ratio = std::max(worst_ratio, t.max_ratio);
    }
    for (int run = 0; run < 25; ++run) {
      Scenario sc = three_inertia_demo_scenario();
      sc.horizon = 2500;
      sc.noise.seed = rng();
      sc.attacks = {random_attack(rng, 5, sc.horizon, sc.Ts, 1e3 * sc.model.n_max)};
      const Trace t = simulate(sc);
      for (const auto& row : t.rows) {
        ++steps;
        if (!((row.x_hat - row.x).norm() <= row.bound)) ++violations;
      }
      minimizer_steps += t.minimizer_steps;
      worst_ratio = std::max(worst_ratio, t.max_ratio);
    }
    std::ostringstream os;
    os << "50 runs, " << steps << " steps, " << violations << " violations, worst error/bound " << worst_ratio
       << ", minimizer steps " << minimizer_steps;
    return std::pair{violations == 0, os.str()};
  });

  criterion("5", "residual detector soundness", [] {
    testutil::Rng rng(5);
    long checks = 0, alarms = 0;
    for (int run = 0; run < 100; ++run) {
      const bool scalar = run % 2 == 0;
      Scenario sc = scalar ? scalar_scenario(rng) : three_inertia_demo_scenario();
      if (!scalar) sc.x0 = testutil::random_matrix(rng, 6, 1).normalized() * testutil::uniform(rng, 0.0, 10.0);
      const SystemModel& m = sc.model;
      ResilientEstimator est(m, sc.estimator_config(m));
      const CodingMatrix& phi = est.phi();
      std::mt19937_64 noise(rng());
      std::uniform_real_distribution<double> meas(-m.n_max, m.n_max);
      std::normal_distribution<double> g;
      Eigen::VectorXd x = sc.x0;
      const long horizon = scalar ? 400 : 1500;
      for (long k = 0; k < horizon; ++k) {
        const Eigen::VectorXd u = Eigen::VectorXd::Constant(m.m(), std::sin(0.01 * static_cast<double>(k)));
        const StackedVector z_hat = pad_observer_outputs(est.bank());
        const double vmax = v_max_at(est.bounds(), k);
        if (residual_detect_noisy(phi, z_hat, vmax).attacked) ++alarms;
        ++checks;
        Eigen::VectorXd y = m.C * x;
        for (Eigen::Index i = 0; i < y.size(); ++i) y(i) += meas(noise);
        est.update(u, y);
        Eigen::VectorXd d(m.n());
        for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = g(noise);
        d *= m.d_max * std::pow(std::uniform_real_distribution<double>(0, 1)(noise), 1.0 / m.n()) / d.norm();
        x = m.A * x + m.B * u + d;
      }
    }
    // Noiseless scalar sensors with +7 injected into sensor 3 from step 5.
    const CodingMatrix ones(Eigen::MatrixXd::Ones(3, 1));
    long first_alarm = -1;
    double x = 2.0;
    for (long k = 0; k < 10; ++k, x = 0.9 * x + 1.0) {
      Eigen::Vector3d z = Eigen::Vector3d::Constant(x);
      if (k >= 5) z(2) += 7.0;
      if (residual_detect_noiseless(ones, StackedVector(z, 1)).attacked && first_alarm < 0) first_alarm = k;
    }
    std::ostringstream os;
    os << alarms << " false alarms in " << checks << " attack-free checks; noiseless +7 first alarm at step "
       << first_alarm << " (onset 5)";
    return std::pair{alarms == 0 && first_alarm == 5, os.str()};
  });

  criterion("6", "decoder economy in the demo", [] {
    const Scenario sc = three_inertia_demo_scenario();
    const Trace t = simulate(sc);
    long pre_minimizer = 0, pre_extra_solves = 0, first = -1, last = -1;
    for (const auto& row : t.rows) {
      if (row.k < 2000) {
        if (row.branch == Branch::minimizer) ++pre_minimizer;
        if (row.solves != 1) ++pre_extra_solves;
      } else if (row.branch == Branch::minimizer) {
        if (first < 0) first = row.k;
        last = row.k;
      }
    }
    // The window must close well before the horizon: the final quarter of the
    // run is calculator-only.
    const bool closed = first >= 2000 && last < sc.horizon - sc.horizon / 4;
    std::ostringstream os;
    os << "pre-attack minimizer steps " << pre_minimizer << ", pre-attack steps with solves != 1 "
       << pre_extra_solves << ", minimizer window [" << first << ", " << last << "], total "
       << t.minimizer_steps;
    return std::pair{pre_minimizer == 0 && pre_extra_solves == 0 && closed, os.str()};
  });

  criterion("7", "partial observer structure", [] {
    const SystemModel m = three_inertia_1ms();
    double worst = 0.0;
    int nu_sum = 0;
    for (int i = 1; i <= m.p(); ++i) {
      const PartialObserver o = kalman_decompose(m, i);
      nu_sum += o.nu;
      const Eigen::MatrixXd ztz = o.Z.transpose() * o.Z - Eigen::MatrixXd::Identity(o.nu, o.nu);
      worst = std::max(worst, ztz.cwiseAbs().maxCoeff());
      if (o.W.cols() > 0) {
        worst = std::max(worst, (m.C.row(i - 1) * o.W).cwiseAbs().maxCoeff());
        worst = std::max(worst, (o.Z.transpose() * m.A * o.W).cwiseAbs().maxCoeff());
      }
    }
    Scenario sc = three_inertia_demo_scenario();
    ResilientEstimator est(sc.model, sc.estimator_config(sc.model));  // asserts the memory bound itself
    std::ostringstream os;
    os << "max structural defect " << worst << ", sum nu = " << nu_sum << " <= n*p = " << m.n() * m.p();
    return std::pair{worst <= 1e-10 && nu_sum <= m.n() * m.p(), os.str()};
  });

  criterion("8", "zero-order-hold discretisation", [] {
    const ContinuousModel cm = three_inertia_model();
    const double Ts = 1e-3;
    const SystemModel d = zoh_discretize(cm, Ts);
    Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(7, 7);
    aug.topLeftCorner(6, 6) = cm.A * Ts;
    aug.topRightCorner(6, 1) = cm.B * Ts;
    const Eigen::MatrixXd ref = testutil::taylor_expm(aug);
    const double dev = std::max((d.A - ref.topLeftCorner(6, 6)).cwiseAbs().maxCoeff(),
                                (d.B - ref.topRightCorner(6, 1)).cwiseAbs().maxCoeff());

    // e^{aT} and (e^{aT} - 1) / a * b, with the integrator as a = 0.
    constexpr double eps = std::numeric_limits<double>::epsilon();
    double scalar_dev = 0.0;  // in units of eps, relative
    for (const auto& [a, b, T] : std::vector<std::tuple<double, double, double>>{
             {0.0, 1.0, 1e-3}, {0.0, 2.5, 0.1}, {-1.0, 1.0, 1.0}, {-2.0, 3.0, 0.5}, {0.5, 1.0, 0.2}}) {
      const SystemModel s = zoh_discretize(
          ContinuousModel{Eigen::MatrixXd::Constant(1, 1, a), Eigen::MatrixXd::Constant(1, 1, b),
                          Eigen::MatrixXd::Ones(1, 1)},
          T);
      const double ea = std::exp(a * T);
      const double eb = a == 0.0 ? b * T : std::expm1(a * T) / a * b;
      scalar_dev = std::max(scalar_dev, std::abs(s.A(0, 0) - ea) / (eps * ea));
      scalar_dev = std::max(scalar_dev, std::abs(s.B(0, 0) - eb) / (eps * std::abs(eb)));
    }
    std::ostringstream os;
    os << "three-inertia max deviation " << dev << ", scalar closed forms within " << scalar_dev << " eps";
    return std::pair{dev <= 1e-12 && scalar_dev <= 4.0, os.str()};
  });

  criterion("9", "theta3 steady-state tracking", [] {
    Scenario sc = three_inertia_demo_scenario();
    const Trace t = simulate(sc);
    const double err = std::abs(t.rows.back().x(4) - sc.controller.reference);
    std::ostringstream os;
    os << "|theta3(end) - 1| = " << err << " (attacked demo run)";
    return std::pair{err <= 0.01, os.str()};
  });

  std::printf("%s: %d failing criteria\n", failures == 0 ? "ACCEPTED" : "REJECTED", failures);
  return failures == 0 ? 0 : 1;
}
