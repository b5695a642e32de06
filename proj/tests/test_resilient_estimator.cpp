#include <gtest/gtest.h>

#include "resilest/errors.hpp"
#include "resilest/plant_sim.hpp"
#include "resilest/resilient_estimator.hpp"
#include "test_util.hpp"

using namespace resilest;

namespace {

SystemModel scalar_plant() {
  return SystemModel{Eigen::MatrixXd::Ones(1, 1), Eigen::MatrixXd::Ones(1, 1), Eigen::MatrixXd::Ones(3, 1)};
}

EstimatorConfig scalar_config() {
  EstimatorConfig cfg;
  cfg.q = 1;
  cfg.poles = {{0.5}, {0.5}, {0.5}};
  cfg.x0_max = 10.0;
  return cfg;
}

SystemModel three_inertia() { return zoh_discretize(three_inertia_model(), 1e-3, 1e-3, 1e-3); }

EstimatorConfig three_inertia_config(const SystemModel& m) {
  EstimatorConfig cfg;
  cfg.q = 1;
  for (int i = 1; i <= m.p(); ++i) cfg.poles.push_back(real_poles(kalman_decompose(m, i).nu, 0.97, 0.99));
  return cfg;
}

// Orthogonal projector onto the row space of m.
Eigen::MatrixXd row_projector(const Eigen::MatrixXd& m) {
  const Eigen::MatrixXd pinv = pseudo_inverse(m, 1e-9);
  return pinv * m;
}

}  // namespace

TEST(BuildPhi, ScalarHasNoPadding) {
  ResilientEstimator est(scalar_plant(), scalar_config());
  EXPECT_EQ(est.phi().entries().cwiseAbs(), Eigen::MatrixXd::Ones(3, 1));
}

TEST(BuildPhi, DiagonalExamplePadsWithZeros) {
  SystemModel m;
  m.A = Eigen::Vector2d(1, 2).asDiagonal();
  m.B = Eigen::MatrixXd::Zero(2, 1);
  m.C = Eigen::RowVector2d(1, 0);
  const std::vector<PartialObserver> bank{kalman_decompose(m, 1)};
  const CodingMatrix phi = build_phi(bank);
  EXPECT_NEAR(std::abs(phi.entries()(0, 0)), 1.0, 1e-15);
  EXPECT_EQ(phi.entries()(0, 1), 0.0);
  EXPECT_EQ(phi.entries().row(1).norm(), 0.0);
}

TEST(BuildPhi, ThreeInertiaShapeRangeAndCorrectability) {
  const SystemModel m = three_inertia();
  ResilientEstimator est(m, three_inertia_config(m));
  const CodingMatrix& phi = est.phi();
  EXPECT_EQ(phi.entries().rows(), 30);
  EXPECT_EQ(phi.entries().cols(), 6);
  EXPECT_TRUE(is_q_error_correctable(phi, 1));
  int total = 0;
  for (const auto& o : est.bank()) {
    total += o.nu;
    EXPECT_EQ(phi.block(o.sensor).bottomRows(6 - o.nu).norm(), 0.0);
  }
  EXPECT_LE(total, 6 * 5);

  // Rows of G lie in the row space of Phi on every selection.
  const CodingMatrix g = observability_matrix(m);
  for (std::uint64_t mask = 1; mask < 32; ++mask) {
    const IndexSet sel = IndexSet::from_mask(5, mask);
    const Eigen::MatrixXd proj = row_projector(select_compacted(phi, sel));
    const Eigen::MatrixXd gs = select_compacted(g, sel);
    EXPECT_LE((gs - gs * proj).norm(), 1e-9 * gs.norm()) << sel.to_string();
  }
}

TEST(BuildPhi, RowSpaceMatchesObservabilityMatrix) {
  testutil::Rng rng(37);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = testutil::uniform_int(rng, 2, 4);
    SystemModel m;
    m.A = testutil::random_matrix(rng, n, n) * 0.5;
    m.B = testutil::random_matrix(rng, n, 1);
    m.C = testutil::random_matrix(rng, 4, n);
    // One sensor that sees only part of the state.
    if (n > 2) {
      m.A.block(0, 2, 2, n - 2).setZero();
      m.C.row(0).tail(n - 2).setZero();
    }
    std::vector<PartialObserver> bank;
    for (int i = 1; i <= 4; ++i) bank.push_back(kalman_decompose(m, i));
    const CodingMatrix phi = build_phi(bank);
    const CodingMatrix g = observability_matrix(m);
    for (std::uint64_t mask = 1; mask < 16; ++mask) {
      const IndexSet sel = IndexSet::from_mask(4, mask);
      EXPECT_LE((row_projector(select_compacted(phi, sel)) - row_projector(select_compacted(g, sel))).norm(), 1e-8)
          << "trial " << trial << " " << sel.to_string();
    }
  }
}

TEST(PadObserverOutputs, Examples) {
  ResilientEstimator est(scalar_plant(), scalar_config());
  EXPECT_EQ(pad_observer_outputs(est.bank()).data().norm(), 0.0);
  auto bank = est.bank();
  bank[0].state(0) = 5;
  bank[1].state(0) = 5;
  bank[2].state(0) = 12;
  EXPECT_EQ(pad_observer_outputs(bank).data(), Eigen::Vector3d(5, 5, 12));
}

TEST(DecoderStep, MembershipThresholdIsInclusive) {
  DecoderState st = make_decoder_state(CodingMatrix(Eigen::MatrixXd::Ones(4, 1)), 1, 2);
  st.constants.theta = 2.0;
  ErrorBoundParams b;
  b.mu_F = 0.0;
  b.beta = 0.5;
  b.w_max = 1.0;
  // Calculator estimate 2; residuals (2, 2, 2, 6) against v' = 2.
  const EstimateRecord rec = decoder_step(st, StackedVector(Eigen::Vector4d(0, 0, 0, 8), 1), 0, b);
  EXPECT_EQ(rec.f, 1);
  EXPECT_EQ(rec.branch, Branch::calculator);
  EXPECT_EQ(rec.solves, 1u);
  EXPECT_DOUBLE_EQ(rec.x_hat(0), 2.0);
}

TEST(DecoderStep, RejectsUncorrectableCoding) {
  EXPECT_THROW(make_decoder_state(CodingMatrix(Eigen::MatrixXd::Ones(3, 1)), 2), PreconditionError);
  EXPECT_THROW(make_decoder_state(CodingMatrix(Eigen::MatrixXd::Ones(3, 1)), 1, 3), InputError);
}

TEST(ResilientEstimator, NoiselessAttackFreeUsesCalculator) {
  ResilientEstimator est(scalar_plant(), scalar_config());
  double x = 4.0;
  EstimateRecord rec = est.estimate(0);
  for (long k = 1; k < 60; ++k) {
    rec = est.estimator_step(Eigen::VectorXd::Constant(1, 0.1), Eigen::Vector3d::Constant(x), k);
    x += 0.1;
    EXPECT_EQ(rec.branch, Branch::calculator) << k;
    EXPECT_EQ(rec.f, 0);
    EXPECT_LE(std::abs(rec.x_hat(0) - x), rec.bound);
  }
  EXPECT_NEAR(rec.x_hat(0), x, 1e-12);
  EXPECT_EQ(est.decoder().minimizer_calls, 0u);
}

TEST(ResilientEstimator, ScalarAttackTriggersMinimizerOnce) {
  ResilientEstimator est(scalar_plant(), scalar_config());
  const double x = 5.0;
  const long onset = 30;
  std::vector<long> fired;
  est.estimate(0);
  for (long k = 1; k < 120; ++k) {
    // ybar(k-1) enters at step k.
    Eigen::Vector3d ybar = Eigen::Vector3d::Constant(x);
    if (k - 1 >= onset) ybar(2) += 7.0;
    const EstimateRecord rec = est.estimator_step(Eigen::VectorXd::Zero(1), ybar, k);
    if (rec.branch == Branch::minimizer) fired.push_back(k);
    EXPECT_LE(std::abs(rec.x_hat(0) - x), rec.bound + 1e-12) << k;
    if (k > onset + 1) {
      EXPECT_EQ(rec.lambda, IndexSet(3, {1, 2}));
    }
  }
  ASSERT_EQ(fired.size(), 1u);
  EXPECT_EQ(fired[0], onset + 1);
  EXPECT_EQ(est.decoder().lambda, IndexSet(3, {1, 2}));
}

TEST(ResilientEstimator, ComposedStepEqualsManualSequence) {
  const SystemModel m = three_inertia();
  ResilientEstimator a(m, three_inertia_config(m));
  ResilientEstimator b(m, three_inertia_config(m));
  testutil::Rng rng(41);
  std::vector<PartialObserver> manual = b.bank();
  DecoderState state = b.decoder();
  for (long k = 1; k < 50; ++k) {
    const Eigen::VectorXd u = testutil::random_matrix(rng, 1, 1);
    const Eigen::VectorXd y = testutil::random_matrix(rng, 5, 1);
    const EstimateRecord ra = a.estimator_step(u, y, k);
    for (std::size_t i = 0; i < manual.size(); ++i) observer_step(manual[i], u, y(static_cast<Eigen::Index>(i)));
    const EstimateRecord rb = decoder_step(state, pad_observer_outputs(manual), k, b.bounds());
    EXPECT_EQ(ra.x_hat, rb.x_hat);
    EXPECT_EQ(ra.branch, rb.branch);
    EXPECT_EQ(ra.lambda, rb.lambda);
  }
}

TEST(ResilientEstimator, ZeroSystemGivesZeroEstimates) {
  const SystemModel m = three_inertia();
  ResilientEstimator est(m, three_inertia_config(m));
  for (long k = 1; k < 20; ++k) {
    EXPECT_EQ(est.estimator_step(Eigen::VectorXd::Zero(1), Eigen::VectorXd::Zero(5), k).x_hat.norm(), 0.0);
  }
  EXPECT_THROW(est.update(Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(5)), InputError);
  EXPECT_THROW(est.update(Eigen::VectorXd::Zero(1), Eigen::VectorXd::Zero(4)), InputError);
}

TEST(ResilientEstimator, PeriodicRecertificationReadmitsSensor) {
  EstimatorConfig cfg = scalar_config();
  cfg.recert_period = 20;
  ResilientEstimator est(scalar_plant(), cfg);
  est.estimate(0);
  // Attack on sensor 3 during steps [10, 15) only.
  for (long k = 1; k < 100; ++k) {
    Eigen::Vector3d ybar = Eigen::Vector3d::Constant(5.0);
    if (k - 1 >= 10 && k - 1 < 15) ybar(2) += 7.0;
    est.estimator_step(Eigen::VectorXd::Zero(1), ybar, k);
  }
  EXPECT_EQ(est.decoder().lambda, IndexSet::full(3));
}
