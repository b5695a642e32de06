#pragma once

// Zero-padded coding matrix built from a partial-observer bank and the
// switching decoder: a cheap pseudoinverse "calculator" on the presumed
// healthy sensors, falling back to the combinatorial "minimizer" when more
// than q sensors disagree with it.

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "resilest/coding_analysis.hpp"
#include "resilest/observer_bank.hpp"
#include "resilest/stacked.hpp"

namespace resilest {

enum class Branch { calculator, minimizer };
const char* branch_name(Branch b);

struct EstimateRecord {
  long k = 0;
  Eigen::VectorXd x_hat;
  int f = 0;             ///< sensors whose residual exceeds v'_max at the calculator estimate
  IndexSet lambda;       ///< presumed healthy sensors after this step
  Branch branch = Branch::calculator;
  double bound = 0.0;    ///< kappa_c * v_max(k)
  double v_prime_max = 0.0;
  std::uint64_t solves = 0;  ///< pseudoinverse applications in this step
};

struct DecoderState {
  IndexSet lambda;
  int q = 0;
  int r = 0;
  CodingMatrix phi;
  int f = 0;
  double v_prime_max = 0.0;
  RobustnessConstants constants;
  long recert_period = 0;  ///< > 0: run the minimizer every recert_period steps
  std::uint64_t pinv_solves = 0;
  std::uint64_t minimizer_calls = 0;
  std::map<std::uint64_t, Eigen::MatrixXd> pinv_cache;  ///< keyed by lambda mask
};

/// Block i = Z_i^T padded below with n - nu_i zero rows.
CodingMatrix build_phi(const std::vector<PartialObserver>& bank);
/// Blocks [z_hat_i; 0].
StackedVector pad_observer_outputs(const std::vector<PartialObserver>& bank);

/// Lambda starts as every sensor. Throws PreconditionError when phi is not
/// q-error correctable, InputError unless 0 <= q <= r <= 2q.
DecoderState make_decoder_state(const CodingMatrix& phi, int q, std::optional<int> r = {},
                                double eps_rel = default_rank_eps());

EstimateRecord decoder_step(DecoderState& state, const StackedVector& z_hat, long k, const ErrorBoundParams& bounds,
                            double eps_rel = default_rank_eps());

struct EstimatorConfig {
  int q = 1;
  std::optional<int> r;
  std::vector<PoleList> poles;  ///< one list per sensor; empty selects default_poles(nu, 0.5)
  double x0_max = 10.0;
  std::optional<double> beta;
  long recert_period = 0;
};

/// Observer bank plus decoder. The estimate at step k uses the observer
/// states built from data up to k-1.
class ResilientEstimator {
 public:
  ResilientEstimator(const SystemModel& model, const EstimatorConfig& config, double eps_rel = default_rank_eps());

  /// Decodes the current observer states as the estimate for step k.
  EstimateRecord estimate(long k);
  /// Advances every partial observer with (u, ybar).
  void update(const Eigen::VectorXd& u, const Eigen::VectorXd& ybar);
  /// update(u, ybar) followed by estimate(k).
  EstimateRecord estimator_step(const Eigen::VectorXd& u, const Eigen::VectorXd& ybar, long k);

  const std::vector<PartialObserver>& bank() const { return bank_; }
  const DecoderState& decoder() const { return state_; }
  const ErrorBoundParams& bounds() const { return bounds_; }
  const CodingMatrix& phi() const { return state_.phi; }

 private:
  SystemModel model_;
  std::vector<PartialObserver> bank_;
  DecoderState state_;
  ErrorBoundParams bounds_;
  double eps_rel_;
};

}  // namespace resilest
