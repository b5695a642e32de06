#include "resilest/resilient_estimator.hpp"

#include <string>

#include "resilest/error_correction.hpp"
#include "resilest/errors.hpp"

namespace resilest {

const char* branch_name(Branch b) { return b == Branch::calculator ? "calculator" : "minimizer"; }

CodingMatrix build_phi(const std::vector<PartialObserver>& bank) {
  if (bank.empty()) throw InputError("empty observer bank");
  const auto n = bank.front().Z.rows();
  const auto p = static_cast<Eigen::Index>(bank.size());
  Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(n * p, n);
  for (Eigen::Index i = 0; i < p; ++i) {
    const auto& obs = bank[static_cast<std::size_t>(i)];
    if (obs.Z.rows() != n) throw InputError("observer bases disagree on the state dimension");
    phi.block(i * n, 0, obs.nu, n) = obs.Z.transpose();
  }
  return CodingMatrix(std::move(phi), static_cast<int>(n));
}

StackedVector pad_observer_outputs(const std::vector<PartialObserver>& bank) {
  if (bank.empty()) throw InputError("empty observer bank");
  const auto n = bank.front().Z.rows();
  Eigen::VectorXd z = Eigen::VectorXd::Zero(n * static_cast<Eigen::Index>(bank.size()));
  for (std::size_t i = 0; i < bank.size(); ++i) {
    z.segment(static_cast<Eigen::Index>(i) * n, bank[i].nu) = bank[i].state;
  }
  return StackedVector(std::move(z), static_cast<int>(n));
}

DecoderState make_decoder_state(const CodingMatrix& phi, int q, std::optional<int> r, double eps_rel) {
  DecoderState state;
  state.q = q;
  state.r = r.value_or(q);
  state.phi = phi;
  state.constants = robustness_constants(phi, state.q, state.r, eps_rel);
  state.lambda = IndexSet::full(phi.block_count());
  return state;
}

namespace {

const Eigen::MatrixXd& cached_pinv(DecoderState& state, double eps_rel) {
  const auto key = state.lambda.mask();
  auto it = state.pinv_cache.find(key);
  if (it != state.pinv_cache.end()) return it->second;
  const Eigen::MatrixXd sub = select_compacted(state.phi, state.lambda);
  if (sub.rows() == 0 || numerical_rank(sub, eps_rel) < state.phi.cols()) {
    throw Error("decoder: Phi restricted to " + state.lambda.to_string() + " is rank deficient");
  }
  return state.pinv_cache.emplace(key, pseudo_inverse(sub, eps_rel)).first->second;
}

}  // namespace

EstimateRecord decoder_step(DecoderState& state, const StackedVector& z_hat, long k, const ErrorBoundParams& bounds,
                            double eps_rel) {
  if (z_hat.block_count() != state.phi.block_count() || z_hat.block_len() != state.phi.block_len()) {
    throw InputError("decoder_step: z_hat shape does not match Phi");
  }
  const double v_max = v_max_at(bounds, k);
  state.v_prime_max = state.constants.theta * v_max;

  EstimateRecord rec;
  rec.k = k;
  rec.bound = state.constants.kappa_c * v_max;
  rec.v_prime_max = state.v_prime_max;

  // Calculator on the current Lambda.
  const Eigen::VectorXd x_calc = cached_pinv(state, eps_rel) * select_compacted(z_hat, state.lambda);
  rec.solves = 1;
  state.f = violating_blocks(state.phi, z_hat, x_calc, state.v_prime_max).size();
  rec.f = state.f;

  const bool recert = state.recert_period > 0 && k > 0 && k % state.recert_period == 0;
  if (state.f <= state.q && !recert) {
    rec.x_hat = x_calc;
    rec.branch = Branch::calculator;
  } else {
    const DecodeResult dec =
        decode_over_candidates(state.phi, z_hat, state.q, state.r, state.v_prime_max, eps_rel);
    rec.x_hat = dec.estimate;
    rec.branch = Branch::minimizer;
    rec.solves += dec.solves;
    state.lambda = dec.support_estimate.complement();
    ++state.minimizer_calls;
  }
  state.pinv_solves += rec.solves;
  rec.lambda = state.lambda;
  return rec;
}

ResilientEstimator::ResilientEstimator(const SystemModel& model, const EstimatorConfig& config, double eps_rel)
    : model_(model), eps_rel_(eps_rel) {
  model_.validate();
  const int p = model_.p();
  if (!config.poles.empty() && static_cast<int>(config.poles.size()) != p) {
    throw InputError("observer pole lists: expected " + std::to_string(p) + ", got " +
                     std::to_string(config.poles.size()));
  }
  int total_nu = 0;
  bank_.reserve(static_cast<std::size_t>(p));
  for (int i = 1; i <= p; ++i) {
    PartialObserver obs = kalman_decompose(model_, i, eps_rel);
    const PoleList poles = config.poles.empty() ? default_poles(obs.nu) : config.poles[static_cast<std::size_t>(i - 1)];
    bank_.push_back(design_gain(std::move(obs), poles, eps_rel));
    total_nu += bank_.back().nu;
  }
  if (total_nu > model_.n() * p) throw Error("observer memory exceeds n*p");

  state_ = make_decoder_state(build_phi(bank_), config.q, config.r, eps_rel);
  state_.recert_period = config.recert_period;
  bounds_ = compute_error_bounds(bank_, model_.d_max, model_.n_max, config.x0_max, config.beta);
}

EstimateRecord ResilientEstimator::estimate(long k) {
  return decoder_step(state_, pad_observer_outputs(bank_), k, bounds_, eps_rel_);
}

void ResilientEstimator::update(const Eigen::VectorXd& u, const Eigen::VectorXd& ybar) {
  if (u.size() != model_.m()) throw InputError("input has " + std::to_string(u.size()) + " entries, expected " +
                                               std::to_string(model_.m()));
  if (ybar.size() != model_.p()) throw InputError("measurement has " + std::to_string(ybar.size()) +
                                                  " entries, expected " + std::to_string(model_.p()));
  for (std::size_t i = 0; i < bank_.size(); ++i) observer_step(bank_[i], u, ybar(static_cast<Eigen::Index>(i)));
}

EstimateRecord ResilientEstimator::estimator_step(const Eigen::VectorXd& u, const Eigen::VectorXd& ybar, long k) {
  update(u, ybar);
  return estimate(k);
}

}  // namespace resilest
