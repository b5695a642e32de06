#include "resilest/observer_bank.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "resilest/errors.hpp"

namespace resilest {

PartialObserver kalman_decompose(const SystemModel& model, int sensor, double eps_rel) {
  model.validate();
  const int n = model.n();
  if (sensor < 1 || sensor > model.p()) {
    throw InputError("sensor index " + std::to_string(sensor) + " outside [1.." + std::to_string(model.p()) + "]");
  }
  const Eigen::VectorXd c = model.C.row(sensor - 1).transpose();
  if (c.norm() == 0.0) throw PreconditionError("sensor " + std::to_string(sensor) + " observes nothing (c_i = 0)");

  // Arnoldi on (A^T, c^T): the Krylov space span{c^T, A^T c^T, ...} is the row
  // space of G_i. Twice-applied Gram-Schmidt keeps the basis orthonormal.
  const Eigen::MatrixXd At = model.A.transpose();
  const double stop = static_cast<double>(n) * std::max(spectral_norm(model.A), 1.0) * eps_rel;
  Eigen::MatrixXd q(n, n);
  q.col(0) = c / c.norm();
  int nu = 1;
  while (nu < n) {
    Eigen::VectorXd w = At * q.col(nu - 1);
    for (int pass = 0; pass < 2; ++pass) w -= q.leftCols(nu) * (q.leftCols(nu).transpose() * w);
    const double norm = w.norm();
    if (norm <= stop) break;
    q.col(nu) = w / norm;
    ++nu;
  }

  PartialObserver obs;
  obs.sensor = sensor;
  obs.nu = nu;
  obs.Z = q.leftCols(nu);
  if (nu < n) {
    // Orthonormal complement: trailing left singular vectors of Z.
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(obs.Z, Eigen::ComputeFullU);
    obs.W = svd.matrixU().rightCols(n - nu);
  } else {
    obs.W.resize(n, 0);
  }
  obs.S = obs.Z.transpose() * model.A * obs.Z;
  obs.t = c.transpose() * obs.Z;
  obs.ZtB = obs.Z.transpose() * model.B;
  obs.state = Eigen::VectorXd::Zero(nu);
  return obs;
}

namespace {

// Real coefficients a_0..a_nu (a_0 = 1) of prod (z - p_j).
Eigen::VectorXd monic_poly(const PoleList& roots) {
  std::vector<std::complex<double>> coeff{1.0};
  for (const auto& root : roots) {
    std::vector<std::complex<double>> next(coeff.size() + 1, 0.0);
    for (std::size_t k = 0; k < coeff.size(); ++k) {
      next[k] += coeff[k];
      next[k + 1] -= root * coeff[k];
    }
    coeff = std::move(next);
  }
  Eigen::VectorXd out(static_cast<Eigen::Index>(coeff.size()));
  for (std::size_t k = 0; k < coeff.size(); ++k) out(static_cast<Eigen::Index>(k)) = coeff[k].real();
  return out;
}

bool conjugate_closed(const PoleList& poles) {
  std::vector<bool> used(poles.size(), false);
  for (std::size_t i = 0; i < poles.size(); ++i) {
    if (used[i]) continue;
    const double scale = std::max(1.0, std::abs(poles[i]));
    if (std::abs(poles[i].imag()) <= 1e-12 * scale) {
      used[i] = true;
      continue;
    }
    bool found = false;
    for (std::size_t j = i + 1; j < poles.size(); ++j) {
      if (!used[j] && std::abs(poles[j] - std::conj(poles[i])) <= 1e-12 * scale) {
        used[i] = used[j] = true;
        found = true;
        break;
      }
    }
    if (!found) return false;
  }
  return true;
}

}  // namespace

PartialObserver design_gain(PartialObserver obs, const PoleList& poles, double eps_rel) {
  const int nu = obs.nu;
  if (static_cast<int>(poles.size()) != nu) {
    throw InputError("sensor " + std::to_string(obs.sensor) + " needs " + std::to_string(nu) + " poles, got " +
                     std::to_string(poles.size()));
  }
  for (const auto& pole : poles) {
    if (!(std::abs(pole) < 1.0)) throw InputError("observer poles must lie strictly inside the unit circle");
  }
  if (!conjugate_closed(poles)) throw InputError("observer poles must be closed under conjugation");

  // Ackermann on the shifted/scaled pair S' = (S - sigma I)/s: eigenvalues map
  // affinely, so placing (p - sigma)/s for S' and scaling the gain by s places
  // p for S, without the ill-conditioning of the raw observability matrix.
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(nu, nu);
  const double sigma = obs.S.trace() / nu;
  double scale = spectral_norm(obs.S - sigma * eye);
  if (scale == 0.0) scale = 1.0;
  const Eigen::MatrixXd sp = (obs.S - sigma * eye) / scale;
  PoleList mapped;
  mapped.reserve(poles.size());
  for (const auto& pole : poles) mapped.push_back((pole - sigma) / scale);

  Eigen::MatrixXd obsv(nu, nu);
  Eigen::RowVectorXd row = obs.t;
  for (int j = 0; j < nu; ++j) {
    obsv.row(j) = row;
    row = row * sp;
  }
  if (numerical_rank(obsv, eps_rel) < nu) {
    throw PreconditionError("pair (S, t) of sensor " + std::to_string(obs.sensor) + " is not observable");
  }

  const Eigen::VectorXd a = monic_poly(mapped);
  Eigen::MatrixXd char_poly = Eigen::MatrixXd::Zero(nu, nu);
  for (int k = 0; k <= nu; ++k) char_poly = char_poly * sp + a(k) * eye;  // Horner

  Eigen::VectorXd e_last = Eigen::VectorXd::Zero(nu);
  e_last(nu - 1) = 1.0;
  const Eigen::VectorXd l_scaled = char_poly * obsv.fullPivLu().solve(e_last);

  obs.L = scale * l_scaled;
  obs.F = obs.S - obs.L * obs.t;
  return obs;
}

PoleList default_poles(int nu, double radius) {
  PoleList out;
  out.reserve(static_cast<std::size_t>(nu));
  for (int j = 0; j < nu; ++j) {
    const double angle = 2.0 * std::numbers::pi * j / nu;
    std::complex<double> z = std::polar(radius, angle);
    // Snap the real roots exactly so the conjugate pairing check is clean.
    if (2 * j == nu) z = {-radius, 0.0};
    if (j == 0) z = {radius, 0.0};
    out.push_back(z);
  }
  // Enforce exact conjugate pairs (polar() is not exactly symmetric).
  for (int j = 1; 2 * j < nu; ++j) out[static_cast<std::size_t>(nu - j)] = std::conj(out[static_cast<std::size_t>(j)]);
  return out;
}

PoleList real_poles(int nu, double lo, double hi) {
  PoleList out;
  out.reserve(static_cast<std::size_t>(nu));
  for (int j = 0; j < nu; ++j) out.emplace_back(nu == 1 ? lo : lo + (hi - lo) * j / (nu - 1), 0.0);
  return out;
}

void observer_step(PartialObserver& obs, const Eigen::VectorXd& u, double ybar) {
  if (!obs.has_gain()) throw InputError("observer gain has not been designed");
  if (u.size() != obs.ZtB.cols()) throw InputError("input dimension mismatch in observer_step");
  obs.state = obs.F * obs.state + obs.ZtB * u + obs.L * ybar;
}

ErrorBoundParams compute_error_bounds(std::span<const PartialObserver> bank, double d_max, double n_max,
                                      double x0_max, std::optional<double> beta) {
  if (bank.empty()) throw InputError("empty observer bank");
  if (!(d_max >= 0.0) || !(n_max >= 0.0) || !(x0_max >= 0.0)) {
    throw InputError("d_max, n_max and x0_max must be nonnegative");
  }
  double radius = 0.0;
  for (const auto& obs : bank) {
    if (!obs.has_gain()) throw InputError("observer gain has not been designed");
    const double rho = spectral_radius(obs.F);
    if (!(rho < 1.0)) {
      throw PreconditionError("F of sensor " + std::to_string(obs.sensor) + " is not Schur stable (spectral radius " +
                              std::to_string(rho) + ")");
    }
    radius = std::max(radius, rho);
  }

  ErrorBoundParams out;
  out.beta = beta.value_or(0.5 * (radius + 1.0));
  if (!(out.beta > radius && out.beta < 1.0)) {
    throw InputError("beta must lie in (max spectral radius, 1) = (" + std::to_string(radius) + ", 1)");
  }
  out.x0_max = x0_max;
  out.mu_F = 0.0;

  constexpr int kMaxPowers = 10'000'000;
  for (const auto& obs : bank) {
    double mu_f = 0.0;
    double mu_l = 0.0;
    double mu_z = 0.0;
    Eigen::MatrixXd fk = Eigen::MatrixXd::Identity(obs.nu, obs.nu);
    double beta_k = 1.0;
    for (int k = 0;; ++k) {
      const double rf = spectral_norm(fk) / beta_k;
      const double rl = (fk * obs.L).norm() / beta_k;
      const double rz = spectral_norm(fk * obs.Z.transpose()) / beta_k;
      mu_f = std::max(mu_f, rf);
      mu_l = std::max(mu_l, rl);
      mu_z = std::max(mu_z, rz);
      // Once ||F^K|| / beta^K < 1, every later ratio (of F^k, F^k L or F^k Z^T)
      // is below an earlier one, so the running maxima are the suprema.
      if (k >= 1 && spectral_norm(fk) < 1e-12 && rf < 1.0) {
        out.powers_evaluated = std::max(out.powers_evaluated, k);
        break;
      }
      if (k >= kMaxPowers) throw PreconditionError("error-bound constants did not settle");
      fk = obs.F * fk;
      beta_k *= out.beta;
    }
    out.mu_F = std::max(out.mu_F, mu_f);
    out.mu_L = std::max(out.mu_L, mu_l);
    out.mu_Z = std::max(out.mu_Z, mu_z);
  }
  out.mu_F = std::max(out.mu_F, 1.0);
  out.w_max = (out.mu_L * n_max + out.mu_Z * d_max) / (1.0 - out.beta);
  return out;
}

double v_max_at(const ErrorBoundParams& params, long k) {
  if (k < 0) throw InputError("step index must be nonnegative");
  return params.mu_F * params.x0_max * std::pow(params.beta, static_cast<double>(k)) + params.w_max;
}

}  // namespace resilest
