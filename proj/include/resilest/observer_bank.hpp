#pragma once

// Per-sensor Kalman observability decomposition and Luenberger partial
// observers, plus the exponential constants bounding their attack-free error.

#include <complex>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "resilest/coding_analysis.hpp"
#include "resilest/numeric.hpp"

namespace resilest {

/// Observer for the observable quotient of (A, c_i):
///   z_hat(k+1) = F z_hat(k) + Z^T B u(k) + L ybar_i(k),  F = S - L t.
struct PartialObserver {
  int sensor = 0;          ///< 1-based sensor index
  int nu = 0;              ///< observability index of (A, c_i)
  Eigen::MatrixXd Z;       ///< n x nu, orthonormal basis of the observable directions
  Eigen::MatrixXd W;       ///< n x (n-nu), orthonormal basis of the unobservable subspace
  Eigen::MatrixXd S;       ///< Z^T A Z
  Eigen::RowVectorXd t;    ///< c_i Z
  Eigen::MatrixXd ZtB;     ///< Z^T B
  Eigen::VectorXd L;       ///< injection gain (empty until designed)
  Eigen::MatrixXd F;       ///< S - L t
  Eigen::VectorXd state;   ///< z_hat, starts at zero

  bool has_gain() const { return L.size() == nu && nu > 0; }
};

struct ErrorBoundParams {
  double mu_F = 1.0;
  double beta = 0.0;
  double mu_L = 0.0;
  double mu_Z = 0.0;
  double w_max = 0.0;
  double x0_max = 0.0;
  int powers_evaluated = 0;  ///< horizon reached while certifying the mu's
};

using PoleList = std::vector<std::complex<double>>;

/// Orthogonal Krylov (staircase) decomposition for sensor i (1-based).
/// Throws InputError for an out-of-range index and PreconditionError when
/// c_i = 0.
PartialObserver kalman_decompose(const SystemModel& model, int sensor, double eps_rel = default_rank_eps());

/// Single-output pole placement. `poles` must have nu entries, be closed under
/// conjugation and lie strictly inside the unit circle.
PartialObserver design_gain(PartialObserver obs, const PoleList& poles, double eps_rel = default_rank_eps());

/// nu poles evenly spaced on the circle of the given radius: roots of z^nu = radius^nu.
PoleList default_poles(int nu, double radius = 0.5);
/// nu real poles evenly spread over [lo, hi] (lo when nu = 1).
PoleList real_poles(int nu, double lo, double hi);

/// Advances z_hat by one step.
void observer_step(PartialObserver& obs, const Eigen::VectorXd& u, double ybar);

/// beta defaults to the midpoint between the largest spectral radius and 1;
/// an explicit beta must lie in (max spectral radius, 1).
ErrorBoundParams compute_error_bounds(std::span<const PartialObserver> bank, double d_max, double n_max,
                                      double x0_max, std::optional<double> beta = {});

/// mu_F * x0_max * beta^k + w_max.
double v_max_at(const ErrorBoundParams& params, long k);

}  // namespace resilest
