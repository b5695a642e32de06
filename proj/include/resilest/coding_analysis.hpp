#pragma once

// Detectability / correctability of coding matrices, stacked cospark, the
// dynamic security index and the robustness constants that scale the noisy
// detection and decoding bounds.

#include <map>
#include <optional>

#include <Eigen/Dense>

#include "resilest/numeric.hpp"
#include "resilest/stacked.hpp"

namespace resilest {

/// Discrete-time LTI plant x(k+1) = A x + B u + d, y = C x + n + a with
/// ||d|| <= d_max and |n_i| <= n_max.
struct SystemModel {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
  Eigen::MatrixXd C;
  double d_max = 0.0;
  double n_max = 0.0;

  int n() const { return static_cast<int>(A.rows()); }
  int m() const { return static_cast<int>(B.cols()); }
  int p() const { return static_cast<int>(C.rows()); }

  /// Throws InputError when dimensions disagree or a bound is negative.
  void validate() const;
};

struct RobustnessConstants {
  int q = 0;
  int r = 0;
  double rho = 0.0;            ///< min sigma_min over selections of p-q blocks
  double eta = 0.0;            ///< max ||Phi_i (Phi_Lambda)^+|| over i outside Lambda
  double kappa_d = 0.0;        ///< estimate bound factor when no alarm
  double kappa_e = 0.0;        ///< per-block error bound factor when no alarm
  double eta_prime = 0.0;      ///< max-min-max over (Lambda, Lambda-bar)
  double theta = 0.0;          ///< v'_max / v_max
  double kappa_c = 0.0;        ///< decoding error bound factor
  double kappa_c_prime = 0.0;  ///< lower bound factor for uncertified estimates
};

struct AnalysisReport {
  int security_index = 0;
  int max_detectable_q = -1;   ///< -1 when the pair is not observable
  int max_correctable_q = -1;
  int redundancy_degree = -1;  ///< -1 when the pair is not observable
  std::map<int, RobustnessConstants> per_q_constants;  ///< keyed by q, computed on G
};

CodingMatrix observability_matrix(const SystemModel& model);

/// Every selection of p-q blocks has full column rank.
bool is_q_error_detectable(const CodingMatrix& phi, int q, double eps_rel = default_rank_eps());
/// Equivalent to 2q-error detectability; false when 2q > p.
bool is_q_error_correctable(const CodingMatrix& phi, int q, double eps_rel = default_rank_eps());

/// min over x != 0 of the number of nonzero blocks of phi*x, computed as
/// p - max{|Lambda| : rank(phi_Lambda) < n}.
int stacked_cospark(const CodingMatrix& phi, double eps_rel = default_rank_eps());

int security_index(const SystemModel& model, double eps_rel = default_rank_eps());

/// min over unit eigenvectors v of A of ||C v||_0. Only defined here for A
/// with distinct eigenvalues; throws UnsupportedInput otherwise.
/// support_tol < 0 selects 1e-9 * max(1, ||C||_2).
int security_index_eigenvector(const SystemModel& model, double support_tol = -1.0);

bool is_q_redundant_observable(const SystemModel& model, int q, double eps_rel = default_rank_eps());

/// Evaluates every constant by exhaustive subset enumeration.
/// Requires 0 <= q <= r <= 2q, p >= 2q+1 and 2q-error detectability
/// (PreconditionError "constants undefined: correctability violated").
RobustnessConstants robustness_constants(const CodingMatrix& phi, int q, int r,
                                         double eps_rel = default_rank_eps());

/// Security index, detectability/correctability margins and, for each
/// requested (q, r), the robustness constants of G.
AnalysisReport analyze_model(const SystemModel& model, const std::vector<std::pair<int, int>>& qr = {},
                             double eps_rel = default_rank_eps());

}  // namespace resilest
