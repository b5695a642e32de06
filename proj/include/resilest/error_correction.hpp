#pragma once

// Residual-based detection and finite-search l0 decoding of
// z = Phi x + e (+ v) with block-sparse e and block-bounded v.

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "resilest/coding_analysis.hpp"
#include "resilest/numeric.hpp"
#include "resilest/stacked.hpp"

namespace resilest {

struct DetectionResult {
  StackedVector residual;                    ///< z - Phi Phi^+ z
  bool attacked = false;
  Eigen::VectorXd estimate;                  ///< Phi^+ z
  std::vector<double> block_residual_norms;  ///< one entry per block
  double threshold = 0.0;                    ///< strict: attacked iff some norm > threshold
};

struct Candidate {
  IndexSet selection;        ///< blocks used for the least-squares solve
  Eigen::VectorXd estimate;  ///< (Phi_Lambda)^+ z_Lambda
  bool full_rank = true;     ///< false when Phi_Lambda is rank deficient (minimum-norm solve)
};

struct DecodeResult {
  Eigen::VectorXd estimate;
  IndexSet support_estimate;  ///< blocks whose residual exceeds the threshold at the estimate
  int objective = 0;          ///< number of such blocks
  bool certified = false;     ///< objective <= q
  double threshold = 0.0;     ///< v'_max (noisy) or the zero tolerance (noiseless)
  double error_bound = 0.0;   ///< kappa_c * v_max (0 for noiseless decoding)
  IndexSet selection;         ///< Lambda that produced the returned candidate
  std::uint64_t solves = 0;   ///< pseudoinverse applications performed
};

struct Certificate {
  bool certified = false;
  int violation_count = 0;
};

/// Default block-zero tolerance for float residuals: 1e-9 * (1 + ||z||_2).
double default_residual_tol(const StackedVector& z);

/// Noiseless residual test; attacked iff ||r||_2 > tol (tol < 0 selects the default).
DetectionResult residual_detect_noiseless(const CodingMatrix& phi, const StackedVector& z, double tol = -1.0,
                                          double eps_rel = default_rank_eps());

/// Noisy residual test against sqrt(p) * v_max (strict comparison).
DetectionResult residual_detect_noisy(const CodingMatrix& phi, const StackedVector& z, double v_max,
                                      double eps_rel = default_rank_eps());

/// One least-squares candidate per selection of p-r blocks, lexicographic order.
std::vector<Candidate> candidate_set(const CodingMatrix& phi, const StackedVector& z, int r,
                                     double eps_rel = default_rank_eps());

/// Blocks i with ||z_i - Phi_i x||_2 > threshold.
IndexSet violating_blocks(const CodingMatrix& phi, const StackedVector& z, const Eigen::VectorXd& x,
                          double threshold);

/// Minimises the violation count over candidate_set(phi, z, r); ties go to the
/// lexicographically smallest selection. No precondition checks.
DecodeResult decode_over_candidates(const CodingMatrix& phi, const StackedVector& z, int q, int r, double threshold,
                                    double eps_rel = default_rank_eps());

/// Exact recovery for z = Phi x + e, e q-sparse. tol < 0 selects default_residual_tol(z).
/// Throws PreconditionError when Phi is not q-error correctable.
DecodeResult decode_noiseless(const CodingMatrix& phi, const StackedVector& z, int q, std::optional<int> r = {},
                              double tol = -1.0, double eps_rel = default_rank_eps());

/// Bounded-noise decoding with threshold theta * v_max; any minimiser is within
/// kappa_c * v_max of the true x.
DecodeResult decode_noisy(const CodingMatrix& phi, const StackedVector& z, int q, std::optional<int> r,
                          double v_max, double eps_rel = default_rank_eps());

/// Violation count of a given estimate against theta * v_max.
Certificate certify_estimate(const CodingMatrix& phi, const StackedVector& z, const Eigen::VectorXd& x_hat, int q,
                             int r, double v_max, double eps_rel = default_rank_eps());

/// Recovers x(0) from n output samples per sensor (rows of `outputs`, one
/// column per sensor) after removing the response to the known inputs (rows of
/// `inputs`; may be empty for u = 0).
DecodeResult recover_initial_state(const SystemModel& model, const Eigen::MatrixXd& outputs,
                                   const Eigen::MatrixXd& inputs, int q, std::optional<int> r = {},
                                   double tol = -1.0, double eps_rel = default_rank_eps());

}  // namespace resilest
