#include "resilest/error_correction.hpp"

#include <cmath>
#include <string>

#include "resilest/errors.hpp"

namespace resilest {

namespace {

void check_shapes(const CodingMatrix& phi, const StackedVector& z) {
  if (phi.block_len() != z.block_len() || phi.block_count() != z.block_count()) {
    throw InputError("coding matrix has " + std::to_string(phi.block_count()) + " blocks of " +
                     std::to_string(phi.block_len()) + " rows but the measurement has " +
                     std::to_string(z.block_count()) + " blocks of " + std::to_string(z.block_len()));
  }
}

int resolve_r(int q, std::optional<int> r) {
  const int rr = r.value_or(q);
  if (q < 0 || rr < q || rr > 2 * q) {
    throw InputError("need 0 <= q <= r <= 2q (got q=" + std::to_string(q) + ", r=" + std::to_string(rr) + ")");
  }
  return rr;
}

void require_correctable(const CodingMatrix& phi, int q, double eps_rel) {
  if (!is_q_error_correctable(phi, q, eps_rel)) {
    throw PreconditionError("coding matrix is not " + std::to_string(q) + "-error correctable (not " +
                            std::to_string(2 * q) + "-error detectable)");
  }
}

DetectionResult detect(const CodingMatrix& phi, const StackedVector& z, double eps_rel) {
  check_shapes(phi, z);
  if (numerical_rank(phi.entries(), eps_rel) < phi.cols()) {
    throw PreconditionError("coding matrix does not have full column rank");
  }
  DetectionResult res;
  res.estimate = pseudo_inverse(phi.entries(), eps_rel) * z.data();
  res.residual = StackedVector(z.data() - phi.entries() * res.estimate, z.block_len());
  res.block_residual_norms.reserve(static_cast<std::size_t>(z.block_count()));
  for (int i = 1; i <= z.block_count(); ++i) res.block_residual_norms.push_back(res.residual.block(i).norm());
  return res;
}

}  // namespace

double default_residual_tol(const StackedVector& z) { return 1e-9 * (1.0 + z.data().norm()); }

DetectionResult residual_detect_noiseless(const CodingMatrix& phi, const StackedVector& z, double tol,
                                          double eps_rel) {
  DetectionResult res = detect(phi, z, eps_rel);
  res.threshold = tol < 0.0 ? default_residual_tol(z) : tol;
  res.attacked = res.residual.data().norm() > res.threshold;
  return res;
}

DetectionResult residual_detect_noisy(const CodingMatrix& phi, const StackedVector& z, double v_max,
                                      double eps_rel) {
  if (!(v_max >= 0.0)) throw InputError("v_max must be nonnegative");
  DetectionResult res = detect(phi, z, eps_rel);
  res.threshold = std::sqrt(static_cast<double>(z.block_count())) * v_max;
  res.attacked = false;
  for (double norm : res.block_residual_norms) {
    if (norm > res.threshold) res.attacked = true;
  }
  return res;
}

std::vector<Candidate> candidate_set(const CodingMatrix& phi, const StackedVector& z, int r, double eps_rel) {
  check_shapes(phi, z);
  const int p = phi.block_count();
  if (r < 0 || r > p) throw InputError("r must lie in [0, p]");
  std::vector<Candidate> out;
  out.reserve(static_cast<std::size_t>(binomial(p, p - r)));
  for_each_combination(p, p - r, [&](const std::vector<int>& sel) {
    Candidate c;
    c.selection = IndexSet::from_zero_based(p, sel);
    const Eigen::MatrixXd sub = select_compacted(phi, c.selection);
    c.full_rank = numerical_rank(sub, eps_rel) == phi.cols();
    c.estimate = pseudo_inverse(sub, eps_rel) * select_compacted(z, c.selection);
    out.push_back(std::move(c));
  });
  return out;
}

IndexSet violating_blocks(const CodingMatrix& phi, const StackedVector& z, const Eigen::VectorXd& x,
                          double threshold) {
  check_shapes(phi, z);
  std::vector<int> idx;
  for (int i = 1; i <= phi.block_count(); ++i) {
    if ((z.block(i) - phi.block(i) * x).norm() > threshold) idx.push_back(i);
  }
  return IndexSet(phi.block_count(), std::move(idx));
}

DecodeResult decode_over_candidates(const CodingMatrix& phi, const StackedVector& z, int q, int r, double threshold,
                                    double eps_rel) {
  const std::vector<Candidate> cands = candidate_set(phi, z, r, eps_rel);
  DecodeResult best;
  best.objective = -1;
  for (const Candidate& c : cands) {
    IndexSet viol = violating_blocks(phi, z, c.estimate, threshold);
    if (best.objective < 0 || viol.size() < best.objective) {
      best.estimate = c.estimate;
      best.support_estimate = std::move(viol);
      best.objective = best.support_estimate.size();
      best.selection = c.selection;
    }
  }
  best.threshold = threshold;
  best.certified = best.objective <= q;
  best.solves = cands.size();
  return best;
}

DecodeResult decode_noiseless(const CodingMatrix& phi, const StackedVector& z, int q, std::optional<int> r,
                              double tol, double eps_rel) {
  check_shapes(phi, z);
  const int rr = resolve_r(q, r);
  require_correctable(phi, q, eps_rel);
  return decode_over_candidates(phi, z, q, rr, tol < 0.0 ? default_residual_tol(z) : tol, eps_rel);
}

DecodeResult decode_noisy(const CodingMatrix& phi, const StackedVector& z, int q, std::optional<int> r, double v_max,
                          double eps_rel) {
  check_shapes(phi, z);
  if (!(v_max >= 0.0)) throw InputError("v_max must be nonnegative");
  const int rr = resolve_r(q, r);
  require_correctable(phi, q, eps_rel);
  const RobustnessConstants k = robustness_constants(phi, q, rr, eps_rel);
  DecodeResult res = decode_over_candidates(phi, z, q, rr, k.theta * v_max, eps_rel);
  res.error_bound = k.kappa_c * v_max;
  return res;
}

Certificate certify_estimate(const CodingMatrix& phi, const StackedVector& z, const Eigen::VectorXd& x_hat, int q,
                             int r, double v_max, double eps_rel) {
  const RobustnessConstants k = robustness_constants(phi, q, r, eps_rel);
  Certificate c;
  c.violation_count = violating_blocks(phi, z, x_hat, k.theta * v_max).size();
  c.certified = c.violation_count <= q;
  return c;
}

DecodeResult recover_initial_state(const SystemModel& model, const Eigen::MatrixXd& outputs,
                                   const Eigen::MatrixXd& inputs, int q, std::optional<int> r, double tol,
                                   double eps_rel) {
  model.validate();
  const int n = model.n();
  const int p = model.p();
  if (outputs.cols() != p) throw InputError("outputs must have one column per sensor");
  if (outputs.rows() < n) {
    throw InputError("need at least n = " + std::to_string(n) + " output samples, got " +
                     std::to_string(outputs.rows()));
  }
  const bool has_inputs = inputs.size() > 0;
  if (has_inputs && (inputs.cols() != model.m() || inputs.rows() < n - 1)) {
    throw InputError("inputs must have m columns and at least n-1 rows");
  }

  // Forced response y_forced(j) = sum_{l<j} C A^{j-1-l} B u(l).
  Eigen::MatrixXd forced = Eigen::MatrixXd::Zero(n, p);
  if (has_inputs) {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    for (int j = 0; j < n; ++j) {
      forced.row(j) = (model.C * x).transpose();
      if (j + 1 < n) x = model.A * x + model.B * inputs.row(j).transpose();
    }
  }

  Eigen::VectorXd stacked(static_cast<Eigen::Index>(n) * p);
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < n; ++j) stacked(static_cast<Eigen::Index>(i) * n + j) = outputs(j, i) - forced(j, i);
  }
  return decode_noiseless(observability_matrix(model), StackedVector(stacked, n), q, r, tol, eps_rel);
}

}  // namespace resilest
