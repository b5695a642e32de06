#include "resilest/coding_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <string>

#include "resilest/errors.hpp"

namespace resilest {

void SystemModel::validate() const {
  if (A.rows() == 0 || A.rows() != A.cols()) throw InputError("A must be square and nonempty");
  if (B.rows() != A.rows()) throw InputError("B must have " + std::to_string(A.rows()) + " rows");
  if (C.cols() != A.cols()) throw InputError("C must have " + std::to_string(A.cols()) + " columns");
  if (C.rows() == 0) throw InputError("C must have at least one row");
  if (!(d_max >= 0.0) || !(n_max >= 0.0)) throw InputError("d_max and n_max must be nonnegative");
  if (!A.allFinite() || !B.allFinite() || !C.allFinite()) throw InputError("model matrices must be finite");
}

CodingMatrix observability_matrix(const SystemModel& model) {
  model.validate();
  const int n = model.n();
  const int p = model.p();
  Eigen::MatrixXd g(static_cast<Eigen::Index>(n) * p, n);
  for (int i = 0; i < p; ++i) {
    Eigen::RowVectorXd row = model.C.row(i);
    for (int j = 0; j < n; ++j) {
      g.row(static_cast<Eigen::Index>(i) * n + j) = row;
      row = row * model.A;
    }
  }
  return CodingMatrix(std::move(g), n);
}

bool is_q_error_detectable(const CodingMatrix& phi, int q, double eps_rel) {
  const int p = phi.block_count();
  if (q < 0) throw InputError("q must be nonnegative");
  if (q > p) throw InputError("q = " + std::to_string(q) + " exceeds the block count " + std::to_string(p));
  const int n = phi.cols();
  bool ok = true;
  // Adding blocks never lowers rank, so selections of exactly p-q blocks suffice.
  for_each_combination(p, p - q, [&](const std::vector<int>& sel) {
    if (numerical_rank(select_compacted(phi, IndexSet::from_zero_based(p, sel)), eps_rel) < n) {
      ok = false;
      return false;
    }
    return true;
  });
  return ok;
}

bool is_q_error_correctable(const CodingMatrix& phi, int q, double eps_rel) {
  if (q < 0) throw InputError("q must be nonnegative");
  if (2 * q > phi.block_count()) return false;
  return is_q_error_detectable(phi, 2 * q, eps_rel);
}

int stacked_cospark(const CodingMatrix& phi, double eps_rel) {
  const int p = phi.block_count();
  const int n = phi.cols();
  // Largest rank-deficient selection, searched from the top; the empty
  // selection is always rank deficient for n >= 1.
  for (int size = p; size >= 1; --size) {
    bool deficient = false;
    for_each_combination(p, size, [&](const std::vector<int>& sel) {
      if (numerical_rank(select_compacted(phi, IndexSet::from_zero_based(p, sel)), eps_rel) < n) {
        deficient = true;
        return false;
      }
      return true;
    });
    if (deficient) return p - size;
  }
  return p;
}

int security_index(const SystemModel& model, double eps_rel) {
  return stacked_cospark(observability_matrix(model), eps_rel);
}

int security_index_eigenvector(const SystemModel& model, double support_tol) {
  model.validate();
  const int n = model.n();
  Eigen::EigenSolver<Eigen::MatrixXd> es(model.A, true);
  if (es.info() != Eigen::Success) throw UnsupportedInput("eigen decomposition of A failed");
  const Eigen::VectorXcd lambda = es.eigenvalues();
  const double scale = std::max(1.0, lambda.cwiseAbs().maxCoeff());
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (std::abs(lambda(i) - lambda(j)) <= 1e-8 * scale) {
        throw UnsupportedInput("A has repeated eigenvalues; use security_index (cospark route) instead");
      }
    }
  }
  if (support_tol < 0.0) support_tol = 1e-9 * std::max(1.0, spectral_norm(model.C));
  const Eigen::MatrixXcd cv = model.C.cast<std::complex<double>>() * es.eigenvectors();
  int best = model.p();
  for (int j = 0; j < n; ++j) {
    const double norm = es.eigenvectors().col(j).norm();
    int count = 0;
    for (int i = 0; i < model.p(); ++i) {
      if (std::abs(cv(i, j)) / norm > support_tol) ++count;
    }
    best = std::min(best, count);
  }
  return best;
}

bool is_q_redundant_observable(const SystemModel& model, int q, double eps_rel) {
  return is_q_error_detectable(observability_matrix(model), q, eps_rel);
}

namespace {

// rho_{p,q}: min sigma_min over selections of p-q blocks.
double min_sigma_over(const CodingMatrix& phi, int q) {
  const int p = phi.block_count();
  double rho = std::numeric_limits<double>::infinity();
  for_each_combination(p, p - q, [&](const std::vector<int>& sel) {
    rho = std::min(rho, sigma_min(select_compacted(phi, IndexSet::from_zero_based(p, sel))));
  });
  return rho;
}

}  // namespace

RobustnessConstants robustness_constants(const CodingMatrix& phi, int q, int r, double eps_rel) {
  const int p = phi.block_count();
  if (q < 0 || r < q || r > 2 * q) {
    throw InputError("need 0 <= q <= r <= 2q (got q=" + std::to_string(q) + ", r=" + std::to_string(r) + ")");
  }
  if (p < 2 * q + 1 || !is_q_error_detectable(phi, 2 * q, eps_rel)) {
    throw PreconditionError("constants undefined: correctability violated (coding matrix is not " +
                            std::to_string(q) + "-error correctable)");
  }

  RobustnessConstants c;
  c.q = q;
  c.r = r;
  const double sp = std::sqrt(static_cast<double>(p));

  c.rho = min_sigma_over(phi, q);

  // eta_{p,q}: empty when q = 0, giving 0.
  c.eta = 0.0;
  for_each_combination(p, p - q, [&](const std::vector<int>& sel) {
    const IndexSet keep = IndexSet::from_zero_based(p, sel);
    const Eigen::MatrixXd pinv = pseudo_inverse(select_compacted(phi, keep), eps_rel);
    for (int i = 1; i <= p; ++i) {
      if (keep.contains(i)) continue;
      c.eta = std::max(c.eta, spectral_norm(phi.block(i) * pinv));
    }
  });
  c.kappa_d = (sp + 1.0) * std::sqrt(static_cast<double>(p - q)) / c.rho;
  c.kappa_e = (c.eta * std::sqrt(static_cast<double>(p - q)) + 1.0) * (sp + 1.0);

  // eta'_{p,q,r} = max_{|L|=p-q} min_{Lbar in L, |Lbar|=p-r} max_{i in L\Lbar} ||Phi_i Phi_Lbar^+||,
  // with an empty inner max taken as 0.
  c.eta_prime = 0.0;
  for_each_combination(p, p - q, [&](const std::vector<int>& outer) {
    double inner_min = std::numeric_limits<double>::infinity();
    for_each_combination(p - q, p - r, [&](const std::vector<int>& pick) {
      std::vector<int> sub;
      sub.reserve(pick.size());
      for (int k : pick) sub.push_back(outer[static_cast<std::size_t>(k)]);
      const IndexSet bar = IndexSet::from_zero_based(p, sub);
      const Eigen::MatrixXd pinv = pseudo_inverse(select_compacted(phi, bar), eps_rel);
      double inner_max = 0.0;
      for (int i0 : outer) {
        if (bar.contains(i0 + 1)) continue;
        inner_max = std::max(inner_max, spectral_norm(phi.block(i0 + 1) * pinv));
      }
      inner_min = std::min(inner_min, inner_max);
    });
    c.eta_prime = std::max(c.eta_prime, inner_min);
  });

  const double spr = std::sqrt(static_cast<double>(p - r));
  c.theta = std::max(c.eta_prime * spr + 1.0, spr);
  const double rho2 = min_sigma_over(phi, 2 * q);
  c.kappa_c = (c.theta + 1.0) * std::sqrt(static_cast<double>(p - 2 * q)) / rho2;

  double max_block = 0.0;
  for (int i = 1; i <= p; ++i) max_block = std::max(max_block, spectral_norm(phi.block(i)));
  c.kappa_c_prime = (c.theta - 1.0) / max_block;
  return c;
}

AnalysisReport analyze_model(const SystemModel& model, const std::vector<std::pair<int, int>>& qr, double eps_rel) {
  const CodingMatrix g = observability_matrix(model);
  AnalysisReport rep;
  rep.security_index = stacked_cospark(g, eps_rel);
  rep.max_detectable_q = rep.security_index - 1;
  rep.max_correctable_q = rep.max_detectable_q < 0 ? -1 : rep.max_detectable_q / 2;
  // q-redundant observability coincides with q-error detectability of G.
  rep.redundancy_degree = rep.max_detectable_q;
  for (const auto& [q, r] : qr) rep.per_q_constants[q] = robustness_constants(g, q, r, eps_rel);
  return rep;
}

}  // namespace resilest
