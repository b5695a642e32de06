#include "resilest/numeric.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>

namespace resilest {

namespace {

double eps_from_env() {
  const char* raw = std::getenv("RESILEST_EPS");
  if (raw == nullptr || *raw == '\0') return 1e-10;
  try {
    double v = std::stod(raw);
    if (v > 0.0 && v < 1.0) return v;
  } catch (const std::exception&) {
  }
  return 1e-10;
}

double rank_threshold(const Eigen::VectorXd& sv, Eigen::Index rows, Eigen::Index cols, double eps_rel) {
  if (sv.size() == 0) return 0.0;
  return static_cast<double>(std::max(rows, cols)) * sv(0) * eps_rel;
}

}  // namespace

double default_rank_eps() {
  static const double eps = eps_from_env();
  return eps;
}

int numerical_rank(const Eigen::MatrixXd& m, double eps_rel) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const Eigen::VectorXd& sv = svd.singularValues();
  if (sv(0) == 0.0) return 0;
  const double tol = rank_threshold(sv, m.rows(), m.cols(), eps_rel);
  return static_cast<int>((sv.array() > tol).count());
}

double sigma_min(const Eigen::MatrixXd& m) {
  if (m.rows() == 0 || m.cols() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  if (m.rows() < m.cols()) return 0.0;
  return svd.singularValues()(svd.singularValues().size() - 1);
}

Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& m, double eps_rel) {
  if (m.size() == 0) return Eigen::MatrixXd::Zero(m.cols(), m.rows());
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double tol = rank_threshold(sv, m.rows(), m.cols(), eps_rel);
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(sv.size());
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > tol && sv(i) > 0.0) inv(i) = 1.0 / sv(i);
  }
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

double spectral_norm(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  return svd.singularValues()(0);
}

double spectral_radius(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  return m.eigenvalues().cwiseAbs().maxCoeff();
}

std::uint64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
  return r;
}

}  // namespace resilest
