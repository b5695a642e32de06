#pragma once

#include <cstdint>
#include <type_traits>
#include <vector>

#include <Eigen/Dense>

namespace resilest {

/// Relative rank tolerance used when none is passed explicitly. Reads
/// RESILEST_EPS from the environment on first use, 1e-10 otherwise.
double default_rank_eps();

/// Numerical rank: number of singular values above
/// max(rows, cols) * sigma_max * eps_rel.
int numerical_rank(const Eigen::MatrixXd& m, double eps_rel = default_rank_eps());

/// Smallest singular value of a matrix with at least as many rows as columns
/// (0 for an empty selection).
double sigma_min(const Eigen::MatrixXd& m);

/// Moore-Penrose pseudoinverse via SVD; singular values at or below the rank
/// threshold are treated as zero.
Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& m, double eps_rel = default_rank_eps());

double spectral_norm(const Eigen::MatrixXd& m);
double spectral_radius(const Eigen::MatrixXd& m);

/// Binomial coefficient C(n, k) (0 when k is out of range).
std::uint64_t binomial(int n, int k);

/// Visits every k-subset of {0, .., n-1} in lexicographic order. The visitor
/// receives the sorted zero-based indices and may return false to stop early.
template <typename Visitor>
void for_each_combination(int n, int k, Visitor&& visit) {
  if (k < 0 || k > n) return;
  std::vector<int> idx(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) idx[static_cast<std::size_t>(i)] = i;
  while (true) {
    if constexpr (std::is_same_v<decltype(visit(idx)), bool>) {
      if (!visit(static_cast<const std::vector<int>&>(idx))) return;
    } else {
      visit(static_cast<const std::vector<int>&>(idx));
    }
    int i = k - 1;
    while (i >= 0 && idx[static_cast<std::size_t>(i)] == n - k + i) --i;
    if (i < 0) return;
    ++idx[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < k; ++j) idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
  }
}

}  // namespace resilest
