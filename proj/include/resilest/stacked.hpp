#pragma once

// Index-set and n-stacked vector algebra. Sensor indices are 1-based at the
// API boundary and converted to 0-based offsets only inside storage access.

#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace resilest {

/// Sorted set of distinct sensor indices drawn from [1..p].
class IndexSet {
 public:
  IndexSet() = default;
  /// Empty set over [1..p].
  explicit IndexSet(int p);
  /// Throws InputError on out-of-range or duplicate indices; order is free.
  IndexSet(int p, std::vector<int> one_based);
  IndexSet(int p, std::initializer_list<int> one_based);

  static IndexSet full(int p);
  static IndexSet from_zero_based(int p, const std::vector<int>& zero_based);
  /// Bit i-1 set for every member i.
  static IndexSet from_mask(int p, std::uint64_t mask);

  int ambient() const { return p_; }
  int size() const { return static_cast<int>(indices_.size()); }
  bool empty() const { return indices_.empty(); }
  bool contains(int i) const;
  const std::vector<int>& indices() const { return indices_; }
  std::vector<int> zero_based() const;
  std::uint64_t mask() const;

  IndexSet complement() const;
  IndexSet unite(const IndexSet& other) const;
  IndexSet intersect(const IndexSet& other) const;
  bool is_subset_of(const IndexSet& other) const;

  /// "{1,3}" style rendering; "{}" for the empty set.
  std::string to_string() const;

  friend bool operator==(const IndexSet&, const IndexSet&) = default;
  auto begin() const { return indices_.begin(); }
  auto end() const { return indices_.end(); }

 private:
  int p_ = 0;
  std::vector<int> indices_;
};

/// Real vector of length n*p viewed as p blocks of length n.
class StackedVector {
 public:
  StackedVector() = default;
  StackedVector(Eigen::VectorXd data, int block_len);
  static StackedVector zeros(int block_len, int block_count);

  int block_len() const { return n_; }
  int block_count() const { return p_; }
  const Eigen::VectorXd& data() const { return data_; }
  Eigen::VectorXd& data() { return data_; }

  /// Block i (1-based).
  Eigen::VectorBlock<const Eigen::VectorXd> block(int i) const;
  Eigen::VectorBlock<Eigen::VectorXd> block(int i);

 private:
  Eigen::VectorXd data_;
  int n_ = 0;
  int p_ = 0;
};

/// (n*p) x n matrix with p row blocks of n rows each (block i = rows of sensor i).
class CodingMatrix {
 public:
  CodingMatrix() = default;
  /// block_len defaults to the column count.
  explicit CodingMatrix(Eigen::MatrixXd entries);
  CodingMatrix(Eigen::MatrixXd entries, int block_len);

  int block_len() const { return n_; }
  int block_count() const { return p_; }
  int cols() const { return static_cast<int>(m_.cols()); }
  const Eigen::MatrixXd& entries() const { return m_; }

  Eigen::Block<const Eigen::MatrixXd> block(int i) const;
  Eigen::Block<Eigen::MatrixXd> block(int i);

 private:
  Eigen::MatrixXd m_;
  int n_ = 0;
  int p_ = 0;
};

/// Indices of blocks whose 2-norm exceeds tol (exact zero test by default).
IndexSet stacked_support(const StackedVector& z, double tol = 0.0);
int stacked_l0(const StackedVector& z, double tol = 0.0);

/// Union of the row ranges of the blocks in `set`, as a set over [1..n*p].
IndexSet expand_index_set(const IndexSet& set, int n);

/// Zero every block outside `keep`; shape unchanged.
StackedVector select_zeroed(const StackedVector& z, const IndexSet& keep);
CodingMatrix select_zeroed(const CodingMatrix& m, const IndexSet& keep);

/// Drop every block outside `keep`, preserving ascending block order.
Eigen::VectorXd select_compacted(const StackedVector& z, const IndexSet& keep);
Eigen::MatrixXd select_compacted(const CodingMatrix& m, const IndexSet& keep);

}  // namespace resilest
