#include "resilest/stacked.hpp"

#include <algorithm>
#include <sstream>

#include "resilest/errors.hpp"

namespace resilest {

namespace {

void require_same_ambient(int a, int b) {
  if (a != b) {
    throw InputError("index set over [1.." + std::to_string(a) + "] used with " + std::to_string(b) + " blocks");
  }
}

}  // namespace

IndexSet::IndexSet(int p) : p_(p) {
  if (p < 0) throw InputError("negative sensor count");
}

IndexSet::IndexSet(int p, std::vector<int> one_based) : p_(p), indices_(std::move(one_based)) {
  if (p < 0) throw InputError("negative sensor count");
  std::sort(indices_.begin(), indices_.end());
  for (std::size_t k = 0; k < indices_.size(); ++k) {
    if (indices_[k] < 1 || indices_[k] > p) {
      throw InputError("index " + std::to_string(indices_[k]) + " outside [1.." + std::to_string(p) + "]");
    }
    if (k > 0 && indices_[k] == indices_[k - 1]) {
      throw InputError("duplicate index " + std::to_string(indices_[k]));
    }
  }
}

IndexSet::IndexSet(int p, std::initializer_list<int> one_based) : IndexSet(p, std::vector<int>(one_based)) {}

IndexSet IndexSet::full(int p) {
  IndexSet s(p);
  s.indices_.resize(static_cast<std::size_t>(p));
  for (int i = 0; i < p; ++i) s.indices_[static_cast<std::size_t>(i)] = i + 1;
  return s;
}

IndexSet IndexSet::from_zero_based(int p, const std::vector<int>& zero_based) {
  std::vector<int> v;
  v.reserve(zero_based.size());
  for (int i : zero_based) v.push_back(i + 1);
  return IndexSet(p, std::move(v));
}

IndexSet IndexSet::from_mask(int p, std::uint64_t mask) {
  IndexSet s(p);
  for (int i = 1; i <= p && i <= 64; ++i) {
    if (mask & (std::uint64_t{1} << (i - 1))) s.indices_.push_back(i);
  }
  return s;
}

bool IndexSet::contains(int i) const { return std::binary_search(indices_.begin(), indices_.end(), i); }

std::vector<int> IndexSet::zero_based() const {
  std::vector<int> v;
  v.reserve(indices_.size());
  for (int i : indices_) v.push_back(i - 1);
  return v;
}

std::uint64_t IndexSet::mask() const {
  std::uint64_t m = 0;
  for (int i : indices_) {
    if (i <= 64) m |= std::uint64_t{1} << (i - 1);
  }
  return m;
}

IndexSet IndexSet::complement() const {
  IndexSet s(p_);
  for (int i = 1; i <= p_; ++i) {
    if (!contains(i)) s.indices_.push_back(i);
  }
  return s;
}

IndexSet IndexSet::unite(const IndexSet& other) const {
  require_same_ambient(p_, other.p_);
  IndexSet s(p_);
  std::set_union(indices_.begin(), indices_.end(), other.indices_.begin(), other.indices_.end(),
                 std::back_inserter(s.indices_));
  return s;
}

IndexSet IndexSet::intersect(const IndexSet& other) const {
  require_same_ambient(p_, other.p_);
  IndexSet s(p_);
  std::set_intersection(indices_.begin(), indices_.end(), other.indices_.begin(), other.indices_.end(),
                        std::back_inserter(s.indices_));
  return s;
}

bool IndexSet::is_subset_of(const IndexSet& other) const {
  return std::includes(other.indices_.begin(), other.indices_.end(), indices_.begin(), indices_.end());
}

std::string IndexSet::to_string() const {
  std::ostringstream os;
  os << '{';
  for (std::size_t k = 0; k < indices_.size(); ++k) {
    if (k) os << ',';
    os << indices_[k];
  }
  os << '}';
  return os.str();
}

StackedVector::StackedVector(Eigen::VectorXd data, int block_len) : data_(std::move(data)), n_(block_len) {
  if (block_len < 1) throw InputError("block length must be positive");
  if (data_.size() % block_len != 0) {
    throw InputError("vector length " + std::to_string(data_.size()) + " is not a multiple of block length " +
                     std::to_string(block_len));
  }
  p_ = static_cast<int>(data_.size() / block_len);
}

StackedVector StackedVector::zeros(int block_len, int block_count) {
  return StackedVector(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(block_len) * block_count), block_len);
}

Eigen::VectorBlock<const Eigen::VectorXd> StackedVector::block(int i) const {
  if (i < 1 || i > p_) throw InputError("block index out of range");
  return data_.segment(static_cast<Eigen::Index>(i - 1) * n_, n_);
}

Eigen::VectorBlock<Eigen::VectorXd> StackedVector::block(int i) {
  if (i < 1 || i > p_) throw InputError("block index out of range");
  return data_.segment(static_cast<Eigen::Index>(i - 1) * n_, n_);
}

CodingMatrix::CodingMatrix(Eigen::MatrixXd entries) : CodingMatrix(entries, static_cast<int>(entries.cols())) {}

CodingMatrix::CodingMatrix(Eigen::MatrixXd entries, int block_len) : m_(std::move(entries)), n_(block_len) {
  if (block_len < 1) throw InputError("block length must be positive");
  if (m_.rows() % block_len != 0) {
    throw InputError("row count " + std::to_string(m_.rows()) + " is not a multiple of block length " +
                     std::to_string(block_len));
  }
  p_ = static_cast<int>(m_.rows() / block_len);
}

Eigen::Block<const Eigen::MatrixXd> CodingMatrix::block(int i) const {
  if (i < 1 || i > p_) throw InputError("block index out of range");
  return m_.middleRows(static_cast<Eigen::Index>(i - 1) * n_, n_);
}

Eigen::Block<Eigen::MatrixXd> CodingMatrix::block(int i) {
  if (i < 1 || i > p_) throw InputError("block index out of range");
  return m_.middleRows(static_cast<Eigen::Index>(i - 1) * n_, n_);
}

IndexSet stacked_support(const StackedVector& z, double tol) {
  std::vector<int> idx;
  for (int i = 1; i <= z.block_count(); ++i) {
    if (z.block(i).norm() > tol) idx.push_back(i);
  }
  return IndexSet(z.block_count(), std::move(idx));
}

int stacked_l0(const StackedVector& z, double tol) { return stacked_support(z, tol).size(); }

IndexSet expand_index_set(const IndexSet& set, int n) {
  if (n < 1) throw InputError("block length must be positive");
  std::vector<int> rows;
  rows.reserve(static_cast<std::size_t>(set.size() * n));
  for (int i : set) {
    for (int j = 1; j <= n; ++j) rows.push_back(n * (i - 1) + j);
  }
  return IndexSet(n * set.ambient(), std::move(rows));
}

StackedVector select_zeroed(const StackedVector& z, const IndexSet& keep) {
  require_same_ambient(keep.ambient(), z.block_count());
  StackedVector out = z;
  for (int i = 1; i <= z.block_count(); ++i) {
    if (!keep.contains(i)) out.block(i).setZero();
  }
  return out;
}

CodingMatrix select_zeroed(const CodingMatrix& m, const IndexSet& keep) {
  require_same_ambient(keep.ambient(), m.block_count());
  CodingMatrix out = m;
  for (int i = 1; i <= m.block_count(); ++i) {
    if (!keep.contains(i)) out.block(i).setZero();
  }
  return out;
}

Eigen::VectorXd select_compacted(const StackedVector& z, const IndexSet& keep) {
  require_same_ambient(keep.ambient(), z.block_count());
  const int n = z.block_len();
  Eigen::VectorXd out(static_cast<Eigen::Index>(keep.size()) * n);
  Eigen::Index row = 0;
  for (int i : keep) {
    out.segment(row, n) = z.block(i);
    row += n;
  }
  return out;
}

Eigen::MatrixXd select_compacted(const CodingMatrix& m, const IndexSet& keep) {
  require_same_ambient(keep.ambient(), m.block_count());
  const int n = m.block_len();
  Eigen::MatrixXd out(static_cast<Eigen::Index>(keep.size()) * n, m.cols());
  Eigen::Index row = 0;
  for (int i : keep) {
    out.middleRows(row, n) = m.block(i);
    row += n;
  }
  return out;
}

}  // namespace resilest
