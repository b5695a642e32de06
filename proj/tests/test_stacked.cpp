#include <gtest/gtest.h>

#include "resilest/errors.hpp"
#include "resilest/numeric.hpp"
#include "resilest/stacked.hpp"

using namespace resilest;

namespace {

StackedVector sv(std::initializer_list<double> v, int n) {
  Eigen::VectorXd d(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) d(i++) = x;
  return StackedVector(d, n);
}

}  // namespace

TEST(IndexSet, SortsAndValidates) {
  IndexSet s(5, {4, 1, 3});
  EXPECT_EQ(s.indices(), (std::vector<int>{1, 3, 4}));
  EXPECT_EQ(s.to_string(), "{1,3,4}");
  EXPECT_THROW(IndexSet(3, {0}), InputError);
  EXPECT_THROW(IndexSet(3, {4}), InputError);
  EXPECT_THROW(IndexSet(3, {2, 2}), InputError);
  EXPECT_EQ(IndexSet(3).to_string(), "{}");
}

TEST(IndexSet, SetAlgebra) {
  const IndexSet a(5, {1, 2, 5});
  const IndexSet b(5, {2, 3});
  EXPECT_EQ(a.complement(), IndexSet(5, {3, 4}));
  EXPECT_EQ(a.complement().complement(), a);
  EXPECT_EQ(a.unite(b), IndexSet(5, {1, 2, 3, 5}));
  EXPECT_EQ(a.intersect(b), IndexSet(5, {2}));
  EXPECT_TRUE(IndexSet(5, {2}).is_subset_of(a));
  EXPECT_FALSE(b.is_subset_of(a));
  EXPECT_EQ(IndexSet::from_mask(5, a.mask()), a);
  EXPECT_EQ(a.mask(), 0b10011u);
  EXPECT_EQ(IndexSet::from_zero_based(5, {0, 4}), IndexSet(5, {1, 5}));
  EXPECT_THROW(a.unite(IndexSet(4, {1})), InputError);
}

TEST(StackedSupport, Examples) {
  EXPECT_EQ(stacked_support(sv({0, 0, 1, 0, 2, 0}, 2)), IndexSet(3, {2, 3}));
  EXPECT_TRUE(stacked_support(StackedVector::zeros(2, 4)).empty());
  EXPECT_EQ(stacked_support(sv({5, 5, 12}, 1)), IndexSet::full(3));
  EXPECT_EQ(stacked_l0(sv({0, 0, 1, 0, 2, 0}, 2)), 2);
  EXPECT_EQ(stacked_l0(StackedVector::zeros(3, 2)), 0);
  EXPECT_EQ(stacked_l0(sv({5, 5, 12}, 1)), 3);
  EXPECT_EQ(stacked_l0(sv({1e-12, 1, 0}, 1), 1e-9), 1);
}

TEST(StackedVector, BlocksAreContiguous) {
  const StackedVector z = sv({1, 2, 3, 4, 5, 6}, 2);
  EXPECT_EQ(z.block_count(), 3);
  EXPECT_DOUBLE_EQ(z.block(2)(0), 3);
  EXPECT_DOUBLE_EQ(z.block(3)(1), 6);
  EXPECT_THROW(StackedVector(Eigen::VectorXd::Zero(5), 2), InputError);
}

TEST(ExpandIndexSet, Examples) {
  EXPECT_EQ(expand_index_set(IndexSet(3, {1, 3}), 2), IndexSet(6, {1, 2, 5, 6}));
  EXPECT_TRUE(expand_index_set(IndexSet(3), 2).empty());
  EXPECT_EQ(expand_index_set(IndexSet(2, {2}), 3), IndexSet(6, {4, 5, 6}));
}

TEST(Selection, ZeroedAndCompacted) {
  const StackedVector z = sv({5, 5, 12}, 1);
  EXPECT_EQ(select_zeroed(z, IndexSet(3, {1, 2})).data(), Eigen::Vector3d(5, 5, 0));
  EXPECT_EQ(select_zeroed(z, IndexSet::full(3)).data(), z.data());
  EXPECT_EQ(select_compacted(z, IndexSet(3, {1, 3})), Eigen::Vector2d(5, 12));

  const CodingMatrix ones(Eigen::MatrixXd::Ones(3, 1));
  EXPECT_EQ(select_zeroed(ones, IndexSet(3, {3})).entries(), Eigen::Vector3d(0, 0, 1));
  const CodingMatrix m(Eigen::Vector3d(1, 2, 3));
  EXPECT_EQ(select_compacted(m, IndexSet(3, {2, 3})), Eigen::Vector2d(2, 3));
  EXPECT_THROW(select_compacted(m, IndexSet(4, {1})), InputError);
}

TEST(Selection, NestedZeroingEqualsDirect) {
  Eigen::MatrixXd e = Eigen::MatrixXd::Random(8, 2);
  const CodingMatrix m(e, 2);
  const IndexSet outer(4, {1, 2, 4});
  const IndexSet inner(4, {2, 4});
  EXPECT_EQ(select_zeroed(select_zeroed(m, outer), inner).entries(), select_zeroed(m, inner).entries());
}

TEST(Combinations, LexicographicOrderAndCount) {
  std::vector<std::vector<int>> seen;
  for_each_combination(4, 2, [&](const std::vector<int>& c) { seen.push_back(c); });
  const std::vector<std::vector<int>> want{{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};
  EXPECT_EQ(seen, want);
  int count = 0;
  for_each_combination(6, 3, [&](const std::vector<int>&) { ++count; });
  EXPECT_EQ(static_cast<std::uint64_t>(count), binomial(6, 3));
  count = 0;
  for_each_combination(3, 0, [&](const std::vector<int>& c) { EXPECT_TRUE(c.empty()); ++count; });
  EXPECT_EQ(count, 1);
}

TEST(Numeric, RankAndPseudoInverse) {
  Eigen::MatrixXd m(3, 2);
  m << 1, 2, 2, 4, 3, 6;
  EXPECT_EQ(numerical_rank(m), 1);
  EXPECT_EQ(numerical_rank(Eigen::MatrixXd::Identity(3, 3)), 3);
  const Eigen::MatrixXd pinv = pseudo_inverse(m);
  EXPECT_TRUE((m * pinv * m).isApprox(m, 1e-12));
  EXPECT_TRUE((pinv * m * pinv).isApprox(pinv, 1e-12));
  EXPECT_NEAR(sigma_min(Eigen::MatrixXd::Ones(2, 1)), std::sqrt(2.0), 1e-15);
}
