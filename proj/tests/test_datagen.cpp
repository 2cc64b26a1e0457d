#include <gtest/gtest.h>

#include <cstring>

#include "ics_psd/datagen.hpp"
#include "support.hpp"

using namespace ics_psd;
using testsupport::max_abs;

namespace {

Index data_rank(const DataMatrix& x) {
  const Vector mean = x.colwise().mean().transpose();
  const ThinSvd s = thin_svd(x.rowwise() - mean.transpose());
  return estimate_rank(s.singular_values, x.rows(), x.cols()).rank;
}

}  // namespace

TEST(GenOcModel, Structure) {
  const LabeledSample s = gen_oc_model(1);
  EXPECT_EQ(s.data.rows(), 1000);
  EXPECT_EQ(s.data.cols(), 4);
  EXPECT_EQ(s.count(1), 20);
  EXPECT_EQ(s.count(0), 980);
  EXPECT_EQ(s.data.col(3).cwiseAbs().maxCoeff(), 0.0);
  for (Index i = 0; i < 1000; ++i) {
    if (s.labels[static_cast<std::size_t>(i)] == 0) {
      ASSERT_EQ(s.data(i, 2), 0.0);
      ASSERT_EQ(s.data(i, 3), 0.0);
    }
  }
  EXPECT_EQ(data_rank(s.data), 3);
}

TEST(GenOcModel, Preconditions) {
  EXPECT_THROW(gen_oc_model(10, 5, Matrix::Identity(2, 2), Matrix::Identity(2, 2), 1), DomainError);
  Matrix bad = Matrix::Identity(2, 2);
  bad(1, 1) = -1.0;
  EXPECT_THROW(gen_oc_model(10, 2, bad, Matrix::Identity(2, 2), 1), DomainError);
  EXPECT_THROW(gen_oc_model(10, 2, Matrix::Zero(2, 2), Matrix::Identity(2, 2), 1), DomainError);
}

TEST(ToeplitzMatrix, PrintedFourByFour) {
  const Matrix a = toeplitz_matrix(4);
  EXPECT_EQ(a(0, 0), 1.0);
  EXPECT_EQ(a(0, 1), 0.75);
  EXPECT_EQ(a(0, 2), 0.5);
  EXPECT_EQ(a(0, 3), 0.25);
  EXPECT_EQ(a(3, 0), 0.25);
  EXPECT_EQ(a, a.transpose());
  EXPECT_GT(std::abs(a.determinant()), 1e-3);
  EXPECT_THROW(toeplitz_matrix(0), DomainError);
}

TEST(GenMixtureCollinear, Construction) {
  const LabeledSample s = gen_mixture_collinear(1);
  EXPECT_EQ(s.data.rows(), 1000);
  EXPECT_EQ(s.data.cols(), 5);
  EXPECT_EQ(s.count(0), 500);
  EXPECT_EQ(s.count(1), 500);
  for (Index i = 0; i < 1000; ++i) {
    ASSERT_EQ(s.data(i, 3), s.data(i, 1) - 3.0 * s.data(i, 2));
    ASSERT_EQ(s.data(i, 4), s.data(i, 2) + 5.0 * s.data(i, 3));
  }
  EXPECT_EQ(data_rank(s.data), 3);
  double m0 = 0.0;
  double m1 = 0.0;
  for (Index i = 0; i < 1000; ++i) (s.labels[static_cast<std::size_t>(i)] == 0 ? m0 : m1) += s.data(i, 0) / 500.0;
  EXPECT_NEAR(m1 - m0, 10.0, 0.5);
  EXPECT_THROW(gen_mixture_collinear(100, 2, 10, 0.5, 1), DomainError);
  EXPECT_THROW(gen_mixture_collinear(100, 3, 10, 1.5, 1), DomainError);
}

TEST(GenProjectedMeanshift, RankAndProjections) {
  const LabeledSample s = gen_projected_meanshift(1);
  EXPECT_EQ(s.data.rows(), 100);
  EXPECT_EQ(s.data.cols(), 5);
  EXPECT_EQ(s.count(1), 4);
  EXPECT_EQ(data_rank(s.data), 4);
  const Vector proj = s.data * s.design.complement;
  for (Index i = 0; i < 100; ++i) {
    if (s.labels[static_cast<std::size_t>(i)] == 1) {
      EXPECT_NEAR(proj(i), 3.5 * std::sqrt(3.0), 1e-10);
    } else {
      EXPECT_LT(std::abs(proj(i)), 1e-10);
    }
  }
  EXPECT_LT(max_abs(s.design.basis.transpose() * s.design.complement), 1e-14);
}

TEST(GenProjectedMeanshift, NoOutliersGivesRankR) {
  Vector d(3);
  d << 1000, 400, 200;
  const LabeledSample s = gen_projected_meanshift(100, 5, 3, d, 0, 3.5, 2);
  EXPECT_EQ(data_rank(s.data), 3);
  EXPECT_THROW(gen_projected_meanshift(100, 3, 3, d, 4, 3.5, 2), DomainError);
  EXPECT_THROW(gen_projected_meanshift(100, 5, 2, d, 4, 3.5, 2), ShapeError);
}

TEST(GenHdlss, Dimensions) {
  const LabeledSample s = gen_hdlss(1);
  EXPECT_EQ(s.data.rows(), 50);
  EXPECT_EQ(s.data.cols(), 100);
  EXPECT_EQ(data_rank(s.data), 4);
  Matrix clean(46, 100);
  Index k = 0;
  for (Index i = 0; i < 50; ++i) {
    if (s.labels[static_cast<std::size_t>(i)] == 0) clean.row(k++) = s.data.row(i);
  }
  EXPECT_EQ(k, 46);
  // Clean rows lie in the 3-dimensional bulk subspace.
  EXPECT_LT(max_abs(clean - clean * s.design.basis * s.design.basis.transpose()), 1e-10);
}

TEST(Generators, Deterministic) {
  const LabeledSample a = gen_oc_model(5);
  const LabeledSample b = gen_oc_model(5);
  EXPECT_EQ(std::memcmp(a.data.data(), b.data.data(), sizeof(double) * a.data.size()), 0);
  const LabeledSample c = gen_hdlss(5);
  const LabeledSample d = gen_hdlss(5);
  EXPECT_EQ(std::memcmp(c.data.data(), d.data.data(), sizeof(double) * c.data.size()), 0);
  EXPECT_NE(max_abs(gen_oc_model(6).data - a.data), 0.0);
}

TEST(CounterRng, UniformAndNormalMoments) {
  CounterRng rng(42, 3);
  double sum = 0.0;
  double sq = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    sum += z;
    sq += z * z;
  }
  EXPECT_NEAR(sum / n, 0.0, 0.01);
  EXPECT_NEAR(sq / n, 1.0, 0.01);
  CounterRng u(1);
  for (int i = 0; i < 1000; ++i) {
    const double v = u.uniform();
    ASSERT_GT(v, 0.0);
    ASSERT_LT(v, 1.0);
  }
  const auto perm = CounterRng(3).partial_permutation(10, 10);
  std::vector<Index> sorted(perm.begin(), perm.end());
  std::sort(sorted.begin(), sorted.end());
  EXPECT_EQ(sorted, testsupport::range_indices(0, 10));
}
