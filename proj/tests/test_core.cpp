#include "aies/ensemble.hpp"
#include "aies/ensemble_io.hpp"
#include "aies/executor.hpp"
#include "aies/rng.hpp"
#include "aies/state.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <gtest/gtest.h>

#include <set>
#include <sstream>

using namespace aies;

namespace {

Ensemble random_ensemble(Eigen::Index d, std::size_t n, std::uint64_t seed) {
  return standard_normal_ensemble(RngPlan{seed}, d, n);
}

}  // namespace

TEST(SplitHalves, FourWalkers) {
  const Ensemble e(Eigen::MatrixXd::Zero(3, 4));
  const auto [g0, g1] = split_halves(e);
  EXPECT_EQ(g0, (IndexRange{0, 2}));
  EXPECT_EQ(g1, (IndexRange{2, 4}));
}

TEST(SplitHalves, SixtyFourWalkers) {
  const Ensemble e(Eigen::MatrixXd::Zero(2, 64));
  const auto [g0, g1] = split_halves(e);
  EXPECT_EQ(g0, (IndexRange{0, 32}));
  EXPECT_EQ(g1, (IndexRange{32, 64}));
  EXPECT_EQ(group_range(e, 0), g0);
  EXPECT_EQ(group_range(e, 1), g1);
}

TEST(Ensemble, RejectsOddOrTinyEnsembles) {
  EXPECT_THROW(Ensemble(Eigen::MatrixXd::Zero(2, 3)), std::invalid_argument);
  EXPECT_THROW(Ensemble(Eigen::MatrixXd::Zero(2, 2)), std::invalid_argument);
  EXPECT_THROW(Ensemble(Eigen::MatrixXd::Zero(0, 4)), std::invalid_argument);
  EXPECT_NO_THROW(Ensemble(Eigen::MatrixXd::Zero(1, 4)));
}

TEST(Ensemble, DegenerateEnsembleAllowed) {
  const Ensemble e(Eigen::MatrixXd::Ones(3, 6));
  EXPECT_EQ(e.size(), 6u);
  EXPECT_EQ(e.half_size(), 3u);
}

TEST(AffineMap, IdentityLeavesEnsembleUnchanged) {
  const Ensemble e = random_ensemble(4, 8, 1);
  const Ensemble y = apply_affine(e, AffineMap::identity(4));
  EXPECT_EQ(y.positions(), e.positions());
}

TEST(AffineMap, OneDimensionalHandArithmetic) {
  Eigen::MatrixXd x(1, 4);
  x << 1, 0, 0, 0;
  const AffineMap map(Eigen::MatrixXd::Constant(1, 1, 2.0), Eigen::VectorXd::Constant(1, 3.0));
  EXPECT_DOUBLE_EQ(apply_affine(Ensemble(x), map).walker(0)(0), 5.0);
}

TEST(AffineMap, RoundTripThroughInverse) {
  const Ensemble e = random_ensemble(6, 10, 2);
  Stream s = RngPlan{3}.stream(0, 0, DrawRole::noise);
  Eigen::MatrixXd a(6, 6);
  for (Eigen::Index k = 0; k < a.size(); ++k) a.data()[k] = s.normal();
  a += 3.0 * Eigen::MatrixXd::Identity(6, 6);
  Eigen::VectorXd b(6);
  for (Eigen::Index k = 0; k < 6; ++k) b(k) = s.normal();
  const AffineMap map(a, b);
  const Ensemble back = apply_affine(apply_affine(e, map), map.inverse());
  EXPECT_LE((back.positions() - e.positions()).norm() / e.positions().norm(), 1e-12);
}

TEST(AffineMap, RejectsSingularAndMismatched) {
  EXPECT_THROW(AffineMap(Eigen::MatrixXd::Zero(2, 2), Eigen::VectorXd::Zero(2)), std::invalid_argument);
  EXPECT_THROW(AffineMap(Eigen::MatrixXd::Identity(2, 3), Eigen::VectorXd::Zero(2)), std::invalid_argument);
  const Ensemble e = random_ensemble(3, 4, 1);
  EXPECT_THROW(apply_affine(e, AffineMap::identity(2)), std::invalid_argument);
}

TEST(Rng, SameArgumentsSameDraws) {
  const RngPlan plan{123};
  Stream a = derive_stream(plan, 7, 3, DrawRole::noise);
  Stream b = derive_stream(plan, 7, 3, DrawRole::noise);
  for (int k = 0; k < 100; ++k) EXPECT_EQ(a.next_u64(), b.next_u64());
}

TEST(Rng, NeighbouringStreamsDoNotCollide) {
  const RngPlan plan{5};
  std::set<std::uint64_t> first;
  for (std::uint64_t m = 0; m < 200; ++m)
    for (std::uint64_t i = 0; i < 50; ++i)
      for (DrawRole r : {DrawRole::partners, DrawRole::noise, DrawRole::accept, DrawRole::init})
        first.insert(plan.stream(m, i, r).next_u64());
  EXPECT_EQ(first.size(), 200u * 50u * 4u);
}

TEST(Rng, SeedsZeroAndOneAreEquidistributedAndUncorrelated) {
  constexpr int kBins = 100;
  constexpr int kDraws = 1000000;
  Stream a = RngPlan{0}.stream(0, 0, DrawRole::noise);
  Stream b = RngPlan{1}.stream(0, 0, DrawRole::noise);
  std::vector<double> ca(kBins), cb(kBins);
  double sab = 0, sa = 0, sb = 0, saa = 0, sbb = 0;
  for (int k = 0; k < kDraws; ++k) {
    const double u = a.uniform(), v = b.uniform();
    ca[static_cast<int>(u * kBins)] += 1;
    cb[static_cast<int>(v * kBins)] += 1;
    sa += u;
    sb += v;
    sab += u * v;
    saa += u * u;
    sbb += v * v;
  }
  const double expected = static_cast<double>(kDraws) / kBins;
  double chi_a = 0, chi_b = 0;
  for (int k = 0; k < kBins; ++k) {
    chi_a += (ca[k] - expected) * (ca[k] - expected) / expected;
    chi_b += (cb[k] - expected) * (cb[k] - expected) / expected;
  }
  const boost::math::chi_squared dist(kBins - 1);
  EXPECT_GT(boost::math::cdf(boost::math::complement(dist, chi_a)), 1e-3);
  EXPECT_GT(boost::math::cdf(boost::math::complement(dist, chi_b)), 1e-3);
  const double n = kDraws;
  const double corr = (sab / n - sa / n * sb / n) /
                      std::sqrt((saa / n - sa / n * sa / n) * (sbb / n - sb / n * sb / n));
  EXPECT_LT(std::abs(corr), 5.0 / std::sqrt(n));
}

TEST(Rng, UniformIsOpenAndBelowIsInRange) {
  Stream s = RngPlan{9}.stream(1, 2, DrawRole::accept);
  for (int k = 0; k < 100000; ++k) {
    const double u = s.uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
    ASSERT_LT(s.below(7), 7u);
  }
}

TEST(Rng, NormalMoments) {
  Stream s = RngPlan{11}.stream(0, 0, DrawRole::noise);
  double m1 = 0, m2 = 0;
  constexpr int n = 400000;
  for (int k = 0; k < n; ++k) {
    const double z = s.normal();
    m1 += z;
    m2 += z * z;
  }
  EXPECT_NEAR(m1 / n, 0.0, 5.0 / std::sqrt(n));
  EXPECT_NEAR(m2 / n, 1.0, 5.0 * std::sqrt(2.0 / n));
}

TEST(Partners, DistinctPairAndSubsetStayInRange) {
  Stream s = RngPlan{4}.stream(0, 0, DrawRole::partners);
  const IndexRange r{10, 14};
  for (int k = 0; k < 10000; ++k) {
    const auto [j, kk] = draw_distinct_pair(s, r);
    ASSERT_NE(j, kk);
    ASSERT_TRUE(r.contains(j) && r.contains(kk));
    const auto sub = draw_subset(s, r, 3);
    ASSERT_EQ(std::set<std::size_t>(sub.begin(), sub.end()).size(), 3u);
    for (auto i : sub) ASSERT_TRUE(r.contains(i));
  }
}

TEST(Accept, NonFiniteRejectsAndZeroAccepts) {
  Stream s = RngPlan{1}.stream(0, 0, DrawRole::accept);
  for (int k = 0; k < 1000; ++k) {
    EXPECT_FALSE(metropolis_accept(std::nan(""), s));
    EXPECT_FALSE(metropolis_accept(-INFINITY, s));
    EXPECT_TRUE(metropolis_accept(0.0, s));
  }
}

TEST(Executor, ThreadExecutorVisitsEveryIndexOnce) {
  std::vector<int> hits(1000, 0);
  ThreadExecutor(4)(IndexRange{0, 1000}, [&](std::size_t i) { hits[i] += 1; });
  for (int h : hits) EXPECT_EQ(h, 1);
}

TEST(Executor, ThreadExecutorPropagatesExceptions) {
  EXPECT_THROW(ThreadExecutor(3)(IndexRange{0, 30},
                                 [](std::size_t i) {
                                   if (i == 17) throw std::runtime_error("boom");
                                 }),
               std::runtime_error);
}

TEST(EnsembleIo, RoundTrip) {
  const Ensemble e = random_ensemble(5, 8, 77);
  std::stringstream ss;
  write_ensemble(ss, e, 77, 1234);
  EnsembleHeader h;
  const Ensemble back = read_ensemble(ss, &h);
  EXPECT_EQ(back.positions(), e.positions());
  EXPECT_EQ(h.n, 8u);
  EXPECT_EQ(h.d, 5u);
  EXPECT_EQ(h.seed, 77u);
  EXPECT_EQ(h.iteration, 1234u);
}

TEST(EnsembleIo, RowMajorLayout) {
  Eigen::MatrixXd x(2, 4);
  x << 1, 3, 5, 7, 2, 4, 6, 8;  // walker i = (2i+1, 2i+2)
  std::stringstream ss;
  write_ensemble(ss, Ensemble(x), 0, 0);
  std::string header;
  std::getline(ss, header);
  std::vector<double> raw(8);
  ss.read(reinterpret_cast<char*>(raw.data()), 8 * sizeof(double));
  for (int k = 0; k < 8; ++k) EXPECT_EQ(raw[k], k + 1.0);
}
