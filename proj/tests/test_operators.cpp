#include <gtest/gtest.h>

#include <random>

#include "gibbs_ground/operators.hpp"
#include "support/oracles.hpp"
#include "support/random_models.hpp"

namespace gg = gibbs_ground;
using gg::Axis;
using gg::cplx;
using gg::SiteSet;
using gg::SpinConfiguration;

namespace {

Eigen::Matrix2cd oracle_pauli(Axis a) {
  switch (a) {
    case Axis::S1: return oracle::sx();
    case Axis::S2: return oracle::sy();
    default: return oracle::sz();
  }
}

cplx minus_i_power(std::size_t k) {
  cplx r{1.0, 0.0};
  for (std::size_t j = 0; j < k; ++j) r *= cplx{0.0, -1.0};
  return r;
}

}  // namespace

TEST(Pauli, AlgebraicIdentitiesAreExact) {
  const auto s1 = gg::pauli(1);
  const auto s2 = gg::pauli(2);
  const auto s3 = gg::pauli(3);
  const cplx i{0.0, 1.0};
  EXPECT_EQ(s3 * s3, Eigen::Matrix2cd::Identity());
  EXPECT_EQ(s2, Eigen::Matrix2cd(-i * s3 * s1));
  EXPECT_EQ(s2, Eigen::Matrix2cd(i * s1 * s3));
  for (int a = 1; a <= 3; ++a) {
    const auto p = gg::pauli(a);
    EXPECT_EQ(p, p.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(p);
    EXPECT_NEAR(es.eigenvalues()(0), -1.0, 1e-15);
    EXPECT_NEAR(es.eigenvalues()(1), 1.0, 1e-15);
  }
  // S3 diagonal, S1 off-diagonal with unit entries.
  EXPECT_EQ(s3(0, 0), cplx(1.0));
  EXPECT_EQ(s3(1, 1), cplx(-1.0));
  EXPECT_EQ(s1(0, 1), cplx(1.0));
  EXPECT_EQ(s2(0, 1), -i);
  EXPECT_THROW(gg::pauli(0), gg::DomainError);
  EXPECT_THROW(gg::pauli(4), gg::DomainError);
}

TEST(BasisVector, SingleSiteAndOrthonormality) {
  const auto up = gg::basis_vector(SpinConfiguration{0}, 1);
  EXPECT_EQ(up.amplitudes()(0), cplx(1.0));
  EXPECT_EQ(up.amplitudes()(1), cplx(0.0));
  for (std::size_t n : {2U, 3U}) {
    for (std::uint64_t a = 0; a < (1U << n); ++a) {
      for (std::uint64_t b = 0; b < (1U << n); ++b) {
        const auto ip = gg::inner_product(gg::basis_vector(SpinConfiguration{a}, n), gg::basis_vector(SpinConfiguration{b}, n));
        EXPECT_EQ(ip, cplx(a == b ? 1.0 : 0.0));
      }
    }
  }
  EXPECT_THROW(gg::basis_vector(SpinConfiguration{4}, 2), gg::DomainError);
}

TEST(ProductOperator, MatchesKroneckerOracle) {
  const std::size_t n = 4;
  for (std::uint64_t mask = 0; mask < (1U << n); ++mask) {
    for (Axis a : {Axis::S1, Axis::S2, Axis::S3}) {
      const auto got = gg::product_operator(a, SiteSet{mask}, n).to_dense();
      const auto want = oracle::on_sites(oracle_pauli(a), SiteSet{mask}.sites(), n);
      EXPECT_EQ((got - want).cwiseAbs().maxCoeff(), 0.0) << "axis " << int(a) << " mask " << mask;
    }
  }
}

TEST(ProductOperator, FlipAndDiagonalAction) {
  const std::size_t n = 3;
  for (std::uint64_t b = 0; b < 8; ++b) {
    const SpinConfiguration s{b};
    const auto a = SiteSet::of({0, 2});
    const auto flipped = gg::apply(gg::product_operator(Axis::S1, a, n), gg::basis_vector(s, n));
    EXPECT_EQ((flipped.amplitudes() - gg::basis_vector(gg::flip(s, a), n).amplitudes()).norm(), 0.0);
    const auto z = gg::apply(gg::product_operator(Axis::S3, SiteSet::of({1}), n), gg::basis_vector(s, n));
    EXPECT_EQ((z.amplitudes() - double(s.spin(1)) * gg::basis_vector(s, n).amplitudes()).norm(), 0.0);
  }
  const auto id = gg::product_operator(Axis::S2, SiteSet{}, n);
  EXPECT_EQ(gg::max_abs_difference(id, gg::OperatorMatrix::identity(n)), 0.0);
}

TEST(ProductOperator, AlgebraInvariants) {
  const std::size_t n = 5;
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<std::uint64_t> mask(0, (1U << n) - 1);
  for (int k = 0; k < 20; ++k) {
    const SiteSet a{mask(rng)};
    const SiteSet b{mask(rng)};
    // S1 flips compose by symmetric difference.
    EXPECT_EQ(gg::max_abs_difference(gg::product_operator(Axis::S1, a, n) * gg::product_operator(Axis::S1, b, n),
                                     gg::product_operator(Axis::S1, a ^ b, n)),
              0.0);
    // S2_[A] = (-i)^{|A|} S3_[A] S1_[A] for |A| <= 4.
    if (a.size() <= 4) {
      const auto lhs = gg::product_operator(Axis::S2, a, n);
      const auto rhs = minus_i_power(a.size()) *
                       (gg::product_operator(Axis::S3, a, n) * gg::product_operator(Axis::S1, a, n));
      EXPECT_EQ(gg::max_abs_difference(lhs, rhs), 0.0);
    }
  }
  // Operators on different sites commute.
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t y = 0; y < n; ++y) {
      if (x == y) continue;
      for (int k = 1; k <= 3; ++k) {
        for (int l = 1; l <= 3; ++l) {
          const auto p = gg::product_operator(k, SiteSet::of({x}), n);
          const auto q = gg::product_operator(l, SiteSet::of({y}), n);
          EXPECT_EQ(gg::max_abs_difference(p * q, q * p), 0.0);
        }
      }
    }
  }
}

TEST(DiagonalOperator, IdentityCasesAndEigenvectors) {
  const std::size_t n = 3;
  EXPECT_EQ(gg::max_abs_difference(gg::diagonal_operator([](SpinConfiguration) { return 1.0; }, n),
                                   gg::OperatorMatrix::identity(n)),
            0.0);
  const gg::ClassicalPotential u0({{SiteSet::of({0, 1}), -1.0}, {SiteSet::of({2}), 0.4}});
  EXPECT_EQ(gg::max_abs_difference(
                gg::diagonal_operator([&](SpinConfiguration s) { return std::exp(-0.5 * 0.0 * u0(s)); }, n),
                gg::OperatorMatrix::identity(n)),
            0.0);
  auto g = [](SpinConfiguration s) { return 0.5 + double(s.bits); };
  const auto d = gg::diagonal_operator(g, n);
  for (std::uint64_t b = 0; b < 8; ++b) {
    const auto v = gg::basis_vector(SpinConfiguration{b}, n);
    EXPECT_EQ((gg::apply(d, v).amplitudes() - g(SpinConfiguration{b}) * v.amplitudes()).norm(), 0.0);
  }
  EXPECT_THROW(gg::diagonal_operator([](SpinConfiguration s) { return s.bits == 3 ? NAN : 1.0; }, n), gg::DomainError);
}

// exp(-(a/2)U0(S3)) S1_[A] = S1_[A] exp(-(a/2)U0(S3^A)).
TEST(DiagonalOperator, ConjugationThroughFlip) {
  std::mt19937_64 rng(23);
  const gg::Lattice lat(1, 5);
  const auto u0 = testing_support::random_potential(lat, rng);
  const double alpha = 0.9;
  for (std::uint64_t m : {1ULL, 6ULL, 19ULL, 31ULL}) {
    const SiteSet a{m};
    const auto left = gg::diagonal_operator([&](SpinConfiguration s) { return std::exp(-0.5 * alpha * u0(s)); }, 5) *
                      gg::product_operator(Axis::S1, a, 5);
    const auto right = gg::product_operator(Axis::S1, a, 5) *
                       gg::diagonal_operator([&](SpinConfiguration s) { return std::exp(-0.5 * alpha * u0(gg::flip(s, a))); }, 5);
    EXPECT_LE(gg::max_abs_difference(left, right), 1e-15 * left.max_abs());
  }
}

TEST(Apply, ExamplesAndErrors) {
  const std::size_t n = 2;
  gg::StateVector v(n, Eigen::VectorXcd::LinSpaced(4, 1.0, 4.0));
  EXPECT_EQ((gg::apply(gg::OperatorMatrix::identity(n), v).amplitudes() - v.amplitudes()).norm(), 0.0);
  const auto x = gg::product_operator(Axis::S1, SiteSet::of({1}), n);
  EXPECT_EQ((gg::apply(x, gg::apply(x, v)).amplitudes() - v.amplitudes()).norm(), 0.0);
  // S2 psi0(+1) = i psi0(-1).
  const auto y = gg::apply(gg::product_operator(Axis::S2, SiteSet::of({0}), 1), gg::basis_vector(SpinConfiguration{0}, 1));
  EXPECT_EQ(y.amplitudes()(0), cplx(0.0));
  EXPECT_EQ(y.amplitudes()(1), cplx(0.0, 1.0));
  EXPECT_THROW(gg::apply(gg::OperatorMatrix::identity(3), v), gg::DimensionError);
}

TEST(WeightedInnerProduct, ReducesAndIsPositive) {
  std::mt19937_64 rng(4);
  const gg::Lattice lat(1, 4);
  const auto u0 = testing_support::random_potential(lat, rng);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  gg::StateVector f(4), g(4);
  for (std::uint64_t b = 0; b < 16; ++b) {
    f[SpinConfiguration{b}] = cplx(unit(rng), unit(rng));
    g[SpinConfiguration{b}] = cplx(unit(rng), unit(rng));
  }
  const auto euclid = gg::inner_product(f, g);
  EXPECT_LE(std::abs(gg::weighted_inner_product(f, g, u0, 0.0) - euclid), 1e-15 * std::abs(euclid) + 1e-15);
  const auto ff = gg::weighted_inner_product(f, f, u0, 1.3);
  EXPECT_GT(ff.real(), 0.0);
  EXPECT_LE(std::abs(ff.imag()), 1e-14 * ff.real());
  EXPECT_THROW(gg::weighted_inner_product(f, gg::StateVector(3), u0, 1.0), gg::DimensionError);
}
