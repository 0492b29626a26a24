#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "gibbs_ground/model.hpp"
#include "support/oracles.hpp"
#include "support/random_models.hpp"

namespace gg = gibbs_ground;
using gg::Axis;
using gg::cplx;
using gg::SiteSet;
using gg::SpinConfiguration;

namespace {

double dense_diff(const gg::OperatorMatrix& a, const Eigen::MatrixXcd& b) {
  return (a.to_dense() - b).cwiseAbs().maxCoeff();
}

gg::CouplingTable xx_pair(std::size_t x, std::size_t y, double phi) {
  const std::pair<std::size_t, std::size_t> p{x, y};
  return gg::xx_couplings(std::span(&p, 1), phi);
}

}  // namespace

TEST(CouplingTable, RejectsOverlapAndDuplicates) {
  gg::CouplingTable t;
  EXPECT_THROW(t.add({SiteSet::of({0, 1}), SiteSet::of({1}), 1.0}), gg::ConstraintError);
  t.add({SiteSet::of({0}), SiteSet::of({1}), 1.0});
  EXPECT_THROW(t.add({SiteSet::of({0}), SiteSet::of({1}), 2.0}), gg::ConstraintError);
  try {
    t.add({SiteSet::of({2, 3}), SiteSet::of({3}), 1.0});
  } catch (const gg::ConstraintError& e) {
    EXPECT_NE(std::string(e.what()).find("A={2,3}"), std::string::npos);
  }
}

TEST(BuildH0, Examples) {
  const gg::CouplingTable single({{SiteSet::of({0}), SiteSet{}, 1.0}});
  EXPECT_EQ(dense_diff(gg::build_H0(single, 1), oracle::sx()), 0.0);

  const double phi = -0.7;
  const auto h0 = gg::build_H0(xx_pair(0, 2, phi), 3);
  const Eigen::MatrixXcd want =
      phi * (oracle::on_sites(oracle::sx(), {0, 2}, 3) + oracle::on_sites(oracle::sy(), {0, 2}, 3));
  EXPECT_LE(dense_diff(h0, want), 1e-15);

  EXPECT_EQ(gg::build_H0(gg::CouplingTable{}, 3).nonzeros(), 0U);
}

TEST(BuildH0, MixedEntryMatchesDenseProduct) {
  // phi S1_0 S2_1 S2_3 on four sites.
  const gg::CouplingTable t({{SiteSet::of({0}), SiteSet::of({1, 3}), 0.25}});
  std::vector<Eigen::Matrix2cd> ops{oracle::sx(), oracle::sy(), oracle::id2(), oracle::sy()};
  EXPECT_LE(dense_diff(gg::build_H0(t, 4), 0.25 * oracle::kron_chain(ops)), 1e-16);
}

TEST(BuildJA, Examples) {
  const double phi = 1.3;
  const auto xx = gg::build_JA(xx_pair(0, 1, phi));
  ASSERT_EQ(xx.size(), 1U);
  EXPECT_EQ(xx[0].support, SiteSet::of({0, 1}));
  for (std::uint64_t b = 0; b < 4; ++b) {
    const SpinConfiguration s{b};
    EXPECT_EQ(xx[0](s), cplx(phi * (1.0 - s.spin(0) * s.spin(1))));
  }
  EXPECT_TRUE(xx[0].real_valued());

  const auto constant = gg::build_JA(gg::CouplingTable({{SiteSet::of({0, 2}), SiteSet{}, -0.4}}));
  for (std::uint64_t b = 0; b < 8; ++b) EXPECT_EQ(constant[0](SpinConfiguration{b}), cplx(-0.4));

  const auto odd = gg::build_JA(gg::CouplingTable({{SiteSet{}, SiteSet::of({1}), 0.5}}));
  for (std::uint64_t b = 0; b < 4; ++b) {
    const SpinConfiguration s{b};
    EXPECT_EQ(odd[0](s), cplx(0.0, -0.5 * s.spin(1)));
  }
  EXPECT_FALSE(odd[0].real_valued());
}

TEST(BuildV, Examples) {
  const double phi = -0.8;
  const gg::ClassicalPotential u0({{SiteSet::of({0}), 0.3}, {SiteSet::of({0, 1}), 1.1}});
  const auto v = gg::build_V(xx_pair(0, 1, phi), u0, 0.0, 2);
  const Eigen::MatrixXcd want =
      -phi * (Eigen::MatrixXcd::Identity(4, 4) - oracle::on_sites(oracle::sz(), {0, 1}, 2));
  EXPECT_LE(dense_diff(v, want), 1e-15);

  const gg::CouplingTable zero({{SiteSet::of({0}), SiteSet{}, 0.0}});
  EXPECT_EQ(gg::build_V(zero, u0, 1.0, 2).nonzeros(), 0U);
}

TEST(BuildH, SingleSiteByHand) {
  const gg::CouplingTable t({{SiteSet::of({0}), SiteSet{}, -1.0}});
  for (double alpha : {0.0, 0.5, 3.0}) {
    const auto parts = gg::build_H(t, gg::ClassicalPotential{}, alpha, 1);
    Eigen::Matrix2cd want;
    want << 1, -1, -1, 1;  // -(S1 - I)
    EXPECT_EQ(dense_diff(parts.h, want), 0.0);
  }
  EXPECT_EQ(gg::build_H(gg::CouplingTable{}, gg::ClassicalPotential{}, 1.0, 3).h.nonzeros(), 0U);
}

// Flip form, two-path agreement, and Hermiticity on random even-|A'| models.
TEST(BuildH, RandomModelInvariants) {
  std::mt19937_64 rng(2024);
  for (int k = 0; k < 25; ++k) {
    const auto m = testing_support::random_model(k % 2 ? 2 : 1, k % 2 ? 2 : 5, 0.5 * (k % 4), rng);
    const auto n = m.lattice.size();
    const auto parts = gg::build_H(m.table, m.potential, m.alpha, n);
    const double hmax = parts.h.max_abs();
    EXPECT_LE(parts.two_path_deviation, 1e-12);
    const auto couplings = gg::build_JA(m.table);
    EXPECT_LE(gg::max_abs_difference(parts.h0, gg::build_H0_from_couplings(couplings, n)), 1e-12 * hmax);
    EXPECT_LE(parts.h.hermiticity_deviation(), 1e-14 * hmax);
    for (const auto& j : couplings) EXPECT_TRUE(j.real_valued());
  }
}

TEST(BuildH, ConstantCouplingCancels) {
  const gg::CouplingTable t({{SiteSet{}, SiteSet{}, 2.5}, {SiteSet::of({1}), SiteSet{}, -1.0}});
  const gg::ClassicalPotential u0({{SiteSet::of({0, 1}), -1.0}});
  const auto with = gg::build_H(t, u0, 1.2, 2).h;
  const auto without = gg::build_H(gg::CouplingTable({{SiteSet::of({1}), SiteSet{}, -1.0}}), u0, 1.2, 2).h;
  EXPECT_LE(gg::max_abs_difference(with, without), 1e-15 * with.max_abs());
}

TEST(GibbsState, Examples) {
  const auto lat = gg::build_hypercube(1, 4);
  const auto ising = gg::ising_nearest_neighbor(lat, 1.0);
  const auto flat = gg::build_gibbs_state(ising, 0.0, 4);
  EXPECT_EQ((flat.amplitudes() - Eigen::VectorXcd::Ones(16)).norm(), 0.0);
  for (double alpha : {0.3, 1.0, 4.0}) {
    const auto psi = gg::build_gibbs_state(ising, alpha, 4);
    const double z = gg::partition_function(ising, alpha, lat);
    EXPECT_NEAR(psi.amplitudes().squaredNorm(), z, 1e-12 * z);
  }
  const double u = 0.6, alpha = 1.5;
  const auto one = gg::build_gibbs_state(gg::ClassicalPotential({{SiteSet::of({0}), u}}), alpha, 1);
  EXPECT_DOUBLE_EQ(one.amplitudes()(0).real(), std::exp(-alpha * u / 2));
  EXPECT_DOUBLE_EQ(one.amplitudes()(1).real(), std::exp(alpha * u / 2));
  EXPECT_THROW(gg::build_gibbs_state(ising, 1.0, 15), gg::SizeLimitError);
}

TEST(Hplus, AlphaZeroAndConstants) {
  std::mt19937_64 rng(8);
  const auto m = testing_support::random_model(1, 5, 0.0, rng);
  const gg::ModelInstance model(m.lattice, m.table, m.potential, 0.0);
  EXPECT_LE(gg::max_abs_difference(model.hplus(), model.h()), 1e-15 * model.h().max_abs());

  const gg::ModelInstance warm(m.lattice, m.table, m.potential, 1.4);
  gg::StateVector ones(5);
  ones.amplitudes().setOnes();
  EXPECT_LE(gg::apply(warm.hplus(), ones).amplitudes().cwiseAbs().maxCoeff(), 1e-12 * warm.h().max_abs());
}

TEST(Hplus, SingleSiteGeneratorByHand) {
  const double u = 0.4, alpha = 1.1;
  const gg::CouplingTable t({{SiteSet::of({0}), SiteSet{}, -1.0}});
  const gg::ClassicalPotential u0({{SiteSet::of({0}), u}});
  const auto h = gg::build_H(t, u0, alpha, 1).h;
  const auto hp = gg::build_Hplus(t, u0, alpha, h);
  const double up = std::exp(alpha * u), down = std::exp(-alpha * u);
  Eigen::Matrix2cd want;
  want << up, -up, -down, down;
  EXPECT_LE(dense_diff(hp, want), 1e-15);
}

TEST(XxzClosedForm, ConstantFieldAndErrors) {
  const auto lat = gg::build_hypercube(1, 3);
  const auto table = gg::xx_couplings(gg::nearest_neighbor_pairs(lat), 0.9);
  const std::vector<double> flat(3, 2.0);
  const auto v = gg::xxz_closed_form(table, flat, 1.7, 3);
  Eigen::MatrixXcd want = Eigen::MatrixXcd::Zero(8, 8);
  for (auto [x, y] : gg::nearest_neighbor_pairs(lat)) {
    want += 0.9 * (oracle::on_sites(oracle::sz(), {x, y}, 3) - Eigen::MatrixXcd::Identity(8, 8));
  }
  EXPECT_LE(dense_diff(v, want), 1e-15);

  const gg::CouplingTable general({{SiteSet::of({0}), SiteSet::of({1}), 1.0}});
  EXPECT_THROW(gg::xxz_closed_form(general, flat, 1.0, 3), gg::UnsupportedModelError);
  const gg::CouplingTable half({{SiteSet::of({0, 1}), SiteSet{}, 1.0}});
  EXPECT_THROW(gg::xxz_closed_form(half, flat, 1.0, 3), gg::UnsupportedModelError);
}

TEST(XxzClosedForm, EqualsGenericV) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> coef(-1.5, 1.5);
  std::uniform_real_distribution<double> alpha_dist(0.0, 2.0);
  for (int k = 0; k < 20; ++k) {
    const auto lat = k % 3 == 0 ? gg::build_hypercube(2, 2) : gg::build_hypercube(1, 3 + k % 5);
    const auto n = lat.size();
    gg::CouplingTable table;
    for (auto [x, y] : gg::nearest_neighbor_pairs(lat)) {
      const double phi = coef(rng);
      table.add({SiteSet::of({x, y}), SiteSet{}, phi});
      table.add({SiteSet{}, SiteSet::of({x, y}), phi});
    }
    std::vector<double> u(n);
    for (auto& v : u) v = coef(rng);
    const double alpha = alpha_dist(rng);
    const auto closed = gg::xxz_closed_form(table, u, alpha, n);
    const auto generic = gg::build_V(table, gg::linear_field(u), alpha, n);
    EXPECT_LE(gg::max_abs_difference(closed, generic), 1e-12);
  }
}

TEST(XxzHamiltonian, AnisotropyAndBoundaryField) {
  const double alpha = 0.8, coupling = -1.0;
  const double q = std::exp(alpha);
  const auto chain = gg::build_hypercube(1, 6);
  const auto t = gg::xxz_terms(coupling, alpha, chain);
  EXPECT_DOUBLE_EQ(t.zz, coupling * (q + 1 / q) / 2);
  for (std::size_t x = 1; x + 1 < 6; ++x) EXPECT_EQ(t.field[x], 0.0) << "interior site " << x;
  EXPECT_NE(t.field[0], 0.0);
  EXPECT_EQ(t.field[0], -t.field[5]);

  const auto flat = gg::xxz_terms(coupling, 0.0, chain);
  for (double h : flat.field) EXPECT_EQ(h, 0.0);

  const auto square = gg::xxz_terms(coupling, alpha, gg::build_hypercube(2, 3));
  EXPECT_EQ(square.field[4], 0.0);  // center of the 3x3 square
}

TEST(XxzHamiltonian, FieldRecoveredFromMatrixDiagonal) {
  // Walsh coefficient of S3_x in the diagonal: 2^-n sum_s H(s,s) s_x.
  const auto lat = gg::build_hypercube(1, 5);
  const auto h = gg::xxz_hamiltonian(1.0, 1.3, lat);
  const auto t = gg::xxz_terms(1.0, 1.3, lat);
  for (std::size_t x = 0; x < 5; ++x) {
    double c = 0.0;
    for (std::uint64_t b = 0; b < 32; ++b) c += h.coeff(b, b).real() * SpinConfiguration{b}.spin(x);
    EXPECT_NEAR(c / 32.0, t.field[x], 1e-13);
  }
}

TEST(XxzHamiltonian, EqualsGenericBuilder) {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> coupling(-2.0, 2.0);
  std::uniform_real_distribution<double> alpha_dist(0.0, 3.0);
  for (int k = 0; k < 20; ++k) {
    const auto lat = k % 4 == 0 ? gg::build_hypercube(2, 2) : gg::build_hypercube(1, 2 + k % 7);
    const double j = coupling(rng);
    const double alpha = alpha_dist(rng);
    const auto model = gg::xxz_model(j, alpha, lat);
    const auto direct = gg::xxz_hamiltonian(j, alpha, lat);
    EXPECT_LE(gg::max_abs_difference(direct, model.h()), 1e-12 * model.h().max_abs());
  }
}
