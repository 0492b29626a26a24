#pragma once

#include <cmath>
#include <complex>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gibbs_ground/classical.hpp"
#include "gibbs_ground/errors.hpp"
#include "gibbs_ground/lattice.hpp"
#include "gibbs_ground/operators.hpp"

namespace gibbs_ground {

/// One coefficient phi_{A,A'} of H0 = sum phi_{A,A'} S1_[A] S2_[A'].
struct CouplingEntry {
  SiteSet a;
  SiteSet a_prime;
  double phi = 0.0;

  SiteSet support() const { return a | a_prime; }
};

inline std::string describe(const CouplingEntry& e) {
  auto list = [](SiteSet s) {
    std::string out = "{";
    bool first = true;
    for (auto x : s.sites()) {
      out += (first ? "" : ",") + std::to_string(x);
      first = false;
    }
    return out + "}";
  };
  return "(A=" + list(e.a) + ", A'=" + list(e.a_prime) + ")";
}

/// Sparse list of couplings. A and A' are disjoint and no (A, A') key repeats.
/// The (empty, empty) entry, if present, is the constant shift phi_{0,0}.
class CouplingTable {
 public:
  CouplingTable() = default;
  explicit CouplingTable(std::vector<CouplingEntry> entries) {
    for (auto& e : entries) add(e);
  }

  void add(const CouplingEntry& e) {
    if (!e.a.disjoint(e.a_prime)) throw ConstraintError("coupling entry " + describe(e) + " has overlapping A and A'");
    if (!std::isfinite(e.phi)) throw DomainError("coupling entry " + describe(e) + " has a non-finite phi");
    for (const auto& o : entries_) {
      if (o.a == e.a && o.a_prime == e.a_prime) throw ConstraintError("duplicate coupling entry " + describe(e));
    }
    entries_.push_back(e);
  }

  const std::vector<CouplingEntry>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }

  SiteSet support() const {
    SiteSet s;
    for (const auto& e : entries_) s = s | e.support();
    return s;
  }

 private:
  std::vector<CouplingEntry> entries_;
};

/// XX couplings phi (S1_x S1_y + S2_x S2_y) on the given pairs.
inline CouplingTable xx_couplings(std::span<const std::pair<std::size_t, std::size_t>> pairs, double phi) {
  CouplingTable t;
  for (auto [x, y] : pairs) {
    t.add({SiteSet::of({x, y}), SiteSet{}, phi});
    t.add({SiteSet{}, SiteSet::of({x, y}), phi});
  }
  return t;
}

/// J_U(s_U) = sum_{A' subset U} (-i)^{|A'|} phi_{U \ A', A'} s_[A'] for one union set U.
struct DiagonalCoupling {
  struct Term {
    SiteSet a_prime;
    cplx coefficient;
  };

  SiteSet support;
  std::vector<Term> terms;

  cplx operator()(SpinConfiguration s) const {
    cplx j{0.0, 0.0};
    for (const auto& t : terms) j += t.coefficient * static_cast<double>(s.product(t.a_prime));
    return j;
  }

  bool real_valued() const {
    for (const auto& t : terms) {
      if (t.coefficient.imag() != 0.0) return false;
    }
    return true;
  }

  double abs_coefficient_sum() const {
    double s = 0.0;
    for (const auto& t : terms) s += std::abs(t.coefficient);
    return s;
  }
};

/// (-i)^k.
inline cplx minus_i_power(std::size_t k) {
  switch (k % 4) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, -1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, 1.0};
  }
}

/// Groups table entries by U = A cup A'. Ordered by union mask.
inline std::vector<DiagonalCoupling> build_JA(const CouplingTable& table) {
  std::map<std::uint64_t, DiagonalCoupling> groups;
  for (const auto& e : table.entries()) {
    auto& g = groups[e.support().mask];
    g.support = e.support();
    g.terms.push_back({e.a_prime, minus_i_power(e.a_prime.size()) * e.phi});
  }
  std::vector<DiagonalCoupling> out;
  out.reserve(groups.size());
  for (auto& [mask, g] : groups) out.push_back(std::move(g));
  return out;
}

namespace detail {

inline void check_within(const CouplingTable& table, std::size_t sites) {
  const auto dim = StateVector::dimension_of(sites);
  if (table.support().mask >= dim && !table.support().empty()) {
    throw DomainError("coupling table references sites outside the lattice");
  }
}

inline void check_quantum_cap(std::size_t sites, std::size_t cap) {
  if (sites > cap) throw SizeLimitError("quantum construction on " + std::to_string(sites) + " sites", cap);
}

}  // namespace detail

/// H0 = sum phi_{A,A'} S1_[A] S2_[A'], multiplying the Pauli product operators.
inline OperatorMatrix build_H0(const CouplingTable& table, std::size_t sites) {
  detail::check_within(table, sites);
  auto h0 = OperatorMatrix::zero(sites);
  for (const auto& e : table.entries()) {
    if (!e.a.disjoint(e.a_prime)) throw ConstraintError("coupling entry " + describe(e) + " has overlapping A and A'");
    h0 = h0 + cplx{e.phi, 0.0} * (product_operator(Axis::S1, e.a, sites) * product_operator(Axis::S2, e.a_prime, sites));
  }
  return h0;
}

/// H0 = sum_U J_U(S3_U) S1_[U], the diagonal-coupling form of the same operator.
inline OperatorMatrix build_H0_from_couplings(std::span<const DiagonalCoupling> couplings, std::size_t sites) {
  auto h0 = OperatorMatrix::zero(sites);
  for (const auto& j : couplings) {
    h0 = h0 + diagonal_operator(j, sites) * product_operator(Axis::S1, j.support, sites);
  }
  return h0;
}

/// V = -sum_U J_U(S3_U) exp(-(alpha/2) W_U(S3)).
inline OperatorMatrix build_V(const CouplingTable& table, const ClassicalPotential& u0, double alpha,
                              std::size_t sites) {
  detail::check_within(table, sites);
  const auto couplings = build_JA(table);
  return diagonal_operator(
      [&](SpinConfiguration s) {
        cplx v{0.0, 0.0};
        for (const auto& j : couplings) v -= j(s) * std::exp(-0.5 * alpha * u0.flip_energy(s, j.support));
        return v;
      },
      sites);
}

/// sum_{|U|>0} J_U(S3_U) P_U with P_U = S1_[U] - exp(-(alpha/2) W_U(S3)).
inline OperatorMatrix build_H_flip_form(const CouplingTable& table, const ClassicalPotential& u0, double alpha,
                                        std::size_t sites) {
  detail::check_within(table, sites);
  auto h = OperatorMatrix::zero(sites);
  for (const auto& j : build_JA(table)) {
    if (j.support.empty()) continue;
    const auto weight = diagonal_operator(
        [&](SpinConfiguration s) { return std::exp(-0.5 * alpha * u0.flip_energy(s, j.support)); }, sites);
    h = h + diagonal_operator(j, sites) * (product_operator(Axis::S1, j.support, sites) - weight);
  }
  return h;
}

inline constexpr double kTwoPathTolerance = 1e-12;
inline constexpr double kHplusTolerance = 1e-10;

struct HamiltonianParts {
  OperatorMatrix h0;
  OperatorMatrix v;
  OperatorMatrix h;
  /// max |(H0 + V) - flip form| / ||H||_max (0 when H = 0).
  double two_path_deviation = 0.0;
};

/// H = H0 + V, cross-checked entrywise against the flip form.
inline HamiltonianParts build_H(const CouplingTable& table, const ClassicalPotential& u0, double alpha,
                                std::size_t sites) {
  HamiltonianParts p;
  p.h0 = build_H0(table, sites);
  p.v = build_V(table, u0, alpha, sites);
  p.h = p.h0 + p.v;
  const auto other = build_H_flip_form(table, u0, alpha, sites);
  const double dev = max_abs_difference(p.h, other);
  const double scale = p.h.max_abs();
  p.two_path_deviation = scale > 0.0 ? dev / scale : dev;
  if (dev > kTwoPathTolerance * scale) {
    throw InternalConsistencyError("H0 + V and the flip-form assembly differ by " + std::to_string(dev) +
                                   " (||H||_max = " + std::to_string(scale) + ")");
  }
  return p;
}

/// Psi(s) = exp(-(alpha/2) U0(s)).
inline StateVector build_gibbs_state(const ClassicalPotential& u0, double alpha, std::size_t sites,
                                     std::size_t site_cap = kQuantumSiteCap) {
  detail::check_quantum_cap(sites, site_cap);
  StateVector psi(sites);
  for (std::uint64_t b = 0; b < psi.dimension(); ++b) {
    const SpinConfiguration s{b};
    psi[s] = std::exp(-0.5 * alpha * u0(s));
  }
  return psi;
}

/// H+ from its action (H+ F)(s) = -sum_U J_U(s_U) exp(-(alpha/2) W_U(s)) (F(s) - F(s^U)).
inline OperatorMatrix build_Hplus_action(const CouplingTable& table, const ClassicalPotential& u0, double alpha,
                                         std::size_t sites) {
  detail::check_within(table, sites);
  const auto couplings = build_JA(table);
  const auto dim = StateVector::dimension_of(sites);
  std::vector<OperatorMatrix::Triplet> t;
  for (std::uint64_t r = 0; r < dim; ++r) {
    const SpinConfiguration s{r};
    cplx diag{0.0, 0.0};
    for (const auto& j : couplings) {
      if (j.support.empty()) continue;
      const cplx rate = j(s) * std::exp(-0.5 * alpha * u0.flip_energy(s, j.support));
      t.emplace_back(static_cast<std::int64_t>(r), static_cast<std::int64_t>(r ^ j.support.mask), rate);
      diag -= rate;
    }
    t.emplace_back(static_cast<std::int64_t>(r), static_cast<std::int64_t>(r), diag);
  }
  return OperatorMatrix::from_triplets(sites, t);
}

/// exp((alpha/2) U0) H exp(-(alpha/2) U0).
inline OperatorMatrix similarity_transform(const OperatorMatrix& h, const ClassicalPotential& u0, double alpha) {
  const auto left = diagonal_operator([&](SpinConfiguration s) { return std::exp(0.5 * alpha * u0(s)); }, h.sites());
  const auto right = diagonal_operator([&](SpinConfiguration s) { return std::exp(-0.5 * alpha * u0(s)); }, h.sites());
  return left * h * right;
}

/// H+ assembled from its action and checked against the similarity transform of H.
inline OperatorMatrix build_Hplus(const CouplingTable& table, const ClassicalPotential& u0, double alpha,
                                  const OperatorMatrix& h) {
  auto hp = build_Hplus_action(table, u0, alpha, h.sites());
  const double dev = max_abs_difference(hp, similarity_transform(h, u0, alpha));
  const double scale = h.max_abs();
  if (dev > kHplusTolerance * scale) {
    throw InternalConsistencyError("H+ action form and similarity transform differ by " + std::to_string(dev) +
                                   " (||H||_max = " + std::to_string(scale) + ")");
  }
  return hp;
}

struct XxPair {
  std::size_t x = 0;
  std::size_t y = 0;
  double phi = 0.0;
};

/// Recovers phi_{x,y} from a table made only of matching ({x,y},0,phi) and (0,{x,y},phi) entries.
inline std::vector<XxPair> xx_pairs_from_table(const CouplingTable& table) {
  std::map<std::uint64_t, std::pair<std::optional<double>, std::optional<double>>> by_pair;
  for (const auto& e : table.entries()) {
    const bool s1s1 = e.a.size() == 2 && e.a_prime.empty();
    const bool s2s2 = e.a.empty() && e.a_prime.size() == 2;
    if (!s1s1 && !s2s2) {
      throw UnsupportedModelError("entry " + describe(e) + " is not of XX type; use build_V for general tables");
    }
    auto& slot = by_pair[e.support().mask];
    (s1s1 ? slot.first : slot.second) = e.phi;
  }
  std::vector<XxPair> out;
  for (const auto& [mask, slot] : by_pair) {
    if (!slot.first || !slot.second || *slot.first != *slot.second) {
      throw UnsupportedModelError("pair mask " + std::to_string(mask) +
                                  " lacks matching S1S1 and S2S2 couplings; use build_V for general tables");
    }
    const auto sites = SiteSet{mask}.sites();
    out.push_back({sites[0], sites[1], *slot.first});
  }
  return out;
}

/// V for XX couplings and U0 = sum u_x s_x:
/// sum phi [S3_x S3_y cosh d - (S3_x - S3_y) sinh d - cosh d], d = alpha (u_x - u_y).
inline OperatorMatrix xxz_closed_form(const CouplingTable& table, std::span<const double> u, double alpha,
                                      std::size_t sites) {
  const auto pairs = xx_pairs_from_table(table);
  if (u.size() < sites) throw DimensionError("field u must give a value for every site");
  return diagonal_operator(
      [&](SpinConfiguration s) {
        double v = 0.0;
        for (const auto& p : pairs) {
          const double d = alpha * (u[p.x] - u[p.y]);
          const double sx = s.spin(p.x);
          const double sy = s.spin(p.y);
          v += p.phi * (sx * sy * std::cosh(d) - (sx - sy) * std::sinh(d) - std::cosh(d));
        }
        return v;
      },
      sites);
}

/// Coefficients of the diagonal part of the XXZ Hamiltonian
///   J sum_<x,y> [S1S1 + S2S2 + D S3S3] + J sum_<x<y> [E (S3_x - S3_y) - D],
/// D = (q + 1/q)/2, E = (q - 1/q)/2, q = e^alpha.
struct XxzTerms {
  double zz = 0.0;
  std::vector<double> field;
  double constant = 0.0;
};

inline XxzTerms xxz_terms(double coupling, double alpha, const Lattice& lattice) {
  const double q = std::exp(alpha);
  const double d = 0.5 * (q + 1.0 / q);
  const double e = 0.5 * (q - 1.0 / q);
  XxzTerms t;
  t.zz = coupling * d;
  t.field.assign(lattice.size(), 0.0);
  for (auto [x, y] : nearest_neighbor_pairs(lattice)) {
    t.field[x] += coupling * e;
    t.field[y] -= coupling * e;
    t.constant -= coupling * d;
  }
  return t;
}

inline OperatorMatrix xxz_hamiltonian(double coupling, double alpha, const Lattice& lattice) {
  const auto n = lattice.size();
  detail::check_quantum_cap(n, kQuantumSiteCap);
  const auto t = xxz_terms(coupling, alpha, lattice);
  auto h = OperatorMatrix::zero(n);
  for (auto [x, y] : nearest_neighbor_pairs(lattice)) {
    const auto bond = SiteSet::of({x, y});
    h = h + cplx{coupling, 0.0} * (product_operator(Axis::S1, bond, n) + product_operator(Axis::S2, bond, n));
    h = h + cplx{t.zz, 0.0} * product_operator(Axis::S3, bond, n);
  }
  for (std::size_t x = 0; x < n; ++x) {
    if (t.field[x] != 0.0) h = h + cplx{t.field[x], 0.0} * product_operator(Axis::S3, SiteSet::of({x}), n);
  }
  return h + cplx{t.constant, 0.0} * OperatorMatrix::identity(n);
}

/// Quantum model with its classical potential: every derived operator is built once on construction.
class ModelInstance {
 public:
  ModelInstance(Lattice lattice, CouplingTable table, ClassicalPotential u0, double alpha,
                std::size_t quantum_cap = kQuantumSiteCap)
      : lattice_(std::move(lattice)), table_(std::move(table)), u0_(std::move(u0)), alpha_(alpha) {
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw DomainError("alpha must be finite and nonnegative");
    detail::check_quantum_cap(lattice_.size(), quantum_cap);
    if (!lattice_.contains(u0_.support())) throw DomainError("potential references sites outside the lattice");
    const auto n = lattice_.size();
    couplings_ = build_JA(table_);
    auto parts = build_H(table_, u0_, alpha_, n);
    h0_ = std::move(parts.h0);
    v_ = std::move(parts.v);
    h_ = std::move(parts.h);
    two_path_deviation_ = parts.two_path_deviation;
    hplus_ = build_Hplus(table_, u0_, alpha_, h_);
    psi_ = build_gibbs_state(u0_, alpha_, n, quantum_cap);
  }

  const Lattice& lattice() const { return lattice_; }
  std::size_t sites() const { return lattice_.size(); }
  const CouplingTable& table() const { return table_; }
  const ClassicalPotential& potential() const { return u0_; }
  double alpha() const { return alpha_; }
  const std::vector<DiagonalCoupling>& couplings() const { return couplings_; }
  const OperatorMatrix& h0() const { return h0_; }
  const OperatorMatrix& v() const { return v_; }
  const OperatorMatrix& h() const { return h_; }
  const OperatorMatrix& hplus() const { return hplus_; }
  const StateVector& psi() const { return psi_; }
  double two_path_deviation() const { return two_path_deviation_; }

 private:
  Lattice lattice_;
  CouplingTable table_;
  ClassicalPotential u0_;
  double alpha_;
  std::vector<DiagonalCoupling> couplings_;
  OperatorMatrix h0_, v_, h_, hplus_;
  StateVector psi_;
  double two_path_deviation_ = 0.0;
};

/// XX nearest-neighbor couplings J with U0 = sum_x (x^1 + ... + x^d) s_x.
inline ModelInstance xxz_model(double coupling, double alpha, const Lattice& lattice) {
  const auto u = linear_height_field(lattice);
  return ModelInstance(lattice, xx_couplings(nearest_neighbor_pairs(lattice), coupling), linear_field(u), alpha);
}

}  // namespace gibbs_ground
