#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "gibbs_ground/errors.hpp"
#include "gibbs_ground/lattice.hpp"

namespace gibbs_ground {

/// Classical spins s in {-1,+1}^Lambda. Bit clear means s_x = +1, bit set means s_x = -1,
/// so the all-up configuration is the zero mask. The mask is also the quantum basis index.
struct SpinConfiguration {
  std::uint64_t bits = 0;

  constexpr SpinConfiguration() = default;
  constexpr explicit SpinConfiguration(std::uint64_t b) : bits(b) {}

  constexpr int spin(std::size_t x) const { return ((bits >> x) & 1U) ? -1 : 1; }
  /// s_[B] = prod_{x in B} s_x.
  constexpr int product(SiteSet b) const { return (std::popcount(bits & b.mask) & 1) ? -1 : 1; }
  constexpr bool operator==(const SpinConfiguration&) const = default;
};

/// s^A: negate the spins on A.
constexpr SpinConfiguration flip(SpinConfiguration s, SiteSet a) { return SpinConfiguration{s.bits ^ a.mask}; }

struct PotentialTerm {
  SiteSet sites;
  double coefficient = 0.0;
};

/// U0(s) = sum_B c_B s_[B], a multilinear polynomial in the spins.
class ClassicalPotential {
 public:
  ClassicalPotential() = default;

  explicit ClassicalPotential(std::vector<PotentialTerm> terms) : terms_(std::move(terms)) {
    std::map<std::uint64_t, std::size_t> seen;
    for (std::size_t i = 0; i < terms_.size(); ++i) {
      auto [it, inserted] = seen.emplace(terms_[i].sites.mask, i);
      if (!inserted) {
        throw ConstraintError("duplicate potential term for site set mask " + std::to_string(terms_[i].sites.mask) +
                              " (terms " + std::to_string(it->second) + " and " + std::to_string(i) + ")");
      }
      if (!std::isfinite(terms_[i].coefficient)) {
        throw DomainError("potential term " + std::to_string(i) + " has a non-finite coefficient");
      }
      support_ = support_ | terms_[i].sites;
    }
    auto top = support_.empty() ? 0 : 64 - std::countl_zero(support_.mask);
    incidence_.assign(static_cast<std::size_t>(top), {});
    for (std::size_t i = 0; i < terms_.size(); ++i) {
      for (auto x : terms_[i].sites.sites()) incidence_[x].push_back(i);
    }
  }

  const std::vector<PotentialTerm>& terms() const { return terms_; }
  SiteSet support() const { return support_; }
  bool empty() const { return terms_.empty(); }

  double operator()(SpinConfiguration s) const {
    double u = 0.0;
    for (const auto& t : terms_) u += t.coefficient * s.product(t.sites);
    return u;
  }

  /// W_A(s) = U0(s^A) - U0(s). Only monomials with odd overlap change sign,
  /// so W_A(s) = -2 sum_{|B cap A| odd} c_B s_[B].
  double flip_energy(SpinConfiguration s, SiteSet a) const {
    double w = 0.0;
    if (a.size() == 1) {
      auto x = static_cast<std::size_t>(std::countr_zero(a.mask));
      if (x >= incidence_.size()) return 0.0;
      for (auto i : incidence_[x]) w += terms_[i].coefficient * s.product(terms_[i].sites);
    } else {
      for (const auto& t : terms_) {
        if (std::popcount(t.sites.mask & a.mask) & 1) w += t.coefficient * s.product(t.sites);
      }
    }
    return -2.0 * w;
  }

  /// max_s |W_A(s)| over configurations of the sites that W_A depends on.
  double max_abs_flip_energy(SiteSet a) const {
    SiteSet dep;
    for (const auto& t : terms_) {
      if (std::popcount(t.sites.mask & a.mask) & 1) dep = dep | t.sites;
    }
    if (dep.size() > kClassicalSiteCap) {
      throw SizeLimitError("flip-energy support too large to enumerate", kClassicalSiteCap);
    }
    auto sites = dep.sites();
    double best = 0.0;
    for (std::uint64_t k = 0; k < (std::uint64_t{1} << sites.size()); ++k) {
      std::uint64_t bits = 0;
      for (std::size_t j = 0; j < sites.size(); ++j) {
        if ((k >> j) & 1U) bits |= std::uint64_t{1} << sites[j];
      }
      best = std::max(best, std::abs(flip_energy(SpinConfiguration{bits}, a)));
    }
    return best;
  }

 private:
  std::vector<PotentialTerm> terms_;
  SiteSet support_;
  std::vector<std::vector<std::size_t>> incidence_;
};

inline double eval_potential(const ClassicalPotential& u0, SpinConfiguration s) { return u0(s); }

inline double flip_energy(const ClassicalPotential& u0, SpinConfiguration s, SiteSet a) {
  return u0.flip_energy(s, a);
}

/// U0 = -K sum_<x,y> s_x s_y over nearest-neighbor pairs.
inline ClassicalPotential ising_nearest_neighbor(const Lattice& lattice, double coupling) {
  std::vector<PotentialTerm> terms;
  for (auto [x, y] : nearest_neighbor_pairs(lattice)) terms.push_back({SiteSet::of({x, y}), -coupling});
  return ClassicalPotential(std::move(terms));
}

/// U0 = sum_x u_x s_x; zero fields are dropped.
inline ClassicalPotential linear_field(std::span<const double> u) {
  std::vector<PotentialTerm> terms;
  for (std::size_t x = 0; x < u.size(); ++x) {
    if (u[x] != 0.0) terms.push_back({SiteSet::of({x}), u[x]});
  }
  return ClassicalPotential(std::move(terms));
}

inline std::vector<double> linear_height_field(const Lattice& lattice) {
  std::vector<double> u(lattice.size());
  for (std::size_t x = 0; x < u.size(); ++x) u[x] = linear_height(lattice, x);
  return u;
}

struct EnumerationOptions {
  std::size_t site_cap = kClassicalSiteCap;
  unsigned threads = 1;
};

namespace detail {

inline constexpr std::uint64_t kReductionChunks = 64;

inline void check_enumeration_cap(std::size_t sites, std::size_t cap) {
  if (sites > cap) {
    throw SizeLimitError("exact enumeration over " + std::to_string(sites) +
                             " sites is too large; use metropolis_estimate instead",
                         cap);
  }
}

/// Sums body(config) over [0, 2^n) in a fixed number of chunks, combined in
/// chunk order, so the result does not depend on the thread count.
template <class Acc, class Body>
Acc chunked_reduce(std::size_t sites, unsigned threads, Acc zero, Body body) {
  const std::uint64_t total = std::uint64_t{1} << sites;
  const std::uint64_t chunks = std::min<std::uint64_t>(kReductionChunks, total);
  std::vector<Acc> partial(chunks, zero);
  auto work = [&](std::uint64_t first_chunk, std::uint64_t stride) {
    for (std::uint64_t c = first_chunk; c < chunks; c += stride) {
      const std::uint64_t lo = total * c / chunks;
      const std::uint64_t hi = total * (c + 1) / chunks;
      Acc acc = zero;
      for (std::uint64_t b = lo; b < hi; ++b) body(acc, SpinConfiguration{b});
      partial[c] = acc;
    }
  };
  const unsigned n = std::max(1U, std::min<unsigned>(threads, static_cast<unsigned>(chunks)));
  if (n == 1) {
    work(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < n; ++t) pool.emplace_back(work, t, n);
  }
  Acc out = zero;
  for (const auto& p : partial) out += p;
  return out;
}

inline double min_potential(const ClassicalPotential& u0, std::size_t sites, unsigned threads) {
  struct MinAcc {
    double v = std::numeric_limits<double>::infinity();
    MinAcc& operator+=(const MinAcc& o) {
      v = std::min(v, o.v);
      return *this;
    }
  };
  return chunked_reduce(sites, threads, MinAcc{},
                        [&](MinAcc& acc, SpinConfiguration s) { acc.v = std::min(acc.v, u0(s)); })
      .v;
}

}  // namespace detail

/// Z = sum_s exp(-alpha U0(s)), by exact enumeration.
inline double partition_function(const ClassicalPotential& u0, double alpha, const Lattice& lattice,
                                 const EnumerationOptions& opts = {}) {
  if (!(alpha >= 0.0)) throw DomainError("alpha must be nonnegative");
  detail::check_enumeration_cap(lattice.size(), opts.site_cap);
  const double shift = alpha == 0.0 ? 0.0 : detail::min_potential(u0, lattice.size(), opts.threads);
  const double sum = detail::chunked_reduce(lattice.size(), opts.threads, 0.0, [&](double& acc, SpinConfiguration s) {
    acc += std::exp(-alpha * (u0(s) - shift));
  });
  return std::exp(-alpha * shift) * sum;
}

/// Exact Gibbs expectation Z^-1 sum_s f(s) exp(-alpha U0(s)).
template <class F>
double classical_expectation(F&& f, const ClassicalPotential& u0, double alpha, const Lattice& lattice,
                             const EnumerationOptions& opts = {}) {
  if (!(alpha >= 0.0)) throw DomainError("alpha must be nonnegative");
  detail::check_enumeration_cap(lattice.size(), opts.site_cap);
  struct Acc {
    double num = 0.0;
    double den = 0.0;
    Acc& operator+=(const Acc& o) {
      num += o.num;
      den += o.den;
      return *this;
    }
  };
  const double shift = alpha == 0.0 ? 0.0 : detail::min_potential(u0, lattice.size(), opts.threads);
  auto sums = detail::chunked_reduce(lattice.size(), opts.threads, Acc{}, [&](Acc& acc, SpinConfiguration s) {
    const double w = std::exp(-alpha * (u0(s) - shift));
    acc.num += w * static_cast<double>(f(s));
    acc.den += w;
  });
  return sums.num / sums.den;
}

using ConfigurationFunctional = std::function<double(SpinConfiguration)>;

struct MetropolisOptions {
  std::size_t sweeps = 10000;
  std::size_t burn_in = 1000;
  std::uint64_t seed = 1;
  std::size_t batches = 50;
};

struct McEstimate {
  double estimate = 0.0;
  double standard_error = 0.0;
};

struct MetropolisResult {
  std::vector<McEstimate> estimates;
  double acceptance_rate = 0.0;
  std::size_t measurements = 0;
};

/// Single-spin-flip Metropolis chain with acceptance min(1, exp(-alpha W_{x}(s))).
/// One sweep is |Lambda| uniformly chosen proposals; each observable is
/// measured once per sweep and its error is estimated by batch means.
inline MetropolisResult metropolis_estimates(std::span<const ConfigurationFunctional> observables,
                                             const ClassicalPotential& u0, double alpha, const Lattice& lattice,
                                             const MetropolisOptions& opts) {
  if (opts.sweeps == 0) throw DomainError("metropolis needs at least one sweep");
  if (!(alpha >= 0.0)) throw DomainError("alpha must be nonnegative");
  const std::size_t n = lattice.size();
  std::mt19937_64 rng(opts.seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  SpinConfiguration s;
  std::size_t accepted = 0;
  std::size_t proposed = 0;
  auto sweep = [&] {
    for (std::size_t step = 0; step < n; ++step) {
      const auto x = pick(rng);
      const SiteSet a{std::uint64_t{1} << x};
      const double w = u0.flip_energy(s, a);
      ++proposed;
      if (w <= 0.0 || unit(rng) < std::exp(-alpha * w)) {
        s = flip(s, a);
        ++accepted;
      }
    }
  };
  for (std::size_t i = 0; i < opts.burn_in; ++i) sweep();
  proposed = accepted = 0;

  const std::size_t k = observables.size();
  std::vector<std::vector<double>> series(k, std::vector<double>(opts.sweeps));
  for (std::size_t i = 0; i < opts.sweeps; ++i) {
    sweep();
    for (std::size_t j = 0; j < k; ++j) series[j][i] = observables[j](s);
  }

  const std::size_t nb = std::max<std::size_t>(1, std::min(opts.batches, opts.sweeps));
  const std::size_t bs = opts.sweeps / nb;
  MetropolisResult out;
  out.measurements = opts.sweeps;
  out.acceptance_rate = proposed ? static_cast<double>(accepted) / static_cast<double>(proposed) : 0.0;
  for (const auto& xs : series) {
    double total = 0.0;
    for (double v : xs) total += v;
    McEstimate e;
    e.estimate = total / static_cast<double>(xs.size());
    if (nb > 1) {
      std::vector<double> means(nb, 0.0);
      for (std::size_t b = 0; b < nb; ++b) {
        for (std::size_t i = b * bs; i < (b + 1) * bs; ++i) means[b] += xs[i];
        means[b] /= static_cast<double>(bs);
      }
      double mu = 0.0;
      for (double m : means) mu += m;
      mu /= static_cast<double>(nb);
      double var = 0.0;
      for (double m : means) var += (m - mu) * (m - mu);
      var /= static_cast<double>(nb - 1);
      e.standard_error = std::sqrt(var / static_cast<double>(nb));
    }
    out.estimates.push_back(e);
  }
  return out;
}

inline McEstimate metropolis_estimate(const ConfigurationFunctional& f, const ClassicalPotential& u0, double alpha,
                                      const Lattice& lattice, const MetropolisOptions& opts) {
  return metropolis_estimates(std::span<const ConfigurationFunctional>(&f, 1), u0, alpha, lattice, opts)
      .estimates.front();
}

}  // namespace gibbs_ground
