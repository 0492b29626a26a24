#pragma once

#include <bit>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gibbs_ground/errors.hpp"

namespace gibbs_ground {

/// Width of the site bitmask; no lattice may exceed this many sites.
inline constexpr std::size_t kMaskWidth = 64;
inline constexpr std::size_t kClassicalSiteCap = 24;
inline constexpr std::size_t kQuantumSiteCap = 14;
inline constexpr std::size_t kDenseEigenSiteCap = 12;

/// Subset of lattice sites, stored as a bitmask over linear site indices.
struct SiteSet {
  std::uint64_t mask = 0;

  constexpr SiteSet() = default;
  constexpr explicit SiteSet(std::uint64_t m) : mask(m) {}

  static SiteSet of(std::span<const std::size_t> sites) {
    SiteSet s;
    for (auto x : sites) {
      if (x >= kMaskWidth) throw DomainError("site index " + std::to_string(x) + " exceeds mask width");
      s.mask |= std::uint64_t{1} << x;
    }
    return s;
  }
  static SiteSet of(std::initializer_list<std::size_t> sites) {
    return of(std::span<const std::size_t>(sites.begin(), sites.size()));
  }

  constexpr std::size_t size() const { return static_cast<std::size_t>(std::popcount(mask)); }
  constexpr bool empty() const { return mask == 0; }
  constexpr bool contains(std::size_t x) const { return (mask >> x) & 1U; }
  constexpr bool disjoint(SiteSet o) const { return (mask & o.mask) == 0; }

  std::vector<std::size_t> sites() const {
    std::vector<std::size_t> out;
    for (auto m = mask; m != 0; m &= m - 1) out.push_back(static_cast<std::size_t>(std::countr_zero(m)));
    return out;
  }

  constexpr SiteSet operator|(SiteSet o) const { return SiteSet{mask | o.mask}; }
  constexpr SiteSet operator&(SiteSet o) const { return SiteSet{mask & o.mask}; }
  constexpr SiteSet operator^(SiteSet o) const { return SiteSet{mask ^ o.mask}; }
  constexpr bool operator==(const SiteSet&) const = default;
  constexpr auto operator<=>(const SiteSet&) const = default;
};

using Coordinate = std::vector<int>;

/// Finite hypercube {0..L-1}^d with free boundaries.
///
/// Sites are numbered row-major with coordinate 0 varying fastest, so the
/// linear index of x is sum_k x^k L^k.
class Lattice {
 public:
  Lattice(std::size_t dimension, std::size_t side_length, std::size_t site_cap = kClassicalSiteCap)
      : dimension_(dimension), side_(side_length) {
    if (dimension == 0) throw DomainError("lattice dimension must be positive");
    if (side_length == 0) throw DomainError("lattice side length must be positive");
    std::size_t n = 1;
    for (std::size_t k = 0; k < dimension; ++k) {
      n *= side_length;
      if (n > site_cap || n > kMaskWidth) {
        throw SizeLimitError("hypercube " + std::to_string(side_length) + "^" + std::to_string(dimension) +
                                 " exceeds the site cap",
                             site_cap < kMaskWidth ? site_cap : kMaskWidth);
      }
    }
    sites_ = n;
  }

  std::size_t dimension() const { return dimension_; }
  std::size_t side_length() const { return side_; }
  std::size_t size() const { return sites_; }
  SiteSet all_sites() const { return SiteSet{sites_ == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << sites_) - 1}; }

  Coordinate coordinate(std::size_t index) const {
    Coordinate x(dimension_);
    for (std::size_t k = 0; k < dimension_; ++k) {
      x[k] = static_cast<int>(index % side_);
      index /= side_;
    }
    return x;
  }

  std::size_t index(const Coordinate& x) const {
    if (x.size() != dimension_) throw DimensionError("coordinate has wrong dimension");
    std::size_t idx = 0;
    for (std::size_t k = dimension_; k-- > 0;) {
      if (x[k] < 0 || static_cast<std::size_t>(x[k]) >= side_) throw DomainError("coordinate outside lattice");
      idx = idx * side_ + static_cast<std::size_t>(x[k]);
    }
    return idx;
  }

  bool contains(SiteSet a) const { return (a.mask & ~all_sites().mask) == 0; }

 private:
  std::size_t dimension_;
  std::size_t side_;
  std::size_t sites_ = 0;
};

inline Lattice build_hypercube(std::size_t dimension, std::size_t side_length,
                               std::size_t site_cap = kClassicalSiteCap) {
  return Lattice(dimension, side_length, site_cap);
}

/// u_x = x^1 + ... + x^d.
inline int linear_height(const Coordinate& x) {
  int u = 0;
  for (int c : x) u += c;
  return u;
}

inline int linear_height(const Lattice& lattice, std::size_t site) { return linear_height(lattice.coordinate(site)); }

/// Nearest-neighbor pairs, each listed once with the lexicographically
/// smaller coordinate first. Ordered by first site, then by axis.
inline std::vector<std::pair<std::size_t, std::size_t>> nearest_neighbor_pairs(const Lattice& lattice) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  const std::size_t L = lattice.side_length();
  for (std::size_t i = 0; i < lattice.size(); ++i) {
    auto x = lattice.coordinate(i);
    std::size_t stride = 1;
    for (std::size_t k = 0; k < lattice.dimension(); ++k, stride *= L) {
      // x + e_k differs only in coordinate k and is larger there, hence lexicographically larger.
      if (static_cast<std::size_t>(x[k]) + 1 < L) pairs.emplace_back(i, i + stride);
    }
  }
  return pairs;
}

}  // namespace gibbs_ground
