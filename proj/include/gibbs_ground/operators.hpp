#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cmath>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "gibbs_ground/classical.hpp"
#include "gibbs_ground/errors.hpp"
#include "gibbs_ground/lattice.hpp"

namespace gibbs_ground {

using cplx = std::complex<double>;

enum class Axis : int { S1 = 1, S2 = 2, S3 = 3 };

inline Axis axis_from_int(int axis) {
  if (axis < 1 || axis > 3) throw DomainError("Pauli axis must be 1, 2 or 3, got " + std::to_string(axis));
  return static_cast<Axis>(axis);
}

/// Pauli matrices in the basis psi0(+1) = (1,0), psi0(-1) = (0,1).
/// S3 is the diagonal one and S1 flips the spin.
inline Eigen::Matrix2cd pauli(Axis axis) {
  const cplx i{0.0, 1.0};
  Eigen::Matrix2cd m;
  switch (axis) {
    case Axis::S1:
      m << 0.0, 1.0, 1.0, 0.0;
      break;
    case Axis::S2:
      m << 0.0, -i, i, 0.0;
      break;
    case Axis::S3:
      m << 1.0, 0.0, 0.0, -1.0;
      break;
  }
  return m;
}

inline Eigen::Matrix2cd pauli(int axis) { return pauli(axis_from_int(axis)); }

/// Amplitudes indexed by the SpinConfiguration bitmask.
class StateVector {
 public:
  StateVector() = default;
  explicit StateVector(std::size_t sites) : sites_(sites), amp_(Eigen::VectorXcd::Zero(dimension_of(sites))) {}
  StateVector(std::size_t sites, Eigen::VectorXcd amplitudes) : sites_(sites), amp_(std::move(amplitudes)) {
    if (static_cast<std::size_t>(amp_.size()) != dimension_of(sites)) {
      throw DimensionError("state vector length does not match 2^sites");
    }
  }

  static std::size_t dimension_of(std::size_t sites) {
    if (sites >= kMaskWidth) throw SizeLimitError("Hilbert space dimension overflows", kMaskWidth - 1);
    return std::size_t{1} << sites;
  }

  std::size_t sites() const { return sites_; }
  std::size_t dimension() const { return static_cast<std::size_t>(amp_.size()); }
  const Eigen::VectorXcd& amplitudes() const { return amp_; }
  Eigen::VectorXcd& amplitudes() { return amp_; }
  cplx operator[](SpinConfiguration s) const { return amp_[static_cast<Eigen::Index>(s.bits)]; }
  cplx& operator[](SpinConfiguration s) { return amp_[static_cast<Eigen::Index>(s.bits)]; }
  double norm() const { return amp_.norm(); }

 private:
  std::size_t sites_ = 0;
  Eigen::VectorXcd amp_;
};

/// Psi0(s) = tensor_x psi0(s_x).
inline StateVector basis_vector(SpinConfiguration s, std::size_t sites) {
  StateVector v(sites);
  if (s.bits >= v.dimension()) throw DomainError("configuration has spins outside the lattice");
  v[s] = 1.0;
  return v;
}

/// Sparse complex square operator on the 2^|Lambda| tensor-product space.
/// Explicit zeros are never stored.
class OperatorMatrix {
 public:
  using Sparse = Eigen::SparseMatrix<cplx, Eigen::RowMajor, std::int64_t>;
  using Triplet = Eigen::Triplet<cplx, std::int64_t>;

  OperatorMatrix() = default;
  OperatorMatrix(std::size_t sites, Sparse m) : sites_(sites), m_(std::move(m)) {
    const auto dim = static_cast<Eigen::Index>(StateVector::dimension_of(sites));
    if (m_.rows() != dim || m_.cols() != dim) throw DimensionError("operator dimension does not match 2^sites");
    m_.prune([](std::int64_t, std::int64_t, const cplx& v) { return v != cplx{0.0, 0.0}; });
    m_.makeCompressed();
  }

  /// Duplicate triplets are summed.
  static OperatorMatrix from_triplets(std::size_t sites, const std::vector<Triplet>& triplets) {
    const auto dim = static_cast<Eigen::Index>(StateVector::dimension_of(sites));
    Sparse m(dim, dim);
    m.setFromTriplets(triplets.begin(), triplets.end());
    return OperatorMatrix(sites, std::move(m));
  }

  static OperatorMatrix zero(std::size_t sites) { return from_triplets(sites, {}); }

  static OperatorMatrix identity(std::size_t sites) {
    const auto dim = static_cast<Eigen::Index>(StateVector::dimension_of(sites));
    Sparse m(dim, dim);
    m.setIdentity();
    return OperatorMatrix(sites, std::move(m));
  }

  std::size_t sites() const { return sites_; }
  std::size_t dimension() const { return static_cast<std::size_t>(m_.rows()); }
  std::size_t nonzeros() const { return static_cast<std::size_t>(m_.nonZeros()); }
  const Sparse& sparse() const { return m_; }

  cplx coeff(std::uint64_t row, std::uint64_t col) const {
    return m_.coeff(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col));
  }

  /// Largest absolute entry.
  double max_abs() const {
    double best = 0.0;
    for (Eigen::Index k = 0; k < m_.nonZeros(); ++k) best = std::max(best, std::abs(m_.valuePtr()[k]));
    return best;
  }

  OperatorMatrix adjoint() const { return OperatorMatrix(sites_, Sparse(m_.adjoint())); }

  double hermiticity_deviation() const { return max_abs_difference(*this, adjoint()); }

  bool is_hermitian(double relative_tol = 1e-14) const {
    return hermiticity_deviation() <= relative_tol * max_abs();
  }

  Eigen::MatrixXcd to_dense() const { return Eigen::MatrixXcd(m_); }

  friend double max_abs_difference(const OperatorMatrix& a, const OperatorMatrix& b) {
    check_same(a, b);
    Sparse d = a.m_ - b.m_;
    double best = 0.0;
    for (Eigen::Index k = 0; k < d.nonZeros(); ++k) best = std::max(best, std::abs(d.valuePtr()[k]));
    return best;
  }

  friend OperatorMatrix operator+(const OperatorMatrix& a, const OperatorMatrix& b) {
    check_same(a, b);
    return OperatorMatrix(a.sites_, Sparse(a.m_ + b.m_));
  }
  friend OperatorMatrix operator-(const OperatorMatrix& a, const OperatorMatrix& b) {
    check_same(a, b);
    return OperatorMatrix(a.sites_, Sparse(a.m_ - b.m_));
  }
  friend OperatorMatrix operator*(const OperatorMatrix& a, const OperatorMatrix& b) {
    check_same(a, b);
    return OperatorMatrix(a.sites_, Sparse(a.m_ * b.m_));
  }
  friend OperatorMatrix operator*(cplx c, const OperatorMatrix& a) { return OperatorMatrix(a.sites_, Sparse(c * a.m_)); }

 private:
  static void check_same(const OperatorMatrix& a, const OperatorMatrix& b) {
    if (a.sites_ != b.sites_) throw DimensionError("operators act on different lattices");
  }

  std::size_t sites_ = 0;
  Sparse m_;
};

double max_abs_difference(const OperatorMatrix& a, const OperatorMatrix& b);

/// S^l_[A]: pauli(l) on every site of A, identity elsewhere. Built column by
/// column from the 2x2 entries.
inline OperatorMatrix product_operator(Axis axis, SiteSet a, std::size_t sites) {
  const auto dim = StateVector::dimension_of(sites);
  if (a.mask >= dim && !a.empty()) throw DomainError("site set extends beyond the lattice");
  const Eigen::Matrix2cd p = pauli(axis);
  const auto members = a.sites();
  const std::uint64_t row_flip = axis == Axis::S3 ? 0 : a.mask;
  std::vector<OperatorMatrix::Triplet> t;
  t.reserve(dim);
  for (std::uint64_t col = 0; col < dim; ++col) {
    const std::uint64_t row = col ^ row_flip;
    cplx v{1.0, 0.0};
    for (auto x : members) v *= p((row >> x) & 1U, (col >> x) & 1U);
    t.emplace_back(static_cast<std::int64_t>(row), static_cast<std::int64_t>(col), v);
  }
  return OperatorMatrix::from_triplets(sites, t);
}

inline OperatorMatrix product_operator(int axis, SiteSet a, std::size_t sites) {
  return product_operator(axis_from_int(axis), a, sites);
}

/// diag(g(s)).
template <class G>
OperatorMatrix diagonal_operator(G&& g, std::size_t sites) {
  const auto dim = StateVector::dimension_of(sites);
  std::vector<OperatorMatrix::Triplet> t;
  t.reserve(dim);
  for (std::uint64_t b = 0; b < dim; ++b) {
    const cplx v = static_cast<cplx>(g(SpinConfiguration{b}));
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      throw DomainError("diagonal function is not finite at configuration " + std::to_string(b));
    }
    if (v != cplx{0.0, 0.0}) t.emplace_back(static_cast<std::int64_t>(b), static_cast<std::int64_t>(b), v);
  }
  return OperatorMatrix::from_triplets(sites, t);
}

inline StateVector apply(const OperatorMatrix& op, const StateVector& v) {
  if (op.dimension() != v.dimension()) {
    throw DimensionError("operator of dimension " + std::to_string(op.dimension()) + " applied to vector of dimension " +
                         std::to_string(v.dimension()));
  }
  return StateVector(v.sites(), op.sparse() * v.amplitudes());
}

/// (F, G) = sum_s conj(F(s)) G(s).
inline cplx inner_product(const StateVector& f, const StateVector& g) {
  if (f.dimension() != g.dimension()) throw DimensionError("inner product of vectors with different dimensions");
  return f.amplitudes().dot(g.amplitudes());
}

/// (F, G)_{U0} = sum_s exp(-alpha U0(s)) conj(F(s)) G(s).
inline cplx weighted_inner_product(const StateVector& f, const StateVector& g, const ClassicalPotential& u0,
                                   double alpha) {
  if (f.dimension() != g.dimension()) throw DimensionError("inner product of vectors with different dimensions");
  cplx acc{0.0, 0.0};
  for (std::uint64_t b = 0; b < f.dimension(); ++b) {
    const SpinConfiguration s{b};
    acc += std::exp(-alpha * u0(s)) * std::conj(f[s]) * g[s];
  }
  return acc;
}

}  // namespace gibbs_ground
