#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "gibbs_ground/errors.hpp"
#include "gibbs_ground/lattice.hpp"
#include "gibbs_ground/operators.hpp"

namespace gibbs_ground {

enum class SpectralMethod { dense, iterative };

inline const char* to_string(SpectralMethod m) { return m == SpectralMethod::dense ? "dense" : "iterative"; }

struct SpectralResult {
  double min_eigenvalue = 0.0;
  /// ||H v - lambda v|| for the returned unit vector.
  double residual = 0.0;
  SpectralMethod method = SpectralMethod::dense;
  std::size_t iterations = 0;
  Eigen::VectorXcd eigenvector;
};

struct SpectralOptions {
  std::size_t dense_dimension_cap = std::size_t{1} << kDenseEigenSiteCap;
  double hermitian_tolerance = 1e-14;
  double relative_tolerance = 1e-8;
  std::size_t krylov_dimension = 120;
  std::size_t max_restarts = 200;
  std::uint64_t seed = 20060124;
};

namespace detail {

inline SpectralResult dense_min_eigenvalue(const OperatorMatrix& h) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h.to_dense());
  if (solver.info() != Eigen::Success) throw ConvergenceError("dense Hermitian eigensolver failed");
  SpectralResult r;
  r.method = SpectralMethod::dense;
  r.min_eigenvalue = solver.eigenvalues()(0);
  r.eigenvector = solver.eigenvectors().col(0);
  r.residual = (h.sparse() * r.eigenvector - r.min_eigenvalue * r.eigenvector).norm();
  return r;
}

/// Explicitly restarted Lanczos with full reorthogonalization, restarting from
/// the current lowest Ritz vector.
inline SpectralResult lanczos_min_eigenvalue(const OperatorMatrix& h, const SpectralOptions& opts) {
  const auto dim = static_cast<Eigen::Index>(h.dimension());
  const auto& a = h.sparse();
  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  Eigen::VectorXcd start(dim);
  for (Eigen::Index k = 0; k < dim; ++k) start[k] = cplx{unit(rng), unit(rng)};
  start.normalize();

  const auto m = static_cast<Eigen::Index>(std::min<std::size_t>(opts.krylov_dimension, h.dimension()));
  Eigen::MatrixXcd basis(dim, m);
  SpectralResult best;
  best.method = SpectralMethod::iterative;
  std::size_t matvecs = 0;

  for (std::size_t restart = 0; restart <= opts.max_restarts; ++restart) {
    std::vector<double> diag;
    std::vector<double> off;
    basis.col(0) = start;
    Eigen::Index used = 0;
    for (Eigen::Index j = 0; j < m; ++j) {
      used = j + 1;
      Eigen::VectorXcd w = a * basis.col(j);
      ++matvecs;
      diag.push_back(basis.col(j).dot(w).real());
      // Two passes of classical Gram-Schmidt against the whole basis.
      for (int pass = 0; pass < 2; ++pass) {
        w -= basis.leftCols(j + 1) * (basis.leftCols(j + 1).adjoint() * w);
      }
      const double beta = w.norm();
      if (j + 1 == m) break;
      if (beta <= 1e-14 * std::max(1.0, std::abs(diag.back()))) break;
      off.push_back(beta);
      basis.col(j + 1) = w / beta;
    }

    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(used, used);
    for (Eigen::Index k = 0; k < used; ++k) t(k, k) = diag[static_cast<std::size_t>(k)];
    for (Eigen::Index k = 0; k + 1 < used; ++k) t(k, k + 1) = t(k + 1, k) = off[static_cast<std::size_t>(k)];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> small(t);
    const double theta = small.eigenvalues()(0);
    const double spread = std::max(std::abs(small.eigenvalues()(0)), std::abs(small.eigenvalues()(used - 1)));
    Eigen::VectorXcd ritz = basis.leftCols(used) * small.eigenvectors().col(0).cast<cplx>();
    ritz.normalize();
    const double res = (a * ritz - theta * ritz).norm();
    ++matvecs;

    best.min_eigenvalue = theta;
    best.residual = res;
    best.eigenvector = ritz;
    best.iterations = matvecs;
    if (res <= opts.relative_tolerance * std::max(spread, 1e-300) || res == 0.0) return best;
    start = ritz;
  }
  throw ConvergenceError("Lanczos did not converge after " + std::to_string(opts.max_restarts) +
                         " restarts (residual " + std::to_string(best.residual) + ")");
}

}  // namespace detail

/// Smallest eigenvalue of a Hermitian operator: full dense diagonalization up to
/// opts.dense_dimension_cap, Lanczos above it.
inline SpectralResult min_eigenvalue(const OperatorMatrix& h, const SpectralOptions& opts = {}) {
  const double dev = h.hermiticity_deviation();
  if (dev > opts.hermitian_tolerance * h.max_abs()) {
    throw DomainError("min_eigenvalue needs a Hermitian operator; max |H - H^dagger| = " + std::to_string(dev));
  }
  if (h.dimension() <= opts.dense_dimension_cap) return detail::dense_min_eigenvalue(h);
  return detail::lanczos_min_eigenvalue(h, opts);
}

}  // namespace gibbs_ground
