#pragma once

#include <cstddef>

#include "lsqcolor/model.hpp"
#include "lsqcolor/noise.hpp"

namespace lsqcolor {

/// J_tilde = J C with J_tilde' P J_tilde = I and C upper triangular.
struct OrthonormalizedDesign {
  CMatrix j_tilde;
  CMatrix c;
  /// R = C^-1, so that L'J = Q R with Q = L' J_tilde orthonormal.
  CMatrix r;
  /// Q = L' J_tilde, the whitened orthonormal basis.
  CMatrix q;
  CMatrix weight_lower;  ///< L from P = L L'

  /// C J_tilde' P m
  CVector solve(const CVector& m) const;
  /// C J_tilde' P Omega P J_tilde C'
  CMatrix covariance(const CMatrix& omega) const;
  /// ratio of extreme singular values of R
  double condition_number() const;
};

/// Modified Gram-Schmidt with one reorthogonalization pass, in the P inner
/// product.
OrthonormalizedDesign orthonormalize(const DesignMatrix& j, const WeightMatrix& p);
OrthonormalizedDesign orthonormalize(const CMatrix& j, const WeightMatrix& p);

// Ordinary least squares (P = identity).
Estimate ols(const DesignMatrix& j, const SampledSignal& m);
CMatrix ols_covariance_time(const DesignMatrix& j, const CMatrix& omega);
CMatrix ols_covariance_time(const DesignMatrix& j, const ToeplitzCovariance& omega);
/// (J'J)^-1 W (J'J)^-1 with W from the PSD by band quadrature on `grid_size` points.
CMatrix ols_covariance_freq(const DesignMatrix& j, const NoiseModel& model, std::size_t grid_size);

/// P = Omega^-1 through Cholesky whitening.
Estimate gls_time(const DesignMatrix& j, const SampledSignal& m, const ToeplitzCovariance& omega);

/// Grid used by gls_spectral when none is given.
std::size_t default_spectral_grid(Eigen::Index n, long pad);

/// Infinite zero-extension GLS: x* = <J|L_R^-1 J>^-1 <J|L_R^-1 m>, V = <J|L_R^-1 J>^-1,
/// with the inverse kernel F^-1{dt^2/S} truncated to |lag| <= pad.
Estimate gls_spectral(const DesignMatrix& j, const SampledSignal& m, const NoiseModel& model,
                      long pad, std::size_t grid_size = 0);

/// max |(J1'P1J1)^-1 J1'P1 (J0'P0J0)^-1 J0'P0 - (J1'J0'Pt J0 J1)^-1 J1'J0'Pt|
double transitivity_residual(const WeightMatrix& p0, const WeightMatrix& p1,
                             const WeightMatrix& p0_tilde, const CMatrix& j0, const CMatrix& j1);

/// A <= B in the Loewner order: eigmin(B - A) >= -tol.
bool loewner_leq(const CMatrix& a, const CMatrix& b, double tol);

}  // namespace lsqcolor
