#include "lsqcolor/estimators.hpp"

#include <algorithm>
#include <bit>
#include <limits>
#include <sstream>

#include "lsqcolor/spectral.hpp"

namespace lsqcolor {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

/// Modified Gram-Schmidt, two passes, on the columns of an already whitened
/// design b. Fills q (N x p, orthonormal) and r (upper triangular).
void gram_schmidt(const CMatrix& b, CMatrix& q, CMatrix& r) {
  const auto n = b.rows();
  const auto p = b.cols();
  q.resize(n, p);
  r = CMatrix::Zero(p, p);
  double largest = 0.0;
  for (Eigen::Index l = 0; l < p; ++l) {
    CVector v = b.col(l);
    largest = std::max(largest, v.norm());
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index i = 0; i < l; ++i) {
        const cplx h = q.col(i).dot(v);
        r(i, l) += h;
        v -= h * q.col(i);
      }
    }
    const double pivot = v.norm();
    largest = std::max(largest, pivot);
    if (!(pivot > double(n) * kEps * largest)) {
      std::ostringstream os;
      os << "Gram-Schmidt pivot " << pivot << " of column " << l + 1
         << " is below the rank threshold";
      throw Error(ErrorKind::RankDeficient, os.str());
    }
    r(l, l) = pivot;
    q.col(l) = v / pivot;
  }
}

OrthonormalizedDesign from_whitened(const CMatrix& b, CMatrix lower) {
  OrthonormalizedDesign od;
  gram_schmidt(b, od.q, od.r);
  od.c = od.r.triangularView<Eigen::Upper>().solve(CMatrix::Identity(od.r.rows(), od.r.cols()));
  od.j_tilde = lower.size() == 0 ? od.q
                                 : CMatrix(lower.adjoint().triangularView<Eigen::Upper>().solve(od.q));
  od.weight_lower = std::move(lower);
  return od;
}

OrthonormalizedDesign orthonormalize_identity(const CMatrix& j) { return from_whitened(j, CMatrix()); }

void check_rows(const DesignMatrix& j, Eigen::Index n, const char* what) {
  if (j.rows() != n) {
    std::ostringstream os;
    os << what << ": design has " << j.rows() << " rows, data has " << n;
    throw Error(ErrorKind::DimensionMismatch, os.str());
  }
}

/// (J'PJ)^-1 J'P
CMatrix ls_operator(const WeightMatrix& p, const CMatrix& j) {
  const auto od = orthonormalize(j, p);
  const CMatrix g = od.q.adjoint() * od.weight_lower.adjoint();
  return od.r.triangularView<Eigen::Upper>().solve(g);
}

double triangular_condition(const CMatrix& r) {
  Eigen::JacobiSVD<CMatrix> svd(r);
  const auto& s = svd.singularValues();
  return s(s.size() - 1) > 0 ? s(0) / s(s.size() - 1) : std::numeric_limits<double>::infinity();
}

}  // namespace

CVector OrthonormalizedDesign::solve(const CVector& m) const {
  const CVector whitened = weight_lower.size() == 0 ? m : CVector(weight_lower.adjoint() * m);
  if (whitened.size() != q.rows())
    throw Error(ErrorKind::DimensionMismatch, "data length differs from design rows");
  return r.triangularView<Eigen::Upper>().solve(q.adjoint() * whitened);
}

CMatrix OrthonormalizedDesign::covariance(const CMatrix& omega) const {
  if (omega.rows() != q.rows() || omega.cols() != q.rows())
    throw Error(ErrorKind::DimensionMismatch, "Omega dimension differs from design rows");
  // C J_tilde' P = R^-1 Q' L'
  const CMatrix g = weight_lower.size() == 0 ? CMatrix(q.adjoint())
                                             : CMatrix(q.adjoint() * weight_lower.adjoint());
  const CMatrix t = r.triangularView<Eigen::Upper>().solve(g);
  return hermitian_part(t * omega * t.adjoint());
}

double OrthonormalizedDesign::condition_number() const { return triangular_condition(r); }

OrthonormalizedDesign orthonormalize(const CMatrix& j, const WeightMatrix& p) {
  if (p.size() != j.rows())
    throw Error(ErrorKind::DimensionMismatch, "weight size differs from design rows");
  if (j.cols() < 1 || j.cols() > j.rows())
    throw Error(ErrorKind::DimensionMismatch, "design must satisfy 1 <= p <= N");
  const CMatrix& lower = p.cholesky_lower();
  return from_whitened(lower.adjoint() * j, lower);
}

OrthonormalizedDesign orthonormalize(const DesignMatrix& j, const WeightMatrix& p) {
  return orthonormalize(j.entries(), p);
}

Estimate ols(const DesignMatrix& j, const SampledSignal& m) {
  check_rows(j, m.size(), "ols");
  require_same_dt(j.dt(), m.dt(), "design vs signal");
  const auto od = orthonormalize_identity(j.entries());
  Estimate est;
  est.method = Method::Ols;
  est.x_star = od.solve(m.values());
  est.condition = {od.condition_number(), std::string(solve_path_name(SolvePath::Orthonormalized))};
  est.residual_norm = (m.values() - j.entries() * est.x_star).norm();
  return est;
}

CMatrix ols_covariance_time(const DesignMatrix& j, const CMatrix& omega) {
  if (omega.rows() != j.rows() || omega.cols() != j.rows())
    throw Error(ErrorKind::DimensionMismatch, "Omega dimension differs from design rows");
  return orthonormalize_identity(j.entries()).covariance(omega);
}

CMatrix ols_covariance_time(const DesignMatrix& j, const ToeplitzCovariance& omega) {
  return ols_covariance_time(j, omega.dense());
}

CMatrix ols_covariance_freq(const DesignMatrix& j, const NoiseModel& model, std::size_t grid_size) {
  require_same_dt(j.dt(), model.dt(), "design vs noise model");
  const double dt = j.dt();
  const Spectrum fj = dtft(ZeroExtendedSequence::from_design(j), dt, grid_size);
  Eigen::VectorXd s(fj.freqs.size());
  for (Eigen::Index i = 0; i < s.size(); ++i) s(i) = model.psd(fj.freqs(i));
  // W = (1/dt^2) int S conj(F{J}_k) F{J}_l df
  const CMatrix w = (band_weight(grid_size, dt) / (dt * dt)) *
                    (fj.values.adjoint() * s.cast<cplx>().asDiagonal() * fj.values);
  const auto od = orthonormalize_identity(j.entries());
  const CMatrix gram_inv = od.c * od.c.adjoint();  // (J'J)^-1
  return hermitian_part(gram_inv * w * gram_inv);
}

Estimate gls_time(const DesignMatrix& j, const SampledSignal& m, const ToeplitzCovariance& omega) {
  check_rows(j, m.size(), "gls_time");
  if (omega.size() != j.rows())
    throw Error(ErrorKind::DimensionMismatch, "Omega dimension differs from design rows");
  require_same_dt(j.dt(), m.dt(), "design vs signal");
  const auto lower = omega.cholesky_lower().triangularView<Eigen::Lower>();
  const CMatrix a = lower.solve(j.entries());
  const CVector b = lower.solve(m.values());
  const auto od = orthonormalize_identity(a);
  Estimate est;
  est.method = Method::GlsTime;
  est.x_star = od.solve(b);
  est.covariance = hermitian_part(od.c * od.c.adjoint());
  est.condition = {od.condition_number(), "cholesky_whitening+gram_schmidt"};
  est.residual_norm = lower.solve(m.values() - j.entries() * est.x_star).norm();
  return est;
}

std::size_t default_spectral_grid(Eigen::Index n, long pad) {
  return std::bit_ceil(std::size_t(8 * (n + 2 * pad)));
}

Estimate gls_spectral(const DesignMatrix& j, const SampledSignal& m, const NoiseModel& model,
                      long pad, std::size_t grid_size) {
  check_rows(j, m.size(), "gls_spectral");
  require_same_dt(j.dt(), m.dt(), "design vs signal");
  require_same_dt(j.dt(), model.dt(), "design vs noise model");
  if (j.origin_index() != m.origin_index())
    throw Error(ErrorKind::DimensionMismatch, "design and signal start at different indices");
  if (pad < 0) throw Error(ErrorKind::InvalidArgument, "pad must be nonnegative");
  if (model.silent()) throw Error(ErrorKind::SpectralZero, "noise PSD is identically zero");
  if (grid_size == 0) grid_size = default_spectral_grid(j.rows(), pad);
  if (Eigen::Index(grid_size) < j.rows())
    throw Error(ErrorKind::GridTooCoarse, "spectral grid smaller than the data length");

  // F{R} = S, so L_R^-1 has spectrum dt^2 / S.
  Spectrum kernel;
  kernel.dt = model.dt();
  kernel.freqs = frequency_grid(grid_size, kernel.dt);
  kernel.values.resize(kernel.freqs.size(), 1);
  for (Eigen::Index i = 0; i < kernel.freqs.size(); ++i) kernel.values(i, 0) = model.psd(kernel.freqs(i));
  const auto inv = inverse_kernel(kernel, pad);

  const auto jb = ZeroExtendedSequence::from_design(j);
  const auto mb = ZeroExtendedSequence::from_signal(m);
  const CMatrix info = hermitian_part(matrix_scalar_product(jb, gen_convolve(inv, jb)));
  const CMatrix proj = matrix_scalar_product(jb, gen_convolve(inv, mb));

  Eigen::LLT<CMatrix> llt(info);
  if (llt.info() != Eigen::Success)
    throw Error(ErrorKind::RankDeficient, "<J|L_R^-1 J> is not invertible");
  Estimate est;
  est.method = Method::GlsSpectral;
  est.x_star = llt.solve(proj);
  est.covariance = hermitian_part(llt.solve(CMatrix::Identity(info.rows(), info.cols())));
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(info, Eigen::EigenvaluesOnly);
  const auto& ev = eig.eigenvalues();
  est.condition = {std::sqrt(ev(ev.size() - 1) / ev(0)), "spectral_deconvolution"};
  const CVector resid = m.values() - j.entries() * est.x_star;
  const auto rb = ZeroExtendedSequence(m.origin_index(), resid);
  est.residual_norm = std::sqrt(std::max(0.0, matrix_scalar_product(rb, gen_convolve(inv, rb))(0, 0).real()));
  return est;
}

double transitivity_residual(const WeightMatrix& p0, const WeightMatrix& p1,
                             const WeightMatrix& p0_tilde, const CMatrix& j0, const CMatrix& j1) {
  const auto n0 = j0.rows();
  const auto n1 = j0.cols();
  const auto n2 = j1.cols();
  if (j1.rows() != n1 || p0.size() != n0 || p0_tilde.size() != n0 || p1.size() != n1 ||
      !(n2 <= n1 && n1 <= n0))
    throw Error(ErrorKind::DimensionMismatch, "transitivity: incompatible dimensions");
  if (numerical_rank(j0) < n1 || numerical_rank(j1) < n2)
    throw Error(ErrorKind::RankDeficient, "transitivity: J0 or J1 lacks full column rank");
  const CMatrix chained = ls_operator(p1, j1) * ls_operator(p0, j0);
  const CMatrix direct = ls_operator(p0_tilde, j0 * j1);
  return (chained - direct).cwiseAbs().maxCoeff();
}

bool loewner_leq(const CMatrix& a, const CMatrix& b, double tol) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.rows() != a.cols())
    throw Error(ErrorKind::DimensionMismatch, "loewner_leq: shapes differ");
  if (!is_hermitian(a, 1e-10) || !is_hermitian(b, 1e-10))
    throw Error(ErrorKind::NotHermitian, "loewner_leq needs Hermitian inputs");
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(hermitian_part(b - a), Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff() >= -tol;
}

}  // namespace lsqcolor
