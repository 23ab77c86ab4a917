#include "lsqcolor/model.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "lsqcolor/estimators.hpp"

namespace lsqcolor {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

bool all_finite(const CMatrix& a) { return a.allFinite(); }

double singular_condition(const CMatrix& a) {
  Eigen::JacobiSVD<CMatrix> svd(a);
  const auto& s = svd.singularValues();
  if (s.size() == 0) return 1.0;
  const double smin = s(s.size() - 1);
  return smin > 0 ? s(0) / smin : std::numeric_limits<double>::infinity();
}

}  // namespace

SampledSignal::SampledSignal(double dt, CVector values, long origin_index)
    : dt_(dt), values_(std::move(values)), origin_index_(origin_index) {
  if (!(dt_ > 0.0) || !std::isfinite(dt_))
    throw Error(ErrorKind::InvalidArgument, "time step must be positive and finite");
  if (values_.size() < 1) throw Error(ErrorKind::InvalidArgument, "signal needs at least one sample");
  if (!values_.allFinite()) throw Error(ErrorKind::InvalidArgument, "signal contains NaN or Inf");
}

std::string basis_label(const BasisSpec& spec) {
  struct Visitor {
    std::string operator()(const basis::Constant&) const { return "constant"; }
    std::string operator()(const basis::Polynomial& b) const {
      return "t^" + std::to_string(b.degree);
    }
    std::string operator()(const basis::Sinusoid& b) const {
      std::ostringstream os;
      os << "sin(2pi*" << b.frequency << "*t";
      if (b.phase != 0.0) os << "+" << b.phase;
      os << ")";
      return os.str();
    }
    std::string operator()(const basis::ComplexExponential& b) const {
      std::ostringstream os;
      os << "exp(i2pi*" << b.frequency << "*t)";
      return os.str();
    }
    std::string operator()(const basis::Tabulated& b) const { return b.label; }
    std::string operator()(const basis::Function& b) const { return b.label; }
  };
  return std::visit(Visitor{}, spec);
}

Eigen::Index numerical_rank(const CMatrix& a) {
  if (a.size() == 0) return 0;
  Eigen::JacobiSVD<CMatrix> svd(a);
  const auto& s = svd.singularValues();
  const double cutoff = double(a.rows()) * kEps * s(0);
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > cutoff) ++rank;
  return rank;
}

DesignMatrix::DesignMatrix(CMatrix entries, double dt, std::vector<std::string> labels,
                           long origin_index)
    : entries_(std::move(entries)), dt_(dt), labels_(std::move(labels)),
      origin_index_(origin_index) {
  if (!(dt_ > 0.0)) throw Error(ErrorKind::InvalidArgument, "time step must be positive");
  const auto n = entries_.rows();
  const auto p = entries_.cols();
  if (p < 1 || n < 1 || p > n) {
    std::ostringstream os;
    os << "design matrix must satisfy 1 <= p <= N, got N=" << n << " p=" << p;
    throw Error(ErrorKind::DimensionMismatch, os.str());
  }
  if (!all_finite(entries_)) throw Error(ErrorKind::InvalidBasis, "design matrix has non-finite entries");
  if (labels_.empty())
    for (Eigen::Index l = 0; l < p; ++l) labels_.push_back("f" + std::to_string(l + 1));
  if (Eigen::Index(labels_.size()) != p)
    throw Error(ErrorKind::DimensionMismatch, "one label per basis column expected");
  const auto rank = numerical_rank(entries_);
  if (rank < p) {
    std::ostringstream os;
    os << "design matrix has numerical rank " << rank << " < p=" << p;
    throw Error(ErrorKind::RankDeficient, os.str());
  }
  condition_ = singular_condition(entries_);
}

DesignMatrix build_design_matrix(std::span<const BasisSpec> basis, Eigen::Index n, double dt,
                                 long origin_index) {
  if (basis.empty()) throw Error(ErrorKind::InvalidBasis, "empty basis");
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "need at least one sample");
  if (!(dt > 0.0)) throw Error(ErrorKind::InvalidArgument, "time step must be positive");
  const auto p = Eigen::Index(basis.size());
  CMatrix j(n, p);
  std::vector<std::string> labels;
  constexpr double two_pi = 2.0 * std::numbers::pi;
  for (Eigen::Index l = 0; l < p; ++l) {
    const auto& spec = basis[std::size_t(l)];
    labels.push_back(basis_label(spec));
    for (Eigen::Index k = 0; k < n; ++k) {
      const double t = double(origin_index + k) * dt;
      cplx v;
      if (auto* c = std::get_if<basis::Constant>(&spec)) {
        v = c->value;
      } else if (auto* poly = std::get_if<basis::Polynomial>(&spec)) {
        if (poly->degree < 0) throw Error(ErrorKind::InvalidBasis, "negative polynomial degree");
        v = std::pow(t, poly->degree);
      } else if (auto* s = std::get_if<basis::Sinusoid>(&spec)) {
        v = std::sin(two_pi * s->frequency * t + s->phase);
      } else if (auto* e = std::get_if<basis::ComplexExponential>(&spec)) {
        v = std::polar(1.0, two_pi * e->frequency * t + e->phase);
      } else if (auto* tab = std::get_if<basis::Tabulated>(&spec)) {
        if (Eigen::Index(tab->samples.size()) < n)
          throw Error(ErrorKind::InvalidBasis, "tabulated basis '" + tab->label + "' has " +
                                                   std::to_string(tab->samples.size()) +
                                                   " samples, need " + std::to_string(n));
        v = tab->samples[std::size_t(k)];
      } else {
        const auto& fn = std::get<basis::Function>(spec);
        if (!fn.f) throw Error(ErrorKind::InvalidBasis, "basis '" + fn.label + "' has no callable");
        v = fn.f(t);
      }
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
        throw Error(ErrorKind::InvalidBasis,
                    "basis '" + labels.back() + "' is not finite at t=" + std::to_string(t));
      j(k, l) = v;
    }
  }
  return DesignMatrix(std::move(j), dt, std::move(labels), origin_index);
}

bool is_hermitian(const CMatrix& a, double rel_tol) {
  if (a.rows() != a.cols()) return false;
  const double scale = a.cwiseAbs().maxCoeff();
  const double asym = (a - a.adjoint()).cwiseAbs().maxCoeff();
  return asym <= rel_tol * scale;
}

CMatrix hermitian_part(const CMatrix& a) { return 0.5 * (a + a.adjoint()); }

void require_same_dt(double a, double b, const char* what) {
  if (std::abs(a - b) > 1e-12 * std::max(std::abs(a), std::abs(b)))
    throw Error(ErrorKind::DimensionMismatch, std::string("time step mismatch: ") + what);
}

WeightMatrix::WeightMatrix(CMatrix entries, WeightKind kind)
    : entries_(std::move(entries)), kind_(kind) {
  if (entries_.rows() != entries_.cols() || entries_.rows() < 1)
    throw Error(ErrorKind::DimensionMismatch, "weight matrix must be square");
  if (!entries_.allFinite()) throw Error(ErrorKind::NotPositiveDefinite, "weight matrix is not finite");
  if (!is_hermitian(entries_))
    throw Error(ErrorKind::NotPositiveDefinite, "weight matrix is not Hermitian");
  Eigen::LLT<CMatrix> llt(hermitian_part(entries_));
  if (llt.info() != Eigen::Success)
    throw Error(ErrorKind::NotPositiveDefinite, "Cholesky factorization of the weight failed");
  lower_ = llt.matrixL();
  if ((lower_.diagonal().real().array() <= 0.0).any())
    throw Error(ErrorKind::NotPositiveDefinite, "weight matrix is singular");
}

WeightMatrix WeightMatrix::identity(Eigen::Index n) {
  return WeightMatrix(CMatrix::Identity(n, n), WeightKind::Identity);
}

std::string_view method_name(Method m) noexcept {
  switch (m) {
    case Method::Ols: return "ols";
    case Method::GlsTime: return "gls_time";
    case Method::GlsSpectral: return "gls_spectral";
    case Method::MatchedFilter: return "matched_filter";
    case Method::WeightedLeastSquares: return "weighted_ls";
  }
  return "unknown";
}

std::string_view solve_path_name(SolvePath p) noexcept {
  return p == SolvePath::Orthonormalized ? "gram_schmidt" : "normal_equations";
}

cplx weighted_inner(const CVector& y, const CVector& z, const WeightMatrix& p) {
  if (y.size() != z.size() || y.size() != p.size())
    throw Error(ErrorKind::DimensionMismatch, "weighted_inner: vector and weight sizes differ");
  return y.dot(p.entries() * z);  // Eigen's dot conjugates the left operand
}

namespace {

void check_dims(const WeightMatrix& p, const DesignMatrix& j, Eigen::Index n, const char* what) {
  if (p.size() != j.rows() || n != j.rows()) {
    std::ostringstream os;
    os << what << ": N mismatch (weight " << p.size() << ", design " << j.rows() << ", data " << n
       << ")";
    throw Error(ErrorKind::DimensionMismatch, os.str());
  }
}

/// (J'PJ) factor for the normal-equation path.
Eigen::LLT<CMatrix> normal_factor(const WeightMatrix& p, const CMatrix& j) {
  const CMatrix g = hermitian_part(j.adjoint() * p.entries() * j);
  Eigen::LLT<CMatrix> llt(g);
  if (llt.info() != Eigen::Success)
    throw Error(ErrorKind::RankDeficient, "J'PJ is not invertible");
  const double dmax = g.diagonal().real().maxCoeff();
  const CMatrix l = llt.matrixL();
  const double pivot_min = l.diagonal().real().minCoeff();
  if (pivot_min * pivot_min <= double(j.rows()) * kEps * dmax)
    throw Error(ErrorKind::RankDeficient, "J'PJ is numerically singular");
  return llt;
}

}  // namespace

Estimate ls_estimate(const WeightMatrix& p, const DesignMatrix& j, const SampledSignal& m,
                     SolvePath path) {
  check_dims(p, j, m.size(), "ls_estimate");
  require_same_dt(j.dt(), m.dt(), "design vs signal");
  Estimate est;
  est.method = p.kind() == WeightKind::Identity ? Method::Ols : Method::WeightedLeastSquares;
  est.condition.solve_path = std::string(solve_path_name(path));
  if (path == SolvePath::Orthonormalized) {
    const auto od = orthonormalize(j, p);
    est.x_star = od.solve(m.values());
    est.condition.condition_number = od.condition_number();
  } else {
    const auto llt = normal_factor(p, j.entries());
    est.x_star = llt.solve(j.entries().adjoint() * (p.entries() * m.values()));
    est.condition.condition_number =
        singular_condition(p.cholesky_lower().adjoint() * j.entries());
  }
  const CVector r = m.values() - j.entries() * est.x_star;
  est.residual_norm = (p.cholesky_lower().adjoint() * r).norm();
  return est;
}

CMatrix ls_covariance(const WeightMatrix& p, const DesignMatrix& j, const CMatrix& omega,
                      SolvePath path) {
  if (omega.rows() != omega.cols()) throw Error(ErrorKind::DimensionMismatch, "Omega must be square");
  check_dims(p, j, omega.rows(), "ls_covariance");
  if (!is_hermitian(omega, 1e-10)) throw Error(ErrorKind::NotHermitian, "Omega is not Hermitian");
  if (path == SolvePath::Orthonormalized) return orthonormalize(j, p).covariance(omega);
  const auto llt = normal_factor(p, j.entries());
  const CMatrix a = llt.solve(j.entries().adjoint() * p.entries());  // (J'PJ)^-1 J'P
  return hermitian_part(a * omega * a.adjoint());
}

}  // namespace lsqcolor
