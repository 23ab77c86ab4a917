#pragma once

// Measurement model m = J x + e, weighted scalar products and the general
// weighted least-squares map (P, J, m) -> (J'PJ)^-1 J'P m.

#include <complex>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "lsqcolor/error.hpp"

namespace lsqcolor {

using cplx = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

/// Uniformly sampled complex series; sample k (0-based storage) sits at
/// time (origin_index + k) * dt.
class SampledSignal {
 public:
  SampledSignal(double dt, CVector values, long origin_index = 1);

  double dt() const noexcept { return dt_; }
  const CVector& values() const noexcept { return values_; }
  long origin_index() const noexcept { return origin_index_; }
  Eigen::Index size() const noexcept { return values_.size(); }
  double time(Eigen::Index k) const noexcept { return double(origin_index_ + k) * dt_; }

 private:
  double dt_;
  CVector values_;
  long origin_index_;
};

// Basis function specifications, evaluated at t = k * dt.
namespace basis {
struct Constant {
  cplx value{1.0, 0.0};
};
/// t^degree
struct Polynomial {
  int degree = 1;
};
/// sin(2 pi f0 t + phase)
struct Sinusoid {
  double frequency = 0.0;
  double phase = 0.0;
};
/// exp(i (2 pi f0 t + phase))
struct ComplexExponential {
  double frequency = 0.0;
  double phase = 0.0;
};
struct Tabulated {
  std::vector<cplx> samples;
  std::string label = "tabulated";
};
struct Function {
  std::function<cplx(double)> f;
  std::string label = "function";
};
}  // namespace basis

using BasisSpec = std::variant<basis::Constant, basis::Polynomial, basis::Sinusoid,
                               basis::ComplexExponential, basis::Tabulated, basis::Function>;

std::string basis_label(const BasisSpec& spec);

/// N x p design matrix with J(k, l) = f_l(t_k). Full column rank is checked
/// at construction.
class DesignMatrix {
 public:
  DesignMatrix(CMatrix entries, double dt, std::vector<std::string> labels = {},
               long origin_index = 1);

  const CMatrix& entries() const noexcept { return entries_; }
  double dt() const noexcept { return dt_; }
  long origin_index() const noexcept { return origin_index_; }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  Eigen::Index rows() const noexcept { return entries_.rows(); }
  Eigen::Index cols() const noexcept { return entries_.cols(); }
  /// Ratio of extreme singular values of the unweighted design.
  double condition_number() const noexcept { return condition_; }

 private:
  CMatrix entries_;
  double dt_;
  std::vector<std::string> labels_;
  long origin_index_;
  double condition_ = 1.0;
};

DesignMatrix build_design_matrix(std::span<const BasisSpec> basis, Eigen::Index n, double dt,
                                 long origin_index = 1);

/// Numerical rank using the cutoff rows * eps * sigma_max.
Eigen::Index numerical_rank(const CMatrix& a);

enum class WeightKind { Identity, InverseCovariance, Custom };

/// Hermitian positive-definite weight P. The Cholesky factor P = L L' is kept.
class WeightMatrix {
 public:
  WeightMatrix(CMatrix entries, WeightKind kind = WeightKind::Custom);
  static WeightMatrix identity(Eigen::Index n);

  const CMatrix& entries() const noexcept { return entries_; }
  WeightKind kind() const noexcept { return kind_; }
  Eigen::Index size() const noexcept { return entries_.rows(); }
  /// Lower-triangular L with P = L L'.
  const CMatrix& cholesky_lower() const noexcept { return lower_; }

 private:
  CMatrix entries_;
  CMatrix lower_;
  WeightKind kind_;
};

enum class Method { Ols, GlsTime, GlsSpectral, MatchedFilter, WeightedLeastSquares };
std::string_view method_name(Method m) noexcept;

enum class SolvePath { Orthonormalized, NormalEquations };
std::string_view solve_path_name(SolvePath p) noexcept;

struct ConditionReport {
  double condition_number = 1.0;  ///< of the weighted design L'J
  std::string solve_path;
};

struct Estimate {
  CVector x_star;
  std::optional<CMatrix> covariance;
  Method method = Method::WeightedLeastSquares;
  ConditionReport condition;
  double residual_norm = 0.0;  ///< |m - J x*|_P
};

/// y' P z
cplx weighted_inner(const CVector& y, const CVector& z, const WeightMatrix& p);

Estimate ls_estimate(const WeightMatrix& p, const DesignMatrix& j, const SampledSignal& m,
                     SolvePath path = SolvePath::Orthonormalized);

/// (J'PJ)^-1 J'P' Omega P J (J'PJ)^-1
CMatrix ls_covariance(const WeightMatrix& p, const DesignMatrix& j, const CMatrix& omega,
                      SolvePath path = SolvePath::Orthonormalized);

// Shared numerical helpers.
bool is_hermitian(const CMatrix& a, double rel_tol = 1e-12);
CMatrix hermitian_part(const CMatrix& a);
void require_same_dt(double a, double b, const char* what);

}  // namespace lsqcolor
