#pragma once

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "lsqcolor/error.hpp"
#include "lsqcolor/model.hpp"

namespace lsqcolor::test {

inline CMatrix random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols,
                             bool complex_valued = true) {
  std::normal_distribution<double> g;
  CMatrix a(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) a(i, j) = {g(rng), complex_valued ? g(rng) : 0.0};
  return a;
}

inline CVector random_vector(std::mt19937_64& rng, Eigen::Index n, bool complex_valued = true) {
  return random_matrix(rng, n, 1, complex_valued).col(0);
}

/// Random Hermitian positive definite matrix with eigenvalues in [1, spread].
inline CMatrix random_hpd(std::mt19937_64& rng, Eigen::Index n, double spread = 10.0) {
  Eigen::HouseholderQR<CMatrix> qr(random_matrix(rng, n, n));
  const CMatrix q = qr.householderQ();
  std::uniform_real_distribution<double> u(1.0, spread);
  Eigen::VectorXd d(n);
  for (Eigen::Index i = 0; i < n; ++i) d(i) = u(rng);
  return q * d.asDiagonal() * q.adjoint();
}

template <typename A, typename B>
double rel_error(const A& got, const B& want) {
  const double scale = want.norm();
  return (got - want).norm() / (scale > 0.0 ? scale : 1.0);
}

inline double max_abs(const CMatrix& a) { return a.cwiseAbs().maxCoeff(); }

#define EXPECT_ERROR_KIND(stmt, k)                                   \
  do {                                                               \
    try {                                                            \
      stmt;                                                          \
      ADD_FAILURE() << "expected " << ::lsqcolor::kind_name(k);      \
    } catch (const ::lsqcolor::Error& e) {                           \
      EXPECT_EQ(e.kind(), k) << e.what();                            \
    }                                                                \
  } while (0)

}  // namespace lsqcolor::test
