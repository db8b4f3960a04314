#include "fcs/linalg.hpp"

#include <lapacke.h>

#include <random>
#include <stdexcept>

namespace fcs {

double max_abs(const CMat& a) { return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff(); }

double hermiticity_residual(const CMat& a) { return max_abs(a - a.adjoint()); }

CVec vec(const CMat& a) { return Eigen::Map<const CVec>(a.data(), a.size()); }

CMat unvec(const CVec& v, int d) { return Eigen::Map<const CMat>(v.data(), d, d); }

CMat kron(const CMat& a, const CMat& b) {
  CMat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

SymmetricEigen symmetric_eigen(const RMat& a) {
  const auto n = static_cast<lapack_int>(a.rows());
  SymmetricEigen out{RVec(n), a};
  if (n == 0) return out;
  const lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'U', n, out.vectors.data(), n, out.values.data());
  if (info != 0) throw std::runtime_error("dsyevd failed");
  return out;
}

HermitianEigen hermitian_eigen(const CMat& a) {
  const auto n = static_cast<lapack_int>(a.rows());
  if (a.imag().cwiseAbs().maxCoeff() == 0.0) {
    auto s = symmetric_eigen(a.real());
    return {std::move(s.values), s.vectors.cast<cplx>()};
  }
  HermitianEigen out{RVec(n), a};
  if (n == 0) return out;
  const lapack_int info = LAPACKE_zheevd(LAPACK_COL_MAJOR, 'V', 'U', n,
                                         reinterpret_cast<lapack_complex_double*>(out.vectors.data()), n,
                                         out.values.data());
  if (info != 0) throw std::runtime_error("zheevd failed");
  return out;
}

CMat unitary_from_eigen(const HermitianEigen& eig, double t) {
  const CVec phase = (-I * t * eig.values.cast<cplx>()).array().exp();
  if (eig.vectors.imag().cwiseAbs().maxCoeff() == 0.0) {
    // Real V: two real products instead of one complex product.
    const RMat v = eig.vectors.real();
    const RMat vc = v * phase.real().asDiagonal();
    const RMat vs = v * phase.imag().asDiagonal();
    CMat u(v.rows(), v.rows());
    u.real().noalias() = vc * v.transpose();
    u.imag().noalias() = vs * v.transpose();
    return u;
  }
  return eig.vectors * phase.asDiagonal() * eig.vectors.adjoint();
}

CMat random_hermitian(int d, unsigned long seed, double scale) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> n01;
  CMat a(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) a(i, j) = cplx(n01(gen), n01(gen));
  return 0.5 * scale * (a + a.adjoint());
}

CMat random_density_matrix(int d, unsigned long seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> n01;
  CMat g(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) g(i, j) = cplx(n01(gen), n01(gen));
  CMat rho = g * g.adjoint();
  return rho / rho.trace();
}

}  // namespace fcs
