#pragma once

#include <Eigen/Dense>
#include <complex>

namespace fcs {

using cplx = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

inline constexpr cplx I{0.0, 1.0};

double max_abs(const CMat& a);
double hermiticity_residual(const CMat& a);

// Column-major vectorization; vec(A X B) = (B^T kron A) vec(X).
CVec vec(const CMat& a);
CMat unvec(const CVec& v, int d);
CMat kron(const CMat& a, const CMat& b);

struct HermitianEigen {
  RVec values;   // ascending
  CMat vectors;  // columns
};

// Uses LAPACK divide-and-conquer; the real symmetric path is taken when Im(a) vanishes.
HermitianEigen hermitian_eigen(const CMat& a);

struct SymmetricEigen {
  RVec values;
  RMat vectors;
};
SymmetricEigen symmetric_eigen(const RMat& a);

// U = V diag(exp(-i t w)) V^*, with V real when available.
CMat unitary_from_eigen(const HermitianEigen& eig, double t);

CMat random_hermitian(int d, unsigned long seed, double scale = 1.0);
CMat random_density_matrix(int d, unsigned long seed);

}  // namespace fcs
