#include "fcs/superop.hpp"

#include <istream>
#include <ostream>
#include <string>
#include <unsupported/Eigen/MatrixFunctions>

#include "fcs/errors.hpp"

namespace fcs {

Superoperator::Superoperator(int d, CMat matrix) : d_(d), m_(std::move(matrix)) {
  if (m_.rows() != d * d || m_.cols() != d * d) throw std::invalid_argument("superoperator matrix must be d^2 x d^2");
}

Superoperator Superoperator::zero(int d) { return {d, CMat::Zero(d * d, d * d)}; }

Superoperator Superoperator::identity(int d) { return {d, CMat::Identity(d * d, d * d)}; }

Superoperator Superoperator::sandwich(const CMat& a, const CMat& b) {
  return {static_cast<int>(a.rows()), kron(b.transpose(), a)};
}

Superoperator Superoperator::commutator_generator(const CMat& e) {
  const auto d = static_cast<int>(e.rows());
  const CMat id = CMat::Identity(d, d);
  return {d, I * (kron(id, e) - kron(e.transpose(), id))};
}

CMat Superoperator::apply(const CMat& s) const { return unvec(m_ * vec(s), d_); }

Superoperator& Superoperator::operator+=(const Superoperator& o) {
  m_ += o.m_;
  return *this;
}

void Superoperator::write_text(std::ostream& os) const {
  const auto old = os.precision(17);
  os << "superoperator " << d_ << '\n';
  for (Eigen::Index i = 0; i < m_.rows(); ++i) {
    for (Eigen::Index j = 0; j < m_.cols(); ++j) {
      if (j > 0) os << ' ';
      os << m_(i, j).real() << ' ' << m_(i, j).imag();
    }
    os << '\n';
  }
  os.precision(old);
}

Superoperator Superoperator::read_text(std::istream& is) {
  std::string tag;
  int d = 0;
  if (!(is >> tag >> d) || tag != "superoperator" || d < 1) fail(ErrorCode::ConfigError, "bad superoperator header");
  CMat m(d * d, d * d);
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      double re = 0.0;
      double im = 0.0;
      if (!(is >> re >> im)) fail(ErrorCode::ConfigError, "truncated superoperator text");
      m(i, j) = cplx(re, im);
    }
  return {d, m};
}

double Superoperator::choi_min_eigenvalue() const {
  const int d = d_;
  CMat choi = CMat::Zero(d * d, d * d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      CMat eij = CMat::Zero(d, d);
      eij(i, j) = 1.0;
      choi += kron(eij, apply(eij));
    }
  Eigen::SelfAdjointEigenSolver<CMat> es(0.5 * (choi + choi.adjoint()));
  return es.eigenvalues().minCoeff();
}

CMat semigroup(const Superoperator& l, double t, const CMat& s) {
  if (t == 0.0) return s;
  const CMat prop = (t * l.matrix()).exp();
  return unvec(prop * vec(s), l.dim());
}

}  // namespace fcs
