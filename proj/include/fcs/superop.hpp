#pragma once

#include <iosfwd>
#include <string>

#include "fcs/linalg.hpp"

namespace fcs {

// Linear map on d x d matrices, stored as a d^2 x d^2 matrix acting on column-major vec(S).
class Superoperator {
 public:
  Superoperator() = default;
  Superoperator(int d, CMat matrix);

  static Superoperator zero(int d);
  static Superoperator identity(int d);
  // S -> A S B
  static Superoperator sandwich(const CMat& a, const CMat& b);
  // S -> i[E, S]
  static Superoperator commutator_generator(const CMat& e);

  int dim() const { return d_; }
  const CMat& matrix() const { return m_; }
  CMat apply(const CMat& s) const;
  // Hilbert-Schmidt adjoint: Tr[X^* L(S)] = Tr[L^dual(X)^* S].
  Superoperator dual() const { return {d_, m_.adjoint()}; }

  Superoperator& operator+=(const Superoperator& o);
  friend Superoperator operator+(Superoperator a, const Superoperator& b) { return a += b; }
  friend Superoperator operator*(cplx c, const Superoperator& a) { return {a.d_, c * a.m_}; }
  friend Superoperator operator*(const Superoperator& a, const Superoperator& b) { return {a.d_, a.m_ * b.m_}; }

  // Text format: "superoperator <d>" then d^2 lines of d^2 "re im" pairs, 17 significant digits.
  void write_text(std::ostream& os) const;
  static Superoperator read_text(std::istream& is);

  // Smallest eigenvalue of the Choi matrix sum_ij E_ij kron L(E_ij).
  double choi_min_eigenvalue() const;

 private:
  int d_ = 0;
  CMat m_;
};

// e^{tL}(S)
CMat semigroup(const Superoperator& l, double t, const CMat& s);

}  // namespace fcs
