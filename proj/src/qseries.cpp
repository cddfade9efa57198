#include "qosc/qseries.hpp"

#include <string>

namespace qosc {

Rational q_pochhammer(const Rational& x, const Rational& p, long n) {
  Rational result(1);
  if (n >= 0) {
    Rational power(1);  // p^m
    for (long m = 0; m < n; ++m) {
      result *= Rational(1) - x * power;
      power *= p;
    }
    return result;
  }
  if (p.is_zero()) throw AdmissibilityError("q_pochhammer: p = 0 with negative n");
  const Rational pinv = p.inverse();
  Rational power = pinv;  // p^m for m = -1, -2, ...
  for (long m = -1; m >= n; --m) {
    const Rational factor = Rational(1) - x * power;
    if (factor.is_zero())
      throw AdmissibilityError("q_pochhammer: factor 1 - x p^m vanishes at index m = " +
                               std::to_string(m));
    result /= factor;
    power *= pinv;
  }
  return result;
}

namespace {

bool is_zero_matrix(const Mat& M) {
  for (Eigen::Index j = 0; j < M.cols(); ++j)
    for (Eigen::Index i = 0; i < M.rows(); ++i)
      if (!M(i, j).is_zero()) return false;
  return true;
}

}  // namespace

Mat qexp_nilpotent(const Rational& p, const Mat& M) {
  if (M.rows() != M.cols()) throw ShapeError("qexp_nilpotent: matrix not square");
  const Eigen::Index n = M.rows();
  Mat acc = Mat::Identity(n, n);
  Mat power = Mat::Identity(n, n);
  Rational poch(1);  // (p;p)_k
  Rational ppow(1);  // p^k
  for (Eigen::Index k = 1; k <= n + 1; ++k) {
    power = Mat(power * M);
    if (is_zero_matrix(power)) return acc;
    ppow *= p;
    poch *= Rational(1) - ppow;
    if (poch.is_zero())
      throw AdmissibilityError("qexp_nilpotent: (p;p)_k vanishes at k = " + std::to_string(k));
    acc += power * poch.inverse();
  }
  throw NonNilpotentError("qexp_nilpotent: argument is not nilpotent within the dimension bound");
}

Mat exact_inverse(const Mat& M) {
  if (M.rows() != M.cols()) throw ShapeError("exact_inverse: matrix not square");
  const Eigen::Index n = M.rows();
  Mat a = M;
  Mat inv = Mat::Identity(n, n);
  for (Eigen::Index col = 0; col < n; ++col) {
    Eigen::Index pivot = -1;
    for (Eigen::Index row = col; row < n; ++row)
      if (!a(row, col).is_zero()) {
        pivot = row;
        break;
      }
    if (pivot < 0)
      throw SingularBlockError("exact_inverse: singular at column " + std::to_string(col));
    if (pivot != col) {
      a.row(pivot).swap(a.row(col));
      inv.row(pivot).swap(inv.row(col));
    }
    const Rational scale = a(col, col).inverse();
    a.row(col) *= scale;
    inv.row(col) *= scale;
    for (Eigen::Index row = 0; row < n; ++row) {
      if (row == col || a(row, col).is_zero()) continue;
      const Rational factor = a(row, col);
      a.row(row) -= factor * a.row(col);
      inv.row(row) -= factor * inv.row(col);
    }
  }
  return inv;
}

}  // namespace qosc
