// Deformed Pochhammer symbols and the deformed exponential on nilpotent
// matrix arguments.  Everything here is finite and exact; the series forms
// only ever meet locally nilpotent arguments, per graded block.
#pragma once

#include "qosc/errors.hpp"
#include "qosc/rational.hpp"

namespace qosc {

// (x; p)_n.  For n >= 0 the product (1 - x p^m) over 0 <= m < n; for n < 0
// the product of inverses over n <= m < 0.  A vanishing factor in the n < 0
// case throws AdmissibilityError naming the factor index m.
Rational q_pochhammer(const Rational& x, const Rational& p, long n);

// e_p(M) = sum_k M^k / (p;p)_k for nilpotent M.  Detects non-nilpotency by
// exceeding the dimension bound; a vanishing (p;p)_k below the nilpotency
// index throws AdmissibilityError.  The result is unipotent-invertible.
Mat qexp_nilpotent(const Rational& p, const Mat& M);

// Exact inverse of a square matrix by Gauss-Jordan elimination with
// first-nonzero pivoting (exact field, no magnitude heuristics).  Throws
// SingularBlockError naming the failing column.
Mat exact_inverse(const Mat& M);

}  // namespace qosc
