// Truncated Fock spaces, sparse exact operators with truncation-exactness
// bookkeeping, graded blocks, and blockwise assembly of deformed
// exponentials and inverses.
//
// Exactness is tracked two ways:
//   * per-Fock-leg (r, g) guard metadata following the window algebra
//     g(AB)_i = max(g(B)_i, g(A)_i + r(B)_i), r(AB)_i = r(A)_i + r(B)_i
//     (componentwise max for sums);
//   * a per-input-column mask marking the columns whose truncated value
//     equals the untruncated one.  The mask refines the guard window (it is
//     exact for compositions and for block-assembled operators, where the
//     honest window is a total-degree simplex, not a per-leg box) and is
//     what agree_on_window compares on.
#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qosc/errors.hpp"
#include "qosc/rational.hpp"

namespace qosc {

enum class Leg { fock, spin };

// Tensor product of truncated Fock legs (w_0 .. w_N) and 2-dimensional spin
// legs (v_plus, v_minus), in an arbitrary order.  Flat indices are mixed
// radix with leg 0 most significant.
struct FockSpace {
  int N = 0;
  std::vector<Leg> legs = {Leg::fock};

  static FockSpace fock(int N, int count = 1);
  static FockSpace spin();  // a single 2-dim leg, no Fock factor

  int leg_count() const { return static_cast<int>(legs.size()); }
  int fock_count() const;
  int spin_count() const;
  long leg_dim(int leg) const { return legs[static_cast<size_t>(leg)] == Leg::fock ? N + 1 : 2; }
  long dim() const;
  int max_degree() const;

  std::vector<int> unflatten(long index) const;
  long flatten(const std::vector<int>& multi) const;
  int degree(long index) const;  // total of all leg indices

  friend bool operator==(const FockSpace&, const FockSpace&) = default;
};

// Concatenation of the two leg lists (requires equal N).
FockSpace tensor(const FockSpace& a, const FockSpace& b);

std::string basis_label(const FockSpace& space, long index);

using SparseCol = std::vector<std::pair<long, Rational>>;  // (out index, value), sorted

struct FockOp {
  FockSpace space_in;
  FockSpace space_out;
  std::vector<SparseCol> cols;       // indexed by input flat index
  std::vector<int> r;                // per input-Fock-ordinal raising degree
  std::vector<int> g;                // per input-Fock-ordinal guard
  std::vector<char> exact;           // per input flat index
  std::optional<int> degree_shift;   // set when degree-homogeneous

  bool block_preserving() const { return degree_shift.has_value() && *degree_shift == 0; }
  const SparseCol& col(long in) const { return cols[static_cast<size_t>(in)]; }
};

// --- constructors ---------------------------------------------------------

FockOp make_zero(const FockSpace& in, const FockSpace& out);
FockOp make_identity(const FockSpace& space);

enum class Gen { a, adag, abardag };

// Lowering/raising generators on one Fock leg; abardag = -q^{-2D} a^dag
// needs the deformation parameter.
FockOp make_generator(Gen kind, int leg, const FockSpace& space, const Rational& q = Rational(0));

// diag(f) on one Fock leg: w_j -> f(j) w_j.
FockOp make_diag(const std::function<Rational(int)>& f, int leg, const FockSpace& space);

// Diagonal over the whole multi-index (joint functions of D_1, D_2, ...).
FockOp make_multi_diag(const std::function<Rational(const std::vector<int>&)>& f,
                       const FockSpace& space);

// Arbitrary 2x2 matrix on one spin leg (row/column order: v_plus, v_minus).
FockOp make_spin(const Mat& m2, int leg, const FockSpace& space);

// --- algebra ---------------------------------------------------------------

FockOp compose(const FockOp& A, const FockOp& B);  // A after B
FockOp add(const FockOp& A, const FockOp& B);
FockOp scale(const FockOp& A, const Rational& c);
FockOp tensor(const FockOp& A, const FockOp& B);
FockOp commutator(const FockOp& A, const FockOp& B);  // AB - BA

// Reorders legs: new leg i is old leg perm[i] (both spaces permuted alike).
FockOp permute_legs(const FockOp& X, const std::vector<int>& perm);
// The tensorial swap on a two-leg operator.
FockOp flip_legs(const FockOp& X);

// X acting on legs leg_map[0..k-1] of `big` (kinds must match), identity on
// the rest.  Realizes the subscript-placement notation X_{13}, X_{32}, ...
FockOp embed(const FockOp& X, const FockSpace& big, const std::vector<int>& leg_map);

// --- graded blocks ----------------------------------------------------------

struct GradedBlock {
  int degree = 0;
  std::vector<long> basis;  // flat indices with that total degree, ascending
  Mat mat;                  // dense restriction, rows/cols ordered as `basis`
};

std::vector<long> block_basis(const FockSpace& space, int m);
GradedBlock restrict_to_block(const FockOp& X, int m);

// e_p(arg) assembled per graded block (arg must be degree-preserving and
// nilpotent on every block).  Result is exact on total degree <= N.
FockOp qexp_blockwise(const Rational& p, const FockOp& arg);

// Blockwise exact inverse of a degree-preserving operator, on blocks of
// total degree <= N (zero above; the mask records that).
FockOp invert_blockwise(const FockOp& X);

// --- comparison -------------------------------------------------------------

struct Witness {
  long index = -1;
  std::string label;
  SparseCol lhs, rhs;
};

struct AgreeResult {
  bool equal = true;
  std::optional<Witness> witness;
  long window_size = 0;
};

// Compares X and Y column by column on the intersection of their exactness
// masks; empty intersection throws EmptyWindowError.  On disagreement the
// witness holds the lexicographically minimal differing basis vector and
// both images.
AgreeResult agree_on_window(const FockOp& X, const FockOp& Y);

// True exact equality of the stored tables (no window logic).
bool tables_equal(const FockOp& X, const FockOp& Y);

// Compares an operator against the same word built at a larger truncation
// (same leg layout, small.N <= large.N), column by column on the
// intersection of the exactness masks, with indices remapped through the
// multi-index.  Used for truncation-soundness checks.
AgreeResult agree_across_truncations(const FockOp& small, const FockOp& large);

Mat to_dense(const FockOp& X);

// Sorts and merges columns, drops zeros, recomputes the degree metadata.
// For tables assembled by hand.
void normalize_op(FockOp& X);

// --- serialization ----------------------------------------------------------

// Header "N L legs2" then rows "out_index in_index value"; endomorphisms on
// Fock-legs-first spaces only.  load() trusts the table: guards reset to
// zero, mask to all-exact, metadata recomputed from the entries.
void dump_op(const FockOp& X, std::ostream& os);
FockOp load_op(std::istream& is);

}  // namespace qosc
