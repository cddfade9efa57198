// Exact linear solvers over the rationals: an incremental fraction-free
// row-echelon kernel, diagonal boundary solves (from the two-sided
// reflection identity and from the twisted-pair intertwining), the two
// exchange-operator solves assembled per graded block, and the fused
// lattice family with its boundary solution and anchor scalars.
//
// Every solver reports the dimension of the solution space it actually
// found (never assumes uniqueness) and normalizes on a declared anchor
// vector when that dimension is 1.  Unknown columns that never receive a
// constraint at the working truncation carry no information; they are left
// out of the reported dimensions and masked in the returned operators.
#pragma once

#include <functional>
#include <string>
#include <vector>

#include "qosc/operators.hpp"

namespace qosc {

// ---------------------------------------------------------------------------
// Fraction-free elimination kernel
// ---------------------------------------------------------------------------

// One homogeneous equation sum_i c_i x_{col_i} = 0.
using SparseRow = std::vector<std::pair<long, Rational>>;

// Incremental reduced row echelon form over exact rationals.  Stored rows
// are kept primitive (denominators cleared, integer content divided out,
// pivot entry positive), so no magnitude heuristic ever enters a pivot
// choice and growth stays bounded.  The kernel also tracks which columns
// ever appeared in an inserted row.
class Echelon {
 public:
  explicit Echelon(long cols);

  // Reduces the row against the current basis; true when it contributes a
  // new pivot, false when it reduced to zero (a consistency row).
  bool insert(SparseRow row);

  long cols() const { return cols_; }
  long rank() const { return static_cast<long>(rows_.size()); }
  bool is_pivot(long col) const { return row_of_pivot_[static_cast<size_t>(col)] >= 0; }
  bool touched(long col) const { return touched_[static_cast<size_t>(col)] != 0; }

  // Non-pivot columns, ascending; optionally only those that ever appeared
  // in a row.
  std::vector<long> free_columns(bool touched_only) const;

  // The nullspace vector with the given free column set to 1 and every
  // other free column set to 0.
  Vec nullspace_vector(long free_col) const;

 private:
  static void make_primitive(SparseRow& row);
  long cols_ = 0;
  std::vector<SparseRow> rows_;
  std::vector<long> pivot_of_row_;
  std::vector<long> row_of_pivot_;  // -1 when the column is free
  std::vector<char> touched_;
};

// ---------------------------------------------------------------------------
// Solution sets
// ---------------------------------------------------------------------------

// What a solver run found: the equation tag, the anchor label used for
// normalization, the solution-space dimension over the constrained columns,
// that dimension after each constraint batch (extra spectral samples,
// second generator, ...), the per-graded-block residual freedoms for the
// block solvers, and how many unknown columns never received a constraint
// (truncation slack; masked in the output operators).
struct SolveInfo {
  std::string equation;
  std::string anchor;
  long dimension = 0;
  std::vector<long> cut_dims;
  std::vector<long> block_dims;
  long untouched = 0;
};

struct SolutionSet {
  std::vector<FockOp> basis;  // normalized single element when dimension == 1
  SolveInfo info;
};

// The single normalized solution; throws DimensionError unless the reported
// dimension is exactly 1.
const FockOp& unique_solution(const SolutionSet& s);

// Writes the operator in the dump format to `path` and a small manifest
// (equation tag, anchor, dimensions) to `path`.manifest.
void write_solution(const std::string& path, const FockOp& op, const SolveInfo& info);

// ---------------------------------------------------------------------------
// Diagonal boundary solves
// ---------------------------------------------------------------------------

// Solves the two-sided reflection identity
//   L(y/z) K(y) L(yz) KPi(z) = KPi(z) L(yz) K(y) L(y/z)   on W (x) C^2
// for a diagonal K(y) on W, with the lattice factors supplied by `L_at` and
// the spin-leg boundary factor built from params.  The auxiliary spectral
// value z is sampled deterministically from params and `salt` (at least two
// samples; more are drawn while the solution space stays above one
// dimension, up to four).
SolutionSet solve_K_diagonal(const std::function<FockOp(const Rational&)>& L_at,
                             const ParamPoint& p, int N, const Rational& y,
                             const std::string& tag, const std::string& salt);

// The same, with the closed-form lattice operator of the named family
// ("rho", "rhobar", "upsilon", "phi").
SolutionSet solve_K_from_RE(const std::string& pi, const ParamPoint& p, int N, const Rational& y);

// Solves K B_i(z) = B_i(1/z) K for diagonal K on W, with the twisted-pair
// generators B_0, B_1 assembled on the full Fock table (batch 0: i = 0,
// batch 1: both).
SolutionSet solve_K_from_intertwining(const ParamPoint& p, int N, const Rational& z);

// The first-order ratio recurrence for the same diagonal family, anchored
// at 1: f(j+1) (z^2 - q^{2(j+1)} u^{-2} xi^{-1}) = f(j) (1 - q^{2(j+1)} u^{-2} xi^{-1} z^2).
FockOp k_upsilon_from_recurrence(const ParamPoint& p, int N, const Rational& z);

// ---------------------------------------------------------------------------
// Block-preserving intertwiner solves
// ---------------------------------------------------------------------------

// One contribution left o X o right to a linear constraint sum = 0 on a
// block-preserving unknown X.  left/right need not be degree-homogeneous;
// they are split into homogeneous parts internally.
struct IntertwinerTerm {
  FockOp left;
  FockOp right;
};

struct IntertwinerConstraint {
  std::vector<IntertwinerTerm> terms;
  int batch = 0;
};

// Solves for block-preserving X on `space` with X = 1 on the (necessarily
// one-dimensional) degree-0 block, propagating block by block up to
// max_block.  Equations reading polluted (non-exact) columns of the
// constraint operators are dropped; residual per-block freedom raises
// DimensionError naming the block.
SolutionSet solve_block_preserving(const FockSpace& space,
                                   const std::vector<IntertwinerConstraint>& cons, int max_block,
                                   const std::string& tag);

// Exchange operator on W (x) W from the coproduct/opposite-coproduct
// intertwining of the graded Fock table against the lowering-half scalar
// table, constraints u in {f0, f1, k0, k1}.  The unknowns are ladder-form
// coefficients shared across the first leg (a raw blockwise ansatz keeps a
// spurious one-parameter defect per block); blocks 0..N-2 are solved and the
// rest masked.
SolutionSet solve_R_upsilon_phi(const ParamPoint& p, int N, const Rational& z);

// Exchange operator on W (x) W from the three-leg lattice exchange system
// at ratio z = z1/z2: two deterministically sampled values of z2 form
// batches 0 and 1 (more are drawn, up to four, if the intersection stays
// above one dimension).  Blocks 0..N-1 are solved; block N is masked.
SolutionSet solve_R_rho_rhobar(const ParamPoint& p, int N, const Rational& z);

// ---------------------------------------------------------------------------
// Fused lattice family
// ---------------------------------------------------------------------------

// z-expansion coefficients of the fused lattice operator on W (x) C^2 for
// Cartan twist r: L(z) = L0 + z L1 + z^2 L2, with 2x2 entries constrained
// to the span {diagonal, lowering * z, raising * z, diagonal * z^2},
// normalized to fix w_0 (x) v_plus.
struct FusionFamily {
  Rational r;
  FockOp L0, L1, L2;
  SolveInfo info;
};

FusionFamily solve_fusion_L(const ParamPoint& p, int N);

FockOp fusion_L_at(const FusionFamily& fam, const Rational& z);

// Diagonal boundary solution of the reflection identity built from the
// fused family and the spin-leg boundary factor, fixing w_0.
SolutionSet solve_fusion_K(const FusionFamily& fam, const ParamPoint& p, int N, const Rational& y);

// The full fused bundle at one spectral point: families at twists r, q r,
// r/q, their boundary solutions at y = z, q z, z/q, and the two
// proportionality scalars determined on the anchor vectors (w_0 for the
// injection relation, w_0 (x) v_plus for the projection relation).
struct FusionSolution {
  FusionFamily fam, fam_up, fam_down;
  FockOp K, K_up, K_down;
  SolveInfo K_info, K_up_info, K_down_info;
  Rational scalar_iota, scalar_tau;
};

FusionSolution solve_fusion_objects(const ParamPoint& p, int N, const Rational& z);

}  // namespace qosc
