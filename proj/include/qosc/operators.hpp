// Closed-form operator families: the 2x2-over-End(W) lattice operators, the
// diagonal boundary operators on both sides, the two-leg exchange operators,
// the factorizing intertwiner, and the short-exact-sequence maps used by the
// fusion construction.
#pragma once

#include <string>

#include "qosc/reps.hpp"

namespace qosc {

enum class LVariant { plus, minus, tilde };
enum class KSide { right, left };
enum class RPair { upsilon_phi, rho_rhobar };
enum class OVariant { direct, swapped, inverse };

// Assembles a 2x2 matrix of End(W) entries into an operator on W (x) C^2
// (entry [row][col] maps the v_col component to the v_row component).
FockOp two_by_two(const FockOp& e00, const FockOp& e01, const FockOp& e10, const FockOp& e11);

// Extracts one End(W) entry back out of an operator on W (x) C^2.
FockOp block_of(const FockOp& X, int row, int col);

// Lattice operator for pi in {"rho", "rhobar", "upsilon", "phi"} at spectral
// point z.  plus: on W (x) C^2; minus: the leg-swapped variant on C^2 (x) W;
// tilde: the blockwise inverse at q^2 z, on W (x) C^2.
FockOp build_L(const std::string& pi, const ParamPoint& p, int N, const Rational& z,
               LVariant variant = LVariant::plus);

// Diagonal boundary operator for pi in {"Pi", "rho", "rhobar", "upsilon",
// "phi"}.  The right family reads params.xi, the left family params.xitilde.
// "Pi" lives on the spin leg, the rest on W.
FockOp build_K(const std::string& pi, const ParamPoint& p, int N, const Rational& z,
               KSide side = KSide::right);

// Two-leg exchange operator on W (x) W; tilde = blockwise inverse at q^2 z.
FockOp build_R(RPair pair, const ParamPoint& p, int N, const Rational& z, bool tilde = false);

// The factorizing intertwiner on W (x) W, its leg-swapped partner, and its
// product-form inverse.
FockOp build_O(OVariant variant, const ParamPoint& p, int N);

// Short-exact-sequence maps W -> W (x) C^2 and W (x) C^2 -> W at Cartan
// twist r (nonzero).
FockOp build_fusion_iota(const ParamPoint& p, int N, const Rational& r);
FockOp build_fusion_tau(const ParamPoint& p, int N, const Rational& r);

// Twisted-pair generators at spectral point z on a full table:
// B_0 = z e_0 - q^{-1} xi^{-1} z^{-1} k_0 f_1,
// B_1 = z e_1 - q^{-1} xi   z^{-1} k_1 f_0.
FockOp coideal_B(const Rep& rep, int i, const Rational& z);

}  // namespace qosc
