// Evaluation tables: the named actions of the two-node loop-algebra
// generators on truncated Fock legs or the 2-dimensional spin leg, grading
// twists, coproduct actions, and the structural checks they must satisfy.
#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qosc/fock.hpp"
#include "qosc/params.hpp"

namespace qosc {

// Generators of the two-node algebra.
enum class U { e0, e1, f0, f1, k0, k1, k0inv, k1inv };

std::string gen_name(U u);

// Which half of the generators a table provides (Cartan always included).
enum class RepSide { plus, minus, full };

struct Rep {
  std::string name;
  RepSide side = RepSide::full;
  FockSpace carrier;
  ParamPoint params;
  std::map<U, FockOp> table;

  const FockOp& op(U u) const;  // throws ShapeError when absent
  bool has(U u) const { return table.count(u) != 0; }
  std::vector<U> generators() const;  // the keys, in enum order
};

// The nine named tables: "upsilon", "phi", "rho", "rhobar", "rho_minus",
// "rhobar_minus", "phi_minus", "Pi", "rho_r".  Fock carriers are truncated
// at N; "Pi" lives on the spin leg; "rho_r" reads the extra Cartan twist
// from params.r.
Rep build_rep(const std::string& name, const ParamPoint& params, int N);

// Spectral twist: e_i -> z e_i on the plus side, f_i -> z^{-1} f_i on the
// minus side, Cartan fixed.  z must be nonzero.
Rep grading_shift(const Rep& rep, const Rational& z);

// Two-exponent twist: e_i -> z^{s_i} e_i, f_i -> z^{-s_i} f_i.
Rep grading_shift_general(const Rep& rep, int s0, int s1, const Rational& z);

// Action of the coproduct (or its opposite) on a two-leg carrier:
// e |-> e x 1 + k x e,  f |-> f x k^{-1} + 1 x f,  Cartan grouplike.
FockOp coaction(const Rep& A, const Rep& B, U u, bool opposite = false);

struct CheckResult {
  bool pass = true;
  std::string detail;  // first failing relation, empty when pass
  std::optional<Witness> witness;
};

// Defining relations on the window: per-node triple, cross relations,
// Cartan inverses, mixed [e_i, f_j] for full tables, and the cubic Serre
// relations of the provided half.  Fock carriers need N >= 4 for the Serre
// window.
CheckResult check_defining_relations(const Rep& rep);

// The dictionary rep(u) = other(psi(u)) with
// psi: e_i -> f_{1-i}, f_i -> e_{1-i}, k_i^{+-1} -> k_{1-i}^{-+1}.
CheckResult check_psi_dictionary(const Rep& rep, const Rep& other);

// Twist identity: the (s0, s1)-twist at z = Z^2 equals conjugation by
// Z^{(s0-s1) D} composed with the plain twist at Z^{s0+s1}, D the total
// leg degree.
CheckResult check_graded_twist(const Rep& rep, int s0, int s1, const Rational& Z);

// Cartan sanity: k_0, k_1 diagonal, mutually inverse, and k_i k_i^{-1} = 1.
CheckResult check_weights(const Rep& rep);

}  // namespace qosc
