#include "qosc/reps.hpp"

#include <algorithm>

namespace qosc {

namespace {

FockOp qcomm(const FockOp& X, const FockOp& Y, const Rational& p) {
  return add(compose(X, Y), scale(compose(Y, X), -p));
}

U psi_image(U u) {
  switch (u) {
    case U::e0: return U::f1;
    case U::e1: return U::f0;
    case U::f0: return U::e1;
    case U::f1: return U::e0;
    case U::k0: return U::k1inv;
    case U::k1: return U::k0inv;
    case U::k0inv: return U::k1;
    case U::k1inv: return U::k0;
  }
  throw ShapeError("psi_image: bad generator");
}

bool is_e(U u) { return u == U::e0 || u == U::e1; }
bool is_f(U u) { return u == U::f0 || u == U::f1; }

}  // namespace

std::string gen_name(U u) {
  switch (u) {
    case U::e0: return "e0";
    case U::e1: return "e1";
    case U::f0: return "f0";
    case U::f1: return "f1";
    case U::k0: return "k0";
    case U::k1: return "k1";
    case U::k0inv: return "k0inv";
    case U::k1inv: return "k1inv";
  }
  return "?";
}

const FockOp& Rep::op(U u) const {
  const auto it = table.find(u);
  if (it == table.end())
    throw ShapeError("rep " + name + ": generator " + gen_name(u) + " not in table");
  return it->second;
}

std::vector<U> Rep::generators() const {
  std::vector<U> out;
  for (const auto& [u, x] : table) {
    (void)x;
    out.push_back(u);
  }
  return out;
}

Rep build_rep(const std::string& name, const ParamPoint& params, int N) {
  const Rational q = params.q;
  const Rational u2 = params.u * params.u;  // the evaluation weight enters squared
  if ((Rational(1) - q * q).is_zero())
    throw AdmissibilityError("build_rep: deformation parameter must not square to one");

  Rep rep;
  rep.name = name;
  rep.params = params;

  if (name == "Pi") {
    rep.side = RepSide::full;
    rep.carrier = FockSpace::spin();
    Mat e21 = Mat::Zero(2, 2), e12 = Mat::Zero(2, 2), km = Mat::Zero(2, 2);
    e21(1, 0) = Rational(1);
    e12(0, 1) = Rational(1);
    km(0, 0) = q.inverse();
    km(1, 1) = q;
    rep.table[U::e0] = make_spin(e21, 0, rep.carrier);
    rep.table[U::f1] = make_spin(e21, 0, rep.carrier);
    rep.table[U::e1] = make_spin(e12, 0, rep.carrier);
    rep.table[U::f0] = make_spin(e12, 0, rep.carrier);
    rep.table[U::k0] = make_spin(km, 0, rep.carrier);
    Mat kminv = Mat::Zero(2, 2);
    kminv(0, 0) = q;
    kminv(1, 1) = q.inverse();
    rep.table[U::k1] = make_spin(kminv, 0, rep.carrier);
    rep.table[U::k0inv] = rep.table[U::k1];
    rep.table[U::k1inv] = rep.table[U::k0];
    return rep;
  }

  rep.carrier = FockSpace::fock(N);
  const FockSpace& W = rep.carrier;
  const Rational c1 = (Rational(1) - q * q).inverse();       // 1/(1-q^2)
  const Rational c2 = q * q * c1;                            // q^2/(1-q^2)
  const FockOp A = make_generator(Gen::a, 0, W);
  const FockOp Ad = make_generator(Gen::adag, 0, W, q);
  const FockOp Abd = make_generator(Gen::abardag, 0, W, q);
  auto qdiag = [&](const Rational& coeff, long mult, long off) {
    return make_diag([=](int j) { return coeff * q.pow(mult * j + off); }, 0, W);
  };
  auto put_k = [&](const Rational& coeff, long mult, long off) {
    rep.table[U::k0] = qdiag(coeff, mult, off);
    rep.table[U::k0inv] = qdiag(coeff.inverse(), -mult, -off);
    rep.table[U::k1] = qdiag(coeff.inverse(), -mult, -off);
    rep.table[U::k1inv] = qdiag(coeff, mult, off);
  };

  if (name == "upsilon") {
    rep.side = RepSide::full;
    const FockOp lowering =
        scale(compose(A, make_diag([&](int j) { return u2.inverse() - u2 * q.pow(-2 * j); }, 0, W)),
              c2);
    rep.table[U::e0] = scale(Ad, c1);
    rep.table[U::f1] = scale(Ad, c1);
    rep.table[U::e1] = lowering;
    rep.table[U::f0] = lowering;
    put_k(u2.inverse(), 2, 1);
  } else if (name == "phi") {
    rep.side = RepSide::plus;
    rep.table[U::e0] = make_zero(W, W);
    rep.table[U::e1] = scale(A, q * c1);
    put_k(u2, 2, 1);
  } else if (name == "phi_minus") {
    rep.side = RepSide::minus;
    rep.table[U::f0] = scale(A, q * c1);
    rep.table[U::f1] = make_zero(W, W);
    put_k(u2, 2, 1);
  } else if (name == "rho") {
    rep.side = RepSide::plus;
    rep.table[U::e0] = scale(Ad, c1);
    rep.table[U::e1] = scale(A, c2);
    put_k(Rational(1), 2, 0);
  } else if (name == "rho_minus") {
    rep.side = RepSide::minus;
    rep.table[U::f0] = scale(A, c2);
    rep.table[U::f1] = scale(Ad, c1);
    put_k(Rational(1), 2, 0);
  } else if (name == "rhobar") {
    rep.side = RepSide::plus;
    rep.table[U::e0] = scale(Abd, c2);
    rep.table[U::e1] = scale(A, c1);
    put_k(Rational(1), 2, 2);
  } else if (name == "rhobar_minus") {
    rep.side = RepSide::minus;
    rep.table[U::f0] = scale(A, c1);
    rep.table[U::f1] = scale(Abd, c2);
    put_k(Rational(1), 2, 2);
  } else if (name == "rho_r") {
    rep.side = RepSide::plus;
    if (params.r.is_zero()) throw AdmissibilityError("build_rep: Cartan twist must be nonzero");
    rep.table[U::e0] = scale(Ad, c1);
    rep.table[U::e1] = scale(A, c2);
    rep.table[U::k0] = qdiag(params.r, 2, 0);
    rep.table[U::k0inv] = qdiag(params.r.inverse(), -2, 0);
    rep.table[U::k1] = qdiag(params.r.inverse(), -2, 0);
    rep.table[U::k1inv] = qdiag(params.r, 2, 0);
  } else {
    throw ShapeError("build_rep: unknown table name '" + name + "'");
  }
  return rep;
}

Rep grading_shift(const Rep& rep, const Rational& z) {
  return grading_shift_general(rep, 1, 1, z);
}

Rep grading_shift_general(const Rep& rep, int s0, int s1, const Rational& z) {
  if (z.is_zero()) throw AdmissibilityError("grading shift: twist parameter must be nonzero");
  Rep out = rep;
  const Rational z0 = z.pow(s0), z1 = z.pow(s1);
  auto rescale = [&](U u, const Rational& c) {
    const auto it = out.table.find(u);
    if (it != out.table.end()) it->second = scale(it->second, c);
  };
  rescale(U::e0, z0);
  rescale(U::e1, z1);
  rescale(U::f0, z0.inverse());
  rescale(U::f1, z1.inverse());
  return out;
}

FockOp coaction(const Rep& A, const Rep& B, U u, bool opposite) {
  const FockOp IA = make_identity(A.carrier);
  const FockOp IB = make_identity(B.carrier);
  if (is_e(u)) {
    const U k = (u == U::e0) ? U::k0 : U::k1;
    if (!opposite) return add(tensor(A.op(u), IB), tensor(A.op(k), B.op(u)));
    return add(tensor(IA, B.op(u)), tensor(A.op(u), B.op(k)));
  }
  if (is_f(u)) {
    const U kinv = (u == U::f0) ? U::k0inv : U::k1inv;
    if (!opposite) return add(tensor(A.op(u), B.op(kinv)), tensor(IA, B.op(u)));
    return add(tensor(A.op(kinv), B.op(u)), tensor(A.op(u), IB));
  }
  return tensor(A.op(u), B.op(u));
}

namespace {

struct RelationChecker {
  CheckResult result;

  void check(const std::string& label, const FockOp& lhs, const FockOp& rhs) {
    if (!result.pass) return;
    const AgreeResult res = agree_on_window(lhs, rhs);
    if (!res.equal) {
      result.pass = false;
      result.detail = label;
      result.witness = res.witness;
    }
  }
};

}  // namespace

CheckResult check_defining_relations(const Rep& rep) {
  const Rational q = rep.params.q;
  const Rational q2 = q * q;
  const FockOp I = make_identity(rep.carrier);
  RelationChecker ch;

  const U es[2] = {U::e0, U::e1};
  const U fs[2] = {U::f0, U::f1};
  const U ks[2] = {U::k0, U::k1};
  const U kinvs[2] = {U::k0inv, U::k1inv};

  for (int i = 0; i < 2; ++i) {
    ch.check("k" + std::to_string(i) + " invertible",
             compose(rep.op(ks[i]), rep.op(kinvs[i])), I);
    for (int j = 0; j < 2; ++j) {
      // k_i e_j = q^{+-2} e_j k_i: +2 on-node, -2 across.
      const Rational ce = (i == j) ? q2 : q2.inverse();
      if (rep.has(es[j]))
        ch.check("k" + std::to_string(i) + " e" + std::to_string(j),
                 compose(rep.op(ks[i]), rep.op(es[j])),
                 scale(compose(rep.op(es[j]), rep.op(ks[i])), ce));
      if (rep.has(fs[j]))
        ch.check("k" + std::to_string(i) + " f" + std::to_string(j),
                 compose(rep.op(ks[i]), rep.op(fs[j])),
                 scale(compose(rep.op(fs[j]), rep.op(ks[i])), ce.inverse()));
    }
  }
  ch.check("k0 k1 commute", compose(rep.op(U::k0), rep.op(U::k1)),
           compose(rep.op(U::k1), rep.op(U::k0)));

  if (rep.side == RepSide::full) {
    const Rational cartan_norm = (q - q.inverse()).inverse();
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        const FockOp lhs = commutator(rep.op(es[i]), rep.op(fs[j]));
        const FockOp rhs =
            (i == j)
                ? scale(add(rep.op(ks[i]), scale(rep.op(kinvs[i]), Rational(-1))), cartan_norm)
                : make_zero(rep.carrier, rep.carrier);
        ch.check("[e" + std::to_string(i) + ", f" + std::to_string(j) + "]", lhs, rhs);
      }
  }

  auto serre = [&](U xi, U xj, const std::string& label) {
    const FockOp& x = rep.op(xi);
    const FockOp t1 = qcomm(x, rep.op(xj), q2);
    const FockOp t2 = commutator(x, t1);
    ch.check(label, qcomm(x, t2, q2.inverse()), make_zero(rep.carrier, rep.carrier));
  };
  if (rep.side != RepSide::minus) {
    serre(U::e0, U::e1, "serre e0 e1");
    serre(U::e1, U::e0, "serre e1 e0");
  }
  if (rep.side != RepSide::plus) {
    serre(U::f0, U::f1, "serre f0 f1");
    serre(U::f1, U::f0, "serre f1 f0");
  }
  return ch.result;
}

CheckResult check_psi_dictionary(const Rep& rep, const Rep& other) {
  RelationChecker ch;
  for (const U u : rep.generators())
    ch.check(rep.name + "(" + gen_name(u) + ") = " + other.name + "(" + gen_name(psi_image(u)) + ")",
             rep.op(u), other.op(psi_image(u)));
  return ch.result;
}

CheckResult check_graded_twist(const Rep& rep, int s0, int s1, const Rational& Z) {
  if (Z.is_zero()) throw AdmissibilityError("check_graded_twist: twist must be nonzero");
  const Rep lhs = grading_shift_general(rep, s0, s1, Z * Z);
  const Rep inner = grading_shift(rep, Z.pow(s0 + s1));
  auto conj = [&](long sign) {
    return make_multi_diag(
        [&, sign](const std::vector<int>& m) {
          long deg = 0;
          for (int v : m) deg += v;
          return Z.pow(sign * static_cast<long>(s0 - s1) * deg);
        },
        rep.carrier);
  };
  const FockOp C = conj(1);
  const FockOp Cinv = conj(-1);
  RelationChecker ch;
  for (const U u : rep.generators())
    ch.check("twist " + gen_name(u), lhs.op(u), compose(C, compose(inner.op(u), Cinv)));
  return ch.result;
}

CheckResult check_weights(const Rep& rep) {
  RelationChecker ch;
  const FockOp I = make_identity(rep.carrier);
  for (const U u : {U::k0, U::k1, U::k0inv, U::k1inv}) {
    const FockOp& k = rep.op(u);
    for (long i = 0; i < rep.carrier.dim(); ++i) {
      const SparseCol& col = k.col(i);
      if (col.size() != 1 || col[0].first != i) {
        ch.result.pass = false;
        ch.result.detail = gen_name(u) + " not diagonal";
        Witness w;
        w.index = i;
        w.label = basis_label(rep.carrier, i);
        w.lhs = col;
        ch.result.witness = std::move(w);
        return ch.result;
      }
    }
  }
  ch.check("k0 k1 = 1", compose(rep.op(U::k0), rep.op(U::k1)), I);
  return ch.result;
}

}  // namespace qosc
