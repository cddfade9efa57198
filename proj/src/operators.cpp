#include "qosc/operators.hpp"

#include "qosc/qseries.hpp"

namespace qosc {

namespace {

Mat unit2(int row, int col) {
  Mat m = Mat::Zero(2, 2);
  m(row, col) = Rational(1);
  return m;
}

FockOp spin_diag(const Rational& top, const Rational& bottom) {
  Mat m = Mat::Zero(2, 2);
  m(0, 0) = top;
  m(1, 1) = bottom;
  return make_spin(m, 0, FockSpace::spin());
}

// w_j |-> w_j (x) v_plus.
FockOp basic_injection(const FockSpace& W) {
  FockOp X;
  X.space_in = W;
  X.space_out = tensor(W, FockSpace::spin());
  X.cols.assign(static_cast<size_t>(W.dim()), {});
  for (long j = 0; j < W.dim(); ++j) X.cols[static_cast<size_t>(j)] = {{2 * j, Rational(1)}};
  X.r = {0};
  X.g = {0};
  X.exact.assign(static_cast<size_t>(W.dim()), 1);
  normalize_op(X);
  return X;
}

// w_j (x) v_plus |-> w_j, w_j (x) v_minus |-> 0.
FockOp basic_projection(const FockSpace& W) {
  FockOp X;
  X.space_in = tensor(W, FockSpace::spin());
  X.space_out = W;
  X.cols.assign(static_cast<size_t>(X.space_in.dim()), {});
  for (long j = 0; j < W.dim(); ++j) X.cols[static_cast<size_t>(2 * j)] = {{j, Rational(1)}};
  X.r = {0};
  X.g = {0};
  X.exact.assign(static_cast<size_t>(X.space_in.dim()), 1);
  normalize_op(X);
  return X;
}

struct WKit {
  FockSpace W;
  FockOp A, Ad, Abd;
  Rational q;

  WKit(const ParamPoint& p, int N)
      : W(FockSpace::fock(N)),
        A(make_generator(Gen::a, 0, W)),
        Ad(make_generator(Gen::adag, 0, W, p.q)),
        Abd(make_generator(Gen::abardag, 0, W, p.q)),
        q(p.q) {}

  // diag q^{mult j + off} on W.
  FockOp qd(long mult, long off) const {
    const Rational qq = q;
    return make_diag([=](int j) { return qq.pow(mult * j + off); }, 0, W);
  }
};

struct WWKit {
  FockSpace WW;
  FockOp A1, A2, Ad1, Abd1, Abd2;
  Rational q, p2;

  WWKit(const ParamPoint& p, int N)
      : WW(FockSpace::fock(N, 2)),
        A1(make_generator(Gen::a, 0, WW)),
        A2(make_generator(Gen::a, 1, WW)),
        Ad1(make_generator(Gen::adag, 0, WW, p.q)),
        Abd1(make_generator(Gen::abardag, 0, WW, p.q)),
        Abd2(make_generator(Gen::abardag, 1, WW, p.q)),
        q(p.q),
        p2(p.q * p.q) {}

  FockOp joint_diag(const std::function<Rational(int, int)>& f) const {
    return make_multi_diag([=](const std::vector<int>& m) { return f(m[0], m[1]); }, WW);
  }
};

}  // namespace

FockOp two_by_two(const FockOp& e00, const FockOp& e01, const FockOp& e10, const FockOp& e11) {
  const FockSpace S = FockSpace::spin();
  FockOp acc = tensor(e00, make_spin(unit2(0, 0), 0, S));
  acc = add(acc, tensor(e01, make_spin(unit2(0, 1), 0, S)));
  acc = add(acc, tensor(e10, make_spin(unit2(1, 0), 0, S)));
  return add(acc, tensor(e11, make_spin(unit2(1, 1), 0, S)));
}

FockOp block_of(const FockOp& X, int row, int col) {
  if (X.space_in.leg_count() != 2 || X.space_in.legs[1] != Leg::spin ||
      !(X.space_in == X.space_out))
    throw ShapeError("block_of: need an endomorphism of W (x) C^2");
  FockOp E;
  E.space_in = FockSpace::fock(X.space_in.N);
  E.space_out = E.space_in;
  E.cols.assign(static_cast<size_t>(E.space_in.dim()), {});
  E.r = X.r;
  E.g = X.g;
  E.exact.assign(static_cast<size_t>(E.space_in.dim()), 1);
  for (long j = 0; j < E.space_in.dim(); ++j) {
    const long in = 2 * j + col;
    E.exact[static_cast<size_t>(j)] = X.exact[static_cast<size_t>(in)];
    for (const auto& [out, v] : X.col(in))
      if (out % 2 == row) E.cols[static_cast<size_t>(j)].emplace_back(out / 2, v);
  }
  normalize_op(E);
  return E;
}

FockOp build_L(const std::string& pi, const ParamPoint& p, int N, const Rational& z,
               LVariant variant) {
  if (variant == LVariant::tilde)
    return invert_blockwise(build_L(pi, p, N, p.q * p.q * z, LVariant::plus));

  const WKit k(p, N);
  const Rational z2 = z * z;
  FockOp out = [&] {
    if (pi == "rho")
      return two_by_two(k.qd(1, 0), scale(compose(k.Ad, k.qd(-1, -1)), z),
                        scale(compose(k.A, k.qd(1, 1)), z),
                        add(k.qd(-1, 0), scale(k.qd(1, 2), -z2)));
    if (pi == "rhobar")
      return two_by_two(add(k.qd(1, 1), scale(k.qd(-1, 1), -z2)),
                        scale(compose(k.Abd, k.qd(-1, 0)), z), scale(compose(k.A, k.qd(1, 0)), z),
                        k.qd(-1, -1));
    if (pi == "upsilon") {
      const Rational u2 = p.u * p.u;
      const FockOp mix = make_diag(
          [=](int j) { return u2.inverse() * p.q.pow(j) - u2 * p.q.pow(-j); }, 0, k.W);
      return two_by_two(add(k.qd(1, 0), scale(k.qd(-1, 0), -u2 * z2)),
                        scale(compose(k.Ad, k.qd(-1, -2)), u2 * z),
                        scale(compose(k.A, mix), p.q * z),
                        add(scale(k.qd(-1, -1), u2), scale(k.qd(1, 1), -z2)));
    }
    if (pi == "phi")
      return two_by_two(k.qd(1, 1), make_zero(k.W, k.W), scale(compose(k.A, k.qd(1, 1)), z),
                        scale(k.qd(-1, 0), (p.u * p.u).inverse()));
    throw ShapeError("build_L: unknown family '" + pi + "'");
  }();
  return variant == LVariant::minus ? flip_legs(out) : out;
}

FockOp build_K(const std::string& pi, const ParamPoint& p, int N, const Rational& z, KSide side) {
  const Rational q = p.q, p2 = p.q * p.q;
  const Rational u2 = p.u * p.u;
  const Rational z2 = z * z;

  if (pi == "Pi") {
    if (side == KSide::right) return spin_diag(p.xi * z2 - 1, p.xi - z2);
    return spin_diag(p2 * p.xitilde * z2 - 1, p.xitilde - p2 * z2);
  }

  const FockSpace W = FockSpace::fock(N);
  auto diag = [&](const std::function<Rational(int)>& f) { return make_diag(f, 0, W); };
  const bool needs_inverse_z = pi == "rhobar" || pi == "upsilon";
  if (needs_inverse_z && z.is_zero())
    throw AdmissibilityError("build_K: spectral point must be nonzero for '" + pi + "'");

  if (side == KSide::right) {
    const Rational xi = p.xi;
    if (pi == "rho")
      return diag([=](int j) {
        return (-q.pow(-j) * xi).pow(j) * q_pochhammer(p2 * xi.inverse() * z2, p2, j);
      });
    if (pi == "rhobar")
      return diag([=](int j) {
        return (q * z2).pow(-j) * q_pochhammer(p2 * xi.inverse() * z2.inverse(), p2, j).inverse();
      });
    if (pi == "upsilon")
      return diag([=](int j) {
        return z.pow(-2 * j) * q_pochhammer(p2 * u2.inverse() * xi.inverse() * z2, p2, j) *
               q_pochhammer(p2 * u2.inverse() * xi.inverse() * z2.inverse(), p2, j).inverse();
      });
    if (pi == "phi")
      return diag([=](int j) { return (-u2.inverse() * q.pow(-j - 1) * xi).pow(j); });
  } else {
    const Rational xt = p.xitilde;
    if (pi == "rho")
      return diag([=](int j) {
        return (-q.pow(j) * xt).pow(j) * q_pochhammer(p2 * p2 * xt * z2, p2, j).inverse();
      });
    if (pi == "rhobar")
      return diag([=](int j) {
        return (q.pow(3) * z2).pow(j) * q_pochhammer(xt * z2.inverse(), p2, j);
      });
    if (pi == "upsilon")
      return diag([=](int j) {
        return (q * z).pow(2 * j) * q_pochhammer(u2.inverse() * xt * z2.inverse(), p2, j) *
               q_pochhammer(p2 * p2 * u2.inverse() * xt * z2, p2, j).inverse();
      });
    if (pi == "phi")
      return diag([=](int j) { return (-u2 * q.pow(j + 1) * xt).pow(j); });
  }
  throw ShapeError("build_K: unknown family '" + pi + "'");
}

FockOp build_R(RPair pair, const ParamPoint& p, int N, const Rational& z, bool tilde) {
  if (tilde) return invert_blockwise(build_R(pair, p, N, p.q * p.q * z, false));
  const WWKit k(p, N);
  const Rational u2 = p.u * p.u;
  if (pair == RPair::upsilon_phi) {
    const FockOp E = qexp_blockwise(k.p2, scale(compose(k.Ad1, k.A2), z));
    const FockOp D = k.joint_diag([=](int j, int m) {
      return u2.pow(m - j) * k.q.pow(static_cast<long>(j - m) - 2L * j * (m + 1));
    });
    return compose(E, D);
  }
  const FockOp E1 = qexp_blockwise(k.p2, scale(compose(k.A1, k.Abd2), k.q.pow(3) * z));
  const FockOp E2 = qexp_blockwise(k.p2, scale(compose(k.Ad1, k.A2), z * k.q.inverse()));
  const FockOp D = k.joint_diag([=](int j, int m) { return k.q.pow(-2L * j * (m + 1)); });
  return compose(E1, compose(E2, D));
}

FockOp build_O(OVariant variant, const ParamPoint& p, int N) {
  const WWKit k(p, N);
  const Rational u = p.u;
  switch (variant) {
    case OVariant::direct: {
      const FockOp Einv = invert_blockwise(qexp_blockwise(k.p2, scale(compose(k.A1, k.Abd2), k.p2)));
      return compose(Einv, k.joint_diag([=](int j, int m) { return u.pow(j - m); }));
    }
    case OVariant::swapped: {
      const FockOp Einv = invert_blockwise(qexp_blockwise(k.p2, scale(compose(k.Abd1, k.A2), k.p2)));
      return compose(Einv, k.joint_diag([=](int j, int m) { return u.pow(m - j); }));
    }
    case OVariant::inverse: {
      const FockOp E = qexp_blockwise(k.p2, scale(compose(k.A1, k.Abd2), k.p2));
      return compose(k.joint_diag([=](int j, int m) { return u.pow(m - j); }), E);
    }
  }
  throw ShapeError("build_O: bad variant");
}

FockOp build_fusion_iota(const ParamPoint& p, int N, const Rational& r) {
  if (r.is_zero()) throw AdmissibilityError("build_fusion_iota: twist must be nonzero");
  const WKit k(p, N);
  const FockOp Z = make_zero(k.W, k.W);
  const FockOp M =
      two_by_two(compose(k.qd(-1, 0), k.Ad), Z, scale(k.qd(1, 1), -r), Z);
  return compose(M, basic_injection(k.W));
}

FockOp build_fusion_tau(const ParamPoint& p, int N, const Rational& r) {
  if (r.is_zero()) throw AdmissibilityError("build_fusion_tau: twist must be nonzero");
  const WKit k(p, N);
  const FockOp Z = make_zero(k.W, k.W);
  const FockOp M =
      two_by_two(k.qd(1, 0), scale(compose(k.qd(-1, 0), k.Ad), r.inverse()), Z, Z);
  return compose(basic_projection(k.W), M);
}

FockOp coideal_B(const Rep& rep, int i, const Rational& z) {
  if (z.is_zero()) throw AdmissibilityError("coideal_B: spectral point must be nonzero");
  const Rational q = rep.params.q;
  const Rational xi = rep.params.xi;
  if (i == 0)
    return add(scale(rep.op(U::e0), z),
               scale(compose(rep.op(U::k0), rep.op(U::f1)),
                     -q.inverse() * xi.inverse() * z.inverse()));
  if (i == 1)
    return add(scale(rep.op(U::e1), z),
               scale(compose(rep.op(U::k1), rep.op(U::f0)), -q.inverse() * xi * z.inverse()));
  throw ShapeError("coideal_B: node index must be 0 or 1");
}

}  // namespace qosc
