#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <sstream>

#include "doctest.h"
#include "qosc/fock.hpp"
#include "qosc/params.hpp"
#include "qosc/qseries.hpp"

using namespace qosc;

namespace {

const Rational kQ(2, 3);
const Rational kP = kQ * kQ;  // deformation base used by the exponentials

FockOp lower(const FockSpace& s, int leg = 0) { return make_generator(Gen::a, leg, s); }
FockOp raiser(const FockSpace& s, int leg = 0) { return make_generator(Gen::adag, leg, s, kQ); }
FockOp braiser(const FockSpace& s, int leg = 0) { return make_generator(Gen::abardag, leg, s, kQ); }

FockOp power(const FockOp& X, int k) {
  FockOp acc = make_identity(X.space_in);
  for (int i = 0; i < k; ++i) acc = compose(X, acc);
  return acc;
}

FockOp diag_qpow(const FockSpace& s, int leg, const Rational& base, int mult, int off) {
  return make_diag([=](int j) { return base.pow(static_cast<long>(mult) * j + off); }, leg, s);
}

}  // namespace

TEST_CASE("space indexing, degrees and labels") {
  FockSpace W2 = FockSpace::fock(2, 2);
  CHECK(W2.dim() == 9);
  CHECK(W2.max_degree() == 4);
  for (long i = 0; i < W2.dim(); ++i) CHECK(W2.flatten(W2.unflatten(i)) == i);
  CHECK(W2.degree(W2.flatten({2, 1})) == 3);

  FockSpace WWS = tensor(FockSpace::fock(3, 2), FockSpace::spin());
  CHECK(WWS.dim() == 32);
  CHECK(WWS.max_degree() == 7);
  CHECK(basis_label(WWS, WWS.flatten({3, 0, 0})) == "w3*w0*v+");
  CHECK(basis_label(WWS, WWS.flatten({0, 2, 1})) == "w0*w2*v-");
  CHECK(WWS.degree(WWS.flatten({0, 2, 1})) == 3);

  CHECK_THROWS_AS(tensor(FockSpace::fock(3), FockSpace::fock(4)), ShapeError);
  CHECK(tensor(FockSpace::spin(), FockSpace::fock(5)).N == 5);
}

TEST_CASE("generator actions: frozen columns and metadata") {
  FockSpace W = FockSpace::fock(4);
  FockOp A = lower(W), Ad = raiser(W), Abd = braiser(W);

  CHECK(A.col(0).empty());
  CHECK(A.col(1) == SparseCol{{0, Rational(1)}});
  CHECK(Ad.col(0) == SparseCol{{1, Rational(5, 9)}});    // 1 - q^2 at q = 2/3
  CHECK(Abd.col(0) == SparseCol{{1, Rational(-5, 4)}});  // 1 - q^{-2}
  CHECK(Ad.col(4).empty());
  CHECK(Ad.exact[4] == 0);
  CHECK(Abd.exact[4] == 0);
  CHECK(A.exact[0] == 1);

  CHECK(A.r == std::vector<int>{0});
  CHECK(A.g == std::vector<int>{0});
  CHECK(Ad.r == std::vector<int>{1});
  CHECK(Ad.g == std::vector<int>{1});
  CHECK(Abd.r == std::vector<int>{1});
  CHECK(Abd.g == std::vector<int>{1});
  CHECK(A.degree_shift == -1);
  CHECK(Ad.degree_shift == 1);

  FockOp D = make_diag([](int j) { return Rational(j + 1); }, 0, W);
  CHECK(D.r == std::vector<int>{0});
  CHECK(D.g == std::vector<int>{0});
  CHECK(D.block_preserving());

  CHECK_THROWS_AS(make_generator(Gen::adag, 0, W), AdmissibilityError);
  CHECK_THROWS_AS(make_generator(Gen::a, 1, W), ShapeError);
}

TEST_CASE("oscillator relations a a^dag, a^dag a, and diagonal shifts") {
  const int N = 6;
  FockSpace W = FockSpace::fock(N);
  FockOp A = lower(W), Ad = raiser(W);

  FockOp lhs = compose(A, Ad);
  FockOp rhs = make_diag([&](int j) { return Rational(1) - kQ.pow(2 * (j + 1)); }, 0, W);
  AgreeResult res = agree_on_window(lhs, rhs);
  CHECK(res.equal);
  CHECK(res.window_size == N);  // the top state is outside the window

  lhs = compose(Ad, A);
  rhs = make_diag([&](int j) { return Rational(1) - kQ.pow(2 * j); }, 0, W);
  res = agree_on_window(lhs, rhs);
  CHECK(res.equal);
  CHECK(res.window_size == N + 1);  // the round trip never leaves the truncation

  auto f = [](int j) { return Rational(3 * j - 2, 7); };
  auto f1 = [&](int j) { return f(j + 1); };
  FockOp F = make_diag(f, 0, W), F1 = make_diag(f1, 0, W);
  CHECK(tables_equal(compose(A, F), compose(F1, A)));          // a f(D) = f(D+1) a
  CHECK(agree_on_window(compose(F, Ad), compose(Ad, F1)).equal);  // f(D) a^dag = a^dag f(D+1)
}

TEST_CASE("guard algebra under composition and addition") {
  const int N = 6;
  FockSpace W = FockSpace::fock(N);
  FockOp A = lower(W), Ad = raiser(W);

  FockOp Ad2 = compose(Ad, Ad);
  CHECK(Ad2.r == std::vector<int>{2});
  CHECK(Ad2.g == std::vector<int>{2});
  for (long j = 0; j <= N; ++j) CHECK(static_cast<int>(Ad2.exact[static_cast<size_t>(j)]) == (j <= N - 2 ? 1 : 0));

  FockOp AAd = compose(A, Ad);
  CHECK(AAd.r == std::vector<int>{1});
  CHECK(AAd.g == std::vector<int>{1});
  FockOp AdA = compose(Ad, A);
  CHECK(AdA.r == std::vector<int>{1});
  CHECK(AdA.g == std::vector<int>{1});
  FockOp S = add(A, Ad);
  CHECK(S.r == std::vector<int>{1});
  CHECK(S.g == std::vector<int>{1});

  FockSpace W3 = FockSpace::fock(3);
  FockOp word = power(raiser(W3), 4);  // guard 4 exceeds the truncation
  for (char e : word.exact) CHECK(e == 0);
  CHECK_THROWS_AS(agree_on_window(word, word), EmptyWindowError);
}

TEST_CASE("disagreement witness is the first differing basis vector") {
  FockSpace W = FockSpace::fock(3);
  FockOp A = lower(W);
  AgreeResult res = agree_on_window(A, scale(A, Rational(2)));
  CHECK(!res.equal);
  REQUIRE(res.witness.has_value());
  CHECK(res.witness->index == 1);
  CHECK(res.witness->label == "w1");
  CHECK(res.witness->lhs == SparseCol{{0, Rational(1)}});
  CHECK(res.witness->rhs == SparseCol{{0, Rational(2)}});
}

TEST_CASE("tensor products, leg permutations, embeddings") {
  const int N = 3;
  FockSpace W = FockSpace::fock(N);
  FockSpace WW = FockSpace::fock(N, 2);
  FockOp T = tensor(raiser(W), lower(W));
  CHECK(T.degree_shift == 0);
  CHECK(T.r == std::vector<int>{1, 0});
  CHECK(T.g == std::vector<int>{1, 0});

  FockOp flipped = flip_legs(T);
  CHECK(tables_equal(flipped, tensor(lower(W), raiser(W))));
  FockOp back = flip_legs(flipped);
  CHECK(tables_equal(back, T));
  CHECK(back.r == T.r);
  CHECK(back.g == T.g);
  CHECK(back.exact == T.exact);

  auto f = [](int j) { return Rational(2 * j + 1, 5); };
  FockOp F = make_diag(f, 0, W);
  FockOp P3 = tensor(T, F);
  FockOp rotated = permute_legs(P3, {2, 0, 1});
  CHECK(tables_equal(rotated, tensor(F, T)));
  CHECK(rotated.r == std::vector<int>{0, 1, 0});

  FockSpace big = FockSpace::fock(N, 3);
  FockOp X13 = embed(T, big, {0, 2});
  CHECK(tables_equal(X13, tensor(raiser(W), tensor(make_identity(W), lower(W)))));
  CHECK(X13.r == std::vector<int>{1, 0, 0});
  CHECK(X13.g == std::vector<int>{1, 0, 0});

  Mat e21 = Mat::Zero(2, 2);
  e21(1, 0) = Rational(1);
  FockSpace S2 = FockSpace::spin();
  FockSpace WS = tensor(W, S2);
  FockOp spin_small = make_spin(e21, 0, S2);
  CHECK(spin_small.degree_shift == 1);  // v- carries degree one
  CHECK(tables_equal(embed(spin_small, WS, {1}), make_spin(e21, 1, WS)));
  CHECK(tables_equal(tensor(make_identity(W), spin_small), make_spin(e21, 1, WS)));

  CHECK_THROWS_AS(embed(spin_small, WS, {0}), ShapeError);
  CHECK_THROWS_AS(compose(T, make_identity(W)), ShapeError);
  CHECK_THROWS_AS(add(T, F), ShapeError);
}

TEST_CASE("graded blocks: frozen restrictions and nilpotency") {
  const int N = 3;
  FockSpace WW = FockSpace::fock(N, 2);
  GradedBlock id3 = restrict_to_block(make_identity(WW), 3);
  CHECK(id3.basis == std::vector<long>{3, 6, 9, 12});
  CHECK(id3.mat.rows() == 4);
  for (long i = 0; i < 4; ++i)
    for (long j = 0; j < 4; ++j) CHECK(id3.mat(i, j) == Rational(i == j ? 1 : 0));

  FockOp X = tensor(lower(FockSpace::fock(N)), braiser(FockSpace::fock(N)));
  GradedBlock b1 = restrict_to_block(X, 1);
  CHECK(b1.basis == std::vector<long>{1, 4});
  CHECK(b1.mat(0, 0).is_zero());
  CHECK(b1.mat(1, 0).is_zero());
  CHECK(b1.mat(1, 1).is_zero());
  CHECK(b1.mat(0, 1) == Rational(-5, 4));  // 1 - q^{-2}

  for (int m = 0; m <= WW.max_degree(); ++m) {
    GradedBlock b = restrict_to_block(X, m);
    Mat pw = Mat::Identity(b.mat.rows(), b.mat.cols());
    for (int k = 0; k <= m; ++k) pw = pw * b.mat;
    CHECK(pw.isZero());
  }

  CHECK_THROWS_AS(restrict_to_block(lower(FockSpace::fock(N)), 1), ShapeError);
}

TEST_CASE("blockwise q-exponential: frozen action and functional laws") {
  const int N = 6;
  FockSpace W = FockSpace::fock(N);
  FockOp X = tensor(lower(W), braiser(W));
  FockOp E = qexp_blockwise(kP, X);

  const FockSpace WW = E.space_in;
  const long in10 = WW.flatten({1, 0});
  const long out01 = WW.flatten({0, 1});
  CHECK(E.col(in10) == SparseCol{{out01, Rational(-9, 4)}, {in10, Rational(1)}});
  CHECK(E.col(0) == SparseCol{{0, Rational(1)}});
  for (long i = 0; i < WW.dim(); ++i)
    CHECK(static_cast<int>(E.exact[static_cast<size_t>(i)]) == (WW.degree(i) <= N ? 1 : 0));

  // e_p(p x) = (1 - x) e_p(x)
  FockOp lhs = qexp_blockwise(kP, scale(X, kP));
  FockOp one_minus_x = add(make_identity(WW), scale(X, Rational(-1)));
  CHECK(agree_on_window(lhs, compose(one_minus_x, E)).equal);

  // e_p(x) = e_{1/p}(x/p)^{-1}
  FockOp rhs = invert_blockwise(qexp_blockwise(kP.inverse(), scale(X, kP.inverse())));
  CHECK(agree_on_window(E, rhs).equal);

  // y x = p^{-1} x y for y = p^{D_1}  ==>  y e_p(x) = e_p(x/p) y
  FockOp Y = diag_qpow(WW, 0, kP, 1, 0);
  CHECK(tables_equal(compose(Y, X), scale(compose(X, Y), kP.inverse())));
  CHECK(agree_on_window(compose(Y, E), compose(qexp_blockwise(kP, scale(X, kP.inverse())), Y)).equal);

  // blockwise inverse really inverts within the window
  FockOp EinvE = compose(invert_blockwise(E), E);
  AgreeResult res = agree_on_window(EinvE, make_identity(WW));
  CHECK(res.equal);
  CHECK(res.window_size > 0);

  CHECK_THROWS_AS(invert_blockwise(scale(make_identity(WW), Rational(0))), SingularBlockError);
  CHECK_THROWS_AS(qexp_blockwise(kP, lower(W)), ShapeError);
}

TEST_CASE("ladder identities for powers against the raising generators") {
  const int N = 8;
  FockSpace W = FockSpace::fock(N);
  FockOp A = lower(W), Ad = raiser(W), Abd = braiser(W);
  FockOp pD = diag_qpow(W, 0, kP, 1, 0);

  for (int k = 0; k <= 4; ++k) {
    const Rational c = Rational(1) - kP.pow(k + 1);
    // [a^{k+1}, a^dag] = (1 - p^{k+1}) p^D a^k
    FockOp lhs = commutator(power(A, k + 1), Ad);
    FockOp rhs = scale(compose(pD, power(A, k)), c);
    CHECK(agree_on_window(lhs, rhs).equal);

    // [abar^dag^{k+1}, a]_{p^{k+1}} = (1 - p^{k+1}) abar^dag^k
    FockOp Bk1 = power(Abd, k + 1);
    FockOp tw = add(compose(Bk1, A), scale(compose(A, Bk1), -kP.pow(k + 1)));
    CHECK(agree_on_window(tw, scale(power(Abd, k), c)).equal);
  }
}

TEST_CASE("exchange identities between exponentials, diagonals and ladders") {
  const int N = 8;
  FockSpace W = FockSpace::fock(N);
  FockSpace WW = FockSpace::fock(N, 2);
  FockOp A1 = make_generator(Gen::a, 0, WW);
  FockOp A2 = make_generator(Gen::a, 1, WW);
  FockOp Ad1 = make_generator(Gen::adag, 0, WW, kQ);
  FockOp Abd1 = make_generator(Gen::abardag, 0, WW, kQ);
  FockOp Abd2 = make_generator(Gen::abardag, 1, WW, kQ);
  FockOp X = compose(A1, Abd2);   // the two factors commute
  FockOp Xt = compose(Abd1, A2);  // transposed direction

  ParamPoint pp;
  SpectralSampler sampler(pp, "fock-exchange", N);
  for (const Rational& y : {Rational(3, 7), sampler.sample("y")}) {
    FockOp E = qexp_blockwise(kP, scale(X, y));

    // commutants: any function of D_1 + D_2, and each tensor factor of the argument
    FockOp Ftot = make_multi_diag(
        [](const std::vector<int>& m) { return Rational(2 * (m[0] + m[1]) + 1, 3); }, WW);
    CHECK(agree_on_window(commutator(E, Ftot), make_zero(WW, WW)).equal);
    CHECK(agree_on_window(commutator(E, A1), make_zero(WW, WW)).equal);
    CHECK(agree_on_window(commutator(E, Abd2), make_zero(WW, WW)).equal);

    // [E, a^dag_1] = y p^{D_1} abar^dag_2 E
    FockOp pD1 = diag_qpow(WW, 0, kP, 1, 0);
    CHECK(agree_on_window(commutator(E, Ad1), scale(compose(pD1, compose(Abd2, E)), y)).equal);

    // [E, p^{-D_1} a_2] = y E a_1 p^{-D_1}
    FockOp pD1inv = diag_qpow(WW, 0, kP, -1, 0);
    CHECK(agree_on_window(commutator(E, compose(pD1inv, A2)),
                          scale(compose(E, compose(A1, pD1inv)), y))
              .equal);

    // [abar^dag_2, e_p(y a^dag_1 a_2)] = y e_p(y a^dag_1 a_2) a^dag_1 p^{-D_2 - 1}
    FockOp F = qexp_blockwise(kP, scale(compose(Ad1, A2), y));
    FockOp pD2m1 = diag_qpow(WW, 1, kP, -1, -1);
    CHECK(agree_on_window(commutator(Abd2, F), scale(compose(F, compose(Ad1, pD2m1)), y)).equal);

    // [abar^dag_1 a_2, E] = y (E p^{-D_1 - 1} - p^{-D_2 - 1} E)
    FockOp pD1m1 = diag_qpow(WW, 0, kP, -1, -1);
    FockOp rhs9 = scale(add(compose(E, pD1m1), scale(compose(pD2m1, E), Rational(-1))), y);
    CHECK(agree_on_window(commutator(Xt, E), rhs9).equal);

    // e_p(p x) (y; p)_{D_1} = (y; p)_{D_1} e_p(-x p^{D_1} y) e_p(p x)
    FockOp Ep = qexp_blockwise(kP, scale(X, kP));
    FockOp P = make_diag([&](int j) { return q_pochhammer(y, kP, j); }, 0, WW);
    FockOp M = qexp_blockwise(kP, scale(compose(X, pD1), -y));
    CHECK(agree_on_window(compose(Ep, P), compose(P, compose(M, Ep))).equal);

    // e_p(p x) (p^{1-D_1} y; p)_{D_1}^{-1} e_p(p y xt)
    //   = e_p(p y xt) (p^{1-D_2} y; p)_{D_2}^{-1} e_p(p x)
    auto pinv = [&](int j) { return q_pochhammer(kP.pow(1 - j) * y, kP, j).inverse(); };
    FockOp Pinv1 = make_diag(pinv, 0, WW);
    FockOp Pinv2 = make_diag(pinv, 1, WW);
    FockOp Einner = qexp_blockwise(kP, scale(Xt, kP * y));
    CHECK(agree_on_window(compose(Ep, compose(Pinv1, Einner)),
                          compose(Einner, compose(Pinv2, Ep)))
              .equal);
  }
}

TEST_CASE("dump and load round trip") {
  const int N = 3;
  FockSpace W = FockSpace::fock(N);
  Mat e12 = Mat::Zero(2, 2);
  e12(0, 1) = Rational(1, 2);
  FockOp X = tensor(raiser(W), make_spin(e12, 0, FockSpace::spin()));

  std::ostringstream os;
  dump_op(X, os);
  const std::string text = os.str();
  CHECK(text.substr(0, text.find('\n')) == "3 1 1");

  std::istringstream is(text);
  FockOp loaded = load_op(is);
  CHECK(tables_equal(loaded, X));
  CHECK(loaded.r == std::vector<int>{1});
  CHECK(loaded.g == std::vector<int>{0});  // guards are not serialized
  for (char e : loaded.exact) CHECK(e == 1);
  CHECK(loaded.degree_shift == X.degree_shift);

  FockOp bad_order =
      permute_legs(X, {1, 0});  // spin leg first: not serializable
  std::ostringstream os2;
  CHECK_THROWS_AS(dump_op(bad_order, os2), ShapeError);

  std::istringstream bad("x y");
  CHECK_THROWS_AS(load_op(bad), ShapeError);
}

TEST_CASE("truncation soundness: windows agree across truncations") {
  auto word_at = [&](int N) {
    FockSpace W = FockSpace::fock(N);
    return compose(raiser(W), compose(lower(W), raiser(W)));
  };
  AgreeResult res = agree_across_truncations(word_at(6), word_at(10));
  CHECK(res.equal);
  CHECK(res.window_size > 0);

  FockOp small = compose(raiser(FockSpace::fock(4)), lower(FockSpace::fock(4)));
  FockOp large = scale(compose(raiser(FockSpace::fock(8)), lower(FockSpace::fock(8))), Rational(2));
  res = agree_across_truncations(small, large);
  CHECK(!res.equal);
  REQUIRE(res.witness.has_value());
  CHECK(res.witness->label == "w1");
}
