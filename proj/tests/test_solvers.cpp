#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "qosc/solvers.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

using namespace qosc;

namespace {

// q = 2/3, u = 3/5, xi = 5/7, xitilde = 7/4, r = 5/11
const ParamPoint kP;

Rational probe(const std::string& role, int N, const std::string& salt = "test-solvers") {
  SpectralSampler s(kP, salt, N);
  return s.sample(role);
}

}  // namespace

TEST_CASE("echelon kernel: rank, reduction, nullspace, touched tracking") {
  Echelon e(4);
  CHECK(e.cols() == 4);
  CHECK(e.insert({{0, Rational(1)}, {1, Rational(-1)}}));
  CHECK(e.insert({{1, Rational(2)}, {2, Rational(-2)}}));
  CHECK(e.rank() == 2);
  // dependent row reduces to zero
  CHECK_FALSE(e.insert({{0, Rational(3)}, {2, Rational(-3)}}));
  CHECK(e.rank() == 2);
  CHECK(e.is_pivot(0));
  CHECK(e.is_pivot(1));
  CHECK_FALSE(e.is_pivot(2));
  CHECK_FALSE(e.is_pivot(3));
  CHECK(e.touched(2));
  CHECK_FALSE(e.touched(3));  // column 3 never appeared
  CHECK(e.free_columns(false) == std::vector<long>{2, 3});
  CHECK(e.free_columns(true) == std::vector<long>{2});

  const Vec v = e.nullspace_vector(2);
  CHECK(v(0) == Rational(1));
  CHECK(v(1) == Rational(1));
  CHECK(v(2) == Rational(1));
  CHECK(v(3) == Rational(0));

  // rational coefficients survive the primitive-integer normalization
  Echelon f(2);
  f.insert({{0, Rational(2, 3)}, {1, Rational(-3, 5)}});
  const Vec w = f.nullspace_vector(1);
  CHECK(w(0) == Rational(9, 10));
  CHECK(w(1) == Rational(1));

  // duplicate columns inside one row are merged before anything else
  Echelon g(2);
  CHECK_FALSE(g.insert({{0, Rational(1)}, {0, Rational(-1)}}));
  CHECK_FALSE(g.touched(0));  // a fully cancelled row carries no information
  CHECK(g.insert({{0, Rational(1, 2)}, {0, Rational(1, 3)}, {1, Rational(5)}}));
  CHECK(g.is_pivot(0));

  // out-of-range column
  Echelon h(2);
  CHECK_THROWS_AS(h.insert({{2, Rational(1)}}), ShapeError);
  CHECK_THROWS_AS(h.nullspace_vector(2), ShapeError);
}

TEST_CASE("echelon kernel: back-elimination keeps the basis reduced") {
  // x0 = x1 = x2 forced through pivots inserted in a scrambled order
  Echelon e(3);
  e.insert({{1, Rational(1)}, {2, Rational(-1)}});
  e.insert({{0, Rational(1)}, {2, Rational(7)}});
  e.insert({{0, Rational(1)}, {1, Rational(1)}});
  CHECK(e.rank() == 3);
  CHECK(e.free_columns(false).empty());
}

TEST_CASE("ratio recurrence matches the closed diagonal family") {
  const int N = 8;
  const Rational z = probe("z", N);
  const FockOp rec = k_upsilon_from_recurrence(kP, N, z);
  const FockOp closed = build_K("upsilon", kP, N, z);
  CHECK(tables_equal(rec, closed));

  // first step of the recurrence, written out
  const Rational g = kP.q * kP.q / (kP.u * kP.u * kP.xi);
  const Rational expected = (Rational(1) - g * z * z) / (z * z - g);
  CHECK(rec.col(1) == SparseCol{{1, expected}});

  CHECK_THROWS_AS(k_upsilon_from_recurrence(kP, N, Rational(0)), AdmissibilityError);
  ParamPoint bad = kP;
  bad.xi = Rational(0);
  CHECK_THROWS_AS(k_upsilon_from_recurrence(bad, N, z), AdmissibilityError);
}

TEST_CASE("two-sided reflection solve reproduces every closed diagonal family") {
  const int N = 8;
  const Rational y = probe("y", N);
  for (const std::string pi : {"rho", "rhobar", "upsilon", "phi"}) {
    const SolutionSet s = solve_K_from_RE(pi, kP, N, y);
    CHECK(s.info.dimension == 1);
    CHECK(s.info.untouched == 0);
    CHECK(s.info.equation == "reflection:" + pi);
    CHECK(s.info.cut_dims.size() >= 2);
    CHECK(s.info.cut_dims.back() == 1);
    const FockOp& K = unique_solution(s);
    const AgreeResult res = agree_on_window(K, build_K(pi, kP, N, y));
    CHECK(res.equal);
    CHECK(res.window_size == N + 1);
  }
  CHECK_THROWS_AS(solve_K_from_RE("Pi", kP, N, probe("y", N)), ShapeError);
  CHECK_THROWS_AS(solve_K_from_RE("rho", kP, N, Rational(0)), AdmissibilityError);
}

TEST_CASE("reflection solve dimensions are stable across parameter points") {
  const int N = 6;
  for (const std::uint64_t seed : {11u, 22u, 33u}) {
    const ParamPoint p = sample_params(seed);
    SpectralSampler s(p, "stability", N);
    const SolutionSet kset = solve_K_from_RE("rho", p, N, s.sample("y"));
    CHECK(kset.info.dimension == 1);
    CHECK(agree_on_window(unique_solution(kset), build_K("rho", p, N, s.sample("y"))).equal ==
          false);  // different spectral points give different operators
  }
}

TEST_CASE("twisted-pair intertwining pins the same diagonal family") {
  const int N = 8;
  const Rational z = probe("z", N);
  const SolutionSet s = solve_K_from_intertwining(kP, N, z);
  CHECK(s.info.dimension == 1);
  CHECK(s.info.untouched == 0);
  CHECK(s.info.cut_dims.size() == 2);
  const FockOp& K = unique_solution(s);
  CHECK(tables_equal(K, build_K("upsilon", kP, N, z)));
  CHECK(tables_equal(K, k_upsilon_from_recurrence(kP, N, z)));
  CHECK_THROWS_AS(solve_K_from_intertwining(kP, N, Rational(0)), AdmissibilityError);
}

TEST_CASE("graded-block exchange solve: scalar-table pair") {
  const int N = 8;
  const Rational z = probe("z", N);
  const SolutionSet s = solve_R_upsilon_phi(kP, N, z);
  CHECK(s.info.dimension == 1);
  CHECK(s.info.untouched == 0);
  REQUIRE(s.info.block_dims.size() == static_cast<size_t>(N) - 1);  // levels 0..N-2
  long level_total = 0;
  for (const long d : s.info.block_dims) level_total += d;
  CHECK(level_total == 1);  // one free level coefficient: the overall scale

  const FockOp& R = unique_solution(s);
  const FockOp closed = build_R(RPair::upsilon_phi, kP, N, z);
  const AgreeResult res = agree_on_window(R, closed);
  CHECK(res.equal);
  long cols_in_window = 0;
  for (int m = 0; m <= N - 2; ++m)
    cols_in_window += static_cast<long>(block_basis(R.space_in, m).size());
  CHECK(res.window_size == cols_in_window);
  for (int m = 0; m <= 6; ++m)
    CHECK(restrict_to_block(R, m).mat == restrict_to_block(closed, m).mat);
  CHECK_THROWS_AS(solve_R_upsilon_phi(kP, N, Rational(0)), AdmissibilityError);
}

TEST_CASE("graded-block exchange solve: lattice pair") {
  const int N = 7;  // blocks 0..6 are solved; the comparisons below reach block 6
  const Rational z = probe("z", N);
  const SolutionSet s = solve_R_rho_rhobar(kP, N, z);
  CHECK(s.info.dimension == 1);
  CHECK(s.info.untouched == 0);
  const FockOp& R = unique_solution(s);
  const FockOp closed = build_R(RPair::rho_rhobar, kP, N, z);
  const AgreeResult res = agree_on_window(R, closed);
  CHECK(res.equal);
  for (int m = 0; m <= 6; ++m)
    CHECK(restrict_to_block(R, m).mat == restrict_to_block(closed, m).mat);
}

TEST_CASE("exchange solve dimensions are stable across parameter points") {
  const int N = 5;
  for (const std::uint64_t seed : {4u, 5u, 6u}) {
    const ParamPoint p = sample_params(seed);
    SpectralSampler s(p, "stability-R", N);
    const Rational z = s.sample("z");
    CHECK(solve_R_upsilon_phi(p, N, z).info.dimension == 1);
    CHECK(solve_R_rho_rhobar(p, N, z).info.dimension == 1);
  }
}

TEST_CASE("fused lattice family: anchored solution at the plain twist") {
  const int N = 6;
  ParamPoint p1 = kP;
  p1.r = Rational(1);  // the fused family at twist 1 degenerates to the plain one
  const FusionFamily fam = solve_fusion_L(p1, N);
  CHECK(fam.info.dimension == 1);
  CHECK(fam.info.untouched == 0);
  CHECK(fam.r == Rational(1));

  const FockSpace W = FockSpace::fock(N);
  const FockSpace WC2 = tensor(W, FockSpace::spin());
  const Rational q = p1.q;
  const FockOp a = make_generator(Gen::a, 0, W);
  const FockOp adag = make_generator(Gen::adag, 0, W, q);
  const auto qpow = [&q](const std::function<long(int)>& f) {
    return [&q, f](int j) { return q.pow(f(j)); };
  };
  const FockOp X0 = two_by_two(make_diag(qpow([](int j) { return static_cast<long>(j); }), 0, W),
                               make_zero(W, W), make_zero(W, W),
                               make_diag(qpow([](int j) { return -static_cast<long>(j); }), 0, W));
  const FockOp X1 = two_by_two(
      make_zero(W, W),
      compose(adag, make_diag(qpow([](int j) { return -static_cast<long>(j) - 1; }), 0, W)),
      compose(a, make_diag(qpow([](int j) { return static_cast<long>(j) + 1; }), 0, W)),
      make_zero(W, W));
  const FockOp X2 = two_by_two(
      make_zero(W, W), make_zero(W, W), make_zero(W, W),
      scale(make_diag(qpow([](int j) { return static_cast<long>(j) + 2; }), 0, W), -Rational(1)));
  CHECK(agree_on_window(fam.L0, X0).equal);
  CHECK(agree_on_window(fam.L1, X1).equal);
  CHECK(agree_on_window(fam.L2, X2).equal);

  const Rational z = probe("z", N);
  const FockOp L = fusion_L_at(fam, z);
  const AgreeResult res = agree_on_window(L, build_L("rho", p1, N, z));
  CHECK(res.equal);
  CHECK(res.window_size >= 2L * N);

  // the boundary solve over the fused family reproduces the closed family
  const Rational y = probe("y", N);
  const SolutionSet ks = solve_fusion_K(fam, p1, N, y);
  CHECK(ks.info.dimension == 1);
  CHECK(agree_on_window(unique_solution(ks), build_K("rho", p1, N, y)).equal);
}

TEST_CASE("fused lattice family: generic twist fixes the anchor vector") {
  const int N = 6;
  const FusionFamily fam = solve_fusion_L(kP, N);
  CHECK(fam.info.dimension == 1);
  CHECK(fam.info.untouched == 0);
  const FockSpace WC2 = fam.L0.space_in;
  const Rational z = probe("z", N);
  const FockOp L = fusion_L_at(fam, z);
  CHECK(L.col(WC2.flatten({0, 0})) == SparseCol{{WC2.flatten({0, 0}), Rational(1)}});

  const SolutionSet ks = solve_fusion_K(fam, kP, N, probe("y", N));
  CHECK(ks.info.dimension == 1);
  const FockOp& K = unique_solution(ks);
  CHECK(K.col(0) == SparseCol{{0, Rational(1)}});
}

TEST_CASE("fused bundle: injection and projection relations hold with the recorded scalars") {
  const int N = 6;
  const Rational z = probe("z", N);
  const FusionSolution S = solve_fusion_objects(kP, N, z);
  CHECK_FALSE(S.scalar_iota.is_zero());
  CHECK_FALSE(S.scalar_tau.is_zero());
  CHECK(S.K_info.dimension == 1);
  CHECK(S.K_up_info.dimension == 1);
  CHECK(S.K_down_info.dimension == 1);
  CHECK(S.fam.r == kP.r);
  CHECK(S.fam_up.r == kP.q * kP.r);
  CHECK(S.fam_down.r == kP.r / kP.q);

  const FockSpace W = FockSpace::fock(N);
  const FockSpace WC2 = tensor(W, FockSpace::spin());
  const FockOp M =
      compose(embed(S.K, WC2, {0}),
              compose(fusion_L_at(S.fam, z * z),
                      embed(build_K("Pi", kP, N, z, KSide::right), WC2, {1})));
  const FockOp iota = build_fusion_iota(kP, N, kP.r);
  const FockOp tau = build_fusion_tau(kP, N, kP.r);

  const AgreeResult inj =
      agree_on_window(compose(M, iota), scale(compose(iota, S.K_up), S.scalar_iota));
  CHECK(inj.equal);
  CHECK(inj.window_size > 0);
  const AgreeResult prj =
      agree_on_window(compose(tau, M), scale(compose(S.K_down, tau), S.scalar_tau));
  CHECK(prj.equal);
  CHECK(prj.window_size > 0);
}

TEST_CASE("a boundary solve with no usable equations reports its dimension honestly") {
  const int N = 5;
  const FockSpace WC2 = tensor(FockSpace::fock(N), FockSpace::spin());
  FusionFamily fam;
  fam.r = Rational(1);
  fam.L0 = make_identity(WC2);
  fam.L1 = make_zero(WC2, WC2);
  fam.L2 = make_zero(WC2, WC2);
  const SolutionSet s = solve_fusion_K(fam, kP, N, probe("y", N));
  CHECK(s.info.dimension == 0);  // every equation degenerates; nothing is pinned
  CHECK(s.info.untouched == N + 1);
  CHECK_THROWS_AS(unique_solution(s), DimensionError);
}

TEST_CASE("solutions round-trip through the dump format with a manifest") {
  const int N = 5;
  const Rational y = probe("y", N);
  const SolutionSet s = solve_K_from_RE("rho", kP, N, y);
  const std::string path = "solver_roundtrip.tmp";
  write_solution(path, unique_solution(s), s.info);

  std::ifstream is(path);
  REQUIRE(is.good());
  const FockOp back = load_op(is);
  CHECK(tables_equal(back, unique_solution(s)));

  std::ifstream ms(path + ".manifest");
  REQUIRE(ms.good());
  std::stringstream buf;
  buf << ms.rdbuf();
  CHECK(buf.str().find("reflection:rho") != std::string::npos);
  CHECK(buf.str().find("dimension\t1") != std::string::npos);
  std::remove(path.c_str());
  std::remove((path + ".manifest").c_str());
}
