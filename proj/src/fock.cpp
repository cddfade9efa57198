#include "qosc/fock.hpp"

#include <algorithm>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "qosc/qseries.hpp"

namespace qosc {

// --- FockSpace ---------------------------------------------------------------

FockSpace FockSpace::fock(int N, int count) {
  FockSpace s;
  s.N = N;
  s.legs.assign(static_cast<size_t>(count), Leg::fock);
  return s;
}

FockSpace FockSpace::spin() {
  FockSpace s;
  s.N = 0;  // spaces without Fock legs carry N = 0 so equality is canonical
  s.legs = {Leg::spin};
  return s;
}

int FockSpace::fock_count() const {
  return static_cast<int>(std::count(legs.begin(), legs.end(), Leg::fock));
}

int FockSpace::spin_count() const { return leg_count() - fock_count(); }

long FockSpace::dim() const {
  long d = 1;
  for (int l = 0; l < leg_count(); ++l) d *= leg_dim(l);
  return d;
}

int FockSpace::max_degree() const {
  int d = 0;
  for (int l = 0; l < leg_count(); ++l) d += static_cast<int>(leg_dim(l)) - 1;
  return d;
}

std::vector<int> FockSpace::unflatten(long index) const {
  std::vector<int> multi(static_cast<size_t>(leg_count()));
  for (int l = leg_count() - 1; l >= 0; --l) {
    const long d = leg_dim(l);
    multi[static_cast<size_t>(l)] = static_cast<int>(index % d);
    index /= d;
  }
  return multi;
}

long FockSpace::flatten(const std::vector<int>& multi) const {
  long index = 0;
  for (int l = 0; l < leg_count(); ++l) index = index * leg_dim(l) + multi[static_cast<size_t>(l)];
  return index;
}

int FockSpace::degree(long index) const {
  int d = 0;
  for (int l = leg_count() - 1; l >= 0; --l) {
    const long dim = leg_dim(l);
    d += static_cast<int>(index % dim);
    index /= dim;
  }
  return d;
}

FockSpace tensor(const FockSpace& a, const FockSpace& b) {
  FockSpace s;
  if (a.fock_count() == 0)
    s.N = b.N;
  else if (b.fock_count() == 0)
    s.N = a.N;
  else if (a.N == b.N)
    s.N = a.N;
  else
    throw ShapeError("tensor: Fock truncations differ");
  s.legs = a.legs;
  s.legs.insert(s.legs.end(), b.legs.begin(), b.legs.end());
  if (s.fock_count() == 0) s.N = 0;
  return s;
}

std::string basis_label(const FockSpace& space, long index) {
  const std::vector<int> multi = space.unflatten(index);
  std::string out;
  for (int l = 0; l < space.leg_count(); ++l) {
    if (l) out += "*";
    if (space.legs[static_cast<size_t>(l)] == Leg::fock)
      out += "w" + std::to_string(multi[static_cast<size_t>(l)]);
    else
      out += multi[static_cast<size_t>(l)] == 0 ? "v+" : "v-";
  }
  return out;
}

// --- internals ---------------------------------------------------------------

namespace {

long leg_stride(const FockSpace& space, int leg) {
  long stride = 1;
  for (int l = space.leg_count() - 1; l > leg; --l) stride *= space.leg_dim(l);
  return stride;
}

void require_leg_correspondence(const FockSpace& in, const FockSpace& out) {
  if (in.fock_count() != out.fock_count())
    throw ShapeError("FockOp: input/output Fock leg counts differ");
  if (in.fock_count() > 0 && out.fock_count() > 0 && in.N != out.N)
    throw ShapeError("FockOp: input/output truncations differ");
}

// Sorts, merges duplicates, drops zeros.
void normalize_col(SparseCol& col) {
  std::sort(col.begin(), col.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  SparseCol merged;
  for (auto& [out, val] : col) {
    if (!merged.empty() && merged.back().first == out)
      merged.back().second += val;
    else
      merged.emplace_back(out, val);
  }
  std::erase_if(merged, [](const auto& e) { return e.second.is_zero(); });
  col = std::move(merged);
}

// Recomputes the homogeneity degree from the table.
void compute_degree(FockOp& X) {
  std::optional<int> shift;
  for (long in = 0; in < X.space_in.dim(); ++in) {
    const int din = X.space_in.degree(in);
    for (const auto& [out, val] : X.col(in)) {
      (void)val;
      const int s = X.space_out.degree(out) - din;
      if (!shift)
        shift = s;
      else if (*shift != s) {
        X.degree_shift.reset();
        return;
      }
    }
  }
  X.degree_shift = shift ? shift : std::optional<int>(0);
}

FockOp blank(const FockSpace& in, const FockSpace& out) {
  require_leg_correspondence(in, out);
  FockOp X;
  X.space_in = in;
  X.space_out = out;
  X.cols.assign(static_cast<size_t>(in.dim()), {});
  X.r.assign(static_cast<size_t>(in.fock_count()), 0);
  X.g.assign(static_cast<size_t>(in.fock_count()), 0);
  X.exact.assign(static_cast<size_t>(in.dim()), 1);
  X.degree_shift = 0;
  return X;
}

// Fock-ordinal of a leg (position among the Fock legs), -1 for spin legs.
int fock_ordinal(const FockSpace& space, int leg) {
  if (space.legs[static_cast<size_t>(leg)] != Leg::fock) return -1;
  int ord = 0;
  for (int l = 0; l < leg; ++l)
    if (space.legs[static_cast<size_t>(l)] == Leg::fock) ++ord;
  return ord;
}

}  // namespace

// --- constructors --------------------------------------------------------------

FockOp make_zero(const FockSpace& in, const FockSpace& out) {
  FockOp X = blank(in, out);
  // An absent column is exactly zero only if the untruncated operator is
  // zero there too; the all-exact mask is the right default for the zero op.
  return X;
}

FockOp make_identity(const FockSpace& space) {
  FockOp X = blank(space, space);
  for (long i = 0; i < space.dim(); ++i) X.cols[static_cast<size_t>(i)] = {{i, Rational(1)}};
  return X;
}

FockOp make_generator(Gen kind, int leg, const FockSpace& space, const Rational& q) {
  if (leg < 0 || leg >= space.leg_count()) throw ShapeError("make_generator: leg out of range");
  if (space.legs[static_cast<size_t>(leg)] != Leg::fock)
    throw ShapeError("make_generator: not a Fock leg");
  if (kind != Gen::a && q.is_zero())
    throw AdmissibilityError("make_generator: raising generators need the deformation parameter");
  FockOp X = blank(space, space);
  const long stride = leg_stride(space, leg);
  const int ord = fock_ordinal(space, leg);
  for (long in = 0; in < space.dim(); ++in) {
    const int j = static_cast<int>((in / stride) % (space.N + 1));
    switch (kind) {
      case Gen::a:
        if (j > 0) X.cols[static_cast<size_t>(in)] = {{in - stride, Rational(1)}};
        break;
      case Gen::adag:
        if (j < space.N)
          X.cols[static_cast<size_t>(in)] = {{in + stride, Rational(1) - q.pow(2 * (j + 1))}};
        else
          X.exact[static_cast<size_t>(in)] = 0;
        break;
      case Gen::abardag:
        if (j < space.N)
          X.cols[static_cast<size_t>(in)] = {{in + stride, Rational(1) - q.pow(-2 * (j + 1))}};
        else
          X.exact[static_cast<size_t>(in)] = 0;
        break;
    }
  }
  if (kind != Gen::a) {
    X.r[static_cast<size_t>(ord)] = 1;
    X.g[static_cast<size_t>(ord)] = 1;
  }
  compute_degree(X);
  return X;
}

FockOp make_diag(const std::function<Rational(int)>& f, int leg, const FockSpace& space) {
  if (leg < 0 || leg >= space.leg_count()) throw ShapeError("make_diag: leg out of range");
  if (space.legs[static_cast<size_t>(leg)] != Leg::fock) throw ShapeError("make_diag: not a Fock leg");
  FockOp X = blank(space, space);
  const long stride = leg_stride(space, leg);
  for (long in = 0; in < space.dim(); ++in) {
    const int j = static_cast<int>((in / stride) % (space.N + 1));
    const Rational v = f(j);
    if (!v.is_zero()) X.cols[static_cast<size_t>(in)] = {{in, v}};
  }
  return X;
}

FockOp make_multi_diag(const std::function<Rational(const std::vector<int>&)>& f,
                       const FockSpace& space) {
  FockOp X = blank(space, space);
  for (long in = 0; in < space.dim(); ++in) {
    const Rational v = f(space.unflatten(in));
    if (!v.is_zero()) X.cols[static_cast<size_t>(in)] = {{in, v}};
  }
  return X;
}

FockOp make_spin(const Mat& m2, int leg, const FockSpace& space) {
  if (m2.rows() != 2 || m2.cols() != 2) throw ShapeError("make_spin: need a 2x2 matrix");
  if (leg < 0 || leg >= space.leg_count()) throw ShapeError("make_spin: leg out of range");
  if (space.legs[static_cast<size_t>(leg)] != Leg::spin) throw ShapeError("make_spin: not a spin leg");
  FockOp X = blank(space, space);
  const long stride = leg_stride(space, leg);
  for (long in = 0; in < space.dim(); ++in) {
    const int s = static_cast<int>((in / stride) % 2);
    SparseCol col;
    for (int row = 0; row < 2; ++row) {
      const Rational& v = m2(row, s);
      if (!v.is_zero()) col.emplace_back(in + (row - s) * stride, v);
    }
    normalize_col(col);
    X.cols[static_cast<size_t>(in)] = std::move(col);
  }
  compute_degree(X);
  return X;
}

// --- algebra ---------------------------------------------------------------------

FockOp compose(const FockOp& A, const FockOp& B) {
  if (!(A.space_in == B.space_out)) throw ShapeError("compose: inner spaces differ");
  FockOp C = blank(B.space_in, A.space_out);
  for (long in = 0; in < B.space_in.dim(); ++in) {
    std::map<long, Rational> acc;
    bool col_exact = B.exact[static_cast<size_t>(in)] != 0;
    for (const auto& [mid, bval] : B.col(in)) {
      if (!A.exact[static_cast<size_t>(mid)]) col_exact = false;
      for (const auto& [out, aval] : A.col(mid)) acc[out] += bval * aval;
    }
    SparseCol col;
    for (auto& [out, val] : acc)
      if (!val.is_zero()) col.emplace_back(out, val);
    C.cols[static_cast<size_t>(in)] = std::move(col);
    C.exact[static_cast<size_t>(in)] = col_exact ? 1 : 0;
  }
  for (size_t i = 0; i < C.r.size(); ++i) {
    C.r[i] = A.r[i] + B.r[i];
    C.g[i] = std::max(B.g[i], A.g[i] + B.r[i]);
  }
  compute_degree(C);
  return C;
}

FockOp add(const FockOp& A, const FockOp& B) {
  if (!(A.space_in == B.space_in) || !(A.space_out == B.space_out))
    throw ShapeError("add: spaces differ");
  FockOp C = blank(A.space_in, A.space_out);
  for (long in = 0; in < A.space_in.dim(); ++in) {
    SparseCol col = A.col(in);
    col.insert(col.end(), B.col(in).begin(), B.col(in).end());
    normalize_col(col);
    C.cols[static_cast<size_t>(in)] = std::move(col);
    C.exact[static_cast<size_t>(in)] = (A.exact[static_cast<size_t>(in)] && B.exact[static_cast<size_t>(in)]) ? 1 : 0;
  }
  for (size_t i = 0; i < C.r.size(); ++i) {
    C.r[i] = std::max(A.r[i], B.r[i]);
    C.g[i] = std::max(A.g[i], B.g[i]);
  }
  compute_degree(C);
  return C;
}

FockOp scale(const FockOp& A, const Rational& c) {
  FockOp C = A;
  if (c.is_zero()) {
    for (auto& col : C.cols) col.clear();
    std::fill(C.exact.begin(), C.exact.end(), 1);
    std::fill(C.r.begin(), C.r.end(), 0);
    std::fill(C.g.begin(), C.g.end(), 0);
    compute_degree(C);
    return C;
  }
  for (auto& col : C.cols)
    for (auto& [out, val] : col) val *= c;
  return C;
}

FockOp tensor(const FockOp& A, const FockOp& B) {
  const FockSpace in = tensor(A.space_in, B.space_in);
  const FockSpace out = tensor(A.space_out, B.space_out);
  FockOp C = blank(in, out);
  const long b_in_dim = B.space_in.dim();
  const long b_out_dim = B.space_out.dim();
  for (long ia = 0; ia < A.space_in.dim(); ++ia)
    for (long ib = 0; ib < b_in_dim; ++ib) {
      SparseCol col;
      for (const auto& [oa, va] : A.col(ia))
        for (const auto& [ob, vb] : B.col(ib)) col.emplace_back(oa * b_out_dim + ob, va * vb);
      const long i = ia * b_in_dim + ib;
      C.cols[static_cast<size_t>(i)] = std::move(col);  // already in ascending order
      // A factor that is exactly zero on its input makes the whole product
      // column exactly zero, whatever the other factor's window says.
      const bool ea = A.exact[static_cast<size_t>(ia)] != 0;
      const bool eb = B.exact[static_cast<size_t>(ib)] != 0;
      const bool zero_a = ea && A.col(ia).empty();
      const bool zero_b = eb && B.col(ib).empty();
      C.exact[static_cast<size_t>(i)] = ((ea && eb) || zero_a || zero_b) ? 1 : 0;
    }
  std::copy(A.r.begin(), A.r.end(), C.r.begin());
  std::copy(B.r.begin(), B.r.end(), C.r.begin() + static_cast<long>(A.r.size()));
  std::copy(A.g.begin(), A.g.end(), C.g.begin());
  std::copy(B.g.begin(), B.g.end(), C.g.begin() + static_cast<long>(A.g.size()));
  compute_degree(C);
  return C;
}

FockOp commutator(const FockOp& A, const FockOp& B) {
  return add(compose(A, B), scale(compose(B, A), Rational(-1)));
}

FockOp permute_legs(const FockOp& X, const std::vector<int>& perm) {
  const int L = X.space_in.leg_count();
  if (static_cast<int>(perm.size()) != L || X.space_out.leg_count() != L)
    throw ShapeError("permute_legs: permutation size mismatch");
  FockSpace in = X.space_in, out = X.space_out;
  for (int l = 0; l < L; ++l) {
    in.legs[static_cast<size_t>(l)] = X.space_in.legs[static_cast<size_t>(perm[static_cast<size_t>(l)])];
    out.legs[static_cast<size_t>(l)] = X.space_out.legs[static_cast<size_t>(perm[static_cast<size_t>(l)])];
  }
  FockOp C = blank(in, out);
  auto remap = [&](const FockSpace& to, const FockSpace& from, long index) {
    const std::vector<int> multi = from.unflatten(index);
    std::vector<int> m(static_cast<size_t>(L));
    for (int l = 0; l < L; ++l) m[static_cast<size_t>(l)] = multi[static_cast<size_t>(perm[static_cast<size_t>(l)])];
    return to.flatten(m);
  };
  for (long i = 0; i < X.space_in.dim(); ++i) {
    const long ni = remap(in, X.space_in, i);
    SparseCol col;
    for (const auto& [o, v] : X.col(i)) col.emplace_back(remap(out, X.space_out, o), v);
    normalize_col(col);
    C.cols[static_cast<size_t>(ni)] = std::move(col);
    C.exact[static_cast<size_t>(ni)] = X.exact[static_cast<size_t>(i)];
  }
  // Fock ordinals follow the same permutation restricted to Fock legs.
  std::vector<int> old_ord;
  for (int l = 0; l < L; ++l) {
    const int src = perm[static_cast<size_t>(l)];
    if (X.space_in.legs[static_cast<size_t>(src)] == Leg::fock)
      old_ord.push_back(fock_ordinal(X.space_in, src));
  }
  for (size_t i = 0; i < old_ord.size(); ++i) {
    C.r[i] = X.r[static_cast<size_t>(old_ord[i])];
    C.g[i] = X.g[static_cast<size_t>(old_ord[i])];
  }
  compute_degree(C);
  return C;
}

FockOp flip_legs(const FockOp& X) {
  if (X.space_in.leg_count() != 2) throw ShapeError("flip_legs: need exactly two legs");
  return permute_legs(X, {1, 0});
}

FockOp embed(const FockOp& X, const FockSpace& big, const std::vector<int>& leg_map) {
  if (!(X.space_in == X.space_out))
    throw ShapeError("embed: only endomorphisms can be embedded");
  const int k = X.space_in.leg_count();
  if (static_cast<int>(leg_map.size()) != k) throw ShapeError("embed: leg map size mismatch");
  for (int i = 0; i < k; ++i) {
    const int leg = leg_map[static_cast<size_t>(i)];
    if (leg < 0 || leg >= big.leg_count()) throw ShapeError("embed: target leg out of range");
    if (big.legs[static_cast<size_t>(leg)] != X.space_in.legs[static_cast<size_t>(i)])
      throw ShapeError("embed: leg kind mismatch");
    if (big.legs[static_cast<size_t>(leg)] == Leg::fock && big.N != X.space_in.N)
      throw ShapeError("embed: truncation mismatch");
  }
  FockOp C = blank(big, big);
  for (long in = 0; in < big.dim(); ++in) {
    const std::vector<int> multi = big.unflatten(in);
    std::vector<int> sub(static_cast<size_t>(k));
    for (int i = 0; i < k; ++i) sub[static_cast<size_t>(i)] = multi[static_cast<size_t>(leg_map[static_cast<size_t>(i)])];
    const long x_in = X.space_in.flatten(sub);
    SparseCol col;
    std::vector<int> out_multi = multi;
    for (const auto& [x_out, v] : X.col(x_in)) {
      const std::vector<int> x_multi = X.space_out.unflatten(x_out);
      for (int i = 0; i < k; ++i)
        out_multi[static_cast<size_t>(leg_map[static_cast<size_t>(i)])] = x_multi[static_cast<size_t>(i)];
      col.emplace_back(big.flatten(out_multi), v);
    }
    normalize_col(col);
    C.cols[static_cast<size_t>(in)] = std::move(col);
    C.exact[static_cast<size_t>(in)] = X.exact[static_cast<size_t>(x_in)];
  }
  for (int i = 0; i < k; ++i) {
    const int src_ord = fock_ordinal(X.space_in, i);
    if (src_ord < 0) continue;
    const int dst_ord = fock_ordinal(big, leg_map[static_cast<size_t>(i)]);
    C.r[static_cast<size_t>(dst_ord)] = X.r[static_cast<size_t>(src_ord)];
    C.g[static_cast<size_t>(dst_ord)] = X.g[static_cast<size_t>(src_ord)];
  }
  compute_degree(C);
  return C;
}

// --- graded blocks -----------------------------------------------------------------

std::vector<long> block_basis(const FockSpace& space, int m) {
  std::vector<long> basis;
  for (long i = 0; i < space.dim(); ++i)
    if (space.degree(i) == m) basis.push_back(i);
  return basis;
}

GradedBlock restrict_to_block(const FockOp& X, int m) {
  if (!X.block_preserving()) throw ShapeError("restrict_to_block: operator is not block-preserving");
  if (m < 0 || m > X.space_in.max_degree()) throw ShapeError("restrict_to_block: degree out of range");
  GradedBlock blk;
  blk.degree = m;
  blk.basis = block_basis(X.space_in, m);
  const long n = static_cast<long>(blk.basis.size());
  blk.mat = Mat::Zero(n, n);
  for (long c = 0; c < n; ++c)
    for (const auto& [out, v] : X.col(blk.basis[static_cast<size_t>(c)])) {
      const auto it = std::lower_bound(blk.basis.begin(), blk.basis.end(), out);
      blk.mat(it - blk.basis.begin(), c) = v;
    }
  return blk;
}

namespace {

// Shared scaffold for blockwise assembly on degrees <= N.
FockOp assemble_blocks(const FockOp& X, const std::function<Mat(const GradedBlock&)>& transform) {
  if (!X.block_preserving()) throw ShapeError("blockwise assembly: operator is not block-preserving");
  FockOp C = blank(X.space_in, X.space_out);
  // A graded block is free of truncation artifacts as long as the whole
  // untruncated block fits, i.e. up to total degree N (any block when no
  // Fock leg is present).
  const int N = X.space_in.fock_count() > 0 ? X.space_in.N : X.space_in.max_degree();
  for (long i = 0; i < X.space_in.dim(); ++i)
    C.exact[static_cast<size_t>(i)] = X.space_in.degree(i) <= N ? 1 : 0;
  for (int m = 0; m <= std::min(X.space_in.max_degree(), N); ++m) {
    const GradedBlock blk = restrict_to_block(X, m);
    const Mat out = transform(blk);
    const long n = static_cast<long>(blk.basis.size());
    for (long c = 0; c < n; ++c) {
      SparseCol col;
      for (long row = 0; row < n; ++row)
        if (!out(row, c).is_zero()) col.emplace_back(blk.basis[static_cast<size_t>(row)], out(row, c));
      C.cols[static_cast<size_t>(blk.basis[static_cast<size_t>(c)])] = std::move(col);
    }
  }
  compute_degree(C);
  return C;
}

}  // namespace

FockOp qexp_blockwise(const Rational& p, const FockOp& arg) {
  return assemble_blocks(arg, [&](const GradedBlock& blk) { return qexp_nilpotent(p, blk.mat); });
}

FockOp invert_blockwise(const FockOp& X) {
  return assemble_blocks(X, [](const GradedBlock& blk) {
    try {
      return exact_inverse(blk.mat);
    } catch (const SingularBlockError&) {
      throw SingularBlockError("invert_blockwise: singular graded block at degree " +
                               std::to_string(blk.degree));
    }
  });
}

// --- comparison ---------------------------------------------------------------------

AgreeResult agree_on_window(const FockOp& X, const FockOp& Y) {
  if (!(X.space_in == Y.space_in) || !(X.space_out == Y.space_out))
    throw ShapeError("agree_on_window: spaces differ");
  AgreeResult res;
  for (long i = 0; i < X.space_in.dim(); ++i) {
    if (!X.exact[static_cast<size_t>(i)] || !Y.exact[static_cast<size_t>(i)]) continue;
    ++res.window_size;
    if (res.equal && !(X.col(i) == Y.col(i))) {
      res.equal = false;
      Witness w;
      w.index = i;
      w.label = basis_label(X.space_in, i);
      w.lhs = X.col(i);
      w.rhs = Y.col(i);
      res.witness = std::move(w);
    }
  }
  if (res.window_size == 0)
    throw EmptyWindowError("agree_on_window: exactness windows do not intersect at this truncation");
  return res;
}

bool tables_equal(const FockOp& X, const FockOp& Y) {
  return X.space_in == Y.space_in && X.space_out == Y.space_out && X.cols == Y.cols;
}

AgreeResult agree_across_truncations(const FockOp& small, const FockOp& large) {
  if (small.space_in.legs != large.space_in.legs || small.space_out.legs != large.space_out.legs ||
      !(small.space_in == small.space_out) || !(large.space_in == large.space_out))
    throw ShapeError("agree_across_truncations: need endomorphisms on matching leg layouts");
  if (small.space_in.N > large.space_in.N)
    throw ShapeError("agree_across_truncations: first operator must have the smaller truncation");
  const FockSpace& s = small.space_in;
  const FockSpace& l = large.space_in;
  AgreeResult res;
  for (long i = 0; i < s.dim(); ++i) {
    if (!small.exact[static_cast<size_t>(i)]) continue;
    const long li = l.flatten(s.unflatten(i));
    if (!large.exact[static_cast<size_t>(li)]) continue;
    ++res.window_size;
    if (!res.equal) continue;
    // Remap the large column down; components outside the small range mean
    // the small operator's exactness claim is contradicted.
    SparseCol mapped;
    bool in_range = true;
    for (const auto& [out, v] : large.col(li)) {
      const std::vector<int> multi = l.unflatten(out);
      bool fits = true;
      for (int leg = 0; leg < s.leg_count(); ++leg)
        if (s.legs[static_cast<size_t>(leg)] == Leg::fock && multi[static_cast<size_t>(leg)] > s.N)
          fits = false;
      if (!fits) {
        in_range = false;
        break;
      }
      mapped.emplace_back(s.flatten(multi), v);
    }
    if (in_range && small.col(i) == mapped) continue;
    res.equal = false;
    Witness w;
    w.index = i;
    w.label = basis_label(s, i);
    w.lhs = small.col(i);
    w.rhs = std::move(mapped);
    res.witness = std::move(w);
  }
  if (res.window_size == 0)
    throw EmptyWindowError("agree_across_truncations: exactness windows do not intersect");
  return res;
}

void normalize_op(FockOp& X) {
  for (auto& col : X.cols) normalize_col(col);
  compute_degree(X);
}

Mat to_dense(const FockOp& X) {
  Mat M = Mat::Zero(X.space_out.dim(), X.space_in.dim());
  for (long in = 0; in < X.space_in.dim(); ++in)
    for (const auto& [out, v] : X.col(in)) M(out, in) = v;
  return M;
}

// --- serialization --------------------------------------------------------------------

void dump_op(const FockOp& X, std::ostream& os) {
  if (!(X.space_in == X.space_out)) throw ShapeError("dump_op: only endomorphisms are dumped");
  const int L = X.space_in.fock_count();
  for (int l = 0; l < X.space_in.leg_count(); ++l)
    if ((l < L) != (X.space_in.legs[static_cast<size_t>(l)] == Leg::fock))
      throw ShapeError("dump_op: legs must be ordered Fock-first");
  os << X.space_in.N << " " << L << " " << X.space_in.spin_count() << "\n";
  for (long in = 0; in < X.space_in.dim(); ++in)
    for (const auto& [out, v] : X.col(in)) os << out << " " << in << " " << v.to_string() << "\n";
}

FockOp load_op(std::istream& is) {
  int N = 0, L = 0, legs2 = 0;
  if (!(is >> N >> L >> legs2)) throw ShapeError("load_op: malformed header");
  FockSpace space;
  space.N = L > 0 ? N : 0;
  space.legs.assign(static_cast<size_t>(L), Leg::fock);
  space.legs.insert(space.legs.end(), static_cast<size_t>(legs2), Leg::spin);
  FockOp X = blank(space, space);
  long out = 0, in = 0;
  std::string value;
  while (is >> out >> in >> value) {
    if (out < 0 || out >= space.dim() || in < 0 || in >= space.dim())
      throw ShapeError("load_op: index out of range");
    X.cols[static_cast<size_t>(in)].emplace_back(out, Rational::from_string(value));
  }
  for (auto& col : X.cols) normalize_col(col);
  // The dump format carries no guard metadata: raising degrees are recomputed
  // from the table, guards reset to zero, mask to all-exact.
  for (long i = 0; i < space.dim(); ++i) {
    const std::vector<int> mi = space.unflatten(i);
    for (const auto& [o, v] : X.col(i)) {
      (void)v;
      const std::vector<int> mo = space.unflatten(o);
      int ord = 0;
      for (int l = 0; l < space.leg_count(); ++l) {
        if (space.legs[static_cast<size_t>(l)] != Leg::fock) continue;
        X.r[static_cast<size_t>(ord)] = std::max(
            X.r[static_cast<size_t>(ord)], mo[static_cast<size_t>(l)] - mi[static_cast<size_t>(l)]);
        ++ord;
      }
    }
  }
  compute_degree(X);
  return X;
}

}  // namespace qosc
