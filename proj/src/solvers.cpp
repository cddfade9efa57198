#include "qosc/solvers.hpp"

#include <algorithm>
#include <array>
#include <climits>
#include <deque>
#include <fstream>
#include <map>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

namespace qosc {

namespace {

bool col_less(const std::pair<long, Rational>& e, long col) { return e.first < col; }

// ca * a + cb * b, both rows sorted by column; exact zeros dropped.
SparseRow merge_scaled(const SparseRow& a, const Rational& ca, const SparseRow& b,
                       const Rational& cb) {
  SparseRow out;
  out.reserve(a.size() + b.size());
  size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && a[i].first < b[j].first)) {
      out.emplace_back(a[i].first, a[i].second * ca);
      ++i;
    } else if (i == a.size() || b[j].first < a[i].first) {
      out.emplace_back(b[j].first, b[j].second * cb);
      ++j;
    } else {
      Rational v = a[i].second * ca + b[j].second * cb;
      if (!v.is_zero()) out.emplace_back(a[i].first, std::move(v));
      ++i;
      ++j;
    }
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Echelon
// ---------------------------------------------------------------------------

Echelon::Echelon(long cols) : cols_(cols) {
  if (cols < 1) throw ShapeError("Echelon: need at least one column");
  row_of_pivot_.assign(static_cast<size_t>(cols), -1);
  touched_.assign(static_cast<size_t>(cols), 0);
}

void Echelon::make_primitive(SparseRow& row) {
  if (row.empty()) return;
  mpz_class denl(1);
  for (const auto& e : row) denl = lcm(denl, e.second.den());
  mpz_class numg(0);
  for (const auto& e : row) numg = gcd(numg, mpz_class(e.second.num() * (denl / e.second.den())));
  if (sgn(numg) == 0) {
    row.clear();
    return;
  }
  mpq_class f(denl, numg);
  f.canonicalize();
  if (row.front().second.sign() < 0) f = -f;
  if (f == 1) return;
  const Rational fac(f);
  for (auto& e : row) e.second = e.second * fac;
}

bool Echelon::insert(SparseRow row) {
  for (const auto& e : row)
    if (e.first < 0 || e.first >= cols_) throw ShapeError("Echelon: column index out of range");
  std::sort(row.begin(), row.end(),
            [](const auto& x, const auto& y) { return x.first < y.first; });
  SparseRow merged;
  merged.reserve(row.size());
  for (auto& e : row) {
    if (!merged.empty() && merged.back().first == e.first)
      merged.back().second += e.second;
    else
      merged.push_back(std::move(e));
  }
  merged.erase(std::remove_if(merged.begin(), merged.end(),
                              [](const auto& e) { return e.second.is_zero(); }),
               merged.end());
  row = std::move(merged);
  for (const auto& e : row) touched_[static_cast<size_t>(e.first)] = 1;

  // Reduce against the current basis.  Stored rows are zero at every pivot
  // column except their own, so a combine never reintroduces an already
  // cleared pivot column and the scan can resume where it left off.
  size_t i = 0;
  while (i < row.size()) {
    const long c = row[i].first;
    const long ri = row_of_pivot_[static_cast<size_t>(c)];
    if (ri < 0) {
      ++i;
      continue;
    }
    const SparseRow& prow = rows_[static_cast<size_t>(ri)];
    const auto pit = std::lower_bound(prow.begin(), prow.end(), c, col_less);
    row = merge_scaled(row, pit->second, prow, -row[i].second);
    make_primitive(row);
    i = static_cast<size_t>(std::lower_bound(row.begin(), row.end(), c, col_less) - row.begin());
  }
  if (row.empty()) return false;
  make_primitive(row);

  const long pcol = row.front().first;
  const Rational pval = row.front().second;
  for (auto& R : rows_) {
    const auto it = std::lower_bound(R.begin(), R.end(), pcol, col_less);
    if (it == R.end() || it->first != pcol) continue;
    R = merge_scaled(R, pval, row, -it->second);
    make_primitive(R);
  }
  row_of_pivot_[static_cast<size_t>(pcol)] = static_cast<long>(rows_.size());
  pivot_of_row_.push_back(pcol);
  rows_.push_back(std::move(row));
  return true;
}

std::vector<long> Echelon::free_columns(bool touched_only) const {
  std::vector<long> out;
  for (long c = 0; c < cols_; ++c) {
    if (row_of_pivot_[static_cast<size_t>(c)] >= 0) continue;
    if (touched_only && touched_[static_cast<size_t>(c)] == 0) continue;
    out.push_back(c);
  }
  return out;
}

Vec Echelon::nullspace_vector(long free_col) const {
  if (free_col < 0 || free_col >= cols_ || is_pivot(free_col))
    throw ShapeError("Echelon::nullspace_vector: not a free column");
  Vec v = Vec::Constant(cols_, Rational(0));
  v(free_col) = Rational(1);
  for (size_t k = 0; k < rows_.size(); ++k) {
    const SparseRow& R = rows_[k];
    const auto it = std::lower_bound(R.begin(), R.end(), free_col, col_less);
    if (it == R.end() || it->first != free_col) continue;
    const long p = pivot_of_row_[k];
    const auto pit = std::lower_bound(R.begin(), R.end(), p, col_less);
    v(p) = -(it->second / pit->second);
  }
  return v;
}

// ---------------------------------------------------------------------------
// Solution sets
// ---------------------------------------------------------------------------

const FockOp& unique_solution(const SolutionSet& s) {
  if (s.info.dimension != 1 || s.basis.size() != 1)
    throw DimensionError(s.info.equation + ": expected a unique solution, found dimension " +
                         std::to_string(s.info.dimension));
  return s.basis.front();
}

namespace {

std::string join_dims(const std::vector<long>& v) {
  std::string out;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(v[i]);
  }
  return out;
}

}  // namespace

void write_solution(const std::string& path, const FockOp& op, const SolveInfo& info) {
  std::ofstream os(path);
  if (!os) throw ShapeError("write_solution: cannot open " + path);
  dump_op(op, os);
  std::ofstream ms(path + ".manifest");
  if (!ms) throw ShapeError("write_solution: cannot open " + path + ".manifest");
  ms << "equation\t" << info.equation << "\n";
  ms << "anchor\t" << info.anchor << "\n";
  ms << "dimension\t" << info.dimension << "\n";
  ms << "cut_dims\t" << join_dims(info.cut_dims) << "\n";
  ms << "block_dims\t" << join_dims(info.block_dims) << "\n";
  ms << "untouched\t" << info.untouched << "\n";
}

// ---------------------------------------------------------------------------
// Diagonal boundary solves
// ---------------------------------------------------------------------------

namespace {

FockOp indicator_diag(int j, const FockSpace& space) {
  return make_diag([j](int i) { return Rational(i == j ? 1 : 0); }, 0, space);
}

// Rows of sum_j f_j D_j = 0 at every input column where all D_j are exact.
void insert_diag_rows(Echelon& ech, const std::vector<FockOp>& D) {
  const long dim = D.front().space_in.dim();
  for (long in = 0; in < dim; ++in) {
    bool ok = true;
    for (const auto& Dj : D)
      if (!Dj.exact[static_cast<size_t>(in)]) {
        ok = false;
        break;
      }
    if (!ok) continue;
    std::map<long, SparseRow> rows;
    for (size_t j = 0; j < D.size(); ++j)
      for (const auto& e : D[j].col(in)) rows[e.first].emplace_back(static_cast<long>(j), e.second);
    for (auto& kv : rows) ech.insert(std::move(kv.second));
  }
}

SolutionSet finalize_diag(const Echelon& ech, SolveInfo info, int N, const std::string& tag) {
  const auto frees_all = ech.free_columns(false);
  const auto frees_touched = ech.free_columns(true);
  info.dimension = static_cast<long>(frees_touched.size());
  info.untouched = static_cast<long>(frees_all.size() - frees_touched.size());
  const FockSpace W = FockSpace::fock(N);
  SolutionSet out;
  std::vector<Vec> vecs;
  if (info.dimension == 1) {
    Vec v = ech.nullspace_vector(frees_touched.front());
    if (v(0).is_zero()) throw DimensionError(tag + ": solution does not load the anchor w_0");
    const Rational inv = v(0).inverse();
    for (long j = 0; j <= N; ++j) v(j) = v(j) * inv;
    vecs.push_back(std::move(v));
  } else {
    for (long f : frees_touched) vecs.push_back(ech.nullspace_vector(f));
  }
  out.info = std::move(info);
  for (const auto& v : vecs) {
    FockOp K = make_diag([&v](int j) { return v(j); }, 0, W);
    for (long c = 0; c <= N; ++c)
      if (!ech.touched(c)) {
        K.cols[static_cast<size_t>(c)].clear();
        K.exact[static_cast<size_t>(c)] = 0;
      }
    normalize_op(K);
    out.basis.push_back(std::move(K));
  }
  return out;
}

}  // namespace

SolutionSet solve_K_diagonal(const std::function<FockOp(const Rational&)>& L_at,
                             const ParamPoint& p, int N, const Rational& y,
                             const std::string& tag, const std::string& salt) {
  if (y.is_zero()) throw AdmissibilityError(tag + ": boundary spectral value y must be nonzero");
  const FockSpace W = FockSpace::fock(N);
  const FockSpace WC2 = tensor(W, FockSpace::spin());
  SpectralSampler sampler(p, salt, N);
  Echelon ech(N + 1);
  SolveInfo info{tag, "w_0 -> w_0", 0, {}, {}, 0};
  constexpr int kMinBatches = 2;
  constexpr int kMaxBatches = 4;
  for (int b = 0; b < kMaxBatches; ++b) {
    const Rational zb = sampler.sample("aux");
    const FockOp Lup = L_at(y / zb);
    const FockOp KP = embed(build_K("Pi", p, N, zb, KSide::right), WC2, {1});
    const FockOp A = compose(L_at(y * zb), KP);
    const FockOp B = compose(KP, L_at(y * zb));
    std::vector<FockOp> D;
    D.reserve(static_cast<size_t>(N) + 1);
    for (int j = 0; j <= N; ++j) {
      const FockOp Ej = indicator_diag(j, WC2);
      const FockOp lhs = compose(Lup, compose(Ej, A));
      const FockOp rhs = compose(B, compose(Ej, Lup));
      D.push_back(add(lhs, scale(rhs, Rational(-1))));
    }
    insert_diag_rows(ech, D);
    info.cut_dims.push_back(static_cast<long>(ech.free_columns(true).size()));
    if (b + 1 >= kMinBatches && info.cut_dims.back() <= 1) break;
  }
  return finalize_diag(ech, std::move(info), N, tag);
}

SolutionSet solve_K_from_RE(const std::string& pi, const ParamPoint& p, int N, const Rational& y) {
  if (pi != "rho" && pi != "rhobar" && pi != "upsilon" && pi != "phi")
    throw ShapeError("solve_K_from_RE: unknown lattice family: " + pi);
  const auto L_at = [&pi, &p, N](const Rational& w) {
    return build_L(pi, p, N, w, LVariant::plus);
  };
  return solve_K_diagonal(L_at, p, N, y, "reflection:" + pi, "solver-K-RE:" + pi);
}

SolutionSet solve_K_from_intertwining(const ParamPoint& p, int N, const Rational& z) {
  const std::string tag = "coideal-intertwining:upsilon";
  if (z.is_zero()) throw AdmissibilityError(tag + ": spectral value z must be nonzero");
  const Rep ups = build_rep("upsilon", p, N);
  const Rational zi = z.inverse();
  Echelon ech(N + 1);
  SolveInfo info{tag, "w_0 -> w_0", 0, {}, {}, 0};
  for (int i = 0; i <= 1; ++i) {
    const FockOp Bz = coideal_B(ups, i, z);
    const FockOp Bw = coideal_B(ups, i, zi);
    std::vector<FockOp> D;
    D.reserve(static_cast<size_t>(N) + 1);
    for (int j = 0; j <= N; ++j) {
      const FockOp Ej = indicator_diag(j, ups.carrier);
      D.push_back(add(compose(Ej, Bz), scale(compose(Bw, Ej), Rational(-1))));
    }
    insert_diag_rows(ech, D);
    info.cut_dims.push_back(static_cast<long>(ech.free_columns(true).size()));
  }
  return finalize_diag(ech, std::move(info), N, tag);
}

FockOp k_upsilon_from_recurrence(const ParamPoint& p, int N, const Rational& z) {
  if (z.is_zero())
    throw AdmissibilityError("k_upsilon_from_recurrence: spectral value z must be nonzero");
  if (p.u.is_zero() || p.xi.is_zero())
    throw AdmissibilityError("k_upsilon_from_recurrence: u and xi must be nonzero");
  const Rational z2 = z * z;
  const Rational q2 = p.q * p.q;
  const Rational base = (p.u * p.u * p.xi).inverse();
  std::vector<Rational> f(static_cast<size_t>(N) + 1);
  f[0] = Rational(1);
  for (int j = 0; j < N; ++j) {
    const Rational A = q2.pow(j + 1) * base;
    const Rational den = z2 - A;
    if (den.is_zero())
      throw AdmissibilityError(
          "k_upsilon_from_recurrence: z^2 collides with a ladder pole q^{2(j+1)} u^{-2} xi^{-1}");
    f[static_cast<size_t>(j) + 1] = f[static_cast<size_t>(j)] * (Rational(1) - A * z2) / den;
  }
  return make_diag([&f](int j) { return f[static_cast<size_t>(j)]; }, 0, FockSpace::fock(N));
}

// ---------------------------------------------------------------------------
// Block-preserving intertwiner solves
// ---------------------------------------------------------------------------

namespace {

// Splits an operator into degree-homogeneous parts keyed by shift.
std::map<int, FockOp> split_by_shift(const FockOp& X) {
  std::map<int, FockOp> parts;
  const long dim = X.space_in.dim();
  for (long in = 0; in < dim; ++in) {
    const int di = X.space_in.degree(in);
    for (const auto& e : X.col(in)) {
      const int s = X.space_out.degree(e.first) - di;
      auto it = parts.find(s);
      if (it == parts.end()) {
        FockOp blank = make_zero(X.space_in, X.space_out);
        blank.r = X.r;
        blank.g = X.g;
        blank.exact = X.exact;
        it = parts.emplace(s, std::move(blank)).first;
      }
      it->second.cols[static_cast<size_t>(in)].push_back(e);
    }
  }
  for (auto& kv : parts) normalize_op(kv.second);
  return parts;
}

struct HomTerm {
  const FockOp* left;
  const FockOp* right;
  int beta;  // degree shift of the right factor
};

struct SubCons {
  std::vector<HomTerm> terms;
  int s = 0;  // total degree shift, uniform over the terms
  int max_beta = 0;
  int batch = 0;
};

}  // namespace

SolutionSet solve_block_preserving(const FockSpace& space,
                                   const std::vector<IntertwinerConstraint>& cons, int max_block,
                                   const std::string& tag) {
  if (cons.empty()) throw ShapeError(tag + ": no constraints given");
  const long dim = space.dim();
  const int md = space.max_degree();
  const int top = std::min(max_block, md);
  if (top < 0) throw ShapeError(tag + ": negative block bound");

  int nbatches = 1;
  for (const auto& c : cons) {
    if (c.batch < 0) throw ShapeError(tag + ": negative batch index");
    nbatches = std::max(nbatches, c.batch + 1);
    for (const auto& t : c.terms) {
      if (t.left.space_in != space || t.left.space_out != space || t.right.space_in != space ||
          t.right.space_out != space)
        throw ShapeError(tag + ": constraint term spaces must match the carrier");
    }
  }

  std::deque<FockOp> store;
  std::vector<SubCons> subs;
  for (const auto& c : cons) {
    std::map<int, SubCons> by_s;
    for (const auto& t : c.terms) {
      std::vector<std::pair<int, const FockOp*>> lps, rps;
      for (auto& kv : split_by_shift(t.left)) {
        store.push_back(std::move(kv.second));
        lps.emplace_back(kv.first, &store.back());
      }
      for (auto& kv : split_by_shift(t.right)) {
        store.push_back(std::move(kv.second));
        rps.emplace_back(kv.first, &store.back());
      }
      for (const auto& lp : lps)
        for (const auto& rp : rps)
          by_s[lp.first + rp.first].terms.push_back({lp.second, rp.second, rp.first});
    }
    for (auto& kv : by_s) {
      kv.second.s = kv.first;
      kv.second.batch = c.batch;
      int mb = INT_MIN;
      for (const auto& t : kv.second.terms) mb = std::max(mb, t.beta);
      kv.second.max_beta = mb;
      subs.push_back(std::move(kv.second));
    }
  }

  std::vector<std::vector<long>> bases(static_cast<size_t>(md) + 1);
  std::vector<long> pos(static_cast<size_t>(dim), -1);
  for (int m = 0; m <= md; ++m) {
    bases[static_cast<size_t>(m)] = block_basis(space, m);
    for (size_t i = 0; i < bases[static_cast<size_t>(m)].size(); ++i)
      pos[static_cast<size_t>(bases[static_cast<size_t>(m)][i])] = static_cast<long>(i);
  }

  std::vector<Mat> solved(static_cast<size_t>(top) + 1);
  std::vector<char> col_ok(static_cast<size_t>(dim), 0);
  SolveInfo info{tag, basis_label(space, 0) + " -> itself", 0,
                 std::vector<long>(static_cast<size_t>(nbatches), 0), {}, 0};

  for (int t = 0; t <= top; ++t) {
    const auto& bt = bases[static_cast<size_t>(t)];
    const long n = static_cast<long>(bt.size());
    const long tau = n * n;  // homogenizing column carrying the solved blocks
    Echelon ech(tau + 1);
    std::vector<std::vector<SparseRow>> pending(static_cast<size_t>(nbatches));

    for (const auto& sc : subs) {
      const int d = t - sc.max_beta;
      if (d < 0 || d > md) continue;
      const int o = d + sc.s;
      if (o < 0 || o > md) continue;
      const auto& bd = bases[static_cast<size_t>(d)];
      const auto& bo = bases[static_cast<size_t>(o)];
      // An equation is trusted only where the constraint tables are certified:
      // every left factor must be exact on the whole middle block it reads, and
      // every right factor exact on the input column.  Rows that would read a
      // masked (truncation-polluted) column are dropped rather than asserted.
      bool left_certified = true;
      for (const auto& tm : sc.terms) {
        const int m = d + tm.beta;
        if (m < 0) continue;
        for (const long mid : bases[static_cast<size_t>(m)])
          if (!tm.left->exact[static_cast<size_t>(mid)]) {
            left_certified = false;
            break;
          }
        if (!left_certified) break;
      }
      if (!left_certified) continue;
      for (const long in : bd) {
        bool usable = true;
        for (const auto& tm : sc.terms) {
          const int m = d + tm.beta;
          if (m < 0) continue;
          if (!tm.right->exact[static_cast<size_t>(in)]) {
            usable = false;
            break;
          }
          if (m >= t) continue;
          for (const auto& e : tm.right->col(in))
            if (!col_ok[static_cast<size_t>(e.first)]) {
              usable = false;
              break;
            }
          if (!usable) break;
        }
        if (!usable) continue;
        std::vector<SparseRow> rows(bo.size());
        for (const auto& tm : sc.terms) {
          const int m = d + tm.beta;
          if (m < 0) continue;  // the action of this part starts above the vacuum
          const auto& bm = bases[static_cast<size_t>(m)];
          if (m == t) {
            for (const auto& e : tm.right->col(in)) {
              const long mj = pos[static_cast<size_t>(e.first)];
              for (long bi = 0; bi < static_cast<long>(bm.size()); ++bi)
                for (const auto& le : tm.left->col(bm[static_cast<size_t>(bi)]))
                  rows[static_cast<size_t>(pos[static_cast<size_t>(le.first)])].emplace_back(
                      bi * n + mj, le.second * e.second);
            }
          } else {
            const Mat& Bm = solved[static_cast<size_t>(m)];
            for (const auto& e : tm.right->col(in)) {
              const long mj = pos[static_cast<size_t>(e.first)];
              for (long bi = 0; bi < static_cast<long>(bm.size()); ++bi) {
                const Rational cval = Bm(bi, mj) * e.second;
                if (cval.is_zero()) continue;
                for (const auto& le : tm.left->col(bm[static_cast<size_t>(bi)]))
                  rows[static_cast<size_t>(pos[static_cast<size_t>(le.first)])].emplace_back(
                      tau, le.second * cval);
              }
            }
          }
        }
        for (auto& r : rows)
          if (!r.empty()) pending[static_cast<size_t>(sc.batch)].push_back(std::move(r));
      }
    }

    std::vector<long> freedom_at_batch(static_cast<size_t>(nbatches), 0);
    for (int b = 0; b < nbatches; ++b) {
      for (auto& r : pending[static_cast<size_t>(b)]) ech.insert(std::move(r));
      if (ech.is_pivot(tau))
        throw DimensionError(tag + ": inconsistent system at block " + std::to_string(t));
      long freedom = 0;
      for (const long f : ech.free_columns(t != 0))
        if (f != tau) ++freedom;
      freedom_at_batch[static_cast<size_t>(b)] = freedom;
    }
    for (int b = 0; b < nbatches; ++b)
      info.cut_dims[static_cast<size_t>(b)] += freedom_at_batch[static_cast<size_t>(b)];
    const long final_freedom = freedom_at_batch[static_cast<size_t>(nbatches) - 1];
    info.block_dims.push_back(final_freedom);

    if (t == 0) {
      if (n != 1) throw ShapeError(tag + ": degree-0 block is not one-dimensional");
      if (final_freedom != 1)
        throw DimensionError(tag + ": the anchor block is over-constrained");
      solved[0] = Mat::Constant(1, 1, Rational(1));
      col_ok[static_cast<size_t>(bt[0])] = 1;
      continue;
    }
    if (final_freedom != 0)
      throw DimensionError(tag + ": residual freedom " + std::to_string(final_freedom) +
                           " at block " + std::to_string(t));

    std::vector<char> col_known(static_cast<size_t>(n), 1);
    for (const long f : ech.free_columns(false)) {
      if (f == tau) continue;
      col_known[static_cast<size_t>(f % n)] = 0;
      ++info.untouched;
    }
    const Vec sol = ech.is_pivot(tau) ? Vec() : ech.nullspace_vector(tau);
    Mat B = Mat::Constant(n, n, Rational(0));
    for (long bi = 0; bi < n; ++bi)
      for (long mj = 0; mj < n; ++mj) B(bi, mj) = sol(bi * n + mj);
    for (long j = 0; j < n; ++j)
      col_ok[static_cast<size_t>(bt[static_cast<size_t>(j)])] = col_known[static_cast<size_t>(j)];
    solved[static_cast<size_t>(t)] = std::move(B);
  }

  FockOp X = make_zero(space, space);
  for (int t = 0; t <= top; ++t) {
    const auto& bt = bases[static_cast<size_t>(t)];
    const Mat& B = solved[static_cast<size_t>(t)];
    for (size_t jj = 0; jj < bt.size(); ++jj) {
      const long in = bt[jj];
      X.exact[static_cast<size_t>(in)] = col_ok[static_cast<size_t>(in)];
      if (!col_ok[static_cast<size_t>(in)]) continue;
      for (size_t ii = 0; ii < bt.size(); ++ii) {
        const Rational& val = B(static_cast<long>(ii), static_cast<long>(jj));
        if (!val.is_zero())
          X.cols[static_cast<size_t>(in)].emplace_back(bt[ii], val);
      }
    }
  }
  for (long in = 0; in < dim; ++in)
    if (space.degree(in) > top) X.exact[static_cast<size_t>(in)] = 0;
  normalize_op(X);
  info.dimension = std::accumulate(info.block_dims.begin(), info.block_dims.end(), 0L);
  SolutionSet out;
  out.basis.push_back(std::move(X));
  out.info = std::move(info);
  return out;
}

SolutionSet solve_R_upsilon_phi(const ParamPoint& p, int N, const Rational& z) {
  const std::string tag = "exchange:upsilon-phi";
  if (z.is_zero()) throw AdmissibilityError(tag + ": spectral value z must be nonzero");
  if (N < 2) throw ShapeError(tag + ": needs truncation N >= 2");
  const Rep ups = grading_shift(build_rep("upsilon", p, N), z);
  const Rep phm = build_rep("phi_minus", p, N);
  const FockSpace WW = tensor(ups.carrier, phm.carrier);
  const long n1 = static_cast<long>(N) + 1;

  // A raw per-block matrix ansatz is underdetermined here: each block keeps a
  // one-parameter defect whose z-powers cancel, so sampling more spectral
  // values cannot cut it.  The solve instead runs over the ladder-form ansatz
  //   X[(j1+k, m), (j1, m+k)] = w(j1, k, m) * f_k(m),
  // whose unknown coefficients f_k(m) are shared across the first-leg degree
  // j1; w collects the diagonal prefactor at the input state and the k-fold
  // raising coefficients of the first leg.  Unknowns live on k + m <= N - 2:
  // pinning level k + m = t needs inputs with second leg t and at least two
  // distinct first-leg degrees, which the window only certifies for t <= N-2.
  const Rational q = p.q;
  const Rational uuq = p.u * p.u / q;
  const auto weight = [&](long j1, long k, long m) {
    Rational w = uuq.pow(m + k - j1) * q.pow(-2 * j1 * (m + k + 1));
    for (long i = 1; i <= k; ++i) w *= Rational(1) - q.pow(2 * (j1 + i));
    return w;
  };
  const auto uid = [&](long k, long m) { return k * n1 + m; };

  Echelon ech(n1 * n1);
  SolveInfo info{tag, basis_label(WW, 0) + " -> itself", 0, {}, {}, 0};
  for (const U u : {U::f0, U::f1, U::k0, U::k1}) {
    const FockOp C = coaction(ups, phm, u, false);
    const FockOp Cp = coaction(ups, phm, u, true);
    // Equations at input (i1, i2) only reference unknowns of level <= i2, so
    // i2 <= N-2 keeps them inside the triangle; u = f1 raises the first leg
    // and additionally needs the input block below the truncation edge.
    const long blk_max = (u == U::f1) ? N - 1 : N;
    for (long i1 = 0; i1 <= N; ++i1) {
      for (long i2 = 0; i2 <= N - 2 && i1 + i2 <= blk_max; ++i2) {
        const long in = i1 * n1 + i2;
        if (!C.exact[static_cast<size_t>(in)])
          throw ShapeError(tag + ": uncertified input column in constraint assembly");
        std::map<long, SparseRow> rows;
        for (const auto& e : C.col(in)) {
          const long m1 = e.first / n1, m2 = e.first % n1;
          for (long k = 0; k <= m2; ++k)
            rows[(m1 + k) * n1 + (m2 - k)].emplace_back(uid(k, m2 - k),
                                                        weight(m1, k, m2 - k) * e.second);
        }
        for (long k = 0; k <= i2; ++k) {
          const long mid = (i1 + k) * n1 + (i2 - k);
          if (!Cp.exact[static_cast<size_t>(mid)])
            throw ShapeError(tag + ": uncertified middle column in constraint assembly");
          const Rational w = weight(i1, k, i2 - k);
          for (const auto& e : Cp.col(mid)) rows[e.first].emplace_back(uid(k, i2 - k), -(e.second * w));
        }
        for (auto& kv : rows) ech.insert(std::move(kv.second));
      }
    }
    long freedom = 0;
    for (const long f : ech.free_columns(true)) {
      (void)f;
      ++freedom;
    }
    info.cut_dims.push_back(freedom);
  }

  info.block_dims.assign(static_cast<size_t>(N) - 1, 0);
  std::vector<long> free_cols;
  for (const long f : ech.free_columns(true)) {
    free_cols.push_back(f);
    ++info.block_dims[static_cast<size_t>(f / n1 + f % n1)];
  }
  for (long k = 0; k <= N; ++k)
    for (long m = 0; k + m <= N - 2; ++m)
      if (!ech.touched(uid(k, m)) && !ech.is_pivot(uid(k, m))) ++info.untouched;
  info.dimension = static_cast<long>(free_cols.size());

  SolutionSet out;
  for (const long fc : free_cols) {
    Vec v = ech.nullspace_vector(fc);
    const Rational anchor = v(uid(0, 0));
    if (!anchor.is_zero())
      for (long i = 0; i < v.size(); ++i) v(i) /= anchor;
    FockOp X = make_zero(WW, WW);
    for (long i1 = 0; i1 <= N; ++i1) {
      for (long i2 = 0; i2 <= N; ++i2) {
        const long in = i1 * n1 + i2;
        if (i1 + i2 > N - 2) {
          X.exact[static_cast<size_t>(in)] = 0;
          continue;
        }
        for (long k = 0; k <= i2; ++k) {
          const Rational val = v(uid(k, i2 - k)) * weight(i1, k, i2 - k);
          if (!val.is_zero())
            X.cols[static_cast<size_t>(in)].emplace_back((i1 + k) * n1 + (i2 - k), val);
        }
      }
    }
    normalize_op(X);
    out.basis.push_back(std::move(X));
  }
  out.info = std::move(info);
  return out;
}

SolutionSet solve_R_rho_rhobar(const ParamPoint& p, int N, const Rational& z) {
  const std::string tag = "exchange:rho-rhobar";
  if (z.is_zero()) throw AdmissibilityError(tag + ": spectral value z must be nonzero");
  const FockSpace W = FockSpace::fock(N);
  const FockSpace WW = tensor(W, W);
  const FockOp IdW = make_identity(W);
  SpectralSampler sampler(p, "solver-R-rho-rhobar", N);
  std::vector<Rational> z2s;
  int budget = 64;
  while (static_cast<int>(z2s.size()) < 4 && budget-- > 0) {
    const Rational cand = sampler.sample("aux");
    if (!spectral_admissible(p, z * cand, N)) continue;
    if (!spectral_admissible(p, cand.inverse(), N)) continue;
    z2s.push_back(cand);
  }
  if (z2s.size() < 4)
    throw SampleError(tag + ": could not sample admissible auxiliary spectral values");

  const auto make_cons = [&](int nb) {
    std::vector<IntertwinerConstraint> cons;
    for (int s = 0; s < nb; ++s) {
      const Rational& z2 = z2s[static_cast<size_t>(s)];
      const FockOp Lp = build_L("rho", p, N, z * z2, LVariant::plus);
      const FockOp Lb = build_L("rhobar", p, N, z2.inverse(), LVariant::plus);
      std::array<std::array<FockOp, 2>, 2> pe, be;
      for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) {
          pe[static_cast<size_t>(r)][static_cast<size_t>(c)] = block_of(Lp, r, c);
          be[static_cast<size_t>(r)][static_cast<size_t>(c)] = block_of(Lb, r, c);
        }
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
          IntertwinerConstraint c;
          c.batch = s;
          for (int m = 0; m < 2; ++m) {
            c.terms.push_back(
                {tensor(IdW, be[static_cast<size_t>(a)][static_cast<size_t>(m)]),
                 tensor(pe[static_cast<size_t>(m)][static_cast<size_t>(b)], IdW)});
            c.terms.push_back(
                {scale(tensor(pe[static_cast<size_t>(a)][static_cast<size_t>(m)], IdW),
                       Rational(-1)),
                 tensor(IdW, be[static_cast<size_t>(m)][static_cast<size_t>(b)])});
          }
          cons.push_back(std::move(c));
        }
    }
    return cons;
  };

  for (int nb = 2; nb <= 4; ++nb) {
    try {
      return solve_block_preserving(WW, make_cons(nb), N - 1, tag);
    } catch (const DimensionError&) {
      if (nb == 4) throw;
    }
  }
  throw DimensionError(tag + ": unreachable");
}

// ---------------------------------------------------------------------------
// Fused lattice family
// ---------------------------------------------------------------------------

namespace {

// One unknown family of the fused ansatz: the z^power part of the (so, si)
// matrix entry, shifting the Fock degree by delta.
struct Fam {
  int power;
  int so, si;
  int delta;
  long base;
  int jmin, jmax;
};

struct ETerm {
  int power;      // which unknown coefficient X_power this term multiplies
  bool leftside;  // true: M o X_power; false: X_power o M
  size_t op;      // index into the op store
  int sign;
};

}  // namespace

FusionFamily solve_fusion_L(const ParamPoint& p, int N) {
  const std::string tag = "fusion:lattice";
  const Rep rr = build_rep("rho_r", p, N);
  const Rep pi = build_rep("Pi", p, N);
  const FockSpace W = rr.carrier;
  const FockSpace WC2 = tensor(W, FockSpace::spin());
  const FockOp IdW = make_identity(W);
  const FockOp Id2 = make_identity(pi.carrier);

  std::vector<Fam> fams;
  long nid = 0;
  const auto add_fams = [&](int power, int delta) {
    for (int so = 0; so < 2; ++so)
      for (int si = 0; si < 2; ++si) {
        Fam f{power, so, si, delta, nid, delta >= 0 ? 0 : 1, delta <= 0 ? N : N - 1};
        nid += f.jmax - f.jmin + 1;
        fams.push_back(f);
      }
  };
  add_fams(0, 0);
  add_fams(1, +1);
  add_fams(1, -1);
  add_fams(2, 0);

  // The coefficient operators of X(z) C(z) = C'(z) X(z) with C(z) = z A + B.
  std::vector<FockOp> store;
  std::vector<std::vector<ETerm>> eqs;
  const auto put = [&](FockOp op) {
    store.push_back(std::move(op));
    return store.size() - 1;
  };
  for (const auto& gens : {std::pair<U, U>{U::e0, U::k0}, std::pair<U, U>{U::e1, U::k1}}) {
    const size_t A = put(tensor(rr.op(gens.first), Id2));
    const size_t B = put(tensor(rr.op(gens.second), pi.op(gens.first)));
    const size_t Ap = put(tensor(rr.op(gens.first), pi.op(gens.second)));
    const size_t Bp = put(tensor(IdW, pi.op(gens.first)));
    eqs.push_back({{0, false, B, +1}, {0, true, Bp, -1}});
    eqs.push_back({{0, false, A, +1}, {1, false, B, +1}, {0, true, Ap, -1}, {1, true, Bp, -1}});
    eqs.push_back({{1, false, A, +1}, {2, false, B, +1}, {1, true, Ap, -1}, {2, true, Bp, -1}});
    eqs.push_back({{2, false, A, +1}, {2, true, Ap, -1}});
  }
  const size_t Bk = put(tensor(rr.op(U::k1), pi.op(U::k1)));
  for (int pw = 0; pw < 3; ++pw) eqs.push_back({{pw, false, Bk, +1}, {pw, true, Bk, -1}});

  const long dim = WC2.dim();
  Echelon ech(nid);
  for (const auto& eq : eqs) {
    for (long in = 0; in < dim; ++in) {
      const auto mi = WC2.unflatten(in);
      const int ji = mi[0];
      const int si = mi[1];
      // Rows at the topmost Fock level would reference coefficients the
      // window cannot represent; they are dropped, not approximated.
      if (ji > N - 1) continue;
      std::map<long, SparseRow> rows;
      for (const auto& tm : eq) {
        const FockOp& M = store[tm.op];
        if (!tm.leftside) {
          for (const auto& e : M.col(in)) {
            const auto mm = WC2.unflatten(e.first);
            for (const auto& f : fams) {
              if (f.power != tm.power || f.si != mm[1] || mm[0] < f.jmin || mm[0] > f.jmax)
                continue;
              const long out = WC2.flatten({mm[0] + f.delta, f.so});
              rows[out].emplace_back(f.base + (mm[0] - f.jmin),
                                     tm.sign > 0 ? e.second : -e.second);
            }
          }
        } else {
          for (const auto& f : fams) {
            if (f.power != tm.power || f.si != si || ji < f.jmin || ji > f.jmax) continue;
            const long mid = WC2.flatten({ji + f.delta, f.so});
            const long id = f.base + (ji - f.jmin);
            for (const auto& e : M.col(mid))
              rows[e.first].emplace_back(id, tm.sign > 0 ? e.second : -e.second);
          }
        }
      }
      for (auto& kv : rows) ech.insert(std::move(kv.second));
    }
  }

  const auto frees = ech.free_columns(true);
  SolveInfo info{tag, "w_0 (x) v_plus -> itself", static_cast<long>(frees.size()),
                 {static_cast<long>(frees.size())}, {},
                 static_cast<long>(ech.free_columns(false).size() - frees.size())};
  if (frees.size() != 1)
    throw DimensionError(tag + ": solution dimension " + std::to_string(frees.size()) +
                         ", expected 1");
  Vec v = ech.nullspace_vector(frees.front());
  long anchor = -1;
  for (const auto& f : fams)
    if (f.power == 0 && f.so == 0 && f.si == 0 && f.delta == 0) anchor = f.base;
  if (v(anchor).is_zero())
    throw DimensionError(tag + ": solution does not load the anchor column");
  const Rational inv = v(anchor).inverse();
  for (long c = 0; c < nid; ++c) v(c) = v(c) * inv;
  for (const auto& f : fams) {
    if (f.si != 0 || f.jmin > 0) continue;
    const Rational& val = v(f.base);
    const bool want_one = (f.power == 0 && f.so == 0 && f.delta == 0);
    if (want_one ? !val.is_one() : !val.is_zero())
      throw DimensionError(tag + ": solution does not fix w_0 (x) v_plus");
  }

  std::array<FockOp, 3> L = {make_zero(WC2, WC2), make_zero(WC2, WC2), make_zero(WC2, WC2)};
  for (const auto& f : fams)
    for (int j = f.jmin; j <= f.jmax; ++j) {
      const Rational& c = v(f.base + (j - f.jmin));
      if (c.is_zero()) continue;
      L[static_cast<size_t>(f.power)]
          .cols[static_cast<size_t>(WC2.flatten({j, f.si}))]
          .emplace_back(WC2.flatten({j + f.delta, f.so}), c);
    }
  for (long in = 0; in < dim; ++in) {
    const auto mi = WC2.unflatten(in);
    char ok = mi[0] < N ? 1 : 0;
    if (ok)
      for (const auto& f : fams) {
        if (f.si != mi[1] || mi[0] < f.jmin || mi[0] > f.jmax) continue;
        if (!ech.touched(f.base + (mi[0] - f.jmin))) {
          ok = 0;
          break;
        }
      }
    for (auto& Lp : L) Lp.exact[static_cast<size_t>(in)] = ok;
  }
  for (auto& Lp : L) normalize_op(Lp);
  return FusionFamily{p.r, std::move(L[0]), std::move(L[1]), std::move(L[2]), std::move(info)};
}

FockOp fusion_L_at(const FusionFamily& fam, const Rational& z) {
  return add(add(fam.L0, scale(fam.L1, z)), scale(fam.L2, z * z));
}

SolutionSet solve_fusion_K(const FusionFamily& fam, const ParamPoint& p, int N,
                           const Rational& y) {
  const auto L_at = [&fam](const Rational& w) { return fusion_L_at(fam, w); };
  return solve_K_diagonal(L_at, p, N, y, "reflection:fused", "solver-fusion-K");
}

FusionSolution solve_fusion_objects(const ParamPoint& p, int N, const Rational& z) {
  if (p.q.is_zero() || p.r.is_zero())
    throw AdmissibilityError("fusion: q and r must be nonzero");
  if (z.is_zero()) throw AdmissibilityError("fusion: spectral value z must be nonzero");
  ParamPoint pu = p;
  pu.r = p.q * p.r;
  ParamPoint pd = p;
  pd.r = p.r / p.q;

  FusionSolution S;
  S.fam = solve_fusion_L(p, N);
  S.fam_up = solve_fusion_L(pu, N);
  S.fam_down = solve_fusion_L(pd, N);

  SolutionSet k = solve_fusion_K(S.fam, p, N, z);
  SolutionSet ku = solve_fusion_K(S.fam_up, pu, N, p.q * z);
  SolutionSet kd = solve_fusion_K(S.fam_down, pd, N, z / p.q);
  S.K = unique_solution(k);
  S.K_up = unique_solution(ku);
  S.K_down = unique_solution(kd);
  S.K_info = k.info;
  S.K_up_info = ku.info;
  S.K_down_info = kd.info;

  const FockSpace W = FockSpace::fock(N);
  const FockSpace WC2 = tensor(W, FockSpace::spin());
  const FockOp M =
      compose(embed(S.K, WC2, {0}),
              compose(fusion_L_at(S.fam, z * z),
                      embed(build_K("Pi", p, N, z, KSide::right), WC2, {1})));
  const FockOp iota = build_fusion_iota(p, N, p.r);
  const FockOp tau = build_fusion_tau(p, N, p.r);

  const FockOp Mi = compose(M, iota);
  const SparseCol& yc = iota.col(0);
  if (yc.empty()) throw ShapeError("fusion: injection image of w_0 vanished");
  S.scalar_iota = Rational(0);
  for (const auto& e : Mi.col(0))
    if (e.first == yc.front().first) {
      S.scalar_iota = e.second / yc.front().second;
      break;
    }

  const FockOp Tm = compose(tau, M);
  const SparseCol& tc = tau.col(0);
  Rational t0(0);
  for (const auto& e : tc)
    if (e.first == 0) t0 = e.second;
  if (t0.is_zero()) throw ShapeError("fusion: projection image of w_0 (x) v_plus vanished");
  S.scalar_tau = Rational(0);
  for (const auto& e : Tm.col(0))
    if (e.first == 0) S.scalar_tau = e.second / t0;
  return S;
}

}  // namespace qosc
