// Acceptance gate: ten numbered criteria, one pass/fail line each.
// Every comparison is exact rational equality (tolerance zero); each
// criterion also enforces its wall-clock budget.  Exit 0 only if all pass.

#include <chrono>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "qosc/errors.hpp"
#include "qosc/fock.hpp"
#include "qosc/operators.hpp"
#include "qosc/params.hpp"
#include "qosc/solvers.hpp"
#include "qosc/verify.hpp"

using namespace qosc;

namespace {

using Clock = std::chrono::steady_clock;

int run_criterion(int idx, const std::string& name, double limit_s,
                  const std::function<bool(std::string&)>& body) {
  const auto t0 = Clock::now();
  std::string detail;
  bool ok = false;
  try {
    ok = body(detail);
  } catch (const std::exception& e) {
    ok = false;
    detail = std::string("exception: ") + e.what();
  }
  const double secs =
      std::chrono::duration<double>(Clock::now() - t0).count();
  const bool in_time = secs < limit_s;
  std::ostringstream line;
  line << (ok && in_time ? "[PASS]" : "[FAIL]") << " criterion " << idx << ": "
       << name << " (" << std::fixed << std::setprecision(2) << secs
       << "s, limit " << limit_s << "s)";
  if (!ok && !detail.empty()) line << " -- " << detail;
  if (ok && !in_time) line << " -- exceeded the time budget";
  std::cout << line.str() << std::endl;
  return (ok && in_time) ? 0 : 1;
}

bool all_pass(const std::vector<Report>& reports, std::string& detail) {
  for (const Report& r : reports)
    if (!r.pass) {
      detail = r.suite + " failed: " + r.witness_basis +
               " lhs=" + r.witness_lhs + " rhs=" + r.witness_rhs;
      return false;
    }
  return true;
}

}  // namespace

int main() {
  int failures = 0;

  failures += run_criterion(
      1, "scalar q-series and nilpotent exponential laws", 5.0,
      [](std::string& d) {
        const auto reports = run_selected({"qseries"}, 0, 5, 10, 10, {});
        return reports.size() == 5 && all_pass(reports, d);
      });

  failures += run_criterion(
      2, "ladder-operator and exponential exchange identities", 30.0,
      [](std::string& d) {
        const auto reports = run_selected({"oscillator"}, 0, 5, 10, 10, {});
        return reports.size() == 5 && all_pass(reports, d);
      });

  failures += run_criterion(
      3, "generator tables: relations, weights, twists, duality", 30.0,
      [](std::string& d) {
        const auto reports = run_selected({"rep-relations"}, 0, 5, 10, 10, {});
        return reports.size() == 5 && all_pass(reports, d);
      });

  failures += run_criterion(
      4, "coaction exchange and three-leg factorization windows", 60.0,
      [](std::string& d) {
        const auto reports = run_selected(
            {"O-intertwining", "O-minus", "bulk-factorization",
             "bulk-factorization-minus"},
            0, 5, 10, 10, {});
        return reports.size() == 20 && all_pass(reports, d);
      });

  failures += run_criterion(
      5, "vacuum normalizations, block structure, side and inverse links",
      30.0, [](std::string& d) {
        const auto reports =
            run_selected({"normalizations"}, 0, 5, 10, 10, {});
        return reports.size() == 5 && all_pass(reports, d);
      });

  failures += run_criterion(
      6, "reflection identities with independently sampled spectral pair",
      120.0, [](std::string& d) {
        const auto reports = run_selected(
            {"RE-right-upsilon", "RE-right-phi", "RE-right-rho",
             "RE-right-rhobar", "RE-left-upsilon", "RE-left-phi",
             "RE-left-rho", "RE-left-rhobar"},
            0, 5, 10, 10, {});
        if (reports.size() != 40 || !all_pass(reports, d)) return false;
        for (const Report& r : reports)
          if (!r.extras.count("y") || !r.extras.count("z")) {
            d = r.suite + ": missing an independent spectral value";
            return false;
          }
        return true;
      });

  failures += run_criterion(
      7, "boundary factorization on all blocks plus tampering control", 60.0,
      [](std::string& d) {
        const auto reports = run_selected(
            {"boundary-factorization-right", "boundary-factorization-left",
             "boundary-factorization-reduced"},
            0, 5, 12, 12, {});
        if (reports.size() != 15 || !all_pass(reports, d)) return false;
        for (const Report& r : reports)
          if (r.block_max != 12 || r.extras.at("blocks_compared") != "13") {
            d = r.suite + ": expected all 13 blocks compared";
            return false;
          }
        const Report bad = run_boundary_tampered(sample_params(0), 12, 12);
        if (bad.pass) {
          d = "tampered boundary data unexpectedly passed";
          return false;
        }
        if (!bad.extras.count("witness_block") ||
            std::stol(bad.extras.at("witness_block")) > 2) {
          d = "tampered run lacked a low-block witness";
          return false;
        }
        return true;
      });

  failures += run_criterion(
      8, "solvers reproduce the closed forms with solution dimension one",
      120.0, [](std::string& d) {
        const int N = 8;
        for (std::uint64_t s = 0; s < 3; ++s) {
          const ParamPoint p = sample_params(s);
          SpectralSampler sam(p, "acceptance-solvers", N);
          const Rational y = sam.sample("y");
          const Rational z = sam.sample("z");
          for (const std::string pi : {"rho", "rhobar", "upsilon", "phi"}) {
            const SolutionSet ss = solve_K_from_RE(pi, p, N, y);
            if (ss.info.dimension != 1) {
              d = pi + ": reflection solve dimension " +
                  std::to_string(ss.info.dimension);
              return false;
            }
            if (!agree_on_window(unique_solution(ss), build_K(pi, p, N, y))
                     .equal) {
              d = pi + ": reflection solve disagrees with the closed form";
              return false;
            }
          }
          const SolutionSet si = solve_K_from_intertwining(p, N, z);
          if (si.info.dimension != 1 ||
              !agree_on_window(unique_solution(si), build_K("upsilon", p, N, z))
                   .equal) {
            d = "coideal-intertwining solve disagrees with the closed form";
            return false;
          }
          if (!agree_on_window(k_upsilon_from_recurrence(p, N, z),
                               build_K("upsilon", p, N, z))
                   .equal) {
            d = "recurrence route disagrees with the closed form";
            return false;
          }
          const SolutionSet r1 = solve_R_upsilon_phi(p, N, z);
          if (r1.info.dimension != 1 ||
              !agree_on_window(unique_solution(r1),
                               build_R(RPair::upsilon_phi, p, N, z))
                   .equal) {
            d = "upsilon-phi exchange solve disagrees with the closed form";
            return false;
          }
          const SolutionSet r2 = solve_R_rho_rhobar(p, N, z);
          if (r2.info.dimension != 1 ||
              !agree_on_window(unique_solution(r2),
                               build_R(RPair::rho_rhobar, p, N, z))
                   .equal) {
            d = "rho-rhobar exchange solve disagrees with the closed form";
            return false;
          }
        }
        return true;
      });

  failures += run_criterion(
      9, "fusion exactness and transported boundary with recorded scalars",
      120.0, [](std::string& d) {
        const auto reports =
            run_selected({"fusion-SES", "fusion-K"}, 0, 3, 10, 10, {});
        if (reports.size() != 6 || !all_pass(reports, d)) return false;
        for (const Report& r : reports) {
          if (r.suite != "fusion-K") continue;
          if (!r.extras.count("scalar_injection") ||
              !r.extras.count("scalar_projection") ||
              r.extras.at("boundary_solution_dim") != "1") {
            d = "fusion-K: missing recorded scalars or non-unique solution";
            return false;
          }
        }
        return true;
      });

  failures += run_criterion(
      10, "random operator words agree across truncations", 30.0,
      [](std::string& d) {
        const int Nsmall = 8;
        const int Nlarge = Nsmall + 4;
        const Rational q(2, 3);
        const auto gens = [&q](const FockSpace& W) {
          std::vector<FockOp> g;
          g.push_back(make_generator(Gen::a, 0, W));
          g.push_back(make_generator(Gen::adag, 0, W, q));
          g.push_back(make_generator(Gen::abardag, 0, W, q));
          g.push_back(make_diag([&](int j) { return q.pow(j); }, 0, W));
          g.push_back(make_diag([&](int j) { return q.pow(-j); }, 0, W));
          return g;
        };
        const FockSpace Ws = FockSpace::fock(Nsmall);
        const FockSpace Wl = FockSpace::fock(Nlarge);
        const auto gs = gens(Ws);
        const auto gl = gens(Wl);
        std::mt19937 rng(0);
        std::uniform_int_distribution<int> len(1, 6);
        std::uniform_int_distribution<int> pick(0,
                                                static_cast<int>(gs.size()) - 1);
        for (int w = 0; w < 50; ++w) {
          const int L = len(rng);
          FockOp small = make_identity(Ws);
          FockOp large = make_identity(Wl);
          for (int i = 0; i < L; ++i) {
            const int g = pick(rng);
            small = compose(gs[static_cast<size_t>(g)], small);
            large = compose(gl[static_cast<size_t>(g)], large);
          }
          const AgreeResult res = agree_across_truncations(small, large);
          if (!res.equal || res.window_size < 1) {
            d = "word " + std::to_string(w) + " of length " +
                std::to_string(L) + " disagrees across truncations";
            return false;
          }
        }
        return true;
      });

  std::cout << "acceptance: " << (10 - failures) << "/10 criteria passed"
            << std::endl;
  return failures == 0 ? 0 : 1;
}
