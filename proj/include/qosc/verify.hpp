// Named verification suites over exact rational Fock-space operators.
//
// Each suite builds a family of operators at one parameter point and checks
// an operator identity with exact arithmetic: either on the truncation-
// certified window (every column whose exactness both sides guarantee) or
// block by block up to a requested total degree.  A suite never tolerates a
// nonzero residual; a mismatch is reported with the lexicographically
// minimal differing basis vector and both images.
//
// Suites are isolated: each consumes its own deterministic spectral values
// (derived from the parameter point's seed and the suite id, unless
// overridden) and builds every operator it needs from scratch.

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "qosc/params.hpp"

namespace qosc {

// Static description of one suite.
struct SuiteSpec {
  std::string id;
  std::string description;
  // "window": compare on the truncation-certified window; "blocks": compare
  // dense graded blocks up to the requested maximal total degree.
  std::string arena;
  // Spectral roles the suite consumes (override keys honoured: z, y, z2).
  std::vector<std::string> roles;
};

// All suites, in canonical order.
const std::vector<SuiteSpec>& suite_registry();

bool known_suite(const std::string& id);

// Outcome of one suite run at one parameter point.
struct Report {
  std::string suite;
  std::map<std::string, std::string> params;  // full parameter point
  int fock_dim = 0;                           // Fock truncation N
  int block_max = 0;   // deepest total degree the run certifies
  bool pass = true;
  // On failure: the first violated check, the minimal differing basis
  // vector, and both images at that vector.  Empty on pass.
  std::string witness_basis;
  std::string witness_lhs;
  std::string witness_rhs;
  // Sampled spectral values and suite-specific diagnostics (recorded
  // scalars, ranks, block counts, ...).
  std::map<std::string, std::string> extras;
  long wall_ms = 0;  // not part of the deterministic JSON payload
};

// Runs one suite.  Throws ShapeError for an unknown id or an unusable
// truncation, AdmissibilityError/SampleError for unusable parameters;
// identity violations are reported in the returned Report, not thrown.
Report run_suite(const std::string& id, const ParamPoint& p, int N, int m_max);

// Runs every registered suite at `trials` parameter points sampled
// deterministically from seed, seed+1, ...  Reports are grouped by suite in
// registry order, trials in order.  Throws ShapeError if trials < 1.
std::vector<Report> run_all(std::uint64_t seed, int trials, int N, int m_max);

// Same sweep restricted to the given suite ids (registry order), with
// string-valued parameter overrides applied to every sampled point.
std::vector<Report> run_selected(const std::vector<std::string>& ids,
                                 std::uint64_t seed, int trials, int N,
                                 int m_max,
                                 const std::map<std::string, std::string>& overrides);

// Negative control: the right boundary-factorization suite with the
// boundary parameter shifted on one side of the identity only.  Expected to
// fail in a low block; the Report records the offending block under
// extras["witness_block"].
Report run_boundary_tampered(const ParamPoint& p, int N, int m_max);

// One Report per line, stable key order, wall time excluded so the payload
// is byte-identical across runs with the same inputs.
std::string to_json_line(const Report& r);

// Tab-separated per-suite roll-up: suite, trials, passes, deepest certified
// block, total wall milliseconds.  Rows follow registry order.
std::string tsv_summary(const std::vector<Report>& reports);

}  // namespace qosc
