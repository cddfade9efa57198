#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <set>
#include <string>

#include "doctest.h"
#include "qosc/errors.hpp"
#include "qosc/verify.hpp"

using namespace qosc;

TEST_CASE("registry: canonical order, uniqueness, lookup") {
  const auto& reg = suite_registry();
  CHECK(reg.size() == 24);
  CHECK(reg.front().id == "qseries");
  CHECK(reg.back().id == "fusion-K");
  std::set<std::string> ids;
  int blocks_arena = 0;
  for (const SuiteSpec& s : reg) {
    CHECK(ids.insert(s.id).second);
    CHECK((s.arena == "window" || s.arena == "blocks"));
    if (s.arena == "blocks") ++blocks_arena;
    CHECK(known_suite(s.id));
    CHECK_FALSE(s.description.empty());
  }
  CHECK(blocks_arena == 3);
  CHECK_FALSE(known_suite("nope"));
}

TEST_CASE("scalar suite passes at the default point") {
  const Report r = run_suite("qseries", ParamPoint{}, 10, 10);
  CHECK(r.pass);
  CHECK(r.suite == "qseries");
  CHECK(r.fock_dim == 10);
  CHECK(r.block_max == 6);  // window arenas certify N - 4 degrees
  CHECK(r.witness_basis.empty());
  CHECK(r.params.count("q") == 1);
}

TEST_CASE("unknown suite and unusable truncation are errors, not failures") {
  const ParamPoint p;
  CHECK_THROWS_AS(run_suite("nope", p, 10, 10), ShapeError);
  CHECK_THROWS_AS(run_suite("oscillator", p, 3, 3), ShapeError);
  CHECK_THROWS_AS(run_suite("qseries", p, 10, -1), ShapeError);
  CHECK_THROWS_AS(run_all(0, 0, 8, 4), ShapeError);
  ParamPoint unit;
  unit.q = Rational(1);
  CHECK_THROWS_AS(run_suite("qseries", unit, 10, 10), AdmissibilityError);
}

TEST_CASE("reports are deterministic and JSON lines exclude wall time") {
  const ParamPoint p = sample_params(3);
  const Report a = run_suite("O-intertwining", p, 8, 4);
  const Report b = run_suite("O-intertwining", p, 8, 4);
  CHECK(a.pass);
  CHECK(a.extras.count("z") == 1);
  const std::string ja = to_json_line(a);
  CHECK(ja == to_json_line(b));
  CHECK(ja.find("wall") == std::string::npos);
  CHECK(ja.find('\n') == std::string::npos);
  CHECK(ja.find("\"suite\":\"O-intertwining\"") != std::string::npos);
}

TEST_CASE("right boundary suite compares dense blocks and passes") {
  const Report r =
      run_suite("boundary-factorization-right", sample_params(5), 8, 8);
  CHECK(r.pass);
  CHECK(r.block_max == 8);
  CHECK(r.extras.at("blocks_compared") == "9");
  CHECK(r.extras.count("z") == 1);
}

TEST_CASE("tampered boundary data fails in a low block with a witness") {
  const Report r = run_boundary_tampered(sample_params(5), 8, 8);
  CHECK_FALSE(r.pass);
  REQUIRE(r.extras.count("witness_block") == 1);
  CHECK(std::stol(r.extras.at("witness_block")) <= 2);
  CHECK_FALSE(r.witness_basis.empty());
  CHECK(r.witness_lhs != r.witness_rhs);
}

TEST_CASE("spectral overrides replace the sampled value") {
  const auto reports = run_selected({"O-intertwining"}, 0, 1, 8, 4,
                                    {{"z", "4/7"}});
  REQUIRE(reports.size() == 1);
  CHECK(reports.front().pass);
  CHECK(reports.front().extras.at("z") == "4/7");
}

TEST_CASE("bad overrides are configuration errors") {
  CHECK_THROWS_AS(run_selected({"qseries"}, 0, 1, 8, 4, {{"q", "1"}}),
                  AdmissibilityError);
  CHECK_THROWS_AS(run_selected({"qseries"}, 0, 1, 8, 4, {{"bogus", "1"}}),
                  Error);
  CHECK_THROWS_AS(run_selected({"nope"}, 0, 1, 8, 4, {}), ShapeError);
}

TEST_CASE("tsv summary aggregates per suite in registry order") {
  const auto reports =
      run_selected({"oscillator", "qseries"}, 0, 2, 8, 4, {});
  REQUIRE(reports.size() == 4);
  CHECK(reports[0].suite == "qseries");  // registry order, trials inside
  CHECK(reports[1].suite == "qseries");
  CHECK(reports[2].suite == "oscillator");
  const std::string tsv = tsv_summary(reports);
  CHECK(tsv.rfind("suite\ttrials\tpasses\tmax_block\twall_ms\n", 0) == 0);
  CHECK(tsv.find("qseries\t2\t2\t") != std::string::npos);
  CHECK(tsv.find("oscillator\t2\t2\t") != std::string::npos);
  CHECK(tsv.find("qseries") < tsv.find("oscillator"));
}

TEST_CASE("full sweep: every suite passes at a reduced size") {
  const auto reports = run_all(1, 1, 8, 4);
  const auto& reg = suite_registry();
  REQUIRE(reports.size() == reg.size());
  for (size_t i = 0; i < reports.size(); ++i) {
    INFO(reports[i].suite, ": ", reports[i].witness_basis, " lhs=",
         reports[i].witness_lhs, " rhs=", reports[i].witness_rhs);
    CHECK(reports[i].suite == reg[i].id);
    CHECK(reports[i].pass);
  }
}
