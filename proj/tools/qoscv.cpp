// qoscv: runs named exact-verification suites over truncated oscillator
// operators and reports one JSON line per run or a TSV roll-up.
//
// Exit codes: 0 every run passed, 1 at least one identity failed,
// 2 configuration or admissibility error.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qosc/errors.hpp"
#include "qosc/verify.hpp"

int main(int argc, char** argv) {
  CLI::App app{
      "Exact verification suites for truncated q-oscillator operators"};
  std::vector<std::string> suites{"all"};
  int fock_dim = 10;
  int block_max = 10;
  int trials = 5;
  std::uint64_t seed = 0;
  std::vector<std::string> param_args;
  std::string out_path;
  std::string format = "json";
  app.add_option("--suite", suites,
                 "suite id (repeatable), or 'all' for every registered suite")
      ->capture_default_str();
  app.add_option("--fock-dim", fock_dim, "Fock truncation N (at least 4)")
      ->capture_default_str();
  app.add_option("--block-max", block_max, "deepest compared total degree")
      ->capture_default_str();
  app.add_option("--trials", trials, "parameter points per suite (at least 1)")
      ->capture_default_str();
  app.add_option("--seed", seed, "base seed for deterministic sampling")
      ->capture_default_str();
  app.add_option("--param", param_args,
                 "parameter override key=value (repeatable; keys: q, u, xi, "
                 "xitilde, r, spectral_seed, z, y, z2)");
  app.add_option("--out", out_path, "write results to this file (default stdout)");
  app.add_option("--format", format, "output format")
      ->check(CLI::IsMember({"json", "tsv"}))
      ->capture_default_str();
  bool list = false;
  app.add_flag("--list", list, "list registered suites and exit");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (list) {
    for (const qosc::SuiteSpec& s : qosc::suite_registry()) {
      std::cout << s.id << "\t" << s.arena << "\t";
      for (size_t i = 0; i < s.roles.size(); ++i)
        std::cout << (i ? "," : "") << s.roles[i];
      std::cout << "\t" << s.description << "\n";
    }
    return 0;
  }

  if (trials < 1) {
    std::cerr << "error: --trials must be at least 1, got " << trials << "\n";
    return 2;
  }
  if (fock_dim < 4) {
    std::cerr << "error: --fock-dim must be at least 4, got " << fock_dim
              << "\n";
    return 2;
  }
  if (block_max < 0) {
    std::cerr << "error: --block-max must be nonnegative, got " << block_max
              << "\n";
    return 2;
  }

  std::vector<std::string> ids;
  if (std::find(suites.begin(), suites.end(), "all") != suites.end()) {
    for (const qosc::SuiteSpec& s : qosc::suite_registry()) ids.push_back(s.id);
  } else {
    for (const std::string& id : suites) {
      if (!qosc::known_suite(id)) {
        std::cerr << "error: unknown suite '" << id << "' (--suite)\n";
        return 2;
      }
      if (std::find(ids.begin(), ids.end(), id) == ids.end())
        ids.push_back(id);
    }
  }

  std::map<std::string, std::string> overrides;
  for (const std::string& kv : param_args) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) {
      std::cerr << "error: --param expects key=value, got '" << kv << "'\n";
      return 2;
    }
    overrides[kv.substr(0, eq)] = kv.substr(eq + 1);
  }

  std::vector<qosc::Report> reports;
  try {
    reports = qosc::run_selected(ids, seed, trials, fock_dim, block_max,
                                 overrides);
  } catch (const qosc::AdmissibilityError& e) {
    std::cerr << "error: inadmissible parameters (--param): " << e.what()
              << "\n";
    return 2;
  } catch (const qosc::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  std::ofstream file;
  std::ostream* os = &std::cout;
  if (!out_path.empty()) {
    file.open(out_path);
    if (!file) {
      std::cerr << "error: cannot open '" << out_path << "' (--out)\n";
      return 2;
    }
    os = &file;
  }
  if (format == "json") {
    for (const qosc::Report& r : reports) *os << qosc::to_json_line(r) << "\n";
  } else {
    *os << qosc::tsv_summary(reports);
  }
  const bool all_pass = std::all_of(
      reports.begin(), reports.end(),
      [](const qosc::Report& r) { return r.pass; });
  return all_pass ? 0 : 1;
}
