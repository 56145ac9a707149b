#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "lightcone/verify.hpp"

using namespace lightcone;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitInput = 2;

void parse_grid(const std::string& text, int& nu, int& nv) {
  const auto x = text.find_first_of("xX");
  try {
    if (x == std::string::npos) {
      nu = nv = std::stoi(text);
    } else {
      nu = std::stoi(text.substr(0, x));
      nv = std::stoi(text.substr(x + 1));
    }
  } catch (const std::exception&) {
    throw GeometryError(ErrorKind::invalid_spec, "grid must look like NxM, got '" + text + "'");
  }
}

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw GeometryError(ErrorKind::invalid_spec, "cannot open config '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw GeometryError(ErrorKind::invalid_spec, "config '" + path + "' is not valid JSON: " + e.what());
  }
}

struct AnalyzeArgs {
  std::string config;
  std::string grid;
  int order = 0;
  std::string mode;
  std::string out;
  std::string csv;
  bool samples = false;
};

int run_analyze(const AnalyzeArgs& a) {
  Expectation expect;
  AnalysisConfig cfg;
  try {
    cfg = config_from_json(read_json(a.config), &expect);
    if (!a.grid.empty()) parse_grid(a.grid, cfg.nu, cfg.nv);
    if (a.order > 0) cfg.point.order = a.order;
    if (!a.mode.empty()) cfg.point.mode = weyl_mode_from(a.mode);
    validate(cfg);
    SurfaceModel model(cfg.surface);  // reports parse errors before the grid runs
  } catch (const GeometryError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }

  AnalysisResult r;
  try {
    r = analyze(cfg);
  } catch (const GeometryError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  for (const auto& s : r.samples)
    if (!s.ok && s.error_kind == ErrorKind::not_conformal) {
      std::cerr << "error: conformality gate failed at (u, v) = (" << s.u << ", " << s.v << "): " << s.error << "\n";
      return kExitInput;
    }

  nlohmann::json report = report_json(r, a.samples);
  bool ok = true;
  nlohmann::json checks = nlohmann::json::array();
  if (expect.verdict) {
    const bool pass = r.verdict == *expect.verdict;
    checks.push_back({{"name", "verdict is " + to_string(*expect.verdict)}, {"pass", pass}});
    ok = ok && pass;
  }
  if (expect.voss) {
    const bool pass = r.voss == *expect.voss;
    checks.push_back({{"name", std::string("voss is ") + (*expect.voss ? "true" : "false")}, {"pass", pass}});
    ok = ok && pass;
  }
  report["checks"] = checks;

  const std::string text = report.dump(2) + "\n";
  if (a.out.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(a.out);
    if (!out) {
      std::cerr << "error: cannot write '" << a.out << "'\n";
      return kExitInput;
    }
    out << text;
  }
  if (!a.csv.empty()) {
    std::ofstream csv(a.csv);
    if (!csv) {
      std::cerr << "error: cannot write '" << a.csv << "'\n";
      return kExitInput;
    }
    write_csv(r, csv);
  }
  std::cerr << cfg.surface.name << ": " << to_string(r.verdict) << (r.voss ? " + voss" : "") << " ("
            << r.failed_points << " failed points, " << r.wall_time << " s)\n";
  return ok ? kExitOk : kExitFailure;
}

int run_verify(const std::string& suite, std::uint64_t seed, bool json) {
  SuiteResult r;
  try {
    r = run_suite(suite, seed);
  } catch (const GeometryError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  if (json) {
    std::cout << to_json(r).dump(2) << "\n";
  } else {
    for (const auto& c : r.checks)
      std::printf("%s  %-55s %.3e %s %.1e\n", c.pass ? "PASS" : "FAIL", c.name.c_str(), c.value,
                  c.greater ? ">" : "<", c.tolerance);
    std::printf("suite %s: %s\n", r.suite.c_str(), r.pass() ? "PASS" : "FAIL");
  }
  return r.pass() ? kExitOk : kExitFailure;
}

int run_catalog(bool json) {
  if (json) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& e : catalog_entries()) {
      const SurfaceSpec s = catalog_surface(e.name);
      arr.push_back({{"name", e.name},
                     {"params", e.defaults},
                     {"expected_verdict", to_string(e.expected)},
                     {"expected_voss", e.expected_voss},
                     {"mode", s.mode},
                     {"signature", {s.p_plus, s.q_plus}},
                     {"epsilon", s.epsilon},
                     {"summary", e.summary}});
    }
    std::cout << arr.dump(2) << "\n";
    return kExitOk;
  }
  for (const auto& e : catalog_entries()) {
    std::ostringstream params;
    for (const auto& [k, v] : e.defaults) params << (params.tellp() > 0 ? ", " : "") << k << "=" << v;
    std::printf("%-22s %-18s voss=%-5s %-10s %s\n", e.name.c_str(), to_string(e.expected).c_str(),
                e.expected_voss ? "true" : "false", params.str().c_str(), e.summary.c_str());
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conformal invariants of surfaces in the lightcone model"};
  app.require_subcommand(1);

  AnalyzeArgs an;
  auto* analyze_cmd = app.add_subcommand("analyze", "Evaluate invariants and verdicts on a grid");
  analyze_cmd->add_option("--config", an.config, "Surface or analysis config (JSON)")->required();
  analyze_cmd->add_option("--grid", an.grid, "Grid size NxM");
  analyze_cmd->add_option("--order", an.order, "Jet order");
  analyze_cmd->add_option("--mode", an.mode, "Second point map: envelope or spaceform");
  analyze_cmd->add_option("--out", an.out, "Report path (default stdout)");
  analyze_cmd->add_option("--csv", an.csv, "Per-point field dump");
  analyze_cmd->add_flag("--samples", an.samples, "Include per-point samples in the report");

  std::string suite;
  std::uint64_t seed = 1;
  bool verify_json = false;
  auto* verify_cmd = app.add_subcommand("verify", "Run a property suite");
  verify_cmd->add_option("--suite", suite, "Suite name")
      ->required()
      ->check(CLI::IsMember(suite_names()));
  verify_cmd->add_option("--seed", seed, "Seed for randomized suites");
  verify_cmd->add_flag("--json", verify_json, "Machine-readable output");

  bool catalog_json = false;
  auto* catalog_cmd = app.add_subcommand("catalog", "List catalog surfaces");
  catalog_cmd->add_flag("--json", catalog_json, "Machine-readable output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  if (*analyze_cmd) return run_analyze(an);
  if (*verify_cmd) return run_verify(suite, seed, verify_json);
  if (*catalog_cmd) return run_catalog(catalog_json);
  return kExitInput;
}
