// lab: config-driven experiment runner for the non-local parabolic solver.
//
//   lab run <config> [--defaults <file>]
//   lab verify [--corrupt-kernel]
//   lab metrics <checkpoint> --kind <seminorm> [--alpha <a>] [--cyl x,t,r]
//   lab presets
//
// LAB_THREADS caps parallelism. Exit codes: 2 config error, 3 solver
// failure, 4 acceptance failure.

#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "nllab/scenario.hpp"

namespace {

int cmd_run(const std::string& config_path, const std::string& defaults_path) {
  nlohmann::json cfg, defaults;
  try {
    cfg = nllab::load_json_file(config_path);
    if (!defaults_path.empty())
      defaults = nllab::load_json_file(defaults_path);
  } catch (const nllab::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return nllab::kExitConfig;
  }
  std::string message;
  int rc = nllab::run_scenario(cfg, defaults, &message);
  std::fprintf(rc == 0 ? stdout : stderr, "%s: %s\n",
               cfg.value("name", config_path).c_str(), message.c_str());
  return rc;
}

int cmd_metrics(const std::string& checkpoint, const std::string& kind,
                double alpha, const std::string& cyl) {
  try {
    double sigma = 0.0;
    nllab::SpaceTimeField f = nllab::load_checkpoint(checkpoint, &sigma);
    nlohmann::json m = {{"kind", kind}, {"alpha", alpha}};
    if (!cyl.empty()) {
      std::istringstream ss(cyl);
      std::vector<double> v;
      std::string part;
      while (std::getline(ss, part, ',')) v.push_back(std::stod(part));
      if (v.size() != 3) throw nllab::ConfigError("--cyl expects x,t,r");
      m["cyl"] = v;
    }
    nllab::RegularityReport report;
    nllab::run_metric(f, sigma, m, report);
    std::fputs(report.to_csv("checkpoint").c_str(), stdout);
    return 0;
  } catch (const nllab::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return nllab::kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return nllab::kExitSolver;
  }
}

void cmd_presets() {
  std::puts(
      "kernel presets:   constant (K == value), two-sided (Lambda on y>0,\n"
      "                  lambda on y<0), oscillating (log-periodic between\n"
      "                  lambda and Lambda)\n"
      "exterior presets: zero, constant, time, holder (|t|^{gamma/sigma}\n"
      "                  outside B_1), jump (step at t_jump outside B_1),\n"
      "                  expdecay, smooth\n"
      "rhs presets:      zero, one, square-wave\n"
      "operator types:   linear, extremal+, extremal-, infsup/min\n"
      "metric kinds:     holder, time-exponent, time-exponent-ut, l1-sigma,\n"
      "                  decay-audit, ut-seminorm, fraclap-holder");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical laboratory for non-local parabolic equations"};
  app.require_subcommand(1);

  std::string config_path, defaults_path, checkpoint, kind, cyl;
  double alpha = 0.5;
  bool corrupt = false;

  auto* run = app.add_subcommand("run", "run a scenario config");
  run->add_option("config", config_path, "scenario JSON file")->required();
  run->add_option("--defaults", defaults_path, "defaults JSON file");

  auto* verify = app.add_subcommand("verify", "run the invariant suite");
  verify->add_flag("--corrupt-kernel", corrupt,
                   "inject an out-of-class kernel (suite must fail)");

  auto* metrics = app.add_subcommand("metrics", "evaluate one metric offline");
  metrics->add_option("checkpoint", checkpoint, "checkpoint file")->required();
  metrics->add_option("--kind", kind, "metric kind")->required();
  metrics->add_option("--alpha", alpha, "seminorm exponent");
  metrics->add_option("--cyl", cyl, "cylinder as x,t,r");

  auto* presets = app.add_subcommand("presets", "list addressable presets");

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) return cmd_run(config_path, defaults_path);
  if (verify->parsed()) return nllab::verify_suite(corrupt);
  if (metrics->parsed()) return cmd_metrics(checkpoint, kind, alpha, cyl);
  if (presets->parsed()) cmd_presets();
  return 0;
}
