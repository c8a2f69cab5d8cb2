#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "cli_app.hpp"

namespace {

constexpr const char* units_note =
    "Units: hbar = 1, qubit-oscillator coupling = 1, T in units of omega/k_B, t in inverse coupling.\n"
    "Worker threads: QME_WORKERS (default: hardware concurrency).\n"
    "Exit codes: 2 configuration error, 3 numerical failure, 4 verification failure.";

}  // namespace

int main(int argc, char** argv) {
  using namespace qme;
  CLI::App app{"Qubit-mediated entanglement of two damped oscillators: sweeps, reciprocation and oracle checks"};
  app.footer(units_note);
  app.require_subcommand(1);

  std::string config_path;
  std::map<std::string, std::optional<std::string>> flags{
      {"kappa", {}}, {"gamma", {}},   {"temp", {}},        {"time", {}}, {"seed", {}},   {"outcome", {}},
      {"interaction", {}}, {"mode", {}}, {"out", {}}, {"format", {}}};
  const std::map<std::string, std::string> help{
      {"kappa", "oscillator damping rate"},
      {"gamma", "qubit dephasing rate"},
      {"temp", "bath temperature"},
      {"time", "interaction time of single-point queries"},
      {"seed", "Bell optimizer seed"},
      {"outcome", "entangling-qubit outcome {g,e}"},
      {"interaction", "{sim,seq}; seq doubles kappa in the entangling stage"},
      {"mode", "reciprocation read-out {momentum,parity}"},
      {"out", "output path (default: stdout)"},
      {"format", "{csv,json}"}};

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "key=value file; flags override it");
    for (auto& [name, slot] : flags) sub->add_option("--" + name, slot, help.at(name));
  };
  auto* evolve = app.add_subcommand("evolve", "probabilities, Wigner samples and lambda, mu, nu versus t");
  auto* bell = app.add_subcommand("bell", "Bell lower-bound surface over (T, t)");
  auto* recip = app.add_subcommand("reciprocate", "reciprocation onto two qubits by momentum or parity read-out");
  auto* verify = app.add_subcommand("verify", "compare the closed forms with the Fock-space oracle");
  for (auto* s : {evolve, bell, recip, verify}) add_common(s);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cli::config_error;
  }

  cli::RunConfig cfg;
  try {
    if (!config_path.empty()) cli::load_config_file(config_path, cfg);
    for (const auto& [name, slot] : flags)
      if (slot) cfg.set(name, *slot);
    cfg.validate();
  } catch (const cli::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return cli::config_error;
  }

  try {
    cli::Report report;
    bool all_pass = true;
    if (*evolve) report = cli::cmd_evolve(cfg);
    else if (*bell) report = cli::cmd_bell(cfg);
    else if (*recip) report = cli::cmd_reciprocate(cfg);
    else report = cli::cmd_verify(cfg, all_pass);
    cli::emit(report, cfg, std::cout);
    if (!all_pass) {
      std::cerr << "verification failed\n";
      return cli::verify_failure;
    }
  } catch (const cli::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return cli::config_error;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return cli::numerical_failure;
  }
  return cli::ok;
}
