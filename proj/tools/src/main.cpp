#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "qndepp_cli/commands.hpp"
#include "qndepp_cli/config.hpp"

namespace {

struct Flags {
  std::string config;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> trials;
  std::optional<double> f;
  std::optional<std::string> alpha;
  bool paper_mode = false;
};

void add_flags(CLI::App& cmd, Flags& flags) {
  cmd.add_option("--config", flags.config, "YAML run config (defaults to the reference parameters)");
  cmd.add_option("--out", flags.out, "Output directory");
  cmd.add_option("--seed", flags.seed, "Master seed for all random streams");
  cmd.add_option("--trials", flags.trials, "Monte Carlo trials (0 = exact only)");
  cmd.add_option("--f", flags.f, "Input fidelity of the bit-flip mixture");
  cmd.add_option("--alpha", flags.alpha, "Probe amplitude, or inf for perfect readout");
  cmd.add_flag("--paper-mode", flags.paper_mode, "Use the rounded phases and the X_d > 4.5 threshold");
}

qndepp::cli::RunConfig resolve(const Flags& flags) {
  using qndepp::cli::ConfigError;
  auto c = flags.config.empty() ? qndepp::cli::RunConfig{} : qndepp::cli::load_config(flags.config);
  std::vector<std::string> issues;
  if (flags.out) c.out = *flags.out;
  if (flags.seed) c.seed = *flags.seed;
  if (flags.trials) c.trials = *flags.trials;
  if (flags.f) {
    if (!(*flags.f >= 0.0 && *flags.f <= 1.0)) issues.push_back("flag '--f': must lie in [0, 1]");
    c.f = *flags.f;
  }
  if (flags.alpha) {
    if (*flags.alpha == "inf" || *flags.alpha == "infinite") {
      c.alpha.reset();
    } else {
      try {
        std::size_t used = 0;
        const double a = std::stod(*flags.alpha, &used);
        if (used != flags.alpha->size() || !(a >= 0.0)) throw std::invalid_argument("bad");
        c.alpha = a;
      } catch (const std::exception&) {
        issues.push_back("flag '--alpha': expected a non-negative number or 'inf'");
      }
    }
  }
  if (flags.paper_mode) c.paper_mode = true;
  if (!issues.empty()) throw ConfigError(issues);
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cross-Kerr QND entanglement purification simulator"};
  app.require_subcommand(1);
  Flags flags;
  const std::string help[] = {
      "Phase shifts of the detector (n1, n2) table and level tables",
      "Smallest probe amplitude for reliable phase discrimination",
      "One purification round: exact branches, optional readout and Monte Carlo",
      "Branch ledgers of the polarization-spatial source",
      "Storage fidelity versus resonator decay times",
      "Homodyne classifier trials and confusion matrix"};
  std::size_t k = 0;
  for (const auto& name : qndepp::cli::command_names()) add_flags(*app.add_subcommand(name, help[k++]), flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return 2;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    return qndepp::cli::run_command(name, resolve(flags), std::cout, std::cerr);
  } catch (const qndepp::cli::ConfigError& e) {
    std::cerr << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
