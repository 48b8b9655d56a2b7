#pragma once

// Run configuration for the qndepp command-line runner.
//
// The config is a flat YAML mapping. Every physical quantity carries a unit:
//   frequencies  "300 MHz"   cyclic (value is omega/2pi; Hz, kHz, MHz, GHz),
//                "1.88e9 rad/s" angular;
//   times        "20 us"     (s, ms, us, ns, ps);
//   rates        "5e4 1/s"   (kappa1/kappa2, as an alternative to kappa1_inv/kappa2_inv).
// Internally everything is rad/s and seconds. The manifest written by each run
// uses rad/s and s with round-trip precision and is itself a valid config.

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qndepp/kerr.hpp"
#include "qndepp/protocol.hpp"

namespace qndepp::cli {

enum class ProtocolMode { ideal_source, pdc_single, pdc_two_pair };

std::string to_string(ProtocolMode m);

struct RunConfig {
  kerr::KerrSystemParams circuit = kerr::KerrSystemParams::reference();
  int max_total = 2;

  ProtocolMode mode = ProtocolMode::ideal_source;
  protocol::RuleSet rule_set = protocol::RuleSet::ideal_phase;
  double f = 0.8;
  int rounds = 1;
  std::optional<double> alpha;  // empty: infinite (perfect readout)
  std::uint64_t trials = 0;
  std::uint64_t seed = 20240611;
  unsigned shards = 8;

  bool paper_mode = false;
  double error_target = 0.01;
  double paper_separation = 4.5;
  std::array<double, 4> paper_phases{0.0, 0.6, 1.2, 1.1};  // theta0..theta3, rounded
  std::vector<double> alpha_sweep{5.0, 10.0, 15.0, 20.0, 24.7, 30.0, 35.0};

  std::vector<std::string> sweep_states{"|1,0>", "|1,1>"};
  std::vector<double> sweep_kappa1_inv{1e-6, 5e-6, 10e-6, 20e-6};  // s
  std::vector<double> sweep_kappa2_inv{5e-9, 10e-9, 20e-9};        // s
  double sweep_fixed_kappa1_inv = 20e-6;                            // s, for the kappa2 sweep
  double tau_factor = 8.0;
  double dt_fraction = 1e-3;  // RK4 step as a fraction of tau

  std::string out = "out";
};

/// Invalid config; what() lists every offending field, one per line.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> issues);
  const std::vector<std::string>& issues() const { return issues_; }

 private:
  std::vector<std::string> issues_;
};

/// "300 MHz" -> 2pi * 3e8 rad/s; "1e9 rad/s" -> 1e9. Throws std::invalid_argument.
double parse_frequency(const std::string& text);
/// "10 ns" -> 1e-8. Throws std::invalid_argument.
double parse_time(const std::string& text);

RunConfig parse_config_text(const std::string& yaml);
RunConfig load_config(const std::string& path);

/// Full resolved config (including defaults) in config syntax.
std::string to_manifest(const RunConfig& config, const std::string& command);

}  // namespace qndepp::cli
