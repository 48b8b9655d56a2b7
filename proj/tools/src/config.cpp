#include "qndepp_cli/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ranges.h>
#include <yaml-cpp/yaml.h>

#include "qndepp/lindblad.hpp"

namespace qndepp::cli {

namespace {

const std::set<std::string> kKnownKeys = {
    "command", "g1", "g2", "omega_c", "delta1", "delta2", "kappa1_inv", "kappa2_inv", "kappa1", "kappa2",
    "max_total", "mode", "rule_set", "f", "rounds", "alpha", "trials", "seed", "shards", "paper_mode",
    "error_target", "paper_separation", "paper_phases", "alpha_sweep", "sweep_states", "sweep_kappa1_inv",
    "sweep_kappa2_inv", "sweep_fixed_kappa1_inv", "tau_factor", "dt_fraction", "out"};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& text) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto* end = t.data() + t.size();
  const auto [ptr, ec] = std::from_chars(t.data(), end, v);
  if (ec != std::errc() || ptr != end || t.empty()) throw std::invalid_argument("'" + text + "' is not a number");
  return v;
}

// Splits "value unit" at the first blank.
std::pair<double, std::string> split_quantity(const std::string& text) {
  const std::string t = trim(text);
  const auto sp = t.find_first_of(" \t");
  if (sp == std::string::npos) throw std::invalid_argument("'" + text + "' has no unit");
  return {parse_number(t.substr(0, sp)), trim(t.substr(sp))};
}

std::string fmt_double(double v) { return fmt::format("{:.17g}", v); }


ProtocolMode mode_from_string(const std::string& s) {
  if (s == "ideal_source") return ProtocolMode::ideal_source;
  if (s == "pdc_single") return ProtocolMode::pdc_single;
  if (s == "pdc_two_pair") return ProtocolMode::pdc_two_pair;
  throw std::invalid_argument("expected ideal_source, pdc_single or pdc_two_pair, got '" + s + "'");
}

// Collects field-level problems instead of stopping at the first one.
class Reader {
 public:
  explicit Reader(const YAML::Node& root) : root_(root) {}

  template <class F>
  void field(const std::string& key, F&& assign) {
    const auto node = root_[key];
    if (!node) return;
    try {
      assign(node);
    } catch (const std::exception& e) {
      issues_.push_back("field '" + key + "': " + e.what());
    }
  }

  void issue(const std::string& key, const std::string& what) { issues_.push_back("field '" + key + "': " + what); }
  std::vector<std::string>& issues() { return issues_; }

 private:
  const YAML::Node& root_;
  std::vector<std::string> issues_;
};

std::string scalar(const YAML::Node& n) {
  if (!n.IsScalar()) throw std::invalid_argument("expected a scalar");
  return n.Scalar();
}

template <class T>
T integer(const YAML::Node& n) {
  const std::string s = trim(scalar(n));
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw std::invalid_argument("'" + s + "' is not a valid integer");
  }
  return v;
}

bool boolean(const YAML::Node& n) {
  const std::string s = scalar(n);
  if (s == "true") return true;
  if (s == "false") return false;
  throw std::invalid_argument("expected true or false, got '" + s + "'");
}

std::vector<std::string> scalar_list(const YAML::Node& n) {
  if (!n.IsSequence()) throw std::invalid_argument("expected a list");
  std::vector<std::string> out;
  for (const auto& item : n) out.push_back(scalar(item));
  return out;
}

}  // namespace

std::string to_string(ProtocolMode m) {
  switch (m) {
    case ProtocolMode::ideal_source: return "ideal_source";
    case ProtocolMode::pdc_single: return "pdc_single";
    case ProtocolMode::pdc_two_pair: return "pdc_two_pair";
  }
  return "?";
}

ConfigError::ConfigError(std::vector<std::string> issues)
    : std::runtime_error([&] {
        std::string msg = "invalid config:";
        for (const auto& i : issues) msg += "\n  " + i;
        return msg;
      }()),
      issues_(std::move(issues)) {}

double parse_frequency(const std::string& text) {
  static const std::map<std::string, double> cyclic = {{"Hz", 1.0}, {"kHz", 1e3}, {"MHz", 1e6}, {"GHz", 1e9}};
  const auto [v, unit] = split_quantity(text);
  if (unit == "rad/s") return v;
  const auto it = cyclic.find(unit);
  if (it == cyclic.end()) {
    throw std::invalid_argument("unknown frequency unit '" + unit + "' (use Hz, kHz, MHz, GHz for omega/2pi or rad/s)");
  }
  return 2.0 * std::numbers::pi * v * it->second;
}

double parse_time(const std::string& text) {
  static const std::map<std::string, double> scale = {
      {"s", 1.0}, {"ms", 1e-3}, {"us", 1e-6}, {"ns", 1e-9}, {"ps", 1e-12}};
  const auto [v, unit] = split_quantity(text);
  const auto it = scale.find(unit);
  if (it == scale.end()) throw std::invalid_argument("unknown time unit '" + unit + "' (use s, ms, us, ns, ps)");
  return v * it->second;
}

RunConfig parse_config_text(const std::string& yaml) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml);
  } catch (const YAML::Exception& e) {
    throw ConfigError({std::string("YAML syntax: ") + e.what()});
  }
  RunConfig c;
  if (root.IsNull()) return c;
  if (!root.IsMap()) throw ConfigError({"top level must be a mapping of keys to values"});

  const YAML::Node& croot = root;
  Reader r(croot);
  for (const auto& kv : croot) {
    const auto key = kv.first.as<std::string>();
    if (!kKnownKeys.count(key)) r.issue(key, "unknown key");
  }

  const auto freq = [&](const char* key, double& dst) {
    r.field(key, [&](const YAML::Node& n) { dst = parse_frequency(scalar(n)); });
  };
  freq("g1", c.circuit.g1);
  freq("g2", c.circuit.g2);
  freq("omega_c", c.circuit.omega_c);
  freq("delta1", c.circuit.delta1);
  freq("delta2", c.circuit.delta2);
  r.field("kappa1_inv", [&](const YAML::Node& n) {
    const double t = parse_time(scalar(n));
    if (!(t > 0.0)) throw std::invalid_argument("must be positive");
    c.circuit.kappa1 = 1.0 / t;
  });
  r.field("kappa2_inv", [&](const YAML::Node& n) {
    const double t = parse_time(scalar(n));
    if (!(t > 0.0)) throw std::invalid_argument("must be positive");
    c.circuit.kappa2 = 1.0 / t;
  });
  const auto rate = [&](const char* key, const char* inv_key, double& dst) {
    r.field(key, [&](const YAML::Node& n) {
      if (croot[inv_key]) throw std::invalid_argument(std::string("give either ") + key + " or " + inv_key);
      const auto [v, unit] = split_quantity(scalar(n));
      if (unit != "1/s") throw std::invalid_argument("decay rates use the unit 1/s");
      if (!(v > 0.0)) throw std::invalid_argument("must be positive");
      dst = v;
    });
  };
  rate("kappa1", "kappa1_inv", c.circuit.kappa1);
  rate("kappa2", "kappa2_inv", c.circuit.kappa2);
  r.field("max_total", [&](const YAML::Node& n) {
    c.max_total = integer<int>(n);
    if (c.max_total < 2 || c.max_total > 8) throw std::invalid_argument("must lie in [2, 8]");
  });
  r.field("mode", [&](const YAML::Node& n) { c.mode = mode_from_string(scalar(n)); });
  r.field("rule_set", [&](const YAML::Node& n) { c.rule_set = protocol::rule_set_from_string(scalar(n)); });
  r.field("f", [&](const YAML::Node& n) {
    c.f = parse_number(scalar(n));
    if (!(c.f >= 0.0 && c.f <= 1.0)) throw std::invalid_argument("must lie in [0, 1]");
  });
  r.field("rounds", [&](const YAML::Node& n) {
    c.rounds = integer<int>(n);
    if (c.rounds < 1) throw std::invalid_argument("must be >= 1");
  });
  r.field("alpha", [&](const YAML::Node& n) {
    const std::string s = scalar(n);
    if (s == "inf" || s == "infinite") {
      c.alpha.reset();
      return;
    }
    const double a = parse_number(s);
    if (!(a >= 0.0) || std::isinf(a)) throw std::invalid_argument("must be a non-negative number or 'inf'");
    c.alpha = a;
  });
  r.field("trials", [&](const YAML::Node& n) { c.trials = integer<std::uint64_t>(n); });
  r.field("seed", [&](const YAML::Node& n) { c.seed = integer<std::uint64_t>(n); });
  r.field("shards", [&](const YAML::Node& n) {
    c.shards = integer<unsigned>(n);
    if (c.shards < 1) throw std::invalid_argument("must be >= 1");
  });
  r.field("paper_mode", [&](const YAML::Node& n) { c.paper_mode = boolean(n); });
  r.field("error_target", [&](const YAML::Node& n) {
    c.error_target = parse_number(scalar(n));
    if (!(c.error_target > 0.0 && c.error_target < 0.5)) throw std::invalid_argument("must lie in (0, 0.5)");
  });
  r.field("paper_separation", [&](const YAML::Node& n) {
    c.paper_separation = parse_number(scalar(n));
    if (!(c.paper_separation > 0.0)) throw std::invalid_argument("must be positive");
  });
  r.field("paper_phases", [&](const YAML::Node& n) {
    const auto items = scalar_list(n);
    if (items.size() != 4) throw std::invalid_argument("needs exactly four phases (theta0..theta3, rad)");
    for (std::size_t i = 0; i < 4; ++i) c.paper_phases[i] = parse_number(items[i]);
  });
  r.field("alpha_sweep", [&](const YAML::Node& n) {
    c.alpha_sweep.clear();
    for (const auto& s : scalar_list(n)) {
      const double a = parse_number(s);
      if (!(a >= 0.0)) throw std::invalid_argument("alphas must be >= 0");
      c.alpha_sweep.push_back(a);
    }
  });
  r.field("sweep_states", [&](const YAML::Node& n) {
    c.sweep_states.clear();
    for (const auto& s : scalar_list(n)) {
      const auto label = lindblad::FockLabel::parse(s);
      if (label.occupations.size() != 2) throw std::invalid_argument("states need two occupations, got " + s);
      for (int o : label.occupations) {
        if (o > 2) throw std::invalid_argument("occupation above the Fock cutoff in " + s);
      }
      c.sweep_states.push_back(label.str());
    }
    if (c.sweep_states.empty()) throw std::invalid_argument("must not be empty");
  });
  const auto time_list = [&](const char* key, std::vector<double>& dst) {
    r.field(key, [&](const YAML::Node& n) {
      dst.clear();
      for (const auto& s : scalar_list(n)) {
        const double t = parse_time(s);
        if (!(t > 0.0)) throw std::invalid_argument("times must be positive");
        dst.push_back(t);
      }
      if (dst.empty()) throw std::invalid_argument("must not be empty");
    });
  };
  time_list("sweep_kappa1_inv", c.sweep_kappa1_inv);
  time_list("sweep_kappa2_inv", c.sweep_kappa2_inv);
  r.field("sweep_fixed_kappa1_inv", [&](const YAML::Node& n) {
    c.sweep_fixed_kappa1_inv = parse_time(scalar(n));
    if (!(c.sweep_fixed_kappa1_inv > 0.0)) throw std::invalid_argument("must be positive");
  });
  r.field("tau_factor", [&](const YAML::Node& n) {
    c.tau_factor = parse_number(scalar(n));
    if (!(c.tau_factor > 0.0)) throw std::invalid_argument("must be positive");
  });
  r.field("dt_fraction", [&](const YAML::Node& n) {
    c.dt_fraction = parse_number(scalar(n));
    if (!(c.dt_fraction > 0.0 && c.dt_fraction <= 0.01)) throw std::invalid_argument("must lie in (0, 0.01]");
  });
  r.field("out", [&](const YAML::Node& n) {
    c.out = scalar(n);
    if (c.out.empty()) throw std::invalid_argument("must not be empty");
  });

  if (!r.issues().empty()) throw ConfigError(std::move(r.issues()));
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({"cannot open config file '" + path + "'"});
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::string to_manifest(const RunConfig& c, const std::string& command) {
  const auto rad = [](double v) { return fmt::format("\"{:.17g} rad/s\"", v); };
  const auto sec = [](double v) { return fmt::format("\"{:.17g} s\"", v); };
  const auto sec_list = [&](const std::vector<double>& v) {
    std::vector<std::string> items;
    for (double x : v) items.push_back(sec(x));
    return fmt::format("[{}]", fmt::join(items, ", "));
  };
  const auto num_list = [](const auto& v) {
    std::vector<std::string> items;
    for (double x : v) items.push_back(fmt_double(x));
    return fmt::format("[{}]", fmt::join(items, ", "));
  };
  std::vector<std::string> states;
  for (const auto& s : c.sweep_states) states.push_back("\"" + s + "\"");

  std::string m;
  const auto line = [&](const std::string& key, const std::string& value) { m += key + ": " + value + "\n"; };
  m += "# qndepp run manifest; usable as --config to repeat the run\n";
  line("command", command);
  line("g1", rad(c.circuit.g1));
  line("g2", rad(c.circuit.g2));
  line("omega_c", rad(c.circuit.omega_c));
  line("delta1", rad(c.circuit.delta1));
  line("delta2", rad(c.circuit.delta2));
  line("kappa1", fmt::format("\"{:.17g} 1/s\"", c.circuit.kappa1));
  line("kappa2", fmt::format("\"{:.17g} 1/s\"", c.circuit.kappa2));
  line("max_total", std::to_string(c.max_total));
  line("mode", to_string(c.mode));
  line("rule_set", protocol::to_string(c.rule_set));
  line("f", fmt_double(c.f));
  line("rounds", std::to_string(c.rounds));
  line("alpha", c.alpha ? fmt_double(*c.alpha) : "inf");
  line("trials", std::to_string(c.trials));
  line("seed", std::to_string(c.seed));
  line("shards", std::to_string(c.shards));
  line("paper_mode", c.paper_mode ? "true" : "false");
  line("error_target", fmt_double(c.error_target));
  line("paper_separation", fmt_double(c.paper_separation));
  line("paper_phases", num_list(c.paper_phases));
  line("alpha_sweep", num_list(c.alpha_sweep));
  line("sweep_states", fmt::format("[{}]", fmt::join(states, ", ")));
  line("sweep_kappa1_inv", sec_list(c.sweep_kappa1_inv));
  line("sweep_kappa2_inv", sec_list(c.sweep_kappa2_inv));
  line("sweep_fixed_kappa1_inv", sec(c.sweep_fixed_kappa1_inv));
  line("tau_factor", fmt_double(c.tau_factor));
  line("dt_fraction", fmt_double(c.dt_fraction));
  line("out", "\"" + c.out + "\"");
  return m;
}

}  // namespace qndepp::cli
