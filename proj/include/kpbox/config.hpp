#pragma once

// Flat key-value configuration text with an optional [barriers] section.
// Lines look like `key = value`; `#` starts a comment; list values are
// comma separated; reals may be written as plain floats or fractions "p/q".
// Unknown keys are rejected with the offending line number.

#include <istream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "kpbox/csv.hpp"
#include "kpbox/potential.hpp"

namespace kpbox {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(int line, const std::string& message)
      : std::runtime_error("config error (line " + std::to_string(line) + "): " + message),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

inline const std::set<std::string>& known_config_keys() {
  static const std::set<std::string> keys = {
      "scenario",   "nb",       "b",          "v0",     "eps",    "eps_list", "u",
      "u_list",     "vvac",     "p",          "bigN",   "box",    "times",    "levels",
      "grid_points", "max_cells", "energy_cap", "factor", "sigma2", "x0",      "out"};
  return keys;
}

struct ParsedConfig {
  std::map<std::string, std::string> values;
  std::map<std::string, int> lines;
  std::vector<Barrier> barriers;
  bool has_barriers = false;

  bool has(const std::string& key) const { return values.count(key) > 0; }
};

namespace detail_config {

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace detail_config

// Plain real or fraction "p/q".
inline double parse_real(const std::string& text, int line = 0) {
  const std::string t = detail_config::trim(text);
  const auto slash = t.find('/');
  try {
    std::size_t used = 0;
    if (slash == std::string::npos) {
      const double v = std::stod(t, &used);
      if (used != t.size()) throw std::invalid_argument("trailing characters");
      return v;
    }
    const std::string num = detail_config::trim(t.substr(0, slash));
    const std::string den = detail_config::trim(t.substr(slash + 1));
    const double p = std::stod(num, &used);
    if (used != num.size()) throw std::invalid_argument("trailing characters");
    const double q = std::stod(den, &used);
    if (used != den.size()) throw std::invalid_argument("trailing characters");
    if (q == 0.0) throw std::invalid_argument("division by zero");
    return p / q;
  } catch (const std::exception&) {
    throw ConfigError(line, "cannot parse number '" + t + "'");
  }
}

inline std::vector<double> parse_real_list(const std::string& text, int line = 0) {
  std::vector<double> out;
  std::string item;
  std::stringstream ss(text);
  while (std::getline(ss, item, ',')) out.push_back(parse_real(item, line));
  if (out.empty()) throw ConfigError(line, "empty list");
  return out;
}

inline ParsedConfig parse_config_text(std::istream& in) {
  ParsedConfig cfg;
  std::string raw;
  int line_no = 0;
  bool in_barriers = false;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail_config::trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line == "[barriers]") {
        in_barriers = true;
        cfg.has_barriers = true;
        continue;
      }
      throw ConfigError(line_no, "unknown section '" + line + "'");
    }

    if (in_barriers) {
      std::stringstream ss(line);
      std::string c, w, h, extra;
      if (!(ss >> c >> w >> h) || (ss >> extra))
        throw ConfigError(line_no, "barrier rows need exactly: center width height");
      cfg.barriers.push_back({parse_real(c, line_no), parse_real(w, line_no), parse_real(h, line_no)});
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(line_no, "expected 'key = value'");
    const std::string key = detail_config::trim(line.substr(0, eq));
    const std::string value = detail_config::trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) throw ConfigError(line_no, "expected 'key = value'");
    if (!known_config_keys().count(key)) throw ConfigError(line_no, "unknown key '" + key + "'");
    if (cfg.values.count(key)) throw ConfigError(line_no, "duplicate key '" + key + "'");
    cfg.values[key] = value;
    cfg.lines[key] = line_no;
  }
  return cfg;
}

// Round trip of a potential through the configuration schema.
inline std::string spec_to_config(const PotentialSpec& spec) {
  std::string out;
  out += "box = " + format_number(spec.box_length) + "\n";
  out += "eps = " + format_number(spec.field_slope) + "\n";
  out += "[barriers]\n";
  for (const auto& b : spec.barriers)
    out += format_number(b.center) + " " + format_number(b.width) + " " +
           format_number(b.height) + "\n";
  return out;
}

inline PotentialSpec spec_from_config(const ParsedConfig& cfg) {
  PotentialSpec spec;
  if (!cfg.has("box")) throw ConfigError(0, "missing 'box' for an explicit potential");
  spec.box_length = parse_real(cfg.values.at("box"), cfg.lines.at("box"));
  if (cfg.has("eps")) spec.field_slope = parse_real(cfg.values.at("eps"), cfg.lines.at("eps"));
  spec.barriers = cfg.barriers;
  std::sort(spec.barriers.begin(), spec.barriers.end(),
            [](const Barrier& a, const Barrier& b) { return a.center < b.center; });
  validate(spec);
  return spec;
}

}  // namespace kpbox
