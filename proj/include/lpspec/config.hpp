#pragma once

// Flat key=value experiment configuration. Lines are `key = value`, '#'
// starts a comment, blank lines are skipped, repeating a key appends to a
// list. Unknown keys are rejected up front with their line number so a typo
// cannot silently fall back to a default.

#include "lpspec/model.hpp"
#include "lpspec/region.hpp"

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace lpspec {

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

inline std::string trim(const std::string& s) {
  const size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

inline double parse_double(const std::string& key, const std::string& v) {
  size_t used = 0;
  double d = 0.0;
  try {
    d = std::stod(v, &used);
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': cannot parse '" + v + "' as a number");
  }
  if (used != v.size())
    throw ConfigError("key '" + key + "': trailing junk in '" + v + "'");
  return d;
}

}  // namespace detail

// Raw parse result: every key maps to the list of values it was given,
// in file order, each remembering its source line.
struct ConfigText {
  struct Entry {
    std::string value;
    int line = 0;
  };
  std::map<std::string, std::vector<Entry>> entries;

  static ConfigText parse(std::istream& in) {
    ConfigText cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const size_t hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      const std::string t = detail::trim(line);
      if (t.empty()) continue;
      const size_t eq = t.find('=');
      if (eq == std::string::npos)
        throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
      const std::string key = detail::trim(t.substr(0, eq));
      const std::string val = detail::trim(t.substr(eq + 1));
      if (key.empty())
        throw ConfigError("line " + std::to_string(lineno) + ": empty key");
      if (val.empty())
        throw ConfigError("line " + std::to_string(lineno) + ": empty value for '" + key + "'");
      cfg.entries[key].push_back({val, lineno});
    }
    return cfg;
  }

  static ConfigText parse_string(const std::string& text) {
    std::istringstream in(text);
    return parse(in);
  }

  static ConfigText parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    return parse(in);
  }

  bool has(const std::string& key) const { return entries.count(key) > 0; }

  const Entry& single(const std::string& key) const {
    const auto it = entries.find(key);
    if (it == entries.end()) throw ConfigError("missing required key '" + key + "'");
    if (it->second.size() > 1)
      throw ConfigError("key '" + key + "' given " + std::to_string(it->second.size()) +
                        " times (line " + std::to_string(it->second[1].line) +
                        "), expected once");
    return it->second.front();
  }

  std::string get_string(const std::string& key) const { return single(key).value; }
  std::string get_string(const std::string& key, const std::string& dflt) const {
    return has(key) ? single(key).value : dflt;
  }
  double get_double(const std::string& key) const {
    return detail::parse_double(key, single(key).value);
  }
  double get_double(const std::string& key, double dflt) const {
    return has(key) ? get_double(key) : dflt;
  }
  long get_long(const std::string& key, long dflt) const {
    const double d = get_double(key, double(dflt));
    const long l = long(d);
    if (double(l) != d) throw ConfigError("key '" + key + "': expected an integer");
    return l;
  }
  std::vector<double> get_doubles(const std::string& key) const {
    std::vector<double> out;
    const auto it = entries.find(key);
    if (it == entries.end()) return out;
    for (const Entry& e : it->second) out.push_back(detail::parse_double(key, e.value));
    return out;
  }

  void reject_unknown(const std::set<std::string>& known) const {
    for (const auto& [key, vals] : entries)
      if (!known.count(key))
        throw ConfigError("line " + std::to_string(vals.front().line) + ": unknown key '" +
                          key + "'");
  }
};

// alpha = "constant:<v>" or "trig:a0,a1,b1,a2,b2,..."
inline BoundaryProfile parse_profile(int n, const std::string& spec) {
  const size_t colon = spec.find(':');
  if (colon == std::string::npos)
    throw ConfigError("alpha: expected 'constant:<v>' or 'trig:a0,a1,b1,...', got '" + spec +
                      "'");
  const std::string kind = spec.substr(0, colon);
  const auto parts = detail::split(spec.substr(colon + 1), ',');
  if (kind == "constant") {
    if (parts.size() != 1) throw ConfigError("alpha: constant form takes one value");
    return BoundaryProfile::constant(n, detail::parse_double("alpha", parts[0]));
  }
  if (kind == "trig") {
    if (parts.empty()) throw ConfigError("alpha: trig form needs at least a0");
    std::vector<double> cs, sn;
    for (size_t i = 1; i < parts.size(); ++i) {
      const double v = detail::parse_double("alpha", parts[i]);
      (i % 2 == 1 ? cs : sn).push_back(v);
    }
    return BoundaryProfile::trig(n, detail::parse_double("alpha", parts[0]), std::move(cs),
                                 std::move(sn));
  }
  throw ConfigError("alpha: unknown profile kind '" + kind + "'");
}

// Fully validated experiment description shared by all subcommands.
struct ExperimentConfig {
  ModelMetric metric;
  SpectralParams params;
  std::vector<double> p_list;
  std::vector<double> epsilon_list;
  std::vector<double> length_list;   // cutoff depths L
  std::vector<double> a_list;        // slice positions A
  std::vector<double> s_list;        // Im(lambda) values
  std::vector<double> radius_list;   // geodesic radii for volume fits
  std::vector<double> u_max_list;    // collar truncations, ascending
  int nu = 201;
  int ny = 8;
  int quad_ny = 64;
  double vol_epsilon = 0.05;
  std::string figure = "lp-both";
  double x_min = 0.0, x_max = 0.0, y_min = 0.0, y_max = 0.0;  // 0-span = auto
  int resolution = 257;
  std::string bump = "auto";  // auto | constant
  std::uint64_t seed = 12345;

  static const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys = {
        "n",      "x1",     "c",     "alpha",     "compact_volume", "p",
        "epsilon", "L",     "A",     "s",         "R",              "u_max",
        "nu",     "ny",     "quad_ny", "vol_epsilon", "figure",     "x_min",
        "x_max",  "y_min",  "y_max", "resolution", "bump",          "seed"};
    return keys;
  }

  static ExperimentConfig from_text(const ConfigText& cfg) {
    cfg.reject_unknown(known_keys());
    ExperimentConfig ec;

    const int n = int(cfg.get_long("n", 1));
    ec.metric.profile = parse_profile(n, cfg.get_string("alpha", "constant:1"));
    ec.metric.x1 = cfg.get_double("x1", 1.0);
    ec.metric.c = cfg.get_double("c", 0.0);
    ec.metric.compact_volume = cfg.get_double("compact_volume", 1.0);
    ec.metric.validate();

    ec.p_list = cfg.get_doubles("p");
    if (ec.p_list.empty()) ec.p_list = {1.5};
    for (double p : ec.p_list)
      if (!(p >= 1.0 && p <= 2.0))
        throw ConfigError("p must lie in [1,2]; use conjugateExponent for p>2");

    ec.params = SpectralParams::make(n, ec.p_list.front(), ec.metric.profile.alpha0(),
                                     ec.metric.profile.alpha1());

    ec.epsilon_list = cfg.get_doubles("epsilon");
    if (ec.epsilon_list.empty()) ec.epsilon_list = {0.1};
    ec.length_list = cfg.get_doubles("L");
    if (ec.length_list.empty()) ec.length_list = {200.0};
    ec.a_list = cfg.get_doubles("A");  // empty: each runner picks its default
    ec.s_list = cfg.get_doubles("s");
    if (ec.s_list.empty()) ec.s_list = {0.7};
    ec.radius_list = cfg.get_doubles("R");
    ec.u_max_list = cfg.get_doubles("u_max");
    if (ec.u_max_list.empty()) ec.u_max_list = {20.0};
    std::sort(ec.u_max_list.begin(), ec.u_max_list.end());

    ec.nu = int(cfg.get_long("nu", 201));
    ec.ny = int(cfg.get_long("ny", 8));
    ec.quad_ny = int(cfg.get_long("quad_ny", 64));
    ec.vol_epsilon = cfg.get_double("vol_epsilon", 0.05);
    ec.figure = cfg.get_string("figure", "lp-both");
    static const std::set<std::string> kinds = {"l1-region", "lp-family", "envelope",
                                                "l1-both", "lp-both"};
    if (!kinds.count(ec.figure))
      throw ConfigError("figure must be one of l1-region, lp-family, envelope, l1-both, lp-both");
    ec.x_min = cfg.get_double("x_min", 0.0);
    ec.x_max = cfg.get_double("x_max", 0.0);
    ec.y_min = cfg.get_double("y_min", 0.0);
    ec.y_max = cfg.get_double("y_max", 0.0);
    ec.resolution = int(cfg.get_long("resolution", 257));
    ec.bump = cfg.get_string("bump", "auto");
    if (ec.bump != "auto" && ec.bump != "constant")
      throw ConfigError("bump must be 'auto' or 'constant'");
    const double seed = cfg.get_double("seed", 12345.0);
    if (seed < 0.0 || double(std::uint64_t(seed)) != seed)
      throw ConfigError("seed must be a nonnegative integer");
    ec.seed = std::uint64_t(seed);
    return ec;
  }

  static ExperimentConfig from_file(const std::string& path) {
    return from_text(ConfigText::parse_file(path));
  }
  static ExperimentConfig from_string(const std::string& text) {
    return from_text(ConfigText::parse_string(text));
  }
};

}  // namespace lpspec
