#include "config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>

#include "blayer/error.hpp"

namespace blayer::cli {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string canonical(std::string key) {
  std::replace(key.begin(), key.end(), '-', '_');
  return key;
}

[[noreturn]] void fail(const std::string& where, const std::string& key, const std::string& msg) {
  throw ConfigError(where + ": field '" + key + "': " + msg);
}

double parse_double(const std::string& text, const std::string& where, const std::string& key) {
  double x = 0.0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, x);
  if (ec != std::errc() || ptr != end || text.empty()) fail(where, key, "expected a number, got '" + text + "'");
  if (!std::isfinite(x)) fail(where, key, "must be finite");
  return x;
}

int parse_int(const std::string& text, const std::string& where, const std::string& key) {
  int x = 0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, x);
  if (ec != std::errc() || ptr != end || text.empty()) fail(where, key, "expected an integer, got '" + text + "'");
  return x;
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&, const std::string&)>;

Setter positive(std::optional<double> RunConfig::*field) {
  return [field](RunConfig& c, const std::string& v, const std::string& where, const std::string& key) {
    const double x = parse_double(v, where, key);
    if (!(x > 0.0)) fail(where, key, "must be > 0, got " + v);
    c.*field = x;
  };
}

Setter any_number(std::optional<double> RunConfig::*field) {
  return [field](RunConfig& c, const std::string& v, const std::string& where, const std::string& key) {
    c.*field = parse_double(v, where, key);
  };
}

Setter bounded(double RunConfig::*field, double lo, double hi, const char* range) {
  return [=](RunConfig& c, const std::string& v, const std::string& where, const std::string& key) {
    const double x = parse_double(v, where, key);
    if (!(x > lo && x < hi)) fail(where, key, std::string("must be in ") + range + ", got " + v);
    c.*field = x;
  };
}

Setter count(int RunConfig::*field, int lo) {
  return [=](RunConfig& c, const std::string& v, const std::string& where, const std::string& key) {
    const int x = parse_int(v, where, key);
    if (x < lo) fail(where, key, "must be >= " + std::to_string(lo) + ", got " + v);
    c.*field = x;
  };
}

const std::vector<std::pair<std::string, Setter>>& table() {
  static const std::vector<std::pair<std::string, Setter>> t = {
      {"gamma",
       [](RunConfig& c, const std::string& v, const std::string& where, const std::string& key) {
         const double x = parse_double(v, where, key);
         if (!(x > 1.0)) fail(where, key, "must be > 1, got " + v);
         c.gamma = x;
       }},
      {"R", positive(&RunConfig::R)},
      {"mu", positive(&RunConfig::mu)},
      {"kappa", positive(&RunConfig::kappa)},
      {"v_minus", positive(&RunConfig::v_minus)},
      {"u_minus", any_number(&RunConfig::u_minus)},
      {"theta_minus", positive(&RunConfig::theta_minus)},
      {"v_plus", positive(&RunConfig::v_plus)},
      {"u_plus", any_number(&RunConfig::u_plus)},
      {"theta_plus", positive(&RunConfig::theta_plus)},
      {"tol_member", bounded(&RunConfig::tol_member, 0.0, 1.0, "(0, 1)")},
      {"tol_mach", bounded(&RunConfig::tol_mach, 0.0, 0.5, "(0, 0.5)")},
      {"tol_flux", bounded(&RunConfig::tol_flux, 0.0, 1.0, "(0, 1)")},
      {"out", [](RunConfig& c, const std::string& v, const std::string& where,
                 const std::string& key) {
         if (v.empty()) fail(where, key, "must not be empty");
         c.out = v;
       }},
      {"format", [](RunConfig& c, const std::string& v, const std::string& where,
                    const std::string& key) {
         if (v == "csv")
           c.format = Format::Csv;
         else if (v == "json")
           c.format = Format::Json;
         else
           fail(where, key, "expected csv or json, got '" + v + "'");
       }},
      {"trajectories", count(&RunConfig::trajectories, 0)},
      {"mach_min", bounded(&RunConfig::mach_min, 0.0, 1e6, "(0, 1e6)")},
      {"mach_max", bounded(&RunConfig::mach_max, 0.0, 1e6, "(0, 1e6)")},
      {"points", count(&RunConfig::points, 2)},
      {"threads", count(&RunConfig::threads, 0)},
  };
  return t;
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& [name, setter] : table()) k.push_back(name);
    return k;
  }();
  return keys;
}

void apply(RunConfig& cfg, const std::string& key, const std::string& value, const std::string& where) {
  const std::string name = canonical(key);
  for (const auto& [k, setter] : table()) {
    if (k == name) {
      setter(cfg, value, where, name);
      cfg.origin[name] = where;
      return;
    }
  }
  throw ConfigError(where + ": unknown field '" + key + "'");
}

void load_file(RunConfig& cfg, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open config file");
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string where = path.string() + ":" + std::to_string(number);
    const std::string text = trim(line);
    if (text.empty() || text[0] == '#' || text[0] == ';' || text[0] == '[') continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value', got '" + text + "'");
    std::string value = trim(std::string_view(text).substr(eq + 1));
    // Trailing comments after the value.
    if (const auto hash = value.find_first_of("#;"); hash != std::string::npos) value = trim(value.substr(0, hash));
    apply(cfg, trim(std::string_view(text).substr(0, eq)), value, where);
  }
}

void require(const RunConfig& cfg, const std::vector<std::string>& keys) {
  for (const std::string& key : keys) {
    const std::optional<double> RunConfig::*field = nullptr;
    if (key == "gamma") field = &RunConfig::gamma;
    else if (key == "R") field = &RunConfig::R;
    else if (key == "mu") field = &RunConfig::mu;
    else if (key == "kappa") field = &RunConfig::kappa;
    else if (key == "v_minus") field = &RunConfig::v_minus;
    else if (key == "u_minus") field = &RunConfig::u_minus;
    else if (key == "theta_minus") field = &RunConfig::theta_minus;
    else if (key == "v_plus") field = &RunConfig::v_plus;
    else if (key == "u_plus") field = &RunConfig::u_plus;
    else if (key == "theta_plus") field = &RunConfig::theta_plus;
    if (field && !(cfg.*field)) {
      std::string flag = key;
      std::replace(flag.begin(), flag.end(), '_', '-');
      throw ConfigError("missing required field '" + key + "' (set it in the config file or with --" + flag + ")");
    }
  }
}

GasParams RunConfig::gas() const { return GasParams(*gamma, *R, *mu, *kappa); }

EndState RunConfig::left() const {
  if (!(*u_minus > 0.0))
    throw Error(ErrorCode::InvalidBoundary, "u- = " + std::to_string(*u_minus) + " is not an inflow boundary (need u- > 0)");
  const double v = v_minus ? *v_minus : *u_minus * *v_plus / *u_plus;
  if (!(v > 0.0))
    throw ConfigError("cannot derive v_minus from u_minus v_plus / u_plus = " + std::to_string(v) +
                      "; set v_minus explicitly");
  return EndState(v, *u_minus, *theta_minus);
}

EndState RunConfig::right() const { return EndState(*v_plus, *u_plus, *theta_plus); }

Tolerances RunConfig::tolerances() const { return {tol_flux, tol_mach, tol_member}; }

}  // namespace blayer::cli
