#pragma once

#include <cctype>
#include <cstdlib>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "twistlab/core.hpp"
#include "twistlab/report.hpp"

namespace twistlab {

// Raised for anything the caller got wrong before an experiment starts:
// unknown ids or parameters, malformed values.  The CLI maps it to exit 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ParamDef {
  std::string key;
  std::string kind;  // int | u64 | double | str | ilist | dlist
  std::string fallback;
  std::string help;
};

namespace detail {

inline std::string env_name(const std::string& key) {
  std::string out = "TWISTLAB_";
  for (char c : key) out += c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      parts.push_back(cur);
      cur.clear();
    } else if (!std::isspace(static_cast<unsigned char>(c))) {
      cur += c;
    }
  }
  parts.push_back(cur);
  return parts;
}

inline double parse_double(const std::string& key, const std::string& s) {
  if (s == "inf") return kInf;
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("parameter '" + key + "': cannot parse '" + s + "' as a number");
  }
}

inline long long parse_int(const std::string& key, const std::string& s) {
  try {
    std::size_t used = 0;
    long long v = std::stoll(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("parameter '" + key + "': cannot parse '" + s + "' as an integer");
  }
}

}  // namespace detail

// Resolved key/value store with typed accessors.  Values arrive as strings
// from the CLI, the TWISTLAB_* environment, or schema defaults, in that order
// of precedence.
struct Config {
  std::vector<ParamDef> schema;
  std::map<std::string, std::string> raw;

  const std::string& str(const std::string& key) const {
    auto it = raw.find(key);
    if (it == raw.end()) throw ConfigError("parameter '" + key + "' is not in the schema");
    return it->second;
  }
  long long integer(const std::string& key) const { return detail::parse_int(key, str(key)); }
  std::uint64_t u64(const std::string& key) const {
    long long v = integer(key);
    if (v < 0) throw ConfigError("parameter '" + key + "': must be nonnegative");
    return static_cast<std::uint64_t>(v);
  }
  double number(const std::string& key) const { return detail::parse_double(key, str(key)); }
  std::vector<int> int_list(const std::string& key) const {
    std::vector<int> out;
    for (const auto& p : detail::split_list(str(key)))
      out.push_back(static_cast<int>(detail::parse_int(key, p)));
    return out;
  }
  std::vector<double> double_list(const std::string& key) const {
    std::vector<double> out;
    for (const auto& p : detail::split_list(str(key))) out.push_back(detail::parse_double(key, p));
    return out;
  }
  std::uint64_t seed() const { return u64("seed"); }

  // typed echo in schema order, embedded in every report
  Json echo() const {
    Json j = Json::object();
    for (const auto& def : schema) {
      const std::string& s = raw.at(def.key);
      if (def.kind == "int") {
        j[def.key] = detail::parse_int(def.key, s);
      } else if (def.kind == "u64") {
        j[def.key] = static_cast<std::uint64_t>(detail::parse_int(def.key, s));
      } else if (def.kind == "double") {
        double v = detail::parse_double(def.key, s);
        if (v == kInf)
          j[def.key] = "inf";
        else
          j[def.key] = v;
      } else if (def.kind == "ilist") {
        j[def.key] = int_list(def.key);
      } else if (def.kind == "dlist") {
        j[def.key] = double_list(def.key);
      } else {
        j[def.key] = s;
      }
    }
    return j;
  }
};

// Precedence: explicit overrides (CLI) > TWISTLAB_<KEY> environment > schema
// fallback.  Unknown override keys are rejected.
inline Config resolve_config(const std::vector<ParamDef>& schema,
                             const std::map<std::string, std::string>& overrides,
                             bool use_env = true) {
  Config cfg;
  cfg.schema = schema;
  for (const auto& [key, value] : overrides) {
    bool known = false;
    for (const auto& def : schema) known = known || def.key == key;
    if (!known) throw ConfigError("unknown parameter '--" + key + "'");
    (void)value;
  }
  for (const auto& def : schema) {
    auto it = overrides.find(def.key);
    if (it != overrides.end()) {
      cfg.raw[def.key] = it->second;
      continue;
    }
    if (use_env) {
      if (const char* env = std::getenv(detail::env_name(def.key).c_str())) {
        cfg.raw[def.key] = env;
        continue;
      }
    }
    cfg.raw[def.key] = def.fallback;
  }
  // surface malformed values (from any source) before the experiment runs
  for (const auto& def : schema) {
    if (def.kind == "int" || def.kind == "u64") cfg.integer(def.key);
    if (def.kind == "double") cfg.number(def.key);
    if (def.kind == "ilist") cfg.int_list(def.key);
    if (def.kind == "dlist") cfg.double_list(def.key);
  }
  return cfg;
}

}  // namespace twistlab
