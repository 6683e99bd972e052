#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "twistlab/core.hpp"

namespace twistlab {

using Json = nlohmann::ordered_json;

struct CheckRecord {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool pass = false;
  std::string anchor;
};

// One experiment run: configuration echo, named checks, an optional table for
// CSV emission.  Everything except `seconds` is a pure function of the
// configuration, so reruns produce byte-identical artifacts modulo that field.
struct Report {
  std::string id;
  Json config = Json::object();
  std::vector<CheckRecord> checks;
  double seconds = 0.0;

  std::vector<std::string> table_header;
  std::vector<std::vector<std::string>> table_rows;

  bool pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }

  void check(std::string name, double value, double threshold, bool pass_flag,
             std::string anchor) {
    checks.push_back({std::move(name), value, threshold, pass_flag, std::move(anchor)});
  }
  // convenience forms for the two dominant comparison directions
  void check_le(std::string name, double value, double threshold, std::string anchor) {
    check(std::move(name), value, threshold, value <= threshold, std::move(anchor));
  }
  void check_ge(std::string name, double value, double threshold, std::string anchor) {
    check(std::move(name), value, threshold, value >= threshold, std::move(anchor));
  }
};

// scientific notation, 12 significant digits, '.' separator, locale-free
inline std::string format_number(double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::scientific, 11);
  return std::string(buf, res.ptr);
}

inline Json report_json(const Report& r) {
  Json j = Json::object();
  j["id"] = r.id;
  j["config"] = r.config;
  Json checks = Json::array();
  for (const auto& c : r.checks) {
    Json jc = Json::object();
    jc["name"] = c.name;
    jc["value"] = c.value;
    jc["threshold"] = c.threshold;
    jc["pass"] = c.pass;
    jc["anchor"] = c.anchor;
    checks.push_back(std::move(jc));
  }
  j["checks"] = std::move(checks);
  j["pass"] = r.pass();
  j["seconds"] = r.seconds;
  return j;
}

inline std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  q += '"';
  return q;
}

inline std::string report_csv(const Report& r) {
  std::string out;
  for (std::size_t i = 0; i < r.table_header.size(); ++i) {
    if (i) out += ',';
    out += csv_cell(r.table_header[i]);
  }
  out += '\n';
  for (const auto& row : r.table_rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += csv_cell(row[i]);
    }
    out += '\n';
  }
  return out;
}

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  require(os.good(), "cannot open for writing: " + path);
  os << content;
  require(os.good(), "write failed: " + path);
}

}  // namespace twistlab
