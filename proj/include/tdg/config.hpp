#pragma once

// Flat key-value configuration files with [sections]:
//
//   # comment
//   [env]
//   robot = cart1d
//   snr_db = 38
//
// Keys are addressed as "section.key". Sections may repeat a name with a
// qualifier, e.g. "[variant her0]", which the reader keeps in file order.

#include <cctype>
#include <cmath>
#include <limits>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace tdg::config {

struct Section {
  std::string name;       // "env", "variant"
  std::string qualifier;  // text after the name, e.g. "her0"
  std::vector<std::pair<std::string, std::string>> entries;
};

inline std::string trim(std::string s) {
  auto issp = [](unsigned char c) { return std::isspace(c) != 0; };
  while (!s.empty() && issp(static_cast<unsigned char>(s.back()))) s.pop_back();
  std::size_t i = 0;
  while (i < s.size() && issp(static_cast<unsigned char>(s[i]))) ++i;
  return s.substr(i);
}

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& where, int line, const std::string& what)
      : std::runtime_error(where + ":" + std::to_string(line) + ": " + what) {}
};

inline std::vector<Section> parse(std::istream& in, const std::string& where = "<config>") {
  std::vector<Section> out;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError(where, line_no, "unterminated section header");
      const std::string head = trim(line.substr(1, line.size() - 2));
      if (head.empty()) throw ParseError(where, line_no, "empty section name");
      const auto sp = head.find_first_of(" \t");
      Section s;
      s.name = head.substr(0, sp);
      if (sp != std::string::npos) s.qualifier = trim(head.substr(sp));
      out.push_back(std::move(s));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(where, line_no, "expected 'key = value'");
    if (out.empty()) throw ParseError(where, line_no, "key outside of any section");
    std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ParseError(where, line_no, "empty key");
    out.back().entries.emplace_back(std::move(key), trim(line.substr(eq + 1)));
  }
  return out;
}

inline std::vector<Section> parse_string(const std::string& text) {
  std::istringstream in(text);
  return parse(in);
}

inline std::vector<Section> parse_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open config '" + path + "'");
  return parse(f, path);
}

inline bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw std::invalid_argument("expected a boolean, got '" + v + "'");
}

inline double parse_double(const std::string& v) {
  if (v == "inf" || v == "+inf") return std::numeric_limits<double>::infinity();
  std::size_t used = 0;
  const double d = std::stod(v, &used);
  if (used != v.size()) throw std::invalid_argument("expected a number, got '" + v + "'");
  return d;
}

inline long long parse_int(const std::string& v) {
  std::size_t used = 0;
  const long long i = std::stoll(v, &used);
  if (used != v.size()) throw std::invalid_argument("expected an integer, got '" + v + "'");
  return i;
}

// Shortest text that reads back to the same double.
inline std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  for (int prec = 1; prec <= 17; ++prec) {
    std::ostringstream os;
    os.precision(prec);
    os << v;
    if (std::stod(os.str()) == v) return os.str();
  }
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace tdg::config
