#include "proact/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "proact/errors.hpp"
#include "proact/text.hpp"

namespace proact {

Config Config::parse(std::string_view src) {
  Config cfg;
  std::istringstream is{std::string(src)};
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    std::string s = text::trim(line);
    if (s.empty() || s.front() == '#') continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos) {
      throw ParseError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    std::string key = text::trim(s.substr(0, eq));
    std::string value = text::trim(s.substr(eq + 1));
    if (key.empty()) throw ParseError("config line " + std::to_string(lineno) + ": empty key");
    for (char c : key) {
      if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.')) {
        throw ParseError("config line " + std::to_string(lineno) + ": bad key '" + key + "'");
      }
    }
    if (!value.empty() && value.front() == '"') {
      const auto close = value.find('"', 1);
      if (close == std::string::npos) {
        throw ParseError("config line " + std::to_string(lineno) + ": unterminated quote");
      }
      const std::string rest = text::trim(value.substr(close + 1));
      if (!rest.empty() && rest.front() != '#') {
        throw ParseError("config line " + std::to_string(lineno) + ": text after closing quote");
      }
      value = value.substr(1, close - 1);
    } else if (auto hash = value.find(" #"); hash != std::string::npos) {
      value = text::trim(value.substr(0, hash));
    }
    cfg.values_[key] = value;
  }
  return cfg;
}

Config Config::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::optional<std::string> Config::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  return get(key).value_or(fallback);
}

double Config::get_double(const std::string& key, double fallback) const {
  auto v = get(key);
  if (!v) return fallback;
  auto nums = text::parse_numbers(*v, 1);
  if (!nums) throw ParseError("config key " + key + " is not a number: '" + *v + "'");
  return (*nums)[0];
}

long long Config::get_int(const std::string& key, long long fallback) const {
  auto v = get(key);
  if (!v) return fallback;
  long long out = 0;
  auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
  if (ec != std::errc{} || ptr != v->data() + v->size()) {
    throw ParseError("config key " + key + " is not an integer: '" + *v + "'");
  }
  return out;
}

std::string Config::echo(std::string_view prefix) const {
  std::string out;
  for (const auto& [k, v] : values_) {
    out += prefix;
    out += k + "=" + v + "\n";
  }
  return out;
}

}  // namespace proact
