#pragma once

// key = value config files ('#' comments, optional double quotes around
// values). Every artifact the CLI writes echoes the effective config.

#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace proact {

class Config {
 public:
  /// Throws ParseError with the offending line number.
  static Config parse(std::string_view text);
  static Config load(const std::string& path);

  void set(const std::string& key, std::string value) { values_[key] = std::move(value); }
  bool has(const std::string& key) const { return values_.contains(key); }
  std::optional<std::string> get(const std::string& key) const;

  std::string get_string(const std::string& key, const std::string& fallback) const;
  /// Throws ParseError when present but not a number.
  double get_double(const std::string& key, double fallback) const;
  long long get_int(const std::string& key, long long fallback) const;

  const std::map<std::string, std::string>& values() const noexcept { return values_; }

  /// "key=value" lines, each prefixed with `prefix`.
  std::string echo(std::string_view prefix = "") const;

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace proact
