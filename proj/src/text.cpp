#include "proact/text.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>

namespace proact::text {

namespace {

bool is_word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0;
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

constexpr std::array<std::string_view, 38> kStopwords = {
    "a",    "an",   "the",  "is",   "it",    "he",    "she",  "they", "this", "that",
    "be",   "was",  "were", "are",  "do",    "doe",   "did",  "of",   "to",   "in",
    "on",   "at",   "by",   "for",  "with",  "and",   "or",   "his",  "her",  "its",
    "what", "why",  "who",  "how",  "there", "their", "some", "any"};

}  // namespace

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::vector<std::string> words(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (is_word_char(c)) {
      cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::string stem(std::string_view word) {
  std::string w = lower(word);
  auto strip = [&](std::size_t n) {
    if (w.size() >= n + 3) {
      w.resize(w.size() - n);
      return true;
    }
    return false;
  };
  if (ends_with(w, "ing")) {
    strip(3);
  } else if (ends_with(w, "ed")) {
    strip(2);
  } else if (ends_with(w, "es") &&
             (ends_with(w, "ses") || ends_with(w, "xes") || ends_with(w, "zes") ||
              ends_with(w, "ches") || ends_with(w, "shes"))) {
    strip(2);
  } else if (ends_with(w, "s") && !ends_with(w, "ss")) {
    strip(1);
  }
  if (w.size() > 3 && w.back() == 'e') w.pop_back();
  return w;
}

std::vector<std::string> stems(std::string_view s) {
  std::vector<std::string> out;
  for (const auto& w : words(s)) out.push_back(stem(w));
  return out;
}

std::set<std::string> content_stems(std::string_view s) {
  std::set<std::string> out;
  for (const auto& w : words(s)) {
    bool stop = false;
    for (auto sw : kStopwords) stop = stop || w == sw;
    if (!stop) out.insert(stem(w));
  }
  return out;
}

std::set<std::string> match_keys(std::string_view s) {
  std::set<std::string> out;
  for (const auto& w : words(s)) {
    bool stop = false;
    for (auto sw : kStopwords) stop = stop || w == sw;
    if (stop) continue;
    out.insert(w);
    out.insert(stem(w));
  }
  return out;
}

std::string canonical_phrase(std::string_view s) {
  auto ws = words(s);
  std::size_t first = 0;
  if (ws.size() > 1 && (ws[0] == "a" || ws[0] == "an" || ws[0] == "the")) first = 1;
  std::string out;
  for (std::size_t i = first; i < ws.size(); ++i) {
    if (!out.empty()) out.push_back(' ');
    out += ws[i];
  }
  return out;
}

std::string fixed6(double v) {
  if (v == 0.0) v = 0.0;  // no "-0.000000"
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  std::string out(buf);
  if (out == "-0.000000") out = "0.000000";
  return out;
}

std::string shortest(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::optional<std::vector<double>> parse_numbers(std::string_view s, std::size_t count) {
  std::vector<double> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    if (i == s.size()) break;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    std::string_view tok = s.substr(i, j - i);
    if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || ptr != tok.data() + tok.size() || !std::isfinite(v)) {
      return std::nullopt;
    }
    out.push_back(v);
    i = j;
  }
  if (out.size() != count) return std::nullopt;
  return out;
}

}  // namespace proact::text
