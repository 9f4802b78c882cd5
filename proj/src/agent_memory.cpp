#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <unordered_map>

#include "proact/agents.hpp"
#include "proact/text.hpp"

namespace proact::agents {

namespace fg = function_gym;

FeatureVector make_features(std::span<const Turn> history, int budget_T, bool hypothesis_unique) {
  const double T = budget_T > 0 ? budget_T : 1;
  double n_env = 0, n_user = 0;
  for (const auto& t : history) (is_user_involved(t.action.kind) ? n_user : n_env) += 1.0;
  const bool last_wrong = !history.empty() && history.back().action.kind == ActionKind::Answer &&
                          history.back().raw_reward <= 0.0;
  FeatureVector phi(kNumFeatures);
  phi << 1.0, static_cast<double>(history.size()) / T, n_env / T, n_user / T,
      hypothesis_unique ? 1.0 : 0.0, last_wrong ? 1.0 : 0.0;
  return phi;
}

// ---------------------------------------------------------------------------

namespace {

bool same_value(double a, double b) {
  if (std::isnan(a) || std::isnan(b)) return std::isnan(a) && std::isnan(b);
  return std::abs(a - b) <= 1e-6 * std::max(1.0, std::abs(b));
}

// Coarse bucket key for scoring candidate probes.
std::int64_t bucket(double v) {
  if (std::isnan(v)) return std::numeric_limits<std::int64_t>::min();
  if (std::abs(v) <= 1e9) return std::llround(v * 1e6);
  if (std::abs(v) <= 9e18) return std::llround(v) | (std::int64_t{1} << 62);
  return v > 0 ? std::numeric_limits<std::int64_t>::max() : std::numeric_limits<std::int64_t>::min() + 1;
}

std::optional<fg::Input> parse_input(std::string_view s) {
  auto nums = text::parse_numbers(s, 4);
  if (!nums) return std::nullopt;
  return fg::Input{(*nums)[0], (*nums)[1], (*nums)[2], (*nums)[3]};
}

double eval_or_nan(const fg::ExprTree& h, const fg::Input& x) {
  return h.try_eval(x).value_or(std::numeric_limits<double>::quiet_NaN());
}

}  // namespace

FunctionMemory::FunctionMemory(int max_depth) : max_depth_(max_depth) {}

void FunctionMemory::update(std::span<const Turn> history) {
  for (; seen_ < history.size(); ++seen_) {
    const Turn& t = history[seen_];
    switch (t.action.kind) {
      case ActionKind::Search: {
        constexpr std::string_view prefix = "test input: ";
        if (t.observation.starts_with(prefix)) {
          test_input_ = parse_input(std::string_view(t.observation).substr(prefix.size()));
          refresh_values();
        }
        break;
      }
      case ActionKind::Query: {
        auto x = parse_input(t.action.content);
        if (!x) break;
        asked_.insert(fg::format_input(*x));
        if (t.observation == fg::kDivisionByZeroObservation) {
          add_probe({*x, std::numeric_limits<double>::quiet_NaN()});
        } else if (auto y = text::parse_numbers(t.observation, 1)) {
          add_probe({*x, (*y)[0]});
        }
        break;
      }
      case ActionKind::Answer: {
        if (t.observation != "incorrect") break;
        auto v = text::parse_numbers(t.action.content, 1);
        if (!v) break;
        rejected_.push_back((*v)[0]);
        if (!built_ || !test_input_) break;
        std::vector<fg::ExprTree> keep;
        std::vector<double> vals;
        for (std::size_t i = 0; i < hypotheses_.size(); ++i) {
          if (same_value(test_values_[i], (*v)[0])) continue;
          keep.push_back(std::move(hypotheses_[i]));
          vals.push_back(test_values_[i]);
        }
        hypotheses_ = std::move(keep);
        test_values_ = std::move(vals);
        if (hypotheses_.empty()) rebuild();
        break;
      }
    }
  }
}

void FunctionMemory::add_probe(const fg::Probe& p) {
  probes_.push_back(p);
  if (!built_) {
    rebuild();
    return;
  }
  std::vector<fg::ExprTree> keep;
  for (auto& h : hypotheses_) {
    if (fg::output_matches(h.try_eval(p.input), p.output)) keep.push_back(std::move(h));
  }
  hypotheses_ = std::move(keep);
  if (hypotheses_.empty()) {
    rebuild();
  } else {
    refresh_values();
  }
}

// Re-derives the hypothesis set from every observation on record. Called on
// the first probe and again whenever the running set contradicts itself.
void FunctionMemory::rebuild() {
  if (built_) ++rebuilds_;
  built_ = true;
  hypotheses_ = fg::enumerate_hypotheses(probes_, max_depth_);
  refresh_values();
  if (!test_input_ || rejected_.empty()) return;
  std::vector<fg::ExprTree> keep;
  std::vector<double> vals;
  for (std::size_t i = 0; i < hypotheses_.size(); ++i) {
    bool bad = false;
    for (double r : rejected_) bad = bad || same_value(test_values_[i], r);
    if (bad) continue;
    keep.push_back(std::move(hypotheses_[i]));
    vals.push_back(test_values_[i]);
  }
  hypotheses_ = std::move(keep);
  test_values_ = std::move(vals);
}

void FunctionMemory::refresh_values() {
  test_values_.clear();
  if (!test_input_ || !built_) return;
  test_values_.reserve(hypotheses_.size());
  for (const auto& h : hypotheses_) test_values_.push_back(eval_or_nan(h, *test_input_));
}

bool FunctionMemory::unique() const {
  if (!built_ || !test_input_ || hypotheses_.empty()) return false;
  if (std::isnan(test_values_.front())) return false;
  return std::all_of(test_values_.begin(), test_values_.end(),
                     [&](double v) { return same_value(v, test_values_.front()); });
}

std::optional<double> FunctionMemory::best_answer() const {
  std::vector<double> vals;
  for (double v : test_values_) {
    if (std::isfinite(v)) vals.push_back(v);
  }
  if (vals.empty()) return std::nullopt;
  std::sort(vals.begin(), vals.end());
  double best = vals.front();
  std::size_t best_count = 0;
  for (std::size_t i = 0; i < vals.size();) {
    std::size_t j = i;
    while (j < vals.size() && same_value(vals[j], vals[i])) ++j;
    if (j - i > best_count) {
      best_count = j - i;
      best = vals[i];
    }
    i = j;
  }
  return best;
}

bool FunctionMemory::usable(const fg::Input& x) const {
  if (test_input_ && x == *test_input_) return false;
  return !asked_.contains(fg::format_input(x));
}

std::optional<fg::Input> FunctionMemory::next_canonical() const {
  for (const auto& x : fg::canonical_probes()) {
    if (usable(x)) return x;
  }
  return std::nullopt;
}

fg::Input FunctionMemory::random_probe(Rng& rng) const {
  fg::Input x{};
  for (int attempt = 0; attempt < 100; ++attempt) {
    for (auto& v : x) v = static_cast<double>(rng.uniform_int(-5, 5));
    if (usable(x)) break;
  }
  return x;
}

std::optional<fg::Input> FunctionMemory::informative_probe(Rng& rng) const {
  std::vector<fg::Input> cands;
  for (const auto& x : fg::canonical_probes()) {
    if (usable(x)) cands.push_back(x);
  }
  for (int i = 0; i < 40; ++i) {
    fg::Input x{};
    for (auto& v : x) v = static_cast<double>(rng.uniform_int(-5, 5));
    if (usable(x)) cands.push_back(x);
  }
  if (test_input_) {
    for (int k = 0; k < 4; ++k) {
      for (double d : {-1.0, 1.0}) {
        fg::Input x = *test_input_;
        x[static_cast<std::size_t>(k)] += d;
        if (usable(x)) cands.push_back(x);
      }
    }
  }
  if (cands.empty()) return std::nullopt;
  if (!built_ || hypotheses_.empty()) return cands.front();

  // Sample of hypotheses with their bucketed test values.
  constexpr std::size_t kMaxSample = 4096;
  const std::size_t stride = std::max<std::size_t>(1, hypotheses_.size() / kMaxSample);
  std::vector<std::size_t> sample;
  for (std::size_t i = 0; i < hypotheses_.size(); i += stride) sample.push_back(i);
  std::vector<std::int64_t> test_key(sample.size(), 0);
  if (test_input_) {
    for (std::size_t s = 0; s < sample.size(); ++s) test_key[s] = bucket(test_values_[sample[s]]);
  } else {
    // Without a test input, score pure splitting power.
    for (std::size_t s = 0; s < sample.size(); ++s) test_key[s] = static_cast<std::int64_t>(s);
  }

  auto wrong_mass = [](std::vector<std::pair<std::int64_t, std::int64_t>>& pairs) {
    std::sort(pairs.begin(), pairs.end());
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < pairs.size();) {
      std::size_t j = i, best_run = 0;
      while (j < pairs.size() && pairs[j].first == pairs[i].first) {
        std::size_t k = j;
        while (k < pairs.size() && pairs[k] == pairs[j]) ++k;
        best_run = std::max(best_run, k - j);
        j = k;
      }
      wrong += (j - i) - best_run;
      i = j;
    }
    return wrong;
  };

  std::vector<std::pair<std::int64_t, std::int64_t>> pairs(sample.size());
  for (std::size_t s = 0; s < sample.size(); ++s) pairs[s] = {0, test_key[s]};
  const std::size_t baseline = wrong_mass(pairs);

  std::size_t best_wrong = baseline;
  std::optional<fg::Input> best;
  for (const auto& x : cands) {
    for (std::size_t s = 0; s < sample.size(); ++s) {
      pairs[s] = {bucket(eval_or_nan(hypotheses_[sample[s]], x)), test_key[s]};
    }
    const std::size_t w = wrong_mass(pairs);
    if (w < best_wrong) {
      best_wrong = w;
      best = x;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------

TelepathyMemory::TelepathyMemory(std::shared_ptr<const telepathy::EntityKB> kb) : kb_(std::move(kb)) {
  recompute();
}

void TelepathyMemory::update(std::span<const Turn> history) {
  for (; seen_ < history.size(); ++seen_) {
    const Turn& t = history[seen_];
    if (t.action.kind == ActionKind::Query) {
      auto tag = telepathy::match_attribute(*kb_, t.action.content);
      if (!tag) continue;
      asked_.insert(*tag);
      if (t.observation == "Yes") facts_[*tag] = true;
      if (t.observation == "No") facts_[*tag] = false;
    } else if (t.action.kind == ActionKind::Answer && t.observation.starts_with("Incorrect")) {
      guessed_.insert(text::canonical_phrase(t.action.content));
      std::set<std::string> shared;
      constexpr std::string_view marker = "The target is also: ";
      if (auto pos = t.observation.find(marker); pos != std::string::npos) {
        std::string rest = t.observation.substr(pos + marker.size());
        std::size_t start = 0;
        while (start <= rest.size()) {
          std::size_t comma = rest.find(", ", start);
          std::string item = rest.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
          if (!item.empty()) shared.insert(text::trim(item));
          if (comma == std::string::npos) break;
          start = comma + 2;
        }
      }
      for (const auto& a : telepathy::mentioned_attributes(*kb_, t.action.content)) {
        facts_[a] = shared.contains(a);
      }
    }
  }
  recompute();
}

void TelepathyMemory::recompute() {
  candidates_.clear();
  std::vector<int> agree(kb_->entities.size(), 0);
  int best = -1;
  for (std::size_t i = 0; i < kb_->entities.size(); ++i) {
    const auto& e = kb_->entities[i];
    if (guessed_.contains(e.name)) continue;
    for (const auto& [tag, val] : facts_) agree[i] += (e.attributes.contains(tag) == val) ? 1 : 0;
    best = std::max(best, agree[i]);
    if (agree[i] == static_cast<int>(facts_.size())) candidates_.push_back(i);
  }
  if (!candidates_.empty() || best < 0) return;
  // Contradictory evidence: keep the entities that fit the most facts.
  ++rebuilds_;
  for (std::size_t i = 0; i < kb_->entities.size(); ++i) {
    if (!guessed_.contains(kb_->entities[i].name) && agree[i] == best) candidates_.push_back(i);
  }
}

std::optional<std::string> TelepathyMemory::best_split_tag() const {
  std::vector<std::string> tags;
  for (const auto& tag : kb_->vocabulary) {
    if (!asked_.contains(tag) && !facts_.contains(tag)) tags.push_back(tag);
  }
  const auto& ents = kb_->entities;
  auto splits = [&](const std::string& tag, const std::vector<std::size_t>& idx) {
    std::size_t yes = 0;
    for (auto i : idx) yes += ents[i].attributes.contains(tag) ? 1 : 0;
    return std::pair{yes, idx.size() - yes};
  };

  if (candidates_.size() <= 1) return std::nullopt;
  if (candidates_.size() > 64) {
    std::optional<std::string> best;
    std::size_t best_gap = candidates_.size();
    for (const auto& tag : tags) {
      auto [y, n] = splits(tag, candidates_);
      if (y == 0 || n == 0) continue;
      const std::size_t gap = y > n ? y - n : n - y;
      if (gap < best_gap) {
        best_gap = gap;
        best = tag;
      }
    }
    return best;
  }

  // Exact minimax over candidate subsets.
  std::vector<std::uint64_t> tag_mask(tags.size(), 0);
  for (std::size_t k = 0; k < tags.size(); ++k) {
    for (std::size_t c = 0; c < candidates_.size(); ++c) {
      if (ents[candidates_[c]].attributes.contains(tags[k])) tag_mask[k] |= std::uint64_t{1} << c;
    }
  }
  std::unordered_map<std::uint64_t, int> memo;
  auto cost = [&](auto&& self, std::uint64_t mask) -> int {
    if (std::popcount(mask) <= 1) return 0;
    if (auto it = memo.find(mask); it != memo.end()) return it->second;
    int best = std::numeric_limits<int>::max();
    for (auto tm : tag_mask) {
      const std::uint64_t y = mask & tm, n = mask & ~tm;
      if (y == 0 || n == 0) continue;
      best = std::min(best, 1 + std::max(self(self, y), self(self, n)));
    }
    if (best == std::numeric_limits<int>::max()) best = 1000;  // indistinguishable
    memo[mask] = best;
    return best;
  };
  const std::uint64_t all =
      candidates_.size() == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << candidates_.size()) - 1;
  std::optional<std::string> best;
  int best_cost = std::numeric_limits<int>::max();
  for (std::size_t k = 0; k < tags.size(); ++k) {
    const std::uint64_t y = all & tag_mask[k], n = all & ~tag_mask[k];
    if (y == 0 || n == 0) continue;
    const int c = std::max(cost(cost, y), cost(cost, n));
    if (c < best_cost) {
      best_cost = c;
      best = tags[k];
    }
  }
  return best;
}

std::optional<std::string> TelepathyMemory::random_unasked_tag(Rng& rng) const {
  std::vector<std::string> tags;
  for (const auto& tag : kb_->vocabulary) {
    if (!asked_.contains(tag)) tags.push_back(tag);
  }
  if (tags.empty()) return std::nullopt;
  return tags[rng.index(tags.size())];
}

const telepathy::Entity* TelepathyMemory::best_candidate() const {
  if (candidates_.empty()) return nullptr;
  return &kb_->entities[candidates_.front()];
}

// ---------------------------------------------------------------------------

TurtleMemory::TurtleMemory(std::shared_ptr<const turtle::StoryPack> stories)
    : stories_(std::move(stories)) {}

void TurtleMemory::begin(std::string_view surface) {
  axes_.clear();
  asked_.clear();
  confirmed_.clear();
  rejected_.clear();
  last_submitted_.clear();
  new_since_answer_ = 0;
  seen_ = 0;
  const std::string s = text::trim(surface);
  for (const auto& story : *stories_) {
    if (text::trim(story.surface) != s) continue;
    for (const auto& q : story.qa_table) axes_.push_back(q.stems);
    break;
  }
}

std::string TurtleMemory::question(std::size_t axis) const {
  std::string q = "Is it about ";
  bool first = true;
  for (const auto& s : axes_.at(axis)) {
    if (!first) q += " and ";
    q += s;
    first = false;
  }
  return q + "?";
}

std::optional<std::size_t> TurtleMemory::next_axis() const {
  for (std::size_t i = 0; i < axes_.size(); ++i) {
    if (asked_.contains(i)) continue;
    const bool known = std::all_of(axes_[i].begin(), axes_[i].end(), [&](const std::string& s) {
      return std::find(confirmed_.begin(), confirmed_.end(), s) != confirmed_.end();
    });
    if (!known) return i;
  }
  return std::nullopt;
}

std::optional<std::size_t> TurtleMemory::random_axis(Rng& rng) const {
  std::vector<std::size_t> open;
  for (std::size_t i = 0; i < axes_.size(); ++i) {
    if (!asked_.contains(i)) open.push_back(i);
  }
  if (open.empty()) return std::nullopt;
  return open[rng.index(open.size())];
}

void TurtleMemory::update(std::span<const Turn> history) {
  for (; seen_ < history.size(); ++seen_) {
    const Turn& t = history[seen_];
    if (t.action.kind == ActionKind::Answer) {
      last_submitted_ = t.action.content;
      new_since_answer_ = 0;
      continue;
    }
    if (t.action.kind != ActionKind::Query) continue;
    for (std::size_t i = 0; i < axes_.size(); ++i) {
      if (question(i) != t.action.content) continue;
      asked_.insert(i);
      if (t.observation == "Yes") {
        for (const auto& s : axes_[i]) {
          if (std::find(confirmed_.begin(), confirmed_.end(), s) == confirmed_.end()) {
            confirmed_.push_back(s);
            ++new_since_answer_;
          }
        }
      } else if (t.observation == "No") {
        rejected_.insert(axes_[i].begin(), axes_[i].end());
      }
      break;
    }
  }
}

std::string TurtleMemory::compose_answer() const {
  if (confirmed_.empty()) return {};
  std::string out = "The explanation involves ";
  for (std::size_t i = 0; i < confirmed_.size(); ++i) {
    if (i > 0) out += ", ";
    out += confirmed_[i];
  }
  return out + ".";
}

bool TurtleMemory::pending() const {
  return !confirmed_.empty() && compose_answer() != last_submitted_;
}

}  // namespace proact::agents
