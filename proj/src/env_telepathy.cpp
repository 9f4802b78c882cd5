#include "proact/env_telepathy.hpp"

#include <nlohmann/json.hpp>
#include <array>
#include <stdexcept>
#include <vector>

#include "proact/errors.hpp"
#include "proact/rng.hpp"
#include "proact/text.hpp"

namespace proact::telepathy {

namespace {

struct PoolEntry {
  const char* name;
  unsigned code;  // bit 3..0 = the four coding attributes
  std::vector<const char*> extras;
};

struct Pool {
  std::array<const char*, 4> code_tags;  // most significant first
  std::vector<PoolEntry> entries;
};

const Pool& animal_pool() {
  static const Pool pool{
      {"mammal", "large", "aquatic", "domesticated"},
      {
          {"eagle", 0b0000, {"feathered", "eggs", "carnivore", "flying"}},
          {"chicken", 0b0001, {"feathered", "eggs"}},
          {"frog", 0b0010, {"eggs", "carnivore"}},
          {"goldfish", 0b0011, {"scaly", "eggs"}},
          {"komodo dragon", 0b0100, {"scaly", "eggs", "carnivore"}},
          {"ostrich", 0b0101, {"feathered", "eggs"}},
          {"shark", 0b0110, {"scaly", "carnivore"}},
          {"sturgeon", 0b0111, {"scaly", "eggs"}},
          {"fox", 0b1000, {"furry", "carnivore"}},
          {"cat", 0b1001, {"furry", "carnivore"}},
          {"otter", 0b1010, {"furry", "carnivore"}},
          {"mink", 0b1011, {"furry", "carnivore"}},
          {"elephant", 0b1100, {"herbivore"}},
          {"horse", 0b1101, {"furry", "herbivore"}},
          {"whale", 0b1110, {"carnivore"}},
          {"dolphin", 0b1111, {"carnivore"}},
      }};
  return pool;
}

const Pool& object_pool() {
  static const Pool pool{
      {"electronic", "large", "wheeled", "outdoor"},
      {
          {"book", 0b0000, {"portable"}},
          {"umbrella", 0b0001, {"portable", "fabric", "metal"}},
          {"office chair", 0b0010, {"metal", "fabric"}},
          {"skateboard", 0b0011, {"wooden", "portable"}},
          {"wardrobe", 0b0100, {"wooden"}},
          {"tent", 0b0101, {"fabric"}},
          {"hospital bed", 0b0110, {"metal"}},
          {"horse carriage", 0b0111, {"wooden"}},
          {"smartphone", 0b1000, {"screen", "portable"}},
          {"flashlight", 0b1001, {"portable", "metal"}},
          {"robot vacuum", 0b1010, {"motorized"}},
          {"electric scooter", 0b1011, {"motorized", "metal"}},
          {"refrigerator", 0b1100, {"metal"}},
          {"wind turbine", 0b1101, {"metal", "motorized"}},
          {"server rack", 0b1110, {"metal"}},
          {"car", 0b1111, {"screen", "motorized", "metal"}},
      }};
  return pool;
}

bool contains_phrase(const std::vector<std::string>& haystack, const std::vector<std::string>& needle) {
  if (needle.empty() || needle.size() > haystack.size()) return false;
  for (std::size_t i = 0; i + needle.size() <= haystack.size(); ++i) {
    bool ok = true;
    for (std::size_t j = 0; j < needle.size() && ok; ++j) ok = haystack[i + j] == needle[j];
    if (ok) return true;
  }
  return false;
}

}  // namespace

const Entity* EntityKB::find(std::string_view canonical_name) const {
  for (const auto& e : entities) {
    if (e.name == canonical_name) return &e;
  }
  return nullptr;
}

void validate(const EntityKB& kb) {
  if (kb.entities.size() < kMinEntities) {
    throw std::invalid_argument("knowledge base needs at least 16 entities");
  }
  std::set<std::string> names;
  std::set<std::set<std::string>> signatures;
  for (const auto& e : kb.entities) {
    if (e.name.empty() || e.name != text::canonical_phrase(e.name)) {
      throw std::invalid_argument("entity name is not canonical: '" + e.name + "'");
    }
    if (!names.insert(e.name).second) throw std::invalid_argument("duplicate entity " + e.name);
    for (const auto& a : e.attributes) {
      if (!kb.vocabulary.contains(a)) {
        throw std::invalid_argument("attribute '" + a + "' of " + e.name + " not in vocabulary");
      }
    }
    if (!signatures.insert(e.attributes).second) {
      throw std::invalid_argument("entity " + e.name + " duplicates another attribute set");
    }
  }
}

EntityKB build_default_kb(std::uint64_t seed) {
  const Pool& pool = (seed % 2 == 0) ? animal_pool() : object_pool();
  EntityKB kb;
  for (const auto& p : pool.entries) {
    Entity e;
    e.name = p.name;
    for (int b = 0; b < 4; ++b) {
      if (p.code & (1u << (3 - b))) e.attributes.insert(pool.code_tags[static_cast<std::size_t>(b)]);
    }
    for (const char* x : p.extras) e.attributes.insert(x);
    kb.vocabulary.insert(e.attributes.begin(), e.attributes.end());
    kb.entities.push_back(std::move(e));
  }
  for (const char* t : pool.code_tags) kb.vocabulary.insert(t);
  Rng rng(derive_seed(seed, "telepathy-kb", 0));
  rng.shuffle(kb.entities.begin(), kb.entities.end());
  return kb;
}

EntityKB kb_from_json(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("knowledge base is not JSON: ") + e.what());
  }
  EntityKB kb;
  try {
    for (const auto& ej : j.at("entities")) {
      Entity e;
      e.name = text::canonical_phrase(ej.at("name").get<std::string>());
      for (const auto& a : ej.at("attributes")) {
        auto tag = text::lower(a.get<std::string>());
        e.attributes.insert(tag);
        kb.vocabulary.insert(tag);
      }
      kb.entities.push_back(std::move(e));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed knowledge base: ") + e.what());
  }
  validate(kb);
  return kb;
}

std::string kb_to_json(const EntityKB& kb) {
  nlohmann::ordered_json j;
  j["entities"] = nlohmann::ordered_json::array();
  for (const auto& e : kb.entities) {
    nlohmann::ordered_json ej;
    ej["name"] = e.name;
    ej["attributes"] = std::vector<std::string>(e.attributes.begin(), e.attributes.end());
    j["entities"].push_back(std::move(ej));
  }
  return j.dump(2);
}

std::optional<std::string> match_attribute(const EntityKB& kb, std::string_view content) {
  const auto stems = text::match_keys(content);
  for (const auto& tag : kb.vocabulary) {
    if (stems.contains(text::stem(tag))) return tag;
  }
  return std::nullopt;
}

std::set<std::string> mentioned_attributes(const EntityKB& kb, std::string_view content) {
  std::set<std::string> out;
  const auto stems = text::match_keys(content);
  for (const auto& tag : kb.vocabulary) {
    if (stems.contains(text::stem(tag))) out.insert(tag);
  }
  const auto ws = text::words(content);
  for (const auto& e : kb.entities) {
    if (contains_phrase(ws, text::words(e.name))) out.insert(e.attributes.begin(), e.attributes.end());
  }
  return out;
}

std::string question_for(std::string_view tag) { return "Is it " + std::string(tag) + "?"; }

TelepathyGym::TelepathyGym(std::shared_ptr<const EntityKB> kb) : kb_(std::move(kb)) {
  if (!kb_) throw std::invalid_argument("TelepathyGym needs a knowledge base");
  validate(*kb_);
}

std::string TelepathyGym::intro() {
  return "Guess the hidden entity. action: ask a yes/no question about one attribute; "
         "search: lists the attribute vocabulary; answer: name the entity.";
}

std::string TelepathyGym::reset(std::uint64_t seed) {
  seed_ = seed;
  Rng rng(derive_seed(seed, "telepathy-target", 0));
  target_ = rng.index(kb_->entities.size());
  return intro();
}

const Entity& TelepathyGym::target() const { return kb_->entities[target_]; }

void TelepathyGym::set_target(std::string_view name, std::uint64_t seed) {
  for (std::size_t i = 0; i < kb_->entities.size(); ++i) {
    if (kb_->entities[i].name == name) {
      target_ = i;
      seed_ = seed;
      return;
    }
  }
  throw std::invalid_argument("unknown entity " + std::string(name));
}

StepResult TelepathyGym::step(const ActionRecord& action) {
  const Entity& t = target();
  switch (action.kind) {
    case ActionKind::Query: {
      auto tag = match_attribute(*kb_, action.content);
      if (!tag) return {std::string(kUnknownAttribute), 0.0, false};
      return {t.attributes.contains(*tag) ? "Yes" : "No", 0.0, false};
    }
    case ActionKind::Search: {
      std::string obs = "attributes:";
      for (const auto& v : kb_->vocabulary) obs += " " + v;
      return {obs, 0.0, false};
    }
    case ActionKind::Answer: {
      if (text::canonical_phrase(action.content) == t.name) return {"Correct", 1.0, true};
      std::string obs = "Incorrect.";
      std::string shared;
      for (const auto& a : mentioned_attributes(*kb_, action.content)) {
        if (!t.attributes.contains(a)) continue;
        shared += shared.empty() ? " The target is also: " : ", ";
        shared += a;
      }
      return {obs + shared, 0.0, false};
    }
  }
  return {"invalid action", 0.0, false};
}

std::uint64_t TelepathyGym::context_hash() const {
  std::string key = "telepathy|" + target().name;
  for (const auto& e : kb_->entities) key += "|" + e.name;
  return fnv1a64(key);
}

}  // namespace proact::telepathy
