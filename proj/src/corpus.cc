#include "relcnn/corpus.h"

#include <algorithm>
#include <array>
#include <fstream>
#include <map>
#include <set>
#include <utility>

#include "json.hpp"
#include "relcnn/random.h"

namespace relcnn {

namespace {

using OrderedJson = nlohmann::ordered_json;

constexpr std::array<std::string_view, 9> kLabelNames = {
    "TeCP", "TrCP", "PIP", "TrAP", "TeRP", "None", "TrWP", "TrIP", "TrNAP"};

constexpr std::array<std::string_view, 3> kEntityTypeNames = {
    "problem", "treatment", "test"};

[[noreturn]] void fail(ParseErrorKind kind, std::size_t line,
                       const std::string& detail) {
  throw CorpusParseError(kind, line, detail);
}

const nlohmann::json& require(const nlohmann::json& obj, const char* key,
                              std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    fail(ParseErrorKind::kMalformedRecord, line,
         std::string("missing field '") + key + "'");
  }
  return *it;
}

std::string require_string(const nlohmann::json& obj, const char* key,
                           std::size_t line) {
  const auto& v = require(obj, key, line);
  if (!v.is_string()) {
    fail(ParseErrorKind::kMalformedRecord, line,
         std::string("field '") + key + "' must be a string");
  }
  return v.get<std::string>();
}

int require_int(const nlohmann::json& obj, const char* key, std::size_t line) {
  const auto& v = require(obj, key, line);
  if (!v.is_number_integer()) {
    fail(ParseErrorKind::kMalformedRecord, line,
         std::string("field '") + key + "' must be an integer");
  }
  return v.get<int>();
}

const nlohmann::json& require_array(const nlohmann::json& obj, const char* key,
                                    std::size_t line) {
  const auto& v = require(obj, key, line);
  if (!v.is_array()) {
    fail(ParseErrorKind::kMalformedRecord, line,
         std::string("field '") + key + "' must be an array");
  }
  return v;
}

Sentence parse_record(const std::string& text, std::size_t line) {
  nlohmann::json record;
  try {
    record = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ParseErrorKind::kMalformedRecord, line, e.what());
  }
  if (!record.is_object()) {
    fail(ParseErrorKind::kMalformedRecord, line, "record is not an object");
  }

  Sentence s;
  s.id = require_string(record, "id", line);

  for (const auto& t : require_array(record, "tokens", line)) {
    if (!t.is_object()) {
      fail(ParseErrorKind::kMalformedRecord, line, "token is not an object");
    }
    Token token{require_string(t, "text", line), require_string(t, "pos", line),
                require_string(t, "chunk", line)};
    if (token.text.empty()) {
      fail(ParseErrorKind::kMalformedRecord, line, "empty token text");
    }
    s.tokens.push_back(std::move(token));
  }

  for (const auto& e : require_array(record, "entities", line)) {
    if (!e.is_object()) {
      fail(ParseErrorKind::kMalformedRecord, line, "entity is not an object");
    }
    EntitySpan span;
    span.start = require_int(e, "start", line);
    span.end = require_int(e, "end", line);
    std::string type = require_string(e, "type", line);
    auto etype = parse_entity_type(type);
    if (!etype) {
      fail(ParseErrorKind::kUnknownEntityType, line,
           "unknown entity type '" + type + "'");
    }
    span.etype = *etype;
    if (span.start < 0 || span.end < span.start || span.end >= s.size()) {
      fail(ParseErrorKind::kSpanOutOfRange, line,
           "entity span [" + std::to_string(span.start) + ", " +
               std::to_string(span.end) + "] outside sentence of " +
               std::to_string(s.size()) + " tokens");
    }
    if (!s.entities.empty()) {
      const EntitySpan& prev = s.entities.back();
      if (span.start < prev.start) {
        fail(ParseErrorKind::kEntityOrder, line,
             "entities must be ordered by start index");
      }
      if (span.start <= prev.end) {
        fail(ParseErrorKind::kOverlappingEntities, line,
             "entity starting at " + std::to_string(span.start) +
                 " overlaps the previous entity");
      }
    }
    s.entities.push_back(span);
  }

  std::set<std::pair<int, int>> seen_pairs;
  const int n_entities = static_cast<int>(s.entities.size());
  for (const auto& r : require_array(record, "relations", line)) {
    if (!r.is_object()) {
      fail(ParseErrorKind::kMalformedRecord, line, "relation is not an object");
    }
    GoldRelation rel;
    rel.arg1 = require_int(r, "arg1", line);
    rel.arg2 = require_int(r, "arg2", line);
    std::string name = require_string(r, "label", line);
    auto label = parse_label(name);
    if (!label || *label == RelationLabel::kNoRelation) {
      fail(ParseErrorKind::kUnknownLabel, line,
           "unknown relation label '" + name + "'");
    }
    rel.label = *label;
    if (rel.arg1 < 0 || rel.arg1 >= n_entities || rel.arg2 < 0 ||
        rel.arg2 >= n_entities || rel.arg1 == rel.arg2) {
      fail(ParseErrorKind::kInvalidRelation, line,
           "relation arguments (" + std::to_string(rel.arg1) + ", " +
               std::to_string(rel.arg2) + ") do not name two entities");
    }
    auto key = std::minmax(rel.arg1, rel.arg2);
    if (!seen_pairs.insert(key).second) {
      fail(ParseErrorKind::kInvalidRelation, line,
           "entity pair annotated twice");
    }
    s.relations.push_back(rel);
  }
  return s;
}

}  // namespace

std::string_view entity_type_name(EntityType type) {
  return kEntityTypeNames[static_cast<int>(type)];
}

std::optional<EntityType> parse_entity_type(std::string_view name) {
  for (std::size_t i = 0; i < kEntityTypeNames.size(); ++i) {
    if (kEntityTypeNames[i] == name) return static_cast<EntityType>(i);
  }
  return std::nullopt;
}

std::string_view label_name(RelationLabel label) {
  return kLabelNames[static_cast<int>(label)];
}

std::optional<RelationLabel> parse_label(std::string_view name) {
  for (std::size_t i = 0; i < kLabelNames.size(); ++i) {
    if (kLabelNames[i] == name) return static_cast<RelationLabel>(i);
  }
  return std::nullopt;
}

bool is_classifier_label(RelationLabel label) {
  return static_cast<int>(label) < kNumClasses;
}

int label_id(RelationLabel label) {
  if (!is_classifier_label(label)) {
    throw std::invalid_argument("label " + std::string(label_name(label)) +
                                " is not a classifier class");
  }
  return static_cast<int>(label);
}

RelationLabel label_from_id(int id) {
  if (id < 0 || id >= kNumClasses) {
    throw std::out_of_range("class id " + std::to_string(id));
  }
  return static_cast<RelationLabel>(id);
}

const Sentence* Corpus::find(std::string_view id) const {
  for (const auto& s : sentences) {
    if (s.id == id) return &s;
  }
  return nullptr;
}

std::string RelationInstance::id() const {
  return sentence_id + ":" + std::to_string(arg1) + "-" + std::to_string(arg2);
}

std::string_view parse_error_kind_name(ParseErrorKind kind) {
  switch (kind) {
    case ParseErrorKind::kMalformedRecord: return "malformed record";
    case ParseErrorKind::kSpanOutOfRange: return "span out of range";
    case ParseErrorKind::kOverlappingEntities: return "overlapping entities";
    case ParseErrorKind::kEntityOrder: return "entities out of order";
    case ParseErrorKind::kDuplicateSentenceId: return "duplicate sentence id";
    case ParseErrorKind::kUnknownEntityType: return "unknown entity type";
    case ParseErrorKind::kUnknownLabel: return "unknown relation label";
    case ParseErrorKind::kInvalidRelation: return "invalid relation";
  }
  return "parse error";
}

CorpusParseError::CorpusParseError(ParseErrorKind kind, std::size_t line,
                                   const std::string& detail)
    : std::runtime_error("line " + std::to_string(line) + ": " +
                         std::string(parse_error_kind_name(kind)) + ": " +
                         detail),
      kind_(kind),
      line_(line) {}

Corpus parse_corpus(std::istream& in) {
  Corpus corpus;
  std::set<std::string> ids;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (text.find_first_not_of(" \t") == std::string::npos) continue;
    Sentence s = parse_record(text, line);
    if (!ids.insert(s.id).second) {
      fail(ParseErrorKind::kDuplicateSentenceId, line,
           "sentence id '" + s.id + "' already used");
    }
    corpus.sentences.push_back(std::move(s));
  }
  return corpus;
}

Corpus load_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open corpus file " + path);
  return parse_corpus(in);
}

std::string serialize_sentence(const Sentence& sentence) {
  OrderedJson record;
  record["id"] = sentence.id;
  OrderedJson tokens = OrderedJson::array();
  for (const auto& t : sentence.tokens) {
    OrderedJson tok;
    tok["text"] = t.text;
    tok["pos"] = t.pos_tag;
    tok["chunk"] = t.chunk_tag;
    tokens.push_back(std::move(tok));
  }
  record["tokens"] = std::move(tokens);
  OrderedJson entities = OrderedJson::array();
  for (const auto& e : sentence.entities) {
    OrderedJson ent;
    ent["start"] = e.start;
    ent["end"] = e.end;
    ent["type"] = std::string(entity_type_name(e.etype));
    entities.push_back(std::move(ent));
  }
  record["entities"] = std::move(entities);
  OrderedJson relations = OrderedJson::array();
  for (const auto& r : sentence.relations) {
    OrderedJson rel;
    rel["arg1"] = r.arg1;
    rel["arg2"] = r.arg2;
    rel["label"] = std::string(label_name(r.label));
    relations.push_back(std::move(rel));
  }
  record["relations"] = std::move(relations);
  return record.dump();
}

void write_corpus(const Corpus& corpus, std::ostream& out) {
  for (const auto& s : corpus.sentences) out << serialize_sentence(s) << '\n';
}

std::vector<RelationInstance> generate_instances(
    const Sentence& sentence, std::span<const GoldRelation> gold) {
  const int n = static_cast<int>(sentence.entities.size());
  std::map<std::pair<int, int>, RelationLabel> gold_by_pair;
  for (const auto& g : gold) {
    if (g.arg1 < 0 || g.arg1 >= n || g.arg2 < 0 || g.arg2 >= n ||
        g.arg1 == g.arg2) {
      throw std::invalid_argument(
          "gold relation in sentence '" + sentence.id +
          "' references a missing entity index");
    }
    gold_by_pair[std::minmax(g.arg1, g.arg2)] = g.label;
  }

  std::vector<RelationInstance> raw;
  if (n < 2) return raw;
  raw.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      auto it = gold_by_pair.find({a, b});
      RelationLabel label =
          it == gold_by_pair.end() ? RelationLabel::kNoRelation : it->second;
      raw.push_back({sentence.id, a, b, label});
    }
  }
  return filter_classes(raw);
}

std::vector<RelationInstance> corpus_instances(const Corpus& corpus) {
  std::vector<RelationInstance> all;
  for (const auto& s : corpus.sentences) {
    auto inst = generate_instances(s, s.relations);
    all.insert(all.end(), std::make_move_iterator(inst.begin()),
               std::make_move_iterator(inst.end()));
  }
  return all;
}

std::vector<RelationInstance> filter_classes(
    std::span<const RelationInstance> instances) {
  std::vector<RelationInstance> kept;
  kept.reserve(instances.size());
  for (const auto& inst : instances) {
    if (is_classifier_label(inst.label)) kept.push_back(inst);
  }
  return kept;
}

std::vector<std::size_t> FoldSplit::test_indices(int fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    if (assignments[i] == fold) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> FoldSplit::train_indices(int fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    if (assignments[i] != fold) out.push_back(i);
  }
  return out;
}

FoldSplit split_folds(std::span<const RelationInstance> instances, int k,
                      std::uint64_t seed) {
  if (k < 2) throw std::invalid_argument("fold count must be at least 2");
  if (static_cast<std::size_t>(k) > instances.size()) {
    throw std::invalid_argument(
        "fold count " + std::to_string(k) + " exceeds instance count " +
        std::to_string(instances.size()));
  }

  std::map<int, std::vector<std::size_t>> strata;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    strata[static_cast<int>(instances[i].label)].push_back(i);
  }

  FoldSplit split;
  split.k = k;
  split.assignments.assign(instances.size(), -1);
  Rng rng(seed);
  // Round-robin continues across strata so overall fold sizes stay balanced.
  int next = 0;
  for (auto& [label, members] : strata) {
    shuffle(members, rng);
    for (std::size_t idx : members) {
      split.assignments[idx] = next;
      next = (next + 1) % k;
    }
  }
  return split;
}

}  // namespace relcnn
