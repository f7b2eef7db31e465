#include "relcnn/features.h"

#include <algorithm>
#include <cctype>
#include <istream>
#include <ostream>
#include <set>
#include <stdexcept>

#include "json.hpp"

namespace relcnn {

namespace {

constexpr std::array<std::string_view, kNumFeatures> kFeatureNames = {
    "word", "pos1", "pos2", "pos", "chunk", "type"};

constexpr const char* kPad = "<PAD>";
constexpr const char* kUnk = "<UNK>";

nlohmann::ordered_json vocab_json(const Vocabulary& v) {
  nlohmann::json ids = nlohmann::json::object();
  for (int i = 0; i < v.size(); ++i) ids[v.value(i)] = i;
  nlohmann::ordered_json out;
  out["ids"] = std::move(ids);
  if (v.unk_id()) {
    out["unk_id"] = *v.unk_id();
  } else {
    out["unk_id"] = nullptr;
  }
  out["pad_id"] = v.pad_id();
  return out;
}

}  // namespace

std::string_view feature_name(FeatureKind kind) {
  return kFeatureNames[static_cast<int>(kind)];
}

Vocabulary Vocabulary::open(FeatureKind kind,
                            std::vector<std::string> observed) {
  std::set<std::string> unique(std::make_move_iterator(observed.begin()),
                               std::make_move_iterator(observed.end()));
  unique.erase(kPad);
  unique.erase(kUnk);
  std::vector<std::string> values = {kPad, kUnk};
  values.insert(values.end(), unique.begin(), unique.end());
  return from_table(kind, std::move(values), 1);
}

Vocabulary Vocabulary::positions(FeatureKind kind, int clip) {
  if (clip < 0) throw std::invalid_argument("position clip must be >= 0");
  std::vector<std::string> values = {kPad};
  for (int d = -clip; d <= clip; ++d) values.push_back(std::to_string(d));
  return from_table(kind, std::move(values), std::nullopt);
}

Vocabulary Vocabulary::types() {
  std::vector<std::string> values = {kPad};
  for (auto tag : kTypeTags) values.emplace_back(tag);
  return from_table(FeatureKind::kType, std::move(values), std::nullopt);
}

Vocabulary Vocabulary::from_table(FeatureKind kind,
                                  std::vector<std::string> values,
                                  std::optional<int> unk_id) {
  if (values.empty() || values[0] != kPad) {
    throw std::invalid_argument("vocabulary id 0 must be the PAD entry");
  }
  Vocabulary v;
  v.kind_ = kind;
  v.values_ = std::move(values);
  for (int i = 0; i < v.size(); ++i) {
    if (!v.index_.emplace(v.values_[i], i).second) {
      throw std::invalid_argument("duplicate vocabulary value '" +
                                  v.values_[i] + "'");
    }
  }
  if (unk_id && (*unk_id <= 0 || *unk_id >= v.size())) {
    throw std::invalid_argument("UNK id outside vocabulary");
  }
  v.unk_id_ = unk_id;
  return v;
}

int Vocabulary::lookup(std::string_view value) const {
  auto it = index_.find(std::string(value));
  if (it != index_.end() && it->second != pad_id()) return it->second;
  if (unk_id_) return *unk_id_;
  throw std::out_of_range("value '" + std::string(value) +
                          "' not in closed vocabulary " +
                          std::string(feature_name(kind_)));
}

bool Vocabulary::contains(std::string_view value) const {
  return index_.count(std::string(value)) > 0;
}

std::uint64_t VocabularySet::hash(FeatureKind k) const {
  std::string dump = vocab_json((*this)[k]).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : dump) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string normalize_word(std::string_view text) {
  std::string out(text);
  for (char& c : out) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

VocabularySet build_vocabularies(std::span<const SentencePair> train,
                                 int position_clip) {
  if (train.empty()) {
    throw std::invalid_argument("cannot build vocabularies from no instances");
  }
  std::vector<std::string> words, pos, chunks;
  std::set<const Sentence*> visited;
  for (const auto& pair : train) {
    if (!visited.insert(pair.sentence).second) continue;
    for (const auto& t : pair.sentence->tokens) {
      words.push_back(normalize_word(t.text));
      pos.push_back(t.pos_tag);
      chunks.push_back(t.chunk_tag);
    }
  }
  VocabularySet set;
  set.position_clip = position_clip;
  set.vocabs[0] = Vocabulary::open(FeatureKind::kWord, std::move(words));
  set.vocabs[1] = Vocabulary::positions(FeatureKind::kPos1, position_clip);
  set.vocabs[2] = Vocabulary::positions(FeatureKind::kPos2, position_clip);
  set.vocabs[3] = Vocabulary::open(FeatureKind::kPoS, std::move(pos));
  set.vocabs[4] = Vocabulary::open(FeatureKind::kChunk, std::move(chunks));
  set.vocabs[5] = Vocabulary::types();
  return set;
}

int relative_position(int token_idx, const EntitySpan& span, int clip) {
  int d = 0;
  if (token_idx < span.start) {
    d = token_idx - span.start;
  } else if (token_idx > span.end) {
    d = token_idx - span.end;
  }
  return std::clamp(d, -clip, clip);
}

std::string_view bio_tag(int token_idx, std::span<const EntitySpan> entities) {
  for (const auto& e : entities) {
    if (!e.contains(token_idx)) continue;
    const int base = 2 * static_cast<int>(e.etype);
    return kTypeTags[base + (token_idx == e.start ? 0 : 1)];
  }
  return kTypeTags.back();
}

EncodedInstance encode_instance(const Sentence& sentence,
                                const RelationInstance& instance,
                                const VocabularySet& vocabs) {
  const int n_entities = static_cast<int>(sentence.entities.size());
  if (instance.arg1 == instance.arg2 || instance.arg1 < 0 ||
      instance.arg2 < 0 || instance.arg1 >= n_entities ||
      instance.arg2 >= n_entities) {
    throw std::invalid_argument("instance " + instance.id() +
                                " does not reference two entities");
  }
  const EntitySpan& first = sentence.entities[instance.arg1];
  const EntitySpan& second = sentence.entities[instance.arg2];
  const int clip = vocabs.position_clip;
  const auto& pos1 = vocabs[FeatureKind::kPos1];
  const auto& pos2 = vocabs[FeatureKind::kPos2];

  EncodedInstance out;
  out.label_id = label_id(instance.label);
  out.instance_id = instance.id();
  out.features.reserve(sentence.tokens.size());
  for (int i = 0; i < sentence.size(); ++i) {
    const Token& tok = sentence.tokens[i];
    TokenFeatures f;
    f.p1 = relative_position(i, first, clip);
    f.p2 = relative_position(i, second, clip);
    f.ids[0] = vocabs[FeatureKind::kWord].lookup(normalize_word(tok.text));
    f.ids[1] = pos1.lookup(std::to_string(f.p1));
    f.ids[2] = pos2.lookup(std::to_string(f.p2));
    f.ids[3] = vocabs[FeatureKind::kPoS].lookup(tok.pos_tag);
    f.ids[4] = vocabs[FeatureKind::kChunk].lookup(tok.chunk_tag);
    f.ids[5] = vocabs[FeatureKind::kType].lookup(bio_tag(i, sentence.entities));
    out.features.push_back(f);
  }
  return out;
}

TokenFeatures pad_token(const VocabularySet& vocabs) {
  TokenFeatures t;
  for (int k = 0; k < kNumFeatures; ++k) t.ids[k] = vocabs.vocabs[k].pad_id();
  return t;
}

void save_vocabularies(const VocabularySet& vocabs, std::ostream& out) {
  nlohmann::ordered_json root;
  root["position_clip"] = vocabs.position_clip;
  nlohmann::ordered_json features;
  for (int k = 0; k < kNumFeatures; ++k) {
    features[std::string(kFeatureNames[k])] = vocab_json(vocabs.vocabs[k]);
  }
  root["features"] = std::move(features);
  out << root.dump(1) << '\n';
}

VocabularySet load_vocabularies(std::istream& in) {
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("vocabulary file: ") + e.what());
  }
  VocabularySet set;
  try {
    set.position_clip = root.at("position_clip").get<int>();
    for (int k = 0; k < kNumFeatures; ++k) {
      const auto& entry = root.at("features").at(std::string(kFeatureNames[k]));
      const auto& ids = entry.at("ids");
      std::vector<std::string> values(ids.size());
      std::vector<bool> filled(ids.size(), false);
      for (auto it = ids.begin(); it != ids.end(); ++it) {
        int id = it.value().get<int>();
        if (id < 0 || id >= static_cast<int>(values.size()) || filled[id]) {
          throw std::runtime_error("vocabulary ids are not dense");
        }
        values[id] = it.key();
        filled[id] = true;
      }
      if (entry.at("pad_id").get<int>() != 0) {
        throw std::runtime_error("PAD id must be 0");
      }
      std::optional<int> unk;
      if (!entry.at("unk_id").is_null()) unk = entry.at("unk_id").get<int>();
      set.vocabs[k] = Vocabulary::from_table(static_cast<FeatureKind>(k),
                                             std::move(values), unk);
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("vocabulary file: ") + e.what());
  }
  return set;
}

}  // namespace relcnn
