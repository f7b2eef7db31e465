#ifndef RELCNN_FEATURES_H_
#define RELCNN_FEATURES_H_

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "relcnn/corpus.h"

namespace relcnn {

// Concatenation order of the per-token feature vectors.
enum class FeatureKind { kWord, kPos1, kPos2, kPoS, kChunk, kType };

inline constexpr int kNumFeatures = 6;
inline constexpr int kDefaultPositionClip = 50;

std::string_view feature_name(FeatureKind kind);

// Entity-type tags in BIO form.
inline constexpr std::array<std::string_view, 7> kTypeTags = {
    "B-Prob", "I-Prob", "B-Treat", "I-Treat", "B-Test", "I-Test", "Other"};

// value <-> id dictionary for one feature. Ids are dense; PAD is always 0,
// and open vocabularies (word, PoS, chunk) reserve 1 for UNK.
class Vocabulary {
 public:
  Vocabulary() = default;

  static Vocabulary open(FeatureKind kind, std::vector<std::string> observed);
  static Vocabulary positions(FeatureKind kind, int clip);
  static Vocabulary types();

  FeatureKind kind() const { return kind_; }
  int size() const { return static_cast<int>(values_.size()); }
  int pad_id() const { return 0; }
  std::optional<int> unk_id() const { return unk_id_; }

  // Unknown values map to UNK; closed vocabularies throw instead.
  int lookup(std::string_view value) const;
  bool contains(std::string_view value) const;
  const std::string& value(int id) const { return values_.at(id); }

  // Rebuilds from an explicit id table (used by load). Validates density.
  static Vocabulary from_table(FeatureKind kind,
                               std::vector<std::string> values,
                               std::optional<int> unk_id);

  bool operator==(const Vocabulary& other) const {
    return kind_ == other.kind_ && values_ == other.values_ &&
           unk_id_ == other.unk_id_;
  }

 private:
  FeatureKind kind_ = FeatureKind::kWord;
  std::vector<std::string> values_;  // id -> value; values_[0] is "<PAD>"
  std::unordered_map<std::string, int> index_;
  std::optional<int> unk_id_;
};

struct VocabularySet {
  std::array<Vocabulary, kNumFeatures> vocabs;
  int position_clip = kDefaultPositionClip;

  const Vocabulary& operator[](FeatureKind k) const {
    return vocabs[static_cast<int>(k)];
  }
  // FNV-1a over the canonical dump of one feature's dictionary.
  std::uint64_t hash(FeatureKind k) const;

  bool operator==(const VocabularySet& other) const = default;
};

struct TokenFeatures {
  std::array<int, kNumFeatures> ids{};
  int p1 = 0;  // clipped signed distance to the first argument
  int p2 = 0;

  int id(FeatureKind k) const { return ids[static_cast<int>(k)]; }
};

struct EncodedInstance {
  std::vector<TokenFeatures> features;
  int label_id = 0;
  std::string instance_id;

  int length() const { return static_cast<int>(features.size()); }
};

struct SentencePair {
  const Sentence* sentence = nullptr;
  const RelationInstance* instance = nullptr;
};

std::string normalize_word(std::string_view text);

// Word/PoS/chunk dictionaries from training instances only.
VocabularySet build_vocabularies(std::span<const SentencePair> train,
                                 int position_clip = kDefaultPositionClip);

// 0 inside the span, negative before it, positive after, clipped to
// [-clip, clip].
int relative_position(int token_idx, const EntitySpan& span,
                      int clip = kDefaultPositionClip);

std::string_view bio_tag(int token_idx, std::span<const EntitySpan> entities);

EncodedInstance encode_instance(const Sentence& sentence,
                                const RelationInstance& instance,
                                const VocabularySet& vocabs);

// A token made entirely of PAD ids; appended tokens of this kind are inert.
TokenFeatures pad_token(const VocabularySet& vocabs);

void save_vocabularies(const VocabularySet& vocabs, std::ostream& out);
VocabularySet load_vocabularies(std::istream& in);

}  // namespace relcnn

#endif  // RELCNN_FEATURES_H_
