#ifndef RELCNN_CORPUS_H_
#define RELCNN_CORPUS_H_

#include <cstddef>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace relcnn {

enum class EntityType { kProblem, kTreatment, kTest };

std::string_view entity_type_name(EntityType type);
std::optional<EntityType> parse_entity_type(std::string_view name);

// The first six values are the classifier's output classes, in class-id
// order. TrWP, TrIP and TrNAP occur in annotated data but are filtered out
// together with their instances.
enum class RelationLabel {
  kTeCP,
  kTrCP,
  kPIP,
  kTrAP,
  kTeRP,
  kNoRelation,
  kTrWP,
  kTrIP,
  kTrNAP,
};

inline constexpr int kNumClasses = 6;
inline constexpr int kNumRelationClasses = 5;  // all classes but NoRelation
inline constexpr int kNoRelationId = 5;

std::string_view label_name(RelationLabel label);
std::optional<RelationLabel> parse_label(std::string_view name);
bool is_classifier_label(RelationLabel label);
int label_id(RelationLabel label);  // throws for excluded labels
RelationLabel label_from_id(int id);

struct Token {
  std::string text;
  std::string pos_tag;
  std::string chunk_tag;
};

// Inclusive token range [start, end].
struct EntitySpan {
  int start = 0;
  int end = 0;
  EntityType etype = EntityType::kProblem;

  bool contains(int token) const { return start <= token && token <= end; }
};

// A gold relation as annotated in the corpus file, by entity index.
struct GoldRelation {
  int arg1 = 0;
  int arg2 = 0;
  RelationLabel label = RelationLabel::kNoRelation;
};

struct Sentence {
  std::string id;
  std::vector<Token> tokens;
  std::vector<EntitySpan> entities;  // strictly increasing start
  std::vector<GoldRelation> relations;

  int size() const { return static_cast<int>(tokens.size()); }
};

struct Corpus {
  std::vector<Sentence> sentences;

  const Sentence* find(std::string_view id) const;
};

// arg1 always precedes arg2 in the sentence.
struct RelationInstance {
  std::string sentence_id;
  int arg1 = 0;
  int arg2 = 1;
  RelationLabel label = RelationLabel::kNoRelation;

  std::string id() const;
};

enum class ParseErrorKind {
  kMalformedRecord,
  kSpanOutOfRange,
  kOverlappingEntities,
  kEntityOrder,
  kDuplicateSentenceId,
  kUnknownEntityType,
  kUnknownLabel,
  kInvalidRelation,
};

std::string_view parse_error_kind_name(ParseErrorKind kind);

class CorpusParseError : public std::runtime_error {
 public:
  CorpusParseError(ParseErrorKind kind, std::size_t line,
                   const std::string& detail);

  ParseErrorKind kind() const { return kind_; }
  std::size_t line() const { return line_; }

 private:
  ParseErrorKind kind_;
  std::size_t line_;
};

// Reads the JSONL corpus format. Any malformed record rejects the file.
Corpus parse_corpus(std::istream& in);
Corpus load_corpus(const std::string& path);

// Canonical form: one record per line, keys in schema order.
void write_corpus(const Corpus& corpus, std::ostream& out);
std::string serialize_sentence(const Sentence& sentence);

// One instance per unordered entity pair, arguments in sentence order,
// labelled from `gold` (else NoRelation); excluded-class pairs are dropped.
// Sentences with fewer than two entities yield nothing.
std::vector<RelationInstance> generate_instances(
    const Sentence& sentence, std::span<const GoldRelation> gold);

// Every instance in the corpus, sentence by sentence.
std::vector<RelationInstance> corpus_instances(const Corpus& corpus);

// Keeps only the six classifier labels; order preserved.
std::vector<RelationInstance> filter_classes(
    std::span<const RelationInstance> instances);

struct FoldSplit {
  int k = 0;
  std::vector<int> assignments;  // instance position -> fold

  std::vector<std::size_t> test_indices(int fold) const;
  std::vector<std::size_t> train_indices(int fold) const;
};

// Stratified by label, deterministic for a fixed seed.
FoldSplit split_folds(std::span<const RelationInstance> instances, int k,
                      std::uint64_t seed);

}  // namespace relcnn

#endif  // RELCNN_CORPUS_H_
