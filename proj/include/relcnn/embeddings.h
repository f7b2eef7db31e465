#ifndef RELCNN_EMBEDDINGS_H_
#define RELCNN_EMBEDDINGS_H_

#include <array>
#include <cstdint>
#include <istream>
#include <span>
#include <string>
#include <vector>

#include "relcnn/features.h"

namespace relcnn {

inline constexpr int kWordDim = 50;
inline constexpr int kFeatureDim = 5;

// Row-major N x n table; row j is the vector of feature value j. Row 0 is
// PAD and stays zero.
struct EmbeddingMatrix {
  int dim = 0;
  int rows = 0;
  std::vector<double> values;
  bool trainable = true;

  std::span<double> row(int id) {
    return {values.data() + static_cast<std::size_t>(id) * dim,
            static_cast<std::size_t>(dim)};
  }
  std::span<const double> row(int id) const {
    return {values.data() + static_cast<std::size_t>(id) * dim,
            static_cast<std::size_t>(dim)};
  }
};

// Which feature groups take part in the concatenation.
using FeatureMask = std::array<bool, kNumFeatures>;

inline constexpr FeatureMask kAllFeatures = {true, true, true,
                                             true, true, true};

struct EmbeddingSet {
  std::array<EmbeddingMatrix, kNumFeatures> tables;
  FeatureMask enabled = kAllFeatures;

  const EmbeddingMatrix& operator[](FeatureKind k) const {
    return tables[static_cast<int>(k)];
  }
  EmbeddingMatrix& operator[](FeatureKind k) {
    return tables[static_cast<int>(k)];
  }

  // Width of one concatenated token vector (75 with every feature enabled).
  int token_dim() const;
};

// Entries i.i.d. U(-0.25, 0.25), row 0 zeroed.
EmbeddingMatrix init_random(int dim, int rows, std::uint64_t seed);

// word2vec text format with an optional "count dim" header. Vocabulary words
// found in the file copy the file vector; the rest are drawn as in
// init_random.
EmbeddingMatrix load_pretrained(std::istream& in, const Vocabulary& vocab,
                                std::uint64_t seed, int dim = kWordDim);
EmbeddingMatrix load_pretrained(const std::string& path,
                                const Vocabulary& vocab, std::uint64_t seed,
                                int dim = kWordDim);

struct EmbeddingOptions {
  int word_dim = kWordDim;
  int feature_dim = kFeatureDim;
  FeatureMask enabled = kAllFeatures;
  std::string pretrained_path;  // empty: random word vectors
};

EmbeddingSet make_embedding_set(const VocabularySet& vocabs,
                                const EmbeddingOptions& options,
                                std::uint64_t seed);

// One token_dim() vector per token (row-major, length * token_dim()), each
// the concatenation W|P1|P2|PoS|Chunk|T over the enabled features.
std::vector<double> embed_instance(const EncodedInstance& inst,
                                   const EmbeddingSet& set);

}  // namespace relcnn

#endif  // RELCNN_EMBEDDINGS_H_
