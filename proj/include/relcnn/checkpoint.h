#ifndef RELCNN_CHECKPOINT_H_
#define RELCNN_CHECKPOINT_H_

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>

#include "relcnn/features.h"
#include "relcnn/network.h"
#include "relcnn/optimizer.h"

namespace relcnn {

// JSON checkpoint layout:
//   format        "relcnn-checkpoint-1"
//   config        filter_lengths, filters_per_length, keep_prob, token_dim,
//                 enabled (six flags, feature order)
//   vocab_hashes  feature name -> 16-hex-digit FNV-1a of the dictionary
//   embeddings    per feature: rows, dim, trainable, values (row-major)
//   banks         width, filters, input_dim, weights (row per filter), bias
//   dense         outputs, inputs, weights (row-major), bias
//   adam          optional: step, lr, beta1, beta2, eps, dense and embedding
//                 moments in optimizer order
// Doubles are written with round-trip precision.
struct Checkpoint {
  ModelParams model;
  std::optional<AdamState> adam;
};

class CheckpointMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void save_checkpoint(const ModelParams& model, const VocabularySet& vocabs,
                     const AdamState* adam, std::ostream& out);

// Throws CheckpointMismatch when the recorded vocabulary hashes differ from
// `vocabs`.
Checkpoint load_checkpoint(std::istream& in, const VocabularySet& vocabs);

}  // namespace relcnn

#endif  // RELCNN_CHECKPOINT_H_
