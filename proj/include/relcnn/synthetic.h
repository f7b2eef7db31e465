#ifndef RELCNN_SYNTHETIC_H_
#define RELCNN_SYNTHETIC_H_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "relcnn/corpus.h"

namespace relcnn {

// Generated clinical-style sentences with PoS/chunk tags and gold relations.
//
// Entities are chained E1 gap E2 gap E3 ...; each gap between neighbouring
// entities carries the relation of that pair: a relation class puts one of
// its trigger words in the gap and fixes the argument types to the class's
// type pair (in either order). NoRelation gaps hold fillers only, or a
// trigger whose class is incompatible with the argument types. Pairs of
// non-neighbouring entities are NoRelation, so with three or more entities
// only the position of a trigger relative to the arguments decides a label.
struct SyntheticOptions {
  int sentences = 100;
  int entities_per_sentence = 2;
  std::uint64_t seed = 1;
};

Corpus generate_synthetic_corpus(const SyntheticOptions& options);

// Trigger words of a classifier class (empty for NoRelation).
std::vector<std::string_view> synthetic_triggers(RelationLabel label);

// word2vec-format vectors for every word the generator can emit; triggers
// of one class share a direction.
void write_synthetic_vectors(std::ostream& out, std::uint64_t seed,
                             int dim = 50);

}  // namespace relcnn

#endif  // RELCNN_SYNTHETIC_H_
