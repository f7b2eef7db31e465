#include "relcnn/synthetic.h"

#include <array>
#include <cstdio>
#include <map>
#include <ostream>
#include <set>
#include <stdexcept>
#include <utility>

#include "relcnn/random.h"

namespace relcnn {

namespace {

struct Word {
  std::string_view text;
  std::string_view pos;
  std::string_view chunk;
};

constexpr std::array<Word, 16> kFillers = {{
    {"the", "DT", "B-NP"},     {"patient", "NN", "I-NP"},
    {"was", "VBD", "B-VP"},    {"on", "IN", "B-PP"},
    {"then", "RB", "B-ADVP"},  {"later", "RB", "B-ADVP"},
    {"noted", "VBN", "B-VP"},  {"of", "IN", "B-PP"},
    {"in", "IN", "B-PP"},      {"with", "IN", "B-PP"},
    {"and", "CC", "O"},        {"his", "PRP$", "B-NP"},
    {"at", "IN", "B-PP"},      {"today", "NN", "B-NP"},
    {"also", "RB", "B-ADVP"},  {",", ",", "O"},
}};

constexpr std::array<std::array<std::string_view, 3>, kNumRelationClasses>
    kTriggers = {{
        {"evaluate", "investigate", "assess"},        // TeCP
        {"caused", "induced", "provoked"},            // TrCP
        {"secondary", "complicating", "accompanying"},  // PIP
        {"treated", "managed", "controlled"},         // TrAP
        {"revealed", "showed", "demonstrated"},       // TeRP
    }};

constexpr std::array<std::string_view, kNumRelationClasses> kTriggerPos = {
    "VB", "VBN", "JJ", "VBN", "VBD"};

using Phrase = std::vector<std::string_view>;

const std::array<std::vector<Phrase>, 3>& entity_lexicon() {
  static const std::array<std::vector<Phrase>, 3> lex = {{
      {{"fever"}, {"pneumonia"}, {"chest", "pain"}, {"hypertension"},
       {"anemia"}, {"sepsis"}, {"rash"}, {"edema"}, {"heart", "failure"},
       {"infection"}, {"nausea"}, {"renal", "insufficiency"}},
      {{"aspirin"}, {"lasix"}, {"vancomycin"}, {"insulin"}, {"surgery"},
       {"heparin"}, {"tylenol"}, {"antibiotics"}, {"iv", "fluids"},
       {"metoprolol"}},
      {{"ct", "scan"}, {"x-ray"}, {"white", "count"}, {"blood", "culture"},
       {"ekg"}, {"mri"}, {"biopsy"}, {"ultrasound"}, {"urinalysis"},
       {"chest", "film"}},
  }};
  return lex;
}

// Unordered argument-type pair of each relation class.
constexpr std::array<std::pair<EntityType, EntityType>, kNumRelationClasses>
    kClassTypes = {{
        {EntityType::kTest, EntityType::kProblem},
        {EntityType::kTreatment, EntityType::kProblem},
        {EntityType::kProblem, EntityType::kProblem},
        {EntityType::kTreatment, EntityType::kProblem},
        {EntityType::kTest, EntityType::kProblem},
    }};

bool compatible(int cls, EntityType a, EntityType b) {
  auto [x, y] = kClassTypes[cls];
  return (x == a && y == b) || (x == b && y == a);
}

EntityType random_type(Rng& rng) {
  return static_cast<EntityType>(uniform_index(rng, 3));
}

class SentenceBuilder {
 public:
  explicit SentenceBuilder(Rng& rng) : rng_(rng) {}

  void filler(int count) {
    for (int i = 0; i < count; ++i) {
      const Word& w = kFillers[uniform_index(rng_, kFillers.size())];
      push(w.text, w.pos, w.chunk);
    }
  }

  void trigger(int cls) {
    const auto& options = kTriggers[cls];
    push(options[uniform_index(rng_, options.size())], kTriggerPos[cls],
         "B-VP");
  }

  void entity(EntityType type) {
    const auto& phrases = entity_lexicon()[static_cast<int>(type)];
    const Phrase& p = phrases[uniform_index(rng_, phrases.size())];
    EntitySpan span;
    span.start = s_.size();
    span.etype = type;
    for (std::size_t i = 0; i < p.size(); ++i) {
      const bool last = i + 1 == p.size();
      push(p[i], last ? "NN" : "JJ", i == 0 ? "B-NP" : "I-NP");
    }
    span.end = s_.size() - 1;
    s_.entities.push_back(span);
  }

  Sentence finish(std::string id) {
    push(".", ".", "O");
    s_.id = std::move(id);
    return std::move(s_);
  }

  Sentence& sentence() { return s_; }

 private:
  void push(std::string_view text, std::string_view pos,
            std::string_view chunk) {
    s_.tokens.push_back(
        {std::string(text), std::string(pos), std::string(chunk)});
  }

  Rng& rng_;
  Sentence s_;
};

}  // namespace

std::vector<std::string_view> synthetic_triggers(RelationLabel label) {
  const int id = label_id(label);
  if (id == kNoRelationId) return {};
  return {kTriggers[id].begin(), kTriggers[id].end()};
}

Corpus generate_synthetic_corpus(const SyntheticOptions& options) {
  if (options.sentences < 0 || options.entities_per_sentence < 2) {
    throw std::invalid_argument(
        "synthetic corpus needs >= 0 sentences of >= 2 entities");
  }
  Rng rng(options.seed);
  Corpus corpus;
  const int e = options.entities_per_sentence;
  for (int n = 0; n < options.sentences; ++n) {
    // Choose the label of each neighbouring pair and the entity types.
    std::vector<EntityType> types;
    std::vector<int> labels;
    for (int j = 0; j + 1 < e; ++j) {
      int cls;
      if (j == 0) {
        cls = static_cast<int>(uniform_index(rng, kNumClasses));
        if (cls == kNoRelationId) {
          types.push_back(random_type(rng));
        } else {
          auto [a, b] = kClassTypes[cls];
          if (uniform01(rng) < 0.5) std::swap(a, b);
          types.push_back(a);
          types.push_back(b);
        }
      } else {
        std::vector<int> allowed = {kNoRelationId};
        for (int c = 0; c < kNumRelationClasses; ++c) {
          auto [a, b] = kClassTypes[c];
          if (a == types[j] || b == types[j]) allowed.push_back(c);
        }
        cls = allowed[uniform_index(rng, allowed.size())];
        if (cls != kNoRelationId) {
          auto [a, b] = kClassTypes[cls];
          types.push_back(a == types[j] ? b : a);
        }
      }
      if (cls == kNoRelationId) types.push_back(random_type(rng));
      labels.push_back(cls);
    }

    SentenceBuilder b(rng);
    b.filler(static_cast<int>(uniform_index(rng, 3)));
    for (int j = 0; j < e; ++j) {
      b.entity(types[j]);
      if (j + 1 == e) break;
      const int cls = labels[j];
      int trigger = -1;
      if (cls != kNoRelationId) {
        trigger = cls;
      } else if (uniform01(rng) < 0.5) {
        std::vector<int> decoys;
        for (int c = 0; c < kNumRelationClasses; ++c) {
          if (!compatible(c, types[j], types[j + 1])) decoys.push_back(c);
        }
        trigger = decoys[uniform_index(rng, decoys.size())];
      }
      if (trigger >= 0) {
        b.filler(static_cast<int>(uniform_index(rng, 3)));
        b.trigger(trigger);
        b.filler(static_cast<int>(uniform_index(rng, 2)));
      } else {
        b.filler(static_cast<int>(uniform_index(rng, 4)));
      }
    }
    b.filler(static_cast<int>(uniform_index(rng, 3)));

    for (int j = 0; j + 1 < e; ++j) {
      if (labels[j] != kNoRelationId) {
        b.sentence().relations.push_back(
            {j, j + 1, label_from_id(labels[j])});
      }
    }
    char id[32];
    std::snprintf(id, sizeof id, "syn-%05d", n);
    corpus.sentences.push_back(b.finish(id));
  }
  return corpus;
}

void write_synthetic_vectors(std::ostream& out, std::uint64_t seed, int dim) {
  Rng rng(seed);
  std::map<std::string, std::vector<double>> vectors;
  auto random_vec = [&](double scale) {
    std::vector<double> v(dim);
    for (double& x : v) x = uniform(rng, -scale, scale);
    return v;
  };
  for (const auto& w : kFillers) vectors[std::string(w.text)] = random_vec(0.25);
  vectors["."] = random_vec(0.25);
  for (const auto& phrases : entity_lexicon()) {
    for (const auto& p : phrases) {
      for (auto w : p) vectors[std::string(w)] = random_vec(0.25);
    }
  }
  for (const auto& words : kTriggers) {
    auto direction = random_vec(0.25);
    for (auto w : words) {
      auto v = random_vec(0.05);
      for (int i = 0; i < dim; ++i) v[i] += direction[i];
      vectors[std::string(w)] = std::move(v);
    }
  }
  out << vectors.size() << ' ' << dim << '\n';
  char buf[32];
  for (const auto& [word, v] : vectors) {
    out << word;
    for (double x : v) {
      std::snprintf(buf, sizeof buf, " %.6f", x);
      out << buf;
    }
    out << '\n';
  }
}

}  // namespace relcnn
