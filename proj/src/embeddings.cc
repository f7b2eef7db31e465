#include "relcnn/embeddings.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "relcnn/random.h"

namespace relcnn {

namespace {

constexpr double kInitRange = 0.25;

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && line[i] == ' ') ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ') ++j;
    if (j > i) fields.push_back(line.substr(i, j - i));
    i = j;
  }
  return fields;
}

bool parse_double(std::string_view s, double& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

bool parse_int(std::string_view s, long& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

[[noreturn]] void bad_line(std::size_t line, const std::string& what) {
  throw std::runtime_error("word vectors line " + std::to_string(line) +
                           ": " + what);
}

}  // namespace

int EmbeddingSet::token_dim() const {
  int d = 0;
  for (int k = 0; k < kNumFeatures; ++k) {
    if (enabled[k]) d += tables[k].dim;
  }
  return d;
}

EmbeddingMatrix init_random(int dim, int rows, std::uint64_t seed) {
  if (dim < 1 || rows < 1) {
    throw std::invalid_argument("embedding matrix needs dim, rows >= 1");
  }
  EmbeddingMatrix m;
  m.dim = dim;
  m.rows = rows;
  m.values.resize(static_cast<std::size_t>(dim) * rows);
  Rng rng(seed);
  for (double& v : m.values) v = uniform(rng, -kInitRange, kInitRange);
  std::fill_n(m.values.begin(), dim, 0.0);
  return m;
}

EmbeddingMatrix load_pretrained(std::istream& in, const Vocabulary& vocab,
                                std::uint64_t seed, int dim) {
  EmbeddingMatrix m = init_random(dim, vocab.size(), seed);
  std::unordered_set<int> assigned;
  std::string text;
  std::size_t line = 0;
  bool first = true;
  while (std::getline(in, text)) {
    ++line;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    auto fields = split_fields(text);
    if (fields.empty()) continue;
    if (first) {
      first = false;
      long count = 0, declared = 0;
      if (fields.size() == 2 && parse_int(fields[0], count) &&
          parse_int(fields[1], declared)) {
        if (declared != dim) {
          throw std::runtime_error("word vectors declare dimension " +
                                   std::to_string(declared) + ", expected " +
                                   std::to_string(dim));
        }
        continue;
      }
      if (static_cast<int>(fields.size()) - 1 != dim) {
        throw std::runtime_error(
            "word vectors have dimension " +
            std::to_string(static_cast<int>(fields.size()) - 1) +
            ", expected " + std::to_string(dim));
      }
    }
    if (static_cast<int>(fields.size()) != dim + 1) {
      bad_line(line, "expected " + std::to_string(dim + 1) + " fields, got " +
                         std::to_string(fields.size()));
    }
    std::vector<double> vec(dim);
    for (int j = 0; j < dim; ++j) {
      if (!parse_double(fields[j + 1], vec[j])) {
        bad_line(line, "non-numeric value '" + std::string(fields[j + 1]) +
                           "'");
      }
    }
    std::string word = normalize_word(fields[0]);
    if (!vocab.contains(word)) continue;
    int id = vocab.lookup(word);
    if (id == vocab.pad_id() || (vocab.unk_id() && id == *vocab.unk_id())) {
      continue;
    }
    if (!assigned.insert(id).second) continue;  // first spelling wins
    std::copy(vec.begin(), vec.end(), m.row(id).begin());
  }
  return m;
}

EmbeddingMatrix load_pretrained(const std::string& path,
                                const Vocabulary& vocab, std::uint64_t seed,
                                int dim) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open word vectors " + path);
  return load_pretrained(in, vocab, seed, dim);
}

EmbeddingSet make_embedding_set(const VocabularySet& vocabs,
                                const EmbeddingOptions& options,
                                std::uint64_t seed) {
  EmbeddingSet set;
  set.enabled = options.enabled;
  for (int k = 0; k < kNumFeatures; ++k) {
    const auto kind = static_cast<FeatureKind>(k);
    const int dim = k == 0 ? options.word_dim : options.feature_dim;
    const std::uint64_t s = derive_seed(seed, static_cast<std::uint64_t>(k));
    if (kind == FeatureKind::kWord && !options.pretrained_path.empty()) {
      set.tables[k] =
          load_pretrained(options.pretrained_path, vocabs[kind], s, dim);
    } else {
      set.tables[k] = init_random(dim, vocabs[kind].size(), s);
    }
  }
  return set;
}

std::vector<double> embed_instance(const EncodedInstance& inst,
                                   const EmbeddingSet& set) {
  const int d = set.token_dim();
  std::vector<double> x(static_cast<std::size_t>(inst.length()) * d);
  double* out = x.data();
  for (const auto& tok : inst.features) {
    for (int k = 0; k < kNumFeatures; ++k) {
      if (!set.enabled[k]) continue;
      const EmbeddingMatrix& table = set.tables[k];
      const int id = tok.ids[k];
      if (id < 0 || id >= table.rows) {
        throw std::logic_error("feature id " + std::to_string(id) +
                               " outside embedding table " +
                               std::string(feature_name(
                                   static_cast<FeatureKind>(k))));
      }
      auto row = table.row(id);
      out = std::copy(row.begin(), row.end(), out);
    }
  }
  return x;
}

}  // namespace relcnn
