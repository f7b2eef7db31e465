#include "relcnn/svm_baseline.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <set>
#include <stdexcept>

#include "relcnn/features.h"
#include "relcnn/random.h"

namespace relcnn {

namespace {

bool is_punctuation(std::string_view token) {
  return !token.empty() &&
         std::all_of(token.begin(), token.end(), [](unsigned char c) {
           return std::ispunct(c) != 0;
         });
}

std::string join(const std::vector<std::string>& parts, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

}  // namespace

NamedFeatures extract_sparse_features(const Sentence& sentence,
                                      const RelationInstance& instance) {
  const EntitySpan& a1 = sentence.entities.at(instance.arg1);
  const EntitySpan& a2 = sentence.entities.at(instance.arg2);
  auto word = [&](int i) { return normalize_word(sentence.tokens[i].text); };

  NamedFeatures f;
  std::vector<std::string> words, chunks;
  bool punct_only = a2.start > a1.end + 1;
  for (int i = a1.end + 1; i < a2.start; ++i) {
    const Token& tok = sentence.tokens[i];
    words.push_back(word(i));
    chunks.push_back(tok.chunk_tag);
    f["between_word=" + words.back()] += 1.0;
    f["between_pos=" + tok.pos_tag] += 1.0;
    if (!is_punctuation(tok.text)) punct_only = false;
  }
  for (std::size_t i = 0; i + 1 < words.size(); ++i) {
    f["between_bigram=" + words[i] + "_" + words[i + 1]] += 1.0;
  }

  const EntitySpan* args[2] = {&a1, &a2};
  for (int a = 0; a < 2; ++a) {
    const std::string prefix = "arg" + std::to_string(a + 1);
    const EntitySpan& span = *args[a];
    f[prefix + "_prev=" + (span.start > 0 ? word(span.start - 1) : "<s>")] = 1.0;
    for (int off = 1; off <= 3 && span.end + off < sentence.size(); ++off) {
      f[prefix + "_next" + std::to_string(off) + "=" + word(span.end + off)] =
          1.0;
    }
  }

  f["between_chunks=" + (chunks.empty() ? "<none>" : join(chunks, "|"))] = 1.0;
  f["between_string=" + (words.empty() ? "<none>" : join(words, " "))] = 1.0;

  const std::string t1(entity_type_name(a1.etype));
  const std::string t2(entity_type_name(a2.etype));
  f["arg1=" + t1] = 1.0;
  f["arg2=" + t2] = 1.0;
  f["order=" + t1 + "-" + t2] = 1.0;
  f["distance"] = static_cast<double>(words.size());
  f["punct_only"] = punct_only ? 1.0 : 0.0;
  return f;
}

double SparseVector::dot(std::span<const double> w) const {
  double s = 0.0;
  for (const auto& [id, v] : entries) s += w[id] * v;
  return s;
}

FeatureSpace FeatureSpace::build(std::span<const NamedFeatures> train) {
  std::set<std::string> names;
  for (const auto& f : train) {
    for (const auto& [name, value] : f) {
      if (value != 0.0) names.insert(name);
    }
  }
  FeatureSpace space;
  space.names_.assign(names.begin(), names.end());
  for (int i = 0; i < space.size(); ++i) space.index_.emplace(space.names_[i], i);
  return space;
}

SparseVector FeatureSpace::vectorize(const NamedFeatures& features) const {
  SparseVector x;
  x.dimension = size();
  for (const auto& [name, value] : features) {
    if (value == 0.0) continue;
    auto it = index_.find(name);
    if (it != index_.end()) x.entries.emplace_back(it->second, value);
  }
  std::sort(x.entries.begin(), x.entries.end());
  return x;
}

LinearSvmModel LinearSvmModel::zeros(int dimension) {
  LinearSvmModel m;
  m.dimension = dimension;
  for (auto& w : m.weights) w.assign(dimension, 0.0);
  return m;
}

double LinearSvmModel::weight_norm() const {
  double s = 0.0;
  for (int c = 0; c < kNumClasses; ++c) {
    for (double v : weights[c]) s += v * v;
    s += bias[c] * bias[c];
  }
  return std::sqrt(s);
}

LinearSvmModel train_svm(std::span<const SparseVector> train,
                         std::span<const int> labels, const SvmConfig& config) {
  if (!(config.cost > 0.0)) throw std::invalid_argument("SVM cost C must be > 0");
  if (config.epochs < 1) throw std::invalid_argument("SVM epochs must be >= 1");
  if (train.size() != labels.size()) {
    throw std::invalid_argument("SVM inputs and labels differ in length");
  }
  const int dim = train.empty() ? 0 : train.front().dimension;
  LinearSvmModel model = LinearSvmModel::zeros(dim);
  model.cost = config.cost;
  if (train.empty()) return model;

  const std::size_t n = train.size();
  const double lambda = 1.0 / (config.cost * static_cast<double>(n));

  for (int c = 0; c < kNumClasses; ++c) {
    // w = scale * v keeps the shrink step O(1) for sparse inputs.
    std::vector<double> v(dim, 0.0);
    double v_bias = 0.0;
    double scale = 1.0;
    Rng rng(derive_seed(config.seed, static_cast<std::uint64_t>(c)));
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    long t = 0;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
      shuffle(order, rng);
      for (std::size_t idx : order) {
        ++t;
        const SparseVector& x = train[idx];
        const double y = labels[idx] == c ? 1.0 : -1.0;
        const double margin = y * scale * (x.dot(v) + v_bias);
        const double eta = 1.0 / (lambda * static_cast<double>(t));
        const double shrink = 1.0 - eta * lambda;
        if (shrink <= 0.0) {
          std::fill(v.begin(), v.end(), 0.0);
          v_bias = 0.0;
          scale = 1.0;
        } else {
          scale *= shrink;
        }
        if (margin < 1.0) {
          const double step = eta * y / scale;
          for (const auto& [id, value] : x.entries) v[id] += step * value;
          v_bias += step;
        }
        if (scale < 1e-9) {
          for (double& w : v) w *= scale;
          v_bias *= scale;
          scale = 1.0;
        }
      }
    }
    auto& w = model.weights[c];
    for (int i = 0; i < dim; ++i) w[i] = scale * v[i];
    model.bias[c] = scale * v_bias;
  }
  return model;
}

std::array<double, kNumClasses> svm_scores(const LinearSvmModel& model,
                                           const SparseVector& x) {
  std::array<double, kNumClasses> s{};
  for (int c = 0; c < kNumClasses; ++c) {
    s[c] = model.bias[c];
    for (const auto& [id, value] : x.entries) {
      if (id < model.dimension) s[c] += model.weights[c][id] * value;
    }
  }
  return s;
}

int predict_svm(const LinearSvmModel& model, const SparseVector& x) {
  auto s = svm_scores(model, x);
  return static_cast<int>(std::max_element(s.begin(), s.end()) - s.begin());
}

void write_sparse_dump(std::span<const SparseVector> vectors,
                       std::span<const int> labels,
                       std::span<const std::string> ids, std::ostream& out) {
  char buf[64];
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    out << labels[i] << " qid:" << ids[i];
    for (const auto& [id, value] : vectors[i].entries) {
      std::snprintf(buf, sizeof buf, " %d:%.17g", id, value);
      out << buf;
    }
    out << '\n';
  }
}

}  // namespace relcnn
