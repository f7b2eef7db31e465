#ifndef RELCNN_SVM_BASELINE_H_
#define RELCNN_SVM_BASELINE_H_

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "relcnn/corpus.h"

namespace relcnn {

// Template-namespaced feature name -> value, e.g. "between_word=remained".
using NamedFeatures = std::map<std::string, double>;

// The eleven templates:
//   between_word=, between_pos=, between_bigram=   bags (counts)
//   arg1_prev=, arg2_prev=                          preceding word
//   arg{1,2}_next{1,2,3}=                           succeeding words by offset
//   between_chunks=                                 chunk sequence as one value
//   between_string=                                 word string as one value
//   arg1=, arg2=                                    argument types
//   order=                                          type order, e.g. test-problem
//   distance                                        words between (numeric)
//   punct_only                                      1 if only punctuation between
NamedFeatures extract_sparse_features(const Sentence& sentence,
                                      const RelationInstance& instance);

struct SparseVector {
  std::vector<std::pair<int, double>> entries;  // strictly increasing ids
  int dimension = 0;

  double dot(std::span<const double> w) const;
};

class FeatureSpace {
 public:
  static FeatureSpace build(std::span<const NamedFeatures> train);

  // Features unseen at build time, and zero values, are dropped.
  SparseVector vectorize(const NamedFeatures& features) const;

  int size() const { return static_cast<int>(names_.size()); }
  const std::string& name(int id) const { return names_.at(id); }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, int> index_;
};

struct SvmConfig {
  double cost = 0.1;  // C
  int epochs = 20;    // passes over the data per one-vs-rest problem
  std::uint64_t seed = 1;
};

// One-vs-rest linear SVMs over the six classes.
struct LinearSvmModel {
  int dimension = 0;
  double cost = 0.0;
  std::array<std::vector<double>, kNumClasses> weights;
  std::array<double, kNumClasses> bias{};

  static LinearSvmModel zeros(int dimension);
  double weight_norm() const;
};

// Minimises (1/2)|w|^2 + C * sum max(0, 1 - y (w.x + b)) per class with
// Pegasos stochastic subgradient steps (lambda = 1 / (C n)); the bias is the
// weight of a constant input and is regularised with the rest.
LinearSvmModel train_svm(std::span<const SparseVector> train,
                         std::span<const int> labels, const SvmConfig& config);

std::array<double, kNumClasses> svm_scores(const LinearSvmModel& model,
                                           const SparseVector& x);

// argmax score; ties go to the lower class id.
int predict_svm(const LinearSvmModel& model, const SparseVector& x);

// "label qid:instance_id fid:value ..." per instance.
void write_sparse_dump(std::span<const SparseVector> vectors,
                       std::span<const int> labels,
                       std::span<const std::string> ids, std::ostream& out);

}  // namespace relcnn

#endif  // RELCNN_SVM_BASELINE_H_
