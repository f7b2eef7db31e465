#ifndef RELCNN_EVALUATION_H_
#define RELCNN_EVALUATION_H_

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "relcnn/corpus.h"
#include "relcnn/embeddings.h"
#include "relcnn/metrics.h"
#include "relcnn/svm_baseline.h"
#include "relcnn/trainer.h"

namespace relcnn {

// A corpus together with its filtered relation instances.
class Dataset {
 public:
  explicit Dataset(Corpus corpus);

  const Corpus& corpus() const { return corpus_; }
  const std::vector<RelationInstance>& instances() const { return instances_; }
  const Sentence& sentence_of(const RelationInstance& inst) const;

  std::vector<SentencePair> pairs(std::span<const std::size_t> indices) const;
  std::vector<int> labels(std::span<const std::size_t> indices) const;

 private:
  Corpus corpus_;
  std::vector<RelationInstance> instances_;
  std::unordered_map<std::string, std::size_t> sentence_index_;
};

// Stratified 1-in-10 development holdout from `indices` (positions into
// data.instances()), for early stopping.
struct DevSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> dev;
};
DevSplit dev_holdout(const Dataset& data, std::span<const std::size_t> indices,
                     std::uint64_t seed);

struct ExperimentConfig {
  TrainConfig train;
  EmbeddingOptions embeddings;
  int position_clip = kDefaultPositionClip;
  int folds = 5;
  int jobs = 1;        // folds trained concurrently
  std::string name;    // row key in reports; derived when empty
};

std::string filter_key(std::span<const int> lengths);  // "[4,6]"

struct CvResult {
  std::string name;
  FoldSplit split;
  std::vector<MetricsReport> folds;
  MetricsReport mean;  // mean of the fold reports
};

// k-fold cross-validation. Each fold rebuilds vocabularies from its training
// portion, trains with seed + fold, and scores the held-out fold. With a
// patience set, a dev_holdout of the training portion drives early stopping.
CvResult cross_validate(const Dataset& data, const ExperimentConfig& config);

// One cross-validation per filter-length set.
std::vector<CvResult> sweep_filters(const Dataset& data,
                                    const ExperimentConfig& base,
                                    const std::vector<std::vector<int>>& sets);

struct AblationRow {
  std::string name;
  int token_dim = 0;
  CvResult result;
};

// Random (RV) and, when base.embeddings.pretrained_path is set, pretrained
// (WV) word vectors, each with T; T + P1 + P2; and all six features.
std::vector<AblationRow> ablate_features(const Dataset& data,
                                         const ExperimentConfig& base);

struct SvmExperiment {
  std::vector<double> costs = {0.01, 0.1, 1.0};
  int folds = 5;
  int epochs = 20;
  std::uint64_t seed = 1;
};

std::string svm_key(double cost);  // "SVM (Linear, C=0.01)"

// Cross-validated one-vs-rest SVM, one result per cost, on the same folds
// as cross_validate with the same seed.
std::vector<CvResult> svm_cross_validate(const Dataset& data,
                                         const SvmExperiment& config);

// Sparse features of every instance in a feature space built on all of them.
void write_dataset_sparse_dump(const Dataset& data, std::ostream& out);

// TSV: config, fold, class, precision, recall, f1 (percent, 2 decimals).
// Per-class rows, then macro and micro; fold "mean" closes each config.
void write_reports_tsv(std::span<const CvResult> results, std::ostream& out);
void write_reports_json(std::span<const CvResult> results, std::ostream& out);
std::vector<CvResult> read_reports_json(std::istream& in);

// Headline table: key, macro precision, recall, F score.
void write_summary_table(std::span<const CvResult> results,
                         const std::string& key_header, std::ostream& out);

// Per relation class of one result.
void write_class_table(const CvResult& result, std::ostream& out);

}  // namespace relcnn

#endif  // RELCNN_EVALUATION_H_
