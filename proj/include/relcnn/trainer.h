#ifndef RELCNN_TRAINER_H_
#define RELCNN_TRAINER_H_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "relcnn/features.h"
#include "relcnn/network.h"
#include "relcnn/optimizer.h"

namespace relcnn {

struct TrainConfig {
  NetworkConfig network;
  int batch_size = 50;
  int epochs = 20;
  std::uint64_t seed = 1;
  AdamConfig adam;
  std::optional<int> patience;  // early stop on dev macro-F1
  double negative_keep = 1.0;   // fraction of NoRelation kept; 1 keeps all
};

void validate(const TrainConfig& config);

struct EpochRecord {
  int epoch = 0;
  double mean_loss = 0.0;
  double train_accuracy = 0.0;  // percent, from the training-mode passes
  std::optional<double> dev_macro_f1;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  long steps = 0;
};

struct TrainResult {
  ModelParams model;
  TrainHistory history;
};

// Seeded-shuffled minibatch training with Adam on the mean batch loss.
// When a patience is set and dev instances are given, training stops after
// that many epochs without a dev macro-F1 improvement and the best model is
// returned.
TrainResult train(const TrainConfig& config, ModelParams initial,
                  std::span<const EncodedInstance> train_set,
                  std::span<const EncodedInstance> dev_set = {});

struct Prediction {
  int label = 0;
  std::vector<double> probs;
};

// Evaluation-mode forward; ties go to the lower class id.
std::vector<Prediction> predict_batch(const ModelParams& model,
                                      std::span<const EncodedInstance> instances);

// Keeps every relation instance and a seeded `keep` fraction of NoRelation.
std::vector<EncodedInstance> subsample_negatives(
    std::span<const EncodedInstance> instances, double keep,
    std::uint64_t seed);

// Header row, then one tab-separated line per epoch: epoch, mean_loss,
// train_acc, dev_macro_f1.
void write_train_log(const TrainHistory& history, std::ostream& out);

}  // namespace relcnn

#endif  // RELCNN_TRAINER_H_
