#include "relcnn/trainer.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>

#include "relcnn/metrics.h"
#include "relcnn/random.h"

namespace relcnn {

namespace {

void check_vocabulary(const ModelParams& model, const EncodedInstance& inst) {
  for (const auto& tok : inst.features) {
    for (int k = 0; k < kNumFeatures; ++k) {
      if (tok.ids[k] < 0 || tok.ids[k] >= model.embeddings.tables[k].rows) {
        throw std::invalid_argument(
            "instance " + inst.instance_id +
            " was encoded against different vocabularies than the model (" +
            std::string(feature_name(static_cast<FeatureKind>(k))) + " id " +
            std::to_string(tok.ids[k]) + ")");
      }
    }
  }
}

double dev_macro_f1(const ModelParams& model,
                    std::span<const EncodedInstance> dev) {
  auto preds = predict_batch(model, dev);
  std::vector<int> gold, guess;
  for (std::size_t i = 0; i < dev.size(); ++i) {
    gold.push_back(dev[i].label_id);
    guess.push_back(preds[i].label);
  }
  return compute_metrics(gold, guess).macro.f1;
}

}  // namespace

void validate(const TrainConfig& config) {
  validate(config.network);
  validate(config.adam);
  if (config.batch_size < 1) throw std::invalid_argument("batch size must be >= 1");
  if (config.epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  if (config.patience && *config.patience < 1) {
    throw std::invalid_argument("patience must be >= 1");
  }
  if (!(config.negative_keep > 0.0 && config.negative_keep <= 1.0)) {
    throw std::invalid_argument("NoRelation keep fraction must be in (0, 1]");
  }
}

TrainResult train(const TrainConfig& config, ModelParams initial,
                  std::span<const EncodedInstance> train_set,
                  std::span<const EncodedInstance> dev_set) {
  validate(config);
  if (train_set.empty()) throw std::invalid_argument("empty training set");
  for (const auto& inst : train_set) check_vocabulary(initial, inst);

  TrainResult result{std::move(initial), {}};
  ModelParams& model = result.model;
  AdamState adam = adam_init(model, config.adam);
  Gradients grads = Gradients::zeros_like(model);
  Rng rng(derive_seed(config.seed, 1));

  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);

  const bool early_stop = config.patience && !dev_set.empty();
  std::optional<ModelParams> best;
  double best_f1 = -1.0;
  int stale = 0;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    shuffle(order, rng);
    double loss_sum = 0.0;
    long correct = 0;
    const std::size_t n = order.size();
    for (std::size_t start = 0, batch = 0; start < n;
         start += config.batch_size, ++batch) {
      const std::size_t end = std::min(n, start + config.batch_size);
      const double scale = 1.0 / static_cast<double>(end - start);
      grads.clear();
      for (std::size_t i = start; i < end; ++i) {
        const EncodedInstance& inst = train_set[order[i]];
        ForwardCache cache = forward(inst, model, Mode::kTrain, rng);
        const double loss = cross_entropy(cache, inst.label_id);
        if (!std::isfinite(loss)) {
          throw std::runtime_error(
              "non-finite loss at epoch " + std::to_string(epoch) +
              ", batch " + std::to_string(batch) + ", instance " +
              inst.instance_id);
        }
        loss_sum += loss;
        if (cache.predicted() == inst.label_id) ++correct;
        backward(cache, inst.label_id, model, grads, scale);
      }
      adam_step(adam, grads, model);
      ++result.history.steps;
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.mean_loss = loss_sum / static_cast<double>(n);
    rec.train_accuracy = 100.0 * static_cast<double>(correct) / n;
    if (!dev_set.empty()) rec.dev_macro_f1 = dev_macro_f1(model, dev_set);
    result.history.epochs.push_back(rec);

    if (early_stop) {
      if (*rec.dev_macro_f1 > best_f1) {
        best_f1 = *rec.dev_macro_f1;
        best = model;
        stale = 0;
      } else if (++stale >= *config.patience) {
        break;
      }
    }
  }
  if (best) model = std::move(*best);
  return result;
}

std::vector<Prediction> predict_batch(
    const ModelParams& model, std::span<const EncodedInstance> instances) {
  std::vector<Prediction> out;
  out.reserve(instances.size());
  Rng unused(0);
  for (const auto& inst : instances) {
    check_vocabulary(model, inst);
    ForwardCache cache = forward(inst, model, Mode::kEval, unused);
    out.push_back({cache.predicted(), std::move(cache.probs)});
  }
  return out;
}

std::vector<EncodedInstance> subsample_negatives(
    std::span<const EncodedInstance> instances, double keep,
    std::uint64_t seed) {
  if (keep >= 1.0) return {instances.begin(), instances.end()};
  Rng rng(derive_seed(seed, 2));
  std::vector<EncodedInstance> out;
  for (const auto& inst : instances) {
    if (inst.label_id != kNoRelationId || uniform01(rng) < keep) {
      out.push_back(inst);
    }
  }
  return out;
}

void write_train_log(const TrainHistory& history, std::ostream& out) {
  char buf[128];
  out << "epoch\tmean_loss\ttrain_acc\tdev_macro_f1\n";
  for (const auto& rec : history.epochs) {
    std::snprintf(buf, sizeof buf, "%d\t%.6f\t%.2f\t", rec.epoch,
                  rec.mean_loss, rec.train_accuracy);
    out << buf;
    if (rec.dev_macro_f1) {
      out << format_percent(*rec.dev_macro_f1);
    } else {
      out << '-';
    }
    out << '\n';
  }
}

}  // namespace relcnn
