#include "relcnn/evaluation.h"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "json.hpp"

namespace relcnn {

namespace {

std::vector<EncodedInstance> encode_all(const Dataset& data,
                                        std::span<const std::size_t> indices,
                                        const VocabularySet& vocabs) {
  std::vector<EncodedInstance> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) {
    const RelationInstance& inst = data.instances()[i];
    out.push_back(encode_instance(data.sentence_of(inst), inst, vocabs));
  }
  return out;
}

MetricsReport run_fold(const Dataset& data, const ExperimentConfig& config,
                       const FoldSplit& split, int fold) {
  auto train_idx = split.train_indices(fold);
  const auto test_idx = split.test_indices(fold);
  const std::uint64_t seed = config.train.seed + static_cast<std::uint64_t>(fold);
  std::vector<std::size_t> dev_idx;
  if (config.train.patience) {
    DevSplit ds = dev_holdout(data, train_idx, seed);
    train_idx = std::move(ds.train);
    dev_idx = std::move(ds.dev);
  }

  const auto pairs = data.pairs(train_idx);
  VocabularySet vocabs = build_vocabularies(pairs, config.position_clip);
  auto train_set = encode_all(data, train_idx, vocabs);
  if (config.train.negative_keep < 1.0) {
    train_set = subsample_negatives(train_set, config.train.negative_keep, seed);
  }
  const auto test_set = encode_all(data, test_idx, vocabs);
  const auto dev_set = encode_all(data, dev_idx, vocabs);

  TrainConfig tc = config.train;
  tc.seed = seed;
  ModelParams init = init_model(
      make_embedding_set(vocabs, config.embeddings, seed), tc.network, seed);
  TrainResult trained = train(tc, std::move(init), train_set, dev_set);

  const auto preds = predict_batch(trained.model, test_set);
  std::vector<int> gold = data.labels(test_idx);
  std::vector<int> guess;
  guess.reserve(preds.size());
  for (const auto& p : preds) guess.push_back(p.label);
  MetricsReport r = compute_metrics(gold, guess);
  r.fold = fold;
  r.config = config.name;
  return r;
}

// Runs task(f) for every fold on up to `jobs` threads; results by fold.
template <class Task>
std::vector<MetricsReport> for_each_fold(int folds, int jobs, Task task) {
  std::vector<MetricsReport> reports(folds);
  std::vector<std::exception_ptr> errors(folds);
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int f = next++; f < folds; f = next++) {
      try {
        reports[f] = task(f);
      } catch (...) {
        errors[f] = std::current_exception();
      }
    }
  };
  const int threads = std::clamp(jobs, 1, folds);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return reports;
}

const char* row_class_name(int k) {
  static const char* names[] = {"TeCP", "TrCP", "PIP", "TrAP", "TeRP", "None"};
  return names[k];
}

void write_tsv_rows(const std::string& config, const std::string& fold,
                    const MetricsReport& r, std::ostream& out) {
  auto row = [&](const char* cls, const ClassMetrics& m) {
    out << config << '\t' << fold << '\t' << cls << '\t'
        << format_percent(m.precision) << '\t' << format_percent(m.recall)
        << '\t' << format_percent(m.f1) << '\n';
  };
  for (int k = 0; k < kNumClasses; ++k) row(row_class_name(k), r.per_class[k]);
  row("macro", r.macro);
  row("micro", r.micro);
}

}  // namespace

Dataset::Dataset(Corpus corpus) : corpus_(std::move(corpus)) {
  for (std::size_t i = 0; i < corpus_.sentences.size(); ++i) {
    sentence_index_.emplace(corpus_.sentences[i].id, i);
  }
  instances_ = corpus_instances(corpus_);
}

const Sentence& Dataset::sentence_of(const RelationInstance& inst) const {
  auto it = sentence_index_.find(inst.sentence_id);
  if (it == sentence_index_.end()) {
    throw std::out_of_range("unknown sentence id " + inst.sentence_id);
  }
  return corpus_.sentences[it->second];
}

std::vector<SentencePair> Dataset::pairs(
    std::span<const std::size_t> indices) const {
  std::vector<SentencePair> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) {
    out.push_back({&sentence_of(instances_[i]), &instances_[i]});
  }
  return out;
}

std::vector<int> Dataset::labels(std::span<const std::size_t> indices) const {
  std::vector<int> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(label_id(instances_[i].label));
  return out;
}

DevSplit dev_holdout(const Dataset& data, std::span<const std::size_t> indices,
                     std::uint64_t seed) {
  std::vector<RelationInstance> subset;
  subset.reserve(indices.size());
  for (std::size_t i : indices) subset.push_back(data.instances()[i]);
  const int k = static_cast<int>(std::min<std::size_t>(10, subset.size()));
  const FoldSplit split = split_folds(subset, k, derive_seed(seed, 3));
  DevSplit out;
  for (std::size_t j = 0; j < subset.size(); ++j) {
    (split.assignments[j] == 0 ? out.dev : out.train).push_back(indices[j]);
  }
  return out;
}

std::string filter_key(std::span<const int> lengths) {
  std::string key = "[";
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    if (i) key += ",";
    key += std::to_string(lengths[i]);
  }
  return key + "]";
}

CvResult cross_validate(const Dataset& data, const ExperimentConfig& config) {
  validate(config.train);
  ExperimentConfig cfg = config;
  if (cfg.name.empty()) cfg.name = filter_key(cfg.train.network.filter_lengths);

  CvResult result;
  result.name = cfg.name;
  result.split = split_folds(data.instances(), cfg.folds, cfg.train.seed);
  result.folds = for_each_fold(cfg.folds, cfg.jobs, [&](int f) {
    return run_fold(data, cfg, result.split, f);
  });
  result.mean = average_reports(result.folds);
  result.mean.config = cfg.name;
  return result;
}

std::vector<CvResult> sweep_filters(const Dataset& data,
                                    const ExperimentConfig& base,
                                    const std::vector<std::vector<int>>& sets) {
  std::vector<CvResult> rows;
  for (const auto& lengths : sets) {
    if (lengths.empty()) throw std::invalid_argument("empty filter-length set");
    ExperimentConfig cfg = base;
    cfg.train.network.filter_lengths = lengths;
    cfg.name = filter_key(lengths);
    rows.push_back(cross_validate(data, cfg));
  }
  return rows;
}

std::vector<AblationRow> ablate_features(const Dataset& data,
                                         const ExperimentConfig& base) {
  struct Variant {
    const char* suffix;
    FeatureMask mask;
  };
  const Variant variants[] = {
      {"T", {true, false, false, false, false, true}},
      {"T + (P1+P2)", {true, true, true, false, false, true}},
      {"T + (P1+P2) + (PoS+Chunk)", kAllFeatures},
  };
  std::vector<std::pair<std::string, std::string>> vector_kinds = {{"RV", ""}};
  if (!base.embeddings.pretrained_path.empty()) {
    vector_kinds.emplace_back("WV", base.embeddings.pretrained_path);
  }

  std::vector<AblationRow> rows;
  for (const auto& [kind, path] : vector_kinds) {
    for (const auto& v : variants) {
      ExperimentConfig cfg = base;
      cfg.embeddings.pretrained_path = path;
      cfg.embeddings.enabled = v.mask;
      cfg.name = kind + " + " + v.suffix;
      AblationRow row;
      row.name = cfg.name;
      for (int k = 0; k < kNumFeatures; ++k) {
        if (v.mask[k]) {
          row.token_dim +=
              k == 0 ? cfg.embeddings.word_dim : cfg.embeddings.feature_dim;
        }
      }
      row.result = cross_validate(data, cfg);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::string svm_key(double cost) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "SVM (Linear, C=%g)", cost);
  return buf;
}

std::vector<CvResult> svm_cross_validate(const Dataset& data,
                                         const SvmExperiment& config) {
  const auto& instances = data.instances();
  std::vector<NamedFeatures> named;
  named.reserve(instances.size());
  for (const auto& inst : instances) {
    named.push_back(extract_sparse_features(data.sentence_of(inst), inst));
  }
  const FoldSplit split = split_folds(instances, config.folds, config.seed);

  std::vector<CvResult> results(config.costs.size());
  for (std::size_t c = 0; c < config.costs.size(); ++c) {
    results[c].name = svm_key(config.costs[c]);
    results[c].split = split;
  }
  for (int f = 0; f < config.folds; ++f) {
    const auto train_idx = split.train_indices(f);
    const auto test_idx = split.test_indices(f);
    std::vector<NamedFeatures> train_named;
    for (std::size_t i : train_idx) train_named.push_back(named[i]);
    const FeatureSpace space = FeatureSpace::build(train_named);
    std::vector<SparseVector> train_x, test_x;
    for (const auto& nf : train_named) train_x.push_back(space.vectorize(nf));
    for (std::size_t i : test_idx) test_x.push_back(space.vectorize(named[i]));
    const auto train_y = data.labels(train_idx);
    const auto test_y = data.labels(test_idx);

    for (std::size_t c = 0; c < config.costs.size(); ++c) {
      SvmConfig sc;
      sc.cost = config.costs[c];
      sc.epochs = config.epochs;
      sc.seed = config.seed + static_cast<std::uint64_t>(f);
      const LinearSvmModel model = train_svm(train_x, train_y, sc);
      std::vector<int> guess;
      for (const auto& x : test_x) guess.push_back(predict_svm(model, x));
      MetricsReport r = compute_metrics(test_y, guess);
      r.fold = f;
      r.config = results[c].name;
      results[c].folds.push_back(r);
    }
  }
  for (auto& r : results) {
    r.mean = average_reports(r.folds);
    r.mean.config = r.name;
  }
  return results;
}

void write_dataset_sparse_dump(const Dataset& data, std::ostream& out) {
  std::vector<NamedFeatures> named;
  std::vector<int> labels;
  std::vector<std::string> ids;
  for (const auto& inst : data.instances()) {
    named.push_back(extract_sparse_features(data.sentence_of(inst), inst));
    labels.push_back(label_id(inst.label));
    ids.push_back(inst.id());
  }
  const FeatureSpace space = FeatureSpace::build(named);
  std::vector<SparseVector> vectors;
  for (const auto& nf : named) vectors.push_back(space.vectorize(nf));
  write_sparse_dump(vectors, labels, ids, out);
}

void write_reports_tsv(std::span<const CvResult> results, std::ostream& out) {
  out << "config\tfold\tclass\tprecision\trecall\tf1\n";
  for (const auto& r : results) {
    for (const auto& f : r.folds) {
      write_tsv_rows(r.name, std::to_string(f.fold), f, out);
    }
    write_tsv_rows(r.name, "mean", r.mean, out);
  }
}

void write_reports_json(std::span<const CvResult> results, std::ostream& out) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& r : results) {
    nlohmann::ordered_json e;
    e["config"] = r.name;
    nlohmann::ordered_json folds = nlohmann::ordered_json::array();
    for (const auto& f : r.folds) folds.push_back(report_to_json(f));
    e["folds"] = std::move(folds);
    e["mean"] = report_to_json(r.mean);
    arr.push_back(std::move(e));
  }
  out << arr.dump(1) << '\n';
}

std::vector<CvResult> read_reports_json(std::istream& in) {
  const nlohmann::json arr = nlohmann::json::parse(in);
  std::vector<CvResult> results;
  for (const auto& e : arr) {
    CvResult r;
    r.name = e.at("config").get<std::string>();
    for (const auto& f : e.at("folds")) r.folds.push_back(report_from_json(f));
    r.mean = report_from_json(e.at("mean"));
    results.push_back(std::move(r));
  }
  return results;
}

void write_summary_table(std::span<const CvResult> results,
                         const std::string& key_header, std::ostream& out) {
  out << key_header << "\tPrecision\tRecall\tF Score\n";
  for (const auto& r : results) {
    out << r.name << '\t' << format_percent(r.mean.macro.precision) << '\t'
        << format_percent(r.mean.macro.recall) << '\t'
        << format_percent(r.mean.macro.f1) << '\n';
  }
}

void write_class_table(const CvResult& result, std::ostream& out) {
  out << "Name\tPrecision\tRecall\tF Score\n";
  for (int k = 0; k < kNumRelationClasses; ++k) {
    const ClassMetrics& m = result.mean.per_class[k];
    out << row_class_name(k) << '\t' << format_percent(m.precision) << '\t'
        << format_percent(m.recall) << '\t' << format_percent(m.f1) << '\n';
  }
}

}  // namespace relcnn
