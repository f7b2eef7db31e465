#include "relcnn/cli.h"

#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"
#include "relcnn/checkpoint.h"
#include "relcnn/evaluation.h"
#include "relcnn/synthetic.h"

namespace relcnn {

namespace fs = std::filesystem;

namespace {

class MissingFile : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class BadConfig : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size()) throw BadConfig("not an integer list: " + text);
    out.push_back(v);
  }
  return out;
}

std::vector<std::vector<int>> parse_length_sets(const std::string& text) {
  std::vector<std::vector<int>> sets;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ';')) {
    auto lengths = parse_int_list(item);
    if (lengths.empty()) throw BadConfig("empty filter-length set in " + text);
    sets.push_back(std::move(lengths));
  }
  return sets;
}

void require_file(const std::string& path, const char* what) {
  if (path.empty()) throw BadConfig(std::string("--") + what + " is required");
  if (!fs::exists(path)) {
    throw MissingFile(std::string(what) + " file not found: " + path);
  }
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

ExperimentConfig experiment_config(const RunConfig& rc) {
  ExperimentConfig ec;
  ec.train.network.filter_lengths = rc.filters;
  ec.train.network.filters_per_length = rc.num_filters;
  ec.train.network.keep_prob = rc.dropout;
  ec.train.batch_size = rc.batch_size;
  ec.train.epochs = rc.epochs;
  ec.train.seed = rc.seed;
  ec.train.adam.lr = rc.lr;
  if (rc.patience > 0) ec.train.patience = rc.patience;
  ec.train.negative_keep = rc.negative_keep;
  ec.embeddings.pretrained_path = rc.embeddings;
  ec.position_clip = rc.position_clip;
  ec.folds = rc.folds;
  ec.jobs = rc.jobs;
  return ec;
}

void check_config(const RunConfig& rc) {
  if (rc.jobs < 1) throw BadConfig("--jobs must be >= 1");
  if (rc.folds < 2) throw BadConfig("--folds must be >= 2");
  if (rc.patience < 0) throw BadConfig("--patience must be >= 0");
  if (rc.position_clip < 0) throw BadConfig("--position-clip must be >= 0");
  if (rc.svm_epochs < 1) throw BadConfig("--svm-epochs must be >= 1");
  for (double c : rc.costs) {
    if (!(c > 0.0)) throw BadConfig("--costs must be positive");
  }
  try {
    validate(experiment_config(rc).train);
  } catch (const std::invalid_argument& e) {
    throw BadConfig(e.what());
  }
}

Dataset load_dataset(const RunConfig& rc) {
  require_file(rc.corpus, "corpus");
  if (!rc.embeddings.empty()) require_file(rc.embeddings, "embeddings");
  return Dataset(load_corpus(rc.corpus));
}

void write_results(const fs::path& dir, const std::string& stem,
                   std::span<const CvResult> results) {
  auto tsv = open_output(dir / (stem + ".tsv"));
  write_reports_tsv(results, tsv);
  auto json = open_output(dir / (stem + ".json"));
  write_reports_json(results, json);
}

VocabularySet vocab_for_all(const Dataset& data, int clip) {
  std::vector<std::size_t> all(data.instances().size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return build_vocabularies(data.pairs(all), clip);
}

std::vector<EncodedInstance> encode_dataset(const Dataset& data,
                                            const VocabularySet& vocabs) {
  std::vector<EncodedInstance> out;
  for (const auto& inst : data.instances()) {
    out.push_back(encode_instance(data.sentence_of(inst), inst, vocabs));
  }
  return out;
}

std::vector<EncodedInstance> encode_indices(const Dataset& data,
                                            std::span<const std::size_t> indices,
                                            const VocabularySet& vocabs) {
  std::vector<EncodedInstance> out;
  for (std::size_t i : indices) {
    const RelationInstance& inst = data.instances()[i];
    out.push_back(encode_instance(data.sentence_of(inst), inst, vocabs));
  }
  return out;
}

void cmd_synth(const RunConfig& rc, const fs::path& dir) {
  if (rc.sentences < 0 || rc.entities < 2) {
    throw BadConfig("--sentences must be >= 0 and --entities >= 2");
  }
  SyntheticOptions opt;
  opt.sentences = rc.sentences;
  opt.entities_per_sentence = rc.entities;
  opt.seed = rc.seed;
  auto corpus = open_output(dir / "corpus.jsonl");
  write_corpus(generate_synthetic_corpus(opt), corpus);
  auto vectors = open_output(dir / "vectors.txt");
  write_synthetic_vectors(vectors, rc.seed);
}

void cmd_prepare(const RunConfig& rc, const fs::path& dir) {
  Dataset data = load_dataset(rc);
  if (data.instances().empty()) throw std::runtime_error("corpus has no instances");
  VocabularySet vocabs = vocab_for_all(data, rc.position_clip);
  auto vout = open_output(dir / "vocab.json");
  save_vocabularies(vocabs, vout);
  auto iout = open_output(dir / "instances.jsonl");
  for (const auto& enc : encode_dataset(data, vocabs)) {
    nlohmann::ordered_json j;
    j["id"] = enc.instance_id;
    j["label"] = std::string(label_name(label_from_id(enc.label_id)));
    nlohmann::ordered_json tokens = nlohmann::ordered_json::array();
    for (const auto& t : enc.features) {
      tokens.push_back(std::vector<int>(t.ids.begin(), t.ids.end()));
    }
    j["tokens"] = std::move(tokens);
    iout << j.dump() << '\n';
  }
}

void cmd_train(const RunConfig& rc, const fs::path& dir) {
  Dataset data = load_dataset(rc);
  if (data.instances().empty()) throw std::runtime_error("corpus has no instances");
  const ExperimentConfig ec = experiment_config(rc);
  std::vector<std::size_t> train_idx(data.instances().size()), dev_idx;
  std::iota(train_idx.begin(), train_idx.end(), 0);
  if (ec.train.patience) {
    DevSplit ds = dev_holdout(data, train_idx, rc.seed);
    train_idx = std::move(ds.train);
    dev_idx = std::move(ds.dev);
  }
  VocabularySet vocabs =
      build_vocabularies(data.pairs(train_idx), rc.position_clip);
  auto train_set = encode_indices(data, train_idx, vocabs);
  const auto dev_set = encode_indices(data, dev_idx, vocabs);
  if (ec.train.negative_keep < 1.0) {
    train_set = subsample_negatives(train_set, ec.train.negative_keep, rc.seed);
  }
  ModelParams init =
      init_model(make_embedding_set(vocabs, ec.embeddings, rc.seed),
                 ec.train.network, rc.seed);
  TrainResult result = train(ec.train, std::move(init), train_set, dev_set);

  auto vout = open_output(dir / "vocab.json");
  save_vocabularies(vocabs, vout);
  auto mout = open_output(dir / "model.json");
  save_checkpoint(result.model, vocabs, nullptr, mout);
  auto log = open_output(dir / "train.log");
  write_train_log(result.history, log);
}

void cmd_eval(const RunConfig& rc, const fs::path& dir) {
  const std::string model_path =
      rc.model.empty() ? (dir / "model.json").string() : rc.model;
  const std::string vocab_path =
      rc.vocab.empty() ? (dir / "vocab.json").string() : rc.vocab;
  require_file(model_path, "model");
  require_file(vocab_path, "vocab");
  Dataset data = load_dataset(rc);

  std::ifstream vin(vocab_path);
  const VocabularySet vocabs = load_vocabularies(vin);
  std::ifstream min(model_path);
  const Checkpoint ck = load_checkpoint(min, vocabs);

  const auto instances = encode_dataset(data, vocabs);
  const auto preds = predict_batch(ck.model, instances);
  std::vector<int> gold, guess;
  auto pout = open_output(dir / "predictions.tsv");
  pout << "instance\tgold\tpredicted";
  for (int k = 0; k < kNumClasses; ++k) {
    pout << "\tp_" << label_name(label_from_id(k));
  }
  pout << '\n';
  char buf[32];
  for (std::size_t i = 0; i < instances.size(); ++i) {
    gold.push_back(instances[i].label_id);
    guess.push_back(preds[i].label);
    pout << instances[i].instance_id << '\t'
         << label_name(label_from_id(instances[i].label_id)) << '\t'
         << label_name(label_from_id(preds[i].label));
    for (double p : preds[i].probs) {
      std::snprintf(buf, sizeof buf, "\t%.6f", p);
      pout << buf;
    }
    pout << '\n';
  }
  CvResult r;
  r.name = "eval";
  r.mean = compute_metrics(gold, guess);
  r.mean.config = r.name;
  write_results(dir, "eval_report", std::span(&r, 1));
}

void cmd_cv(const RunConfig& rc, const fs::path& dir, std::ostream& out) {
  Dataset data = load_dataset(rc);
  CvResult r = cross_validate(data, experiment_config(rc));
  write_results(dir, "cv_report", std::span(&r, 1));
  auto table = open_output(dir / "cv_table.txt");
  write_summary_table(std::span(&r, 1), "Filter length", table);
  table << '\n';
  write_class_table(r, table);
  write_summary_table(std::span(&r, 1), "Filter length", out);
}

void cmd_sweep(const RunConfig& rc, const fs::path& dir, std::ostream& out) {
  Dataset data = load_dataset(rc);
  auto rows = sweep_filters(data, experiment_config(rc), rc.length_sets);
  write_results(dir, "sweep_report", rows);
  auto table = open_output(dir / "sweep_table.txt");
  write_summary_table(rows, "Filter length", table);
  write_summary_table(rows, "Filter length", out);
}

void cmd_ablate(const RunConfig& rc, const fs::path& dir, std::ostream& out) {
  Dataset data = load_dataset(rc);
  auto rows = ablate_features(data, experiment_config(rc));
  std::vector<CvResult> results;
  for (const auto& row : rows) results.push_back(row.result);
  write_results(dir, "ablation_report", results);
  auto table = open_output(dir / "ablation_table.txt");
  for (std::ostream* os : {static_cast<std::ostream*>(&table), &out}) {
    *os << "Name\td\tP\tR\tF\n";
    for (const auto& row : rows) {
      *os << row.name << '\t' << row.token_dim << '\t'
          << format_percent(row.result.mean.macro.precision) << '\t'
          << format_percent(row.result.mean.macro.recall) << '\t'
          << format_percent(row.result.mean.macro.f1) << '\n';
    }
  }
}

void cmd_baseline(const RunConfig& rc, const fs::path& dir, std::ostream& out) {
  Dataset data = load_dataset(rc);
  SvmExperiment se;
  se.costs = rc.costs;
  se.folds = rc.folds;
  se.epochs = rc.svm_epochs;
  se.seed = rc.seed;
  auto rows = svm_cross_validate(data, se);
  write_results(dir, "baseline_report", rows);
  auto table = open_output(dir / "baseline_table.txt");
  write_summary_table(rows, "Name", table);
  write_summary_table(rows, "Name", out);
  auto dump = open_output(dir / "sparse_features.txt");
  write_dataset_sparse_dump(data, dump);
}

struct Flags {
  RunConfig values;
  std::string config_path;
  std::string length_sets;
};

void add_flags(CLI::App* sub, Flags& f, const std::string& command) {
  RunConfig& v = f.values;
  sub->add_option("--config", f.config_path, "JSON config mirroring flag names");
  sub->add_option("--out", v.out, "Output directory");
  sub->add_option("--seed", v.seed, "Random seed");
  if (command == "synth") {
    sub->add_option("--sentences", v.sentences, "Sentences to generate");
    sub->add_option("--entities", v.entities, "Entities per sentence");
    return;
  }
  sub->add_option("--corpus", v.corpus, "Corpus JSONL file");
  sub->add_option("--position-clip", v.position_clip, "Position clip bound");
  if (command == "prepare") return;
  if (command == "eval") {
    sub->add_option("--model", v.model, "Checkpoint (default <out>/model.json)");
    sub->add_option("--vocab", v.vocab, "Vocabularies (default <out>/vocab.json)");
    return;
  }
  sub->add_option("--folds", v.folds, "Cross-validation folds");
  sub->add_option("--jobs", v.jobs, "Folds trained concurrently");
  if (command == "baseline") {
    sub->add_option("--costs", v.costs, "SVM cost values")->delimiter(',');
    sub->add_option("--svm-epochs", v.svm_epochs, "Passes per SVM problem");
    return;
  }
  sub->add_option("--embeddings", v.embeddings, "word2vec text vectors");
  sub->add_option("--filters", v.filters, "Filter lengths, comma separated")
      ->delimiter(',');
  sub->add_option("--num-filters", v.num_filters, "Filters per length");
  sub->add_option("--dropout", v.dropout, "Dropout keep-probability");
  sub->add_option("--batch-size", v.batch_size, "Minibatch size");
  sub->add_option("--epochs", v.epochs, "Training epochs");
  sub->add_option("--lr", v.lr, "Adam learning rate");
  sub->add_option("--patience", v.patience, "Early-stop patience (0: off)");
  sub->add_option("--negative-keep", v.negative_keep,
                  "Fraction of NoRelation training instances kept");
  if (command == "sweep") {
    sub->add_option("--length-sets", f.length_sets,
                    "Filter-length sets, e.g. 3;4;4,6");
  }
}

}  // namespace

nlohmann::ordered_json to_json(const RunConfig& c) {
  nlohmann::ordered_json j;
  j["command"] = c.command;
  j["corpus"] = c.corpus;
  j["embeddings"] = c.embeddings;
  j["out"] = c.out;
  j["model"] = c.model;
  j["vocab"] = c.vocab;
  j["filters"] = c.filters;
  j["num-filters"] = c.num_filters;
  j["dropout"] = c.dropout;
  j["batch-size"] = c.batch_size;
  j["epochs"] = c.epochs;
  j["lr"] = c.lr;
  j["seed"] = c.seed;
  j["jobs"] = c.jobs;
  j["folds"] = c.folds;
  j["patience"] = c.patience;
  j["negative-keep"] = c.negative_keep;
  j["position-clip"] = c.position_clip;
  j["length-sets"] = c.length_sets;
  j["costs"] = c.costs;
  j["svm-epochs"] = c.svm_epochs;
  j["sentences"] = c.sentences;
  j["entities"] = c.entities;
  return j;
}

void apply_json(RunConfig& c, const nlohmann::json& j) {
  if (!j.is_object()) throw BadConfig("config must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    const auto& v = it.value();
    try {
      if (k == "command") c.command = v.get<std::string>();
      else if (k == "corpus") c.corpus = v.get<std::string>();
      else if (k == "embeddings") c.embeddings = v.get<std::string>();
      else if (k == "out") c.out = v.get<std::string>();
      else if (k == "model") c.model = v.get<std::string>();
      else if (k == "vocab") c.vocab = v.get<std::string>();
      else if (k == "filters")
        c.filters = v.is_string() ? parse_int_list(v.get<std::string>())
                                  : v.get<std::vector<int>>();
      else if (k == "num-filters") c.num_filters = v.get<int>();
      else if (k == "dropout") c.dropout = v.get<double>();
      else if (k == "batch-size") c.batch_size = v.get<int>();
      else if (k == "epochs") c.epochs = v.get<int>();
      else if (k == "lr") c.lr = v.get<double>();
      else if (k == "seed") c.seed = v.get<std::uint64_t>();
      else if (k == "jobs") c.jobs = v.get<int>();
      else if (k == "folds") c.folds = v.get<int>();
      else if (k == "patience") c.patience = v.get<int>();
      else if (k == "negative-keep") c.negative_keep = v.get<double>();
      else if (k == "position-clip") c.position_clip = v.get<int>();
      else if (k == "length-sets")
        c.length_sets = v.is_string() ? parse_length_sets(v.get<std::string>())
                                      : v.get<std::vector<std::vector<int>>>();
      else if (k == "costs") c.costs = v.get<std::vector<double>>();
      else if (k == "svm-epochs") c.svm_epochs = v.get<int>();
      else if (k == "sentences") c.sentences = v.get<int>();
      else if (k == "entities") c.entities = v.get<int>();
      else throw BadConfig("unknown config key '" + k + "'");
    } catch (const nlohmann::json::exception&) {
      throw BadConfig("config key '" + k + "' has the wrong type");
    }
  }
}

int run_cli(std::span<const std::string> args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Relation extraction with a convolutional network", "relcnn"};
  app.require_subcommand(1);
  const std::map<std::string, std::string> commands = {
      {"prepare", "Build vocabularies and encode instances"},
      {"train", "Train a model on the whole corpus"},
      {"eval", "Score a trained model on a corpus"},
      {"cv", "Cross-validate one configuration"},
      {"sweep", "Cross-validate a list of filter-length sets"},
      {"ablate", "Feature-group ablation"},
      {"baseline", "Cross-validated linear SVM baseline"},
      {"synth", "Write a synthetic corpus and word vectors"},
  };
  std::map<std::string, Flags> flags;
  for (const auto& [name, help] : commands) {
    add_flags(app.add_subcommand(name, help), flags[name], name);
  }

  std::vector<std::string> argv(args.rbegin(), args.rend());
  try {
    app.parse(argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  CLI::App* sub = app.get_subcommands().front();
  const std::string command = sub->get_name();
  Flags& f = flags[command];

  try {
    RunConfig rc;
    if (!f.config_path.empty()) {
      require_file(f.config_path, "config");
      std::ifstream in(f.config_path);
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(in);
      } catch (const nlohmann::json::exception& e) {
        throw BadConfig(std::string("config file: ") + e.what());
      }
      apply_json(rc, j);
      if (!rc.command.empty() && rc.command != command) {
        throw BadConfig("config was written for '" + rc.command + "'");
      }
    }
    const nlohmann::ordered_json given = to_json(f.values);
    for (const auto* opt : sub->get_options()) {
      if (opt->count() == 0) continue;
      const std::string name = opt->get_name(false, true).substr(2);
      if (name == "config" || name == "help") continue;
      if (name == "length-sets") {
        rc.length_sets = parse_length_sets(f.length_sets);
      } else {
        apply_json(rc, nlohmann::json{{name, given.at(name)}});
      }
    }
    rc.command = command;
    check_config(rc);

    const fs::path dir(rc.out);
    fs::create_directories(dir);
    {
      auto run = open_output(dir / "run.json");
      run << to_json(rc).dump(1) << '\n';
    }

    if (command == "synth") cmd_synth(rc, dir);
    else if (command == "prepare") cmd_prepare(rc, dir);
    else if (command == "train") cmd_train(rc, dir);
    else if (command == "eval") cmd_eval(rc, dir);
    else if (command == "cv") cmd_cv(rc, dir, out);
    else if (command == "sweep") cmd_sweep(rc, dir, out);
    else if (command == "ablate") cmd_ablate(rc, dir, out);
    else if (command == "baseline") cmd_baseline(rc, dir, out);
  } catch (const MissingFile& e) {
    err << "error: " << e.what() << '\n';
    return kExitMissingFile;
  } catch (const BadConfig& e) {
    err << "error: " << e.what() << '\n';
    return kExitBadConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitOk;
}

}  // namespace relcnn
