#include "relcnn/checkpoint.h"

#include <cinttypes>
#include <cstdio>
#include <istream>
#include <ostream>

#include "json.hpp"

namespace relcnn {

namespace {

using OrderedJson = nlohmann::ordered_json;
constexpr const char* kFormat = "relcnn-checkpoint-1";

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
  return buf;
}

std::vector<double> doubles(const nlohmann::json& j, std::size_t expected,
                            const char* what) {
  auto v = j.get<std::vector<double>>();
  if (v.size() != expected) {
    throw std::runtime_error(std::string("checkpoint: ") + what +
                             " has " + std::to_string(v.size()) +
                             " values, expected " + std::to_string(expected));
  }
  return v;
}

OrderedJson moments_json(const std::vector<Moments>& list) {
  OrderedJson arr = OrderedJson::array();
  for (const auto& mom : list) {
    OrderedJson e;
    e["m"] = mom.m;
    e["v"] = mom.v;
    arr.push_back(std::move(e));
  }
  return arr;
}

}  // namespace

void save_checkpoint(const ModelParams& model, const VocabularySet& vocabs,
                     const AdamState* adam, std::ostream& out) {
  OrderedJson root;
  root["format"] = kFormat;

  OrderedJson config;
  std::vector<int> lengths;
  for (const auto& b : model.banks) lengths.push_back(b.width);
  config["filter_lengths"] = lengths;
  config["filters_per_length"] =
      model.banks.empty() ? 0 : model.banks.front().filters;
  config["keep_prob"] = model.keep_prob;
  config["token_dim"] = model.embeddings.token_dim();
  config["enabled"] = std::vector<bool>(model.embeddings.enabled.begin(),
                                        model.embeddings.enabled.end());
  root["config"] = std::move(config);

  OrderedJson hashes;
  for (int k = 0; k < kNumFeatures; ++k) {
    auto kind = static_cast<FeatureKind>(k);
    hashes[std::string(feature_name(kind))] = hex64(vocabs.hash(kind));
  }
  root["vocab_hashes"] = std::move(hashes);

  OrderedJson tables = OrderedJson::array();
  for (int k = 0; k < kNumFeatures; ++k) {
    const auto& t = model.embeddings.tables[k];
    OrderedJson e;
    e["feature"] = std::string(feature_name(static_cast<FeatureKind>(k)));
    e["rows"] = t.rows;
    e["dim"] = t.dim;
    e["trainable"] = t.trainable;
    e["values"] = t.values;
    tables.push_back(std::move(e));
  }
  root["embeddings"] = std::move(tables);

  OrderedJson banks = OrderedJson::array();
  for (const auto& b : model.banks) {
    OrderedJson e;
    e["width"] = b.width;
    e["filters"] = b.filters;
    e["input_dim"] = b.input_dim;
    e["weights"] = b.weights;
    e["bias"] = b.bias;
    banks.push_back(std::move(e));
  }
  root["banks"] = std::move(banks);

  OrderedJson dense;
  dense["outputs"] = model.dense.outputs;
  dense["inputs"] = model.dense.inputs;
  dense["weights"] = model.dense.weights;
  dense["bias"] = model.dense.bias;
  root["dense"] = std::move(dense);

  if (adam) {
    OrderedJson a;
    a["step"] = adam->step;
    a["lr"] = adam->config.lr;
    a["beta1"] = adam->config.beta1;
    a["beta2"] = adam->config.beta2;
    a["eps"] = adam->config.eps;
    a["dense"] = moments_json(adam->dense);
    a["embeddings"] = moments_json(adam->embeddings);
    root["adam"] = std::move(a);
  }
  out << root.dump() << '\n';
}

Checkpoint load_checkpoint(std::istream& in, const VocabularySet& vocabs) {
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("checkpoint: ") + e.what());
  }
  Checkpoint ck;
  try {
    if (root.at("format").get<std::string>() != kFormat) {
      throw std::runtime_error("checkpoint: unsupported format");
    }
    for (int k = 0; k < kNumFeatures; ++k) {
      auto kind = static_cast<FeatureKind>(k);
      const std::string name(feature_name(kind));
      if (root.at("vocab_hashes").at(name).get<std::string>() !=
          hex64(vocabs.hash(kind))) {
        throw CheckpointMismatch("checkpoint was trained with a different " +
                                 name + " vocabulary");
      }
    }

    ModelParams& m = ck.model;
    const auto& config = root.at("config");
    m.keep_prob = config.at("keep_prob").get<double>();
    auto enabled = config.at("enabled").get<std::vector<bool>>();
    if (enabled.size() != kNumFeatures) {
      throw std::runtime_error("checkpoint: feature mask must have 6 flags");
    }
    for (int k = 0; k < kNumFeatures; ++k) m.embeddings.enabled[k] = enabled[k];

    const auto& tables = root.at("embeddings");
    if (tables.size() != kNumFeatures) {
      throw std::runtime_error("checkpoint: expected 6 embedding tables");
    }
    for (int k = 0; k < kNumFeatures; ++k) {
      const auto& e = tables.at(k);
      EmbeddingMatrix& t = m.embeddings.tables[k];
      t.rows = e.at("rows").get<int>();
      t.dim = e.at("dim").get<int>();
      t.trainable = e.at("trainable").get<bool>();
      t.values = doubles(e.at("values"),
                         static_cast<std::size_t>(t.rows) * t.dim, "embedding");
      if (t.rows != vocabs.vocabs[k].size()) {
        throw CheckpointMismatch("checkpoint embedding table size differs "
                                 "from the vocabulary");
      }
    }
    const int d = m.embeddings.token_dim();
    if (config.at("token_dim").get<int>() != d) {
      throw std::runtime_error("checkpoint: token dimension mismatch");
    }

    for (const auto& e : root.at("banks")) {
      ConvFilterBank b;
      b.width = e.at("width").get<int>();
      b.filters = e.at("filters").get<int>();
      b.input_dim = e.at("input_dim").get<int>();
      if (b.input_dim != d) {
        throw std::runtime_error("checkpoint: filter bank input width mismatch");
      }
      b.weights = doubles(e.at("weights"),
                          static_cast<std::size_t>(b.filters) * b.window_size(),
                          "filter weights");
      b.bias = doubles(e.at("bias"), b.filters, "filter bias");
      m.banks.push_back(std::move(b));
    }
    const auto& dense = root.at("dense");
    m.dense.outputs = dense.at("outputs").get<int>();
    m.dense.inputs = dense.at("inputs").get<int>();
    if (m.dense.inputs != m.pooled_size() || m.dense.outputs != kNumClasses) {
      throw std::runtime_error("checkpoint: dense layer shape mismatch");
    }
    m.dense.weights = doubles(
        dense.at("weights"),
        static_cast<std::size_t>(m.dense.outputs) * m.dense.inputs,
        "dense weights");
    m.dense.bias = doubles(dense.at("bias"), m.dense.outputs, "dense bias");

    if (root.contains("adam")) {
      const auto& a = root.at("adam");
      AdamConfig cfg{a.at("lr").get<double>(), a.at("beta1").get<double>(),
                     a.at("beta2").get<double>(), a.at("eps").get<double>()};
      AdamState s = adam_init(m, cfg);
      s.step = a.at("step").get<std::int64_t>();
      auto read = [](const nlohmann::json& arr, std::vector<Moments>& dst) {
        if (arr.size() != dst.size()) {
          throw std::runtime_error("checkpoint: optimizer state shape mismatch");
        }
        for (std::size_t i = 0; i < dst.size(); ++i) {
          dst[i].m = doubles(arr.at(i).at("m"), dst[i].m.size(), "moment");
          dst[i].v = doubles(arr.at(i).at("v"), dst[i].v.size(), "moment");
        }
      };
      read(a.at("dense"), s.dense);
      read(a.at("embeddings"), s.embeddings);
      ck.adam = std::move(s);
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("checkpoint: ") + e.what());
  }
  return ck;
}

}  // namespace relcnn
