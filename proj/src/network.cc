#include "relcnn/network.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>
#include <string>

namespace relcnn {

namespace {

// Four independent partial sums; the summation order is fixed, so results
// do not depend on how many windows are evaluated.
double dot(const double* a, const double* b, int n) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  int i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  for (; i < n; ++i) s0 += a[i] * b[i];
  return (s0 + s1) + (s2 + s3);
}

void fill_uniform(std::vector<double>& v, double scale, Rng& rng) {
  for (double& x : v) x = uniform(rng, -scale, scale);
}

int real_length_of(const EncodedInstance& inst) {
  int n = 0;
  while (n < inst.length() &&
         inst.features[n].id(FeatureKind::kWord) != 0) {
    ++n;
  }
  return n;
}

}  // namespace

int ModelParams::pooled_size() const {
  int l = 0;
  for (const auto& b : banks) l += b.filters;
  return l;
}

int ModelParams::max_width() const {
  int c = 0;
  for (const auto& b : banks) c = std::max(c, b.width);
  return c;
}

void validate(const NetworkConfig& config) {
  if (config.filter_lengths.empty()) {
    throw std::invalid_argument("at least one filter length is required");
  }
  std::set<int> seen;
  for (int c : config.filter_lengths) {
    if (c < 1) throw std::invalid_argument("filter length must be >= 1");
    if (!seen.insert(c).second) {
      throw std::invalid_argument("filter lengths must be distinct");
    }
  }
  if (config.filters_per_length < 1) {
    throw std::invalid_argument("filters per length must be >= 1");
  }
  if (!(config.keep_prob > 0.0 && config.keep_prob <= 1.0)) {
    throw std::invalid_argument("dropout keep-probability must be in (0, 1]");
  }
}

ModelParams init_model(EmbeddingSet embeddings, const NetworkConfig& config,
                       std::uint64_t seed) {
  validate(config);
  ModelParams p;
  p.embeddings = std::move(embeddings);
  p.keep_prob = config.keep_prob;
  const int d = p.embeddings.token_dim();
  Rng rng(derive_seed(seed, 100));
  for (int c : config.filter_lengths) {
    ConvFilterBank bank;
    bank.width = c;
    bank.filters = config.filters_per_length;
    bank.input_dim = d;
    bank.weights.resize(static_cast<std::size_t>(bank.filters) *
                        bank.window_size());
    bank.bias.assign(bank.filters, 0.0);
    fill_uniform(bank.weights,
                 std::sqrt(6.0 / (bank.window_size() + bank.filters)), rng);
    p.banks.push_back(std::move(bank));
  }
  p.dense.outputs = kNumClasses;
  p.dense.inputs = p.pooled_size();
  p.dense.weights.resize(static_cast<std::size_t>(p.dense.outputs) *
                         p.dense.inputs);
  p.dense.bias.assign(p.dense.outputs, 0.0);
  fill_uniform(p.dense.weights,
               std::sqrt(6.0 / (p.dense.inputs + p.dense.outputs)), rng);
  return p;
}

std::vector<std::uint8_t> valid_windows(int padded_length, int real_length,
                                        int width) {
  const int windows = padded_length - width + 1;
  std::vector<std::uint8_t> valid(std::max(windows, 0), 0);
  if (windows <= 0) return valid;
  if (real_length < width) {
    valid[0] = 1;
  } else {
    for (int i = 0; i + width <= real_length && i < windows; ++i) valid[i] = 1;
  }
  return valid;
}

std::vector<double> conv_forward(std::span<const double> x, int length,
                                 const ConvFilterBank& bank,
                                 std::span<const std::uint8_t> valid) {
  const int windows = length - bank.width + 1;
  if (windows < 1) {
    throw std::invalid_argument("sequence of " + std::to_string(length) +
                                " tokens is shorter than filter width " +
                                std::to_string(bank.width));
  }
  if (x.size() != static_cast<std::size_t>(length) * bank.input_dim) {
    throw std::invalid_argument("convolution input has the wrong size");
  }
  const int ws = bank.window_size();
  std::vector<double> h(static_cast<std::size_t>(windows) * bank.filters, 0.0);
  for (int i = 0; i < windows; ++i) {
    if (!valid.empty() && !valid[i]) continue;
    const double* window = x.data() + static_cast<std::size_t>(i) * bank.input_dim;
    double* out = h.data() + static_cast<std::size_t>(i) * bank.filters;
    for (int k = 0; k < bank.filters; ++k) {
      const double a =
          dot(bank.weights.data() + static_cast<std::size_t>(k) * ws, window,
              ws) +
          bank.bias[k];
      out[k] = a > 0.0 ? a : 0.0;
    }
  }
  return h;
}

PoolResult max_pool(std::span<const double> h, int windows, int filters,
                    std::span<const std::uint8_t> valid) {
  PoolResult r;
  r.values.assign(filters, -std::numeric_limits<double>::infinity());
  r.argmax.assign(filters, -1);
  for (int i = 0; i < windows; ++i) {
    if (!valid[i]) continue;
    const double* row = h.data() + static_cast<std::size_t>(i) * filters;
    for (int k = 0; k < filters; ++k) {
      if (r.argmax[k] < 0 || row[k] > r.values[k]) {
        r.values[k] = row[k];
        r.argmax[k] = i;
      }
    }
  }
  if (filters > 0 && r.argmax[0] < 0) {
    throw std::invalid_argument("max pooling needs at least one valid window");
  }
  return r;
}

std::vector<double> dense_forward(std::span<const double> z,
                                  const DenseLayer& layer) {
  if (static_cast<int>(z.size()) != layer.inputs) {
    throw std::invalid_argument("dense layer expects " +
                                std::to_string(layer.inputs) +
                                " inputs, got " + std::to_string(z.size()));
  }
  std::vector<double> o(layer.outputs);
  for (int j = 0; j < layer.outputs; ++j) {
    o[j] = dot(layer.weights.data() + static_cast<std::size_t>(j) * layer.inputs,
               z.data(), layer.inputs) +
           layer.bias[j];
  }
  return o;
}

std::vector<double> softmax(std::span<const double> logits) {
  const double top = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double total = 0.0;
  for (std::size_t j = 0; j < logits.size(); ++j) {
    p[j] = std::exp(logits[j] - top);
    total += p[j];
  }
  for (double& v : p) v /= total;
  return p;
}

SoftmaxLoss softmax_loss(std::span<const double> logits, int y) {
  if (y < 0 || y >= static_cast<int>(logits.size())) {
    throw std::out_of_range("class id " + std::to_string(y));
  }
  const double top = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (double o : logits) total += std::exp(o - top);
  SoftmaxLoss r;
  r.probs = softmax(logits);
  r.loss = std::log(total) - (logits[y] - top);
  return r;
}

DropoutResult apply_dropout(std::span<const double> z, double keep, Mode mode,
                            Rng& rng) {
  if (!(keep > 0.0 && keep <= 1.0)) {
    throw std::invalid_argument("dropout keep-probability must be in (0, 1]");
  }
  DropoutResult r;
  r.values.assign(z.begin(), z.end());
  if (mode == Mode::kEval || keep == 1.0) return r;
  const double scale = 1.0 / keep;
  r.mask.resize(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    r.mask[i] = uniform01(rng) < keep ? scale : 0.0;
    r.values[i] = z[i] * r.mask[i];
  }
  return r;
}

int ForwardCache::predicted() const {
  return static_cast<int>(std::max_element(probs.begin(), probs.end()) -
                          probs.begin());
}

ForwardCache forward_with_mask(const EncodedInstance& inst,
                               const ModelParams& params,
                               std::span<const double> mask) {
  if (inst.length() < 1) {
    throw std::invalid_argument("instance " + inst.instance_id +
                                " has no tokens");
  }
  ForwardCache c;
  c.real_length = real_length_of(inst);
  c.padded_length = std::max(inst.length(), params.max_width());
  c.tokens = inst.features;
  TokenFeatures pad;  // all ids 0
  c.tokens.resize(c.padded_length, pad);

  EncodedInstance padded;
  padded.features = c.tokens;
  c.x = embed_instance(padded, params.embeddings);

  c.pooled.reserve(params.pooled_size());
  for (const auto& bank : params.banks) {
    auto valid = valid_windows(c.padded_length, c.real_length, bank.width);
    auto h = conv_forward(c.x, c.padded_length, bank, valid);
    auto pool = max_pool(h, static_cast<int>(valid.size()), bank.filters,
                         valid);
    c.pooled.insert(c.pooled.end(), pool.values.begin(), pool.values.end());
    c.activations.push_back(std::move(h));
    c.valid.push_back(std::move(valid));
    c.argmax.push_back(std::move(pool.argmax));
  }

  c.dropped = c.pooled;
  if (!mask.empty()) {
    if (mask.size() != c.pooled.size()) {
      throw std::invalid_argument("dropout mask has the wrong size");
    }
    c.mask.assign(mask.begin(), mask.end());
    for (std::size_t i = 0; i < c.dropped.size(); ++i) c.dropped[i] *= mask[i];
  }
  c.logits = dense_forward(c.dropped, params.dense);
  c.probs = softmax(c.logits);
  return c;
}

ForwardCache forward(const EncodedInstance& inst, const ModelParams& params,
                     Mode mode, Rng& rng) {
  if (mode == Mode::kEval || params.keep_prob == 1.0) {
    return forward_with_mask(inst, params, {});
  }
  std::vector<double> ones(params.pooled_size(), 1.0);
  auto drop = apply_dropout(ones, params.keep_prob, mode, rng);
  return forward_with_mask(inst, params, drop.mask);
}

Gradients Gradients::zeros_like(const ModelParams& params) {
  Gradients g;
  for (const auto& b : params.banks) {
    g.bank_weights.emplace_back(b.weights.size(), 0.0);
    g.bank_bias.emplace_back(b.bias.size(), 0.0);
  }
  g.dense_weights.assign(params.dense.weights.size(), 0.0);
  g.dense_bias.assign(params.dense.bias.size(), 0.0);
  return g;
}

void Gradients::clear() {
  for (auto& v : bank_weights) std::fill(v.begin(), v.end(), 0.0);
  for (auto& v : bank_bias) std::fill(v.begin(), v.end(), 0.0);
  std::fill(dense_weights.begin(), dense_weights.end(), 0.0);
  std::fill(dense_bias.begin(), dense_bias.end(), 0.0);
  for (auto& rows : embedding_rows) rows.clear();
}

void Gradients::add(const Gradients& other) {
  auto axpy = [](std::vector<double>& dst, const std::vector<double>& src) {
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
  };
  for (std::size_t b = 0; b < bank_weights.size(); ++b) {
    axpy(bank_weights[b], other.bank_weights[b]);
    axpy(bank_bias[b], other.bank_bias[b]);
  }
  axpy(dense_weights, other.dense_weights);
  axpy(dense_bias, other.dense_bias);
  for (int k = 0; k < kNumFeatures; ++k) {
    for (const auto& [id, row] : other.embedding_rows[k]) {
      auto [it, inserted] = embedding_rows[k].try_emplace(id, row.size(), 0.0);
      axpy(it->second, row);
    }
  }
}

double cross_entropy(const ForwardCache& cache, int y) {
  return softmax_loss(cache.logits, y).loss;
}

void backward(const ForwardCache& cache, int y, const ModelParams& params,
              Gradients& grads, double scale) {
  const DenseLayer& dense = params.dense;
  const int l = dense.inputs;

  // dL/do = p - onehot(y)
  std::vector<double> d_logits(cache.probs);
  d_logits[y] -= 1.0;
  for (double& v : d_logits) v *= scale;

  std::vector<double> d_pooled(l, 0.0);
  for (int j = 0; j < dense.outputs; ++j) {
    const double g = d_logits[j];
    grads.dense_bias[j] += g;
    double* dw = grads.dense_weights.data() + static_cast<std::size_t>(j) * l;
    const double* w = dense.weights.data() + static_cast<std::size_t>(j) * l;
    for (int i = 0; i < l; ++i) {
      dw[i] += g * cache.dropped[i];
      d_pooled[i] += g * w[i];
    }
  }
  if (!cache.mask.empty()) {
    for (int i = 0; i < l; ++i) d_pooled[i] *= cache.mask[i];
  }

  const int d = params.embeddings.token_dim();
  std::vector<double> dx(cache.x.size(), 0.0);
  std::vector<std::uint8_t> touched(cache.padded_length, 0);
  int offset = 0;
  for (std::size_t b = 0; b < params.banks.size(); ++b) {
    const ConvFilterBank& bank = params.banks[b];
    const int ws = bank.window_size();
    const auto& h = cache.activations[b];
    for (int k = 0; k < bank.filters; ++k) {
      const int win = cache.argmax[b][k];
      const double g = d_pooled[offset + k];
      // ReLU passes gradient only where its output was positive.
      if (g == 0.0 || h[static_cast<std::size_t>(win) * bank.filters + k] <= 0.0) {
        continue;
      }
      grads.bank_bias[b][k] += g;
      double* dw = grads.bank_weights[b].data() + static_cast<std::size_t>(k) * ws;
      const double* w = bank.weights.data() + static_cast<std::size_t>(k) * ws;
      const double* xw = cache.x.data() + static_cast<std::size_t>(win) * d;
      double* dxw = dx.data() + static_cast<std::size_t>(win) * d;
      for (int i = 0; i < ws; ++i) {
        dw[i] += g * xw[i];
        dxw[i] += g * w[i];
      }
      for (int t = win; t < win + bank.width; ++t) touched[t] = 1;
    }
    offset += bank.filters;
  }

  const EmbeddingSet& emb = params.embeddings;
  for (int t = 0; t < cache.padded_length; ++t) {
    if (!touched[t]) continue;
    const double* src = dx.data() + static_cast<std::size_t>(t) * d;
    int col = 0;
    for (int k = 0; k < kNumFeatures; ++k) {
      if (!emb.enabled[k]) continue;
      const int dim = emb.tables[k].dim;
      const int id = cache.tokens[t].ids[k];
      if (id != 0 && emb.tables[k].trainable) {
        auto [it, inserted] =
            grads.embedding_rows[k].try_emplace(id, dim, 0.0);
        for (int j = 0; j < dim; ++j) it->second[j] += src[col + j];
      }
      col += dim;
    }
  }
}

}  // namespace relcnn
