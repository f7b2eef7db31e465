#ifndef RELCNN_NETWORK_H_
#define RELCNN_NETWORK_H_

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "relcnn/corpus.h"
#include "relcnn/embeddings.h"
#include "relcnn/features.h"
#include "relcnn/random.h"

namespace relcnn {

// `filters` convolution filters of a shared width over token windows.
// weights is filters x (width * input_dim), one filter per row.
struct ConvFilterBank {
  int width = 1;
  int filters = 0;
  int input_dim = 0;
  std::vector<double> weights;
  std::vector<double> bias;

  int window_size() const { return width * input_dim; }
  std::span<const double> filter(int k) const {
    return {weights.data() + static_cast<std::size_t>(k) * window_size(),
            static_cast<std::size_t>(window_size())};
  }
};

// o = W z + b, W row-major outputs x inputs.
struct DenseLayer {
  int outputs = kNumClasses;
  int inputs = 0;
  std::vector<double> weights;
  std::vector<double> bias;
};

struct ModelParams {
  EmbeddingSet embeddings;
  std::vector<ConvFilterBank> banks;
  DenseLayer dense;
  double keep_prob = 0.5;  // dropout keep-probability during training

  int pooled_size() const;
  int max_width() const;
};

struct NetworkConfig {
  std::vector<int> filter_lengths = {4, 6};
  int filters_per_length = 100;
  double keep_prob = 0.5;
};

void validate(const NetworkConfig& config);

// Conv and dense weights from U(-s, s), s = sqrt(6 / (fan_in + fan_out));
// biases zero.
ModelParams init_model(EmbeddingSet embeddings, const NetworkConfig& config,
                       std::uint64_t seed);

enum class Mode { kTrain, kEval };

// Windows of a padded sequence that take part in pooling: those lying
// entirely inside the real tokens, or window 0 alone when the sequence is
// shorter than the filter.
std::vector<std::uint8_t> valid_windows(int padded_length, int real_length,
                                        int width);

// ReLU(w_k . x[i:i+c] + b_k) for every window i, as a
// (padded_length - width + 1) x filters matrix. Windows with a zero mask
// entry are left at 0 without being evaluated.
std::vector<double> conv_forward(std::span<const double> x, int length,
                                 const ConvFilterBank& bank,
                                 std::span<const std::uint8_t> valid = {});

struct PoolResult {
  std::vector<double> values;  // one per filter
  std::vector<int> argmax;     // source window per filter
};

// Max over valid windows per filter; ties go to the lowest window.
PoolResult max_pool(std::span<const double> h, int windows, int filters,
                    std::span<const std::uint8_t> valid);

std::vector<double> dense_forward(std::span<const double> z,
                                  const DenseLayer& layer);

std::vector<double> softmax(std::span<const double> logits);

struct SoftmaxLoss {
  double loss = 0.0;
  std::vector<double> probs;
};

SoftmaxLoss softmax_loss(std::span<const double> logits, int y);

// Inverted dropout: kept coordinates are scaled by 1/keep so evaluation is
// the identity. The mask holds 0 or 1/keep per coordinate.
struct DropoutResult {
  std::vector<double> values;
  std::vector<double> mask;
};

DropoutResult apply_dropout(std::span<const double> z, double keep, Mode mode,
                            Rng& rng);

struct ForwardCache {
  std::vector<TokenFeatures> tokens;  // padded to padded_length
  int real_length = 0;
  int padded_length = 0;
  std::vector<double> x;  // padded_length x token_dim
  std::vector<std::vector<double>> activations;  // per bank, post-ReLU
  std::vector<std::vector<std::uint8_t>> valid;
  std::vector<std::vector<int>> argmax;
  std::vector<double> pooled;   // z
  std::vector<double> mask;     // empty in eval mode
  std::vector<double> dropped;  // z after dropout
  std::vector<double> logits;
  std::vector<double> probs;

  int predicted() const;
};

ForwardCache forward(const EncodedInstance& inst, const ModelParams& params,
                     Mode mode, Rng& rng);

// Forward pass with an explicit dropout mask (empty mask: none).
ForwardCache forward_with_mask(const EncodedInstance& inst,
                               const ModelParams& params,
                               std::span<const double> mask);

// Loss gradients. Embedding gradients are sparse: only rows looked up by a
// window that won a pooling max are present, and PAD rows never are.
struct Gradients {
  std::vector<std::vector<double>> bank_weights;
  std::vector<std::vector<double>> bank_bias;
  std::vector<double> dense_weights;
  std::vector<double> dense_bias;
  std::array<std::map<int, std::vector<double>>, kNumFeatures> embedding_rows;

  static Gradients zeros_like(const ModelParams& params);
  void clear();
  void add(const Gradients& other);
};

double cross_entropy(const ForwardCache& cache, int y);

// Accumulates scale * dL/dtheta into grads.
void backward(const ForwardCache& cache, int y, const ModelParams& params,
              Gradients& grads, double scale = 1.0);

}  // namespace relcnn

#endif  // RELCNN_NETWORK_H_
