#ifndef RELCNN_OPTIMIZER_H_
#define RELCNN_OPTIMIZER_H_

#include <cstdint>
#include <span>
#include <vector>

#include "relcnn/network.h"

namespace relcnn {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

void validate(const AdamConfig& config);

// One bias-corrected Adam update of theta in place, for step number t >= 1.
void adam_update(std::span<double> theta, std::span<const double> grad,
                 std::span<double> m, std::span<double> v,
                 const AdamConfig& config, std::int64_t t);

struct Moments {
  std::vector<double> m;
  std::vector<double> v;

  explicit Moments(std::size_t n = 0) : m(n, 0.0), v(n, 0.0) {}
};

// Moments for every parameter tensor. Dense tensors are ordered bank
// weights, bank biases (per bank), dense weights, dense bias; embedding
// moments cover whole tables but only rows with a gradient are advanced.
struct AdamState {
  AdamConfig config;
  std::int64_t step = 0;
  std::vector<Moments> dense;
  std::vector<Moments> embeddings;
};

AdamState adam_init(const ModelParams& params, const AdamConfig& config = {});

// Throws on a non-finite gradient before touching any parameter.
void adam_step(AdamState& state, const Gradients& grads, ModelParams& params);

}  // namespace relcnn

#endif  // RELCNN_OPTIMIZER_H_
