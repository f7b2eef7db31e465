#include "relcnn/optimizer.h"

#include <cmath>
#include <stdexcept>
#include <string>

namespace relcnn {

namespace {

void check_finite(std::span<const double> g, const char* what, int index) {
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!std::isfinite(g[i])) {
      throw std::runtime_error(std::string("non-finite gradient in ") + what +
                               " " + std::to_string(index) + " at element " +
                               std::to_string(i) + ": " + std::to_string(g[i]));
    }
  }
}

}  // namespace

void validate(const AdamConfig& c) {
  if (!(c.lr > 0.0) || !std::isfinite(c.lr)) {
    throw std::invalid_argument("learning rate must be positive");
  }
  if (!(c.beta1 >= 0.0 && c.beta1 < 1.0) || !(c.beta2 >= 0.0 && c.beta2 < 1.0)) {
    throw std::invalid_argument("Adam betas must lie in [0, 1)");
  }
  if (!(c.eps > 0.0)) throw std::invalid_argument("Adam epsilon must be > 0");
}

void adam_update(std::span<double> theta, std::span<const double> grad,
                 std::span<double> m, std::span<double> v,
                 const AdamConfig& c, std::int64_t t) {
  const double correction1 = 1.0 - std::pow(c.beta1, static_cast<double>(t));
  const double correction2 = 1.0 - std::pow(c.beta2, static_cast<double>(t));
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double g = grad[i];
    m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g;
    v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * g * g;
    const double m_hat = m[i] / correction1;
    const double v_hat = v[i] / correction2;
    theta[i] -= c.lr * m_hat / (std::sqrt(v_hat) + c.eps);
  }
}

AdamState adam_init(const ModelParams& params, const AdamConfig& config) {
  validate(config);
  AdamState s;
  s.config = config;
  for (const auto& b : params.banks) {
    s.dense.emplace_back(b.weights.size());
    s.dense.emplace_back(b.bias.size());
  }
  s.dense.emplace_back(params.dense.weights.size());
  s.dense.emplace_back(params.dense.bias.size());
  for (const auto& table : params.embeddings.tables) {
    s.embeddings.emplace_back(table.values.size());
  }
  return s;
}

void adam_step(AdamState& state, const Gradients& grads, ModelParams& params) {
  for (std::size_t b = 0; b < grads.bank_weights.size(); ++b) {
    check_finite(grads.bank_weights[b], "filter bank weights", static_cast<int>(b));
    check_finite(grads.bank_bias[b], "filter bank bias", static_cast<int>(b));
  }
  check_finite(grads.dense_weights, "dense weights", 0);
  check_finite(grads.dense_bias, "dense bias", 0);
  for (int k = 0; k < kNumFeatures; ++k) {
    for (const auto& [id, row] : grads.embedding_rows[k]) {
      check_finite(row, "embedding row", id);
    }
  }

  ++state.step;
  const std::int64_t t = state.step;
  const AdamConfig& c = state.config;
  std::size_t slot = 0;
  for (std::size_t b = 0; b < params.banks.size(); ++b) {
    auto& bank = params.banks[b];
    Moments& mw = state.dense[slot++];
    adam_update(bank.weights, grads.bank_weights[b], mw.m, mw.v, c, t);
    Moments& mb = state.dense[slot++];
    adam_update(bank.bias, grads.bank_bias[b], mb.m, mb.v, c, t);
  }
  Moments& mw = state.dense[slot++];
  adam_update(params.dense.weights, grads.dense_weights, mw.m, mw.v, c, t);
  Moments& mb = state.dense[slot++];
  adam_update(params.dense.bias, grads.dense_bias, mb.m, mb.v, c, t);

  for (int k = 0; k < kNumFeatures; ++k) {
    EmbeddingMatrix& table = params.embeddings.tables[k];
    Moments& mom = state.embeddings[k];
    const std::size_t dim = static_cast<std::size_t>(table.dim);
    for (const auto& [id, row] : grads.embedding_rows[k]) {
      const std::size_t off = static_cast<std::size_t>(id) * dim;
      adam_update(table.row(id), row, std::span(mom.m).subspan(off, dim),
                  std::span(mom.v).subspan(off, dim), c, t);
    }
  }
}

}  // namespace relcnn
