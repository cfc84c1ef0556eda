// Adam optimizer and a small supervised training loop.

#ifndef BINDERKIT_MODEL_TRAIN_HPP_
#define BINDERKIT_MODEL_TRAIN_HPP_

#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "../structure/synthetic.hpp"
#include "rednet.hpp"

namespace binderkit {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

template <typename T>
class Adam {
public:
  explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) {}

  // Applies one update from the accumulated gradients, then clears them.
  void step(ParamStore<T>& ps) {
    ++t_;
    const double c1 = 1.0 - std::pow(cfg_.beta1, t_);
    const double c2 = 1.0 - std::pow(cfg_.beta2, t_);
    for (auto& [name, p] : ps.tensors) {
      if (!p.grad)
        continue;
      auto& m = m_[name];
      auto& v = v_[name];
      if (m.empty()) {
        m.assign(p.value.data.size(), 0.0);
        v.assign(p.value.data.size(), 0.0);
      }
      for (std::size_t i = 0; i < m.size(); ++i) {
        const double g = static_cast<double>((*p.grad)[i]);
        m[i] = cfg_.beta1 * m[i] + (1 - cfg_.beta1) * g;
        v[i] = cfg_.beta2 * v[i] + (1 - cfg_.beta2) * g * g;
        const double upd = cfg_.lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + cfg_.eps);
        p.value.data[i] = static_cast<T>(static_cast<double>(p.value.data[i]) - upd);
      }
    }
    ps.zero_grad();
  }
  int steps() const { return t_; }

private:
  AdamConfig cfg_;
  int t_ = 0;
  std::map<std::string, std::vector<double>> m_, v_;
};

struct TrainExample {
  ComplexFeatures features;
  DecodingOrder order;
};

struct TrainConfig {
  int steps = 200;
  AdamConfig adam{3e-3};
  double lambda_edge = 1.0;
  std::uint64_t seed = 0;
  bool random_orders = false;  // resample the order every step
};

struct StepRecord {
  int step = 0;
  double total = 0.0;
  double node = 0.0;
  double edge = 0.0;
};

// Loss on one example with teacher forcing; design positions are the
// prediction mask for both terms.
template <typename T>
LossParts<T> example_loss(Bound<T>& P, const RedNet<T>& model, const TrainExample& ex, bool train,
                          std::uint64_t dropout_seed, double lambda_edge) {
  const ComplexFeatures& f = ex.features;
  ForwardOptions opt;
  opt.edges = lambda_edge != 0.0;
  opt.train = train;
  opt.dropout_seed = dropout_seed;
  ForwardResult<T> out = forward(P, model, f, f.native, ex.order, opt);
  return rednet_loss(out.logits, f.native, {{"design", f.design, 1.0}}, out.edge_logits,
                     &f.residue.neighbor_index, &f.residue.edge_mask, f.design, lambda_edge);
}

// Full-batch training: each step averages the loss over every example.
template <typename T>
std::vector<StepRecord> train(RedNet<T>& model, std::vector<TrainExample>& data, const TrainConfig& cfg,
                              const std::function<void(const StepRecord&)>& on_step = {}) {
  require(!data.empty(), "training set is empty");
  Adam<T> adam(cfg.adam);
  std::vector<StepRecord> log;
  for (int step = 0; step < cfg.steps; ++step) {
    StepRecord rec;
    rec.step = step;
    for (std::size_t e = 0; e < data.size(); ++e) {
      if (cfg.random_orders)
        data[e].order = DecodingOrder::random(data[e].features.design,
                                              splitmix64(cfg.seed ^ (static_cast<std::uint64_t>(step) << 20) ^ e));
      Tape<T> tape;
      Bound<T> P(tape, model.params);
      const std::uint64_t dseed = splitmix64(cfg.seed + 7919 * static_cast<std::uint64_t>(step) + e);
      LossParts<T> l = example_loss(P, model, data[e], true, dseed, cfg.lambda_edge);
      Var<T> scaled = scale(l.total, static_cast<T>(1.0 / data.size()));
      tape.backward(scaled);
      rec.total += static_cast<double>(l.total.value()[0]) / data.size();
      rec.node += l.node / data.size();
      rec.edge += l.edge / data.size();
    }
    adam.step(model.params);
    log.push_back(rec);
    if (on_step)
      on_step(rec);
  }
  return log;
}

// Greedy decoding restricted to the 20 amino acids, one forward per step.
template <typename T>
std::vector<int> greedy_decode(RedNet<T>& model, const ComplexFeatures& f, const DecodingOrder& order) {
  std::vector<int> tokens = f.masked_tokens();
  Tape<T> enc_tape;
  Bound<T> Pe(enc_tape, model.params);
  const NdArray<T> enc = encode(Pe, model, f).value();
  for (int p : order.positions) {
    Tape<T> tape;
    Bound<T> P(tape, model.params);
    NdArray<T> logits = decode(P, model, f, tape.constant(enc), tokens, order).logits.value();
    int best = 0;
    for (int a = 1; a < kNumAminoAcids; ++a)
      if (logits[p * model.config.vocab + a] > logits[p * model.config.vocab + best])
        best = a;
    tokens[p] = best;
  }
  return tokens;
}

// Fraction of design positions where `tokens` equals the native residue.
inline double sequence_recovery(const ComplexFeatures& f, const std::vector<int>& tokens) {
  int hit = 0, total = 0;
  for (int i = 0; i < f.n; ++i)
    if (f.design[i]) {
      ++total;
      hit += tokens[i] == f.native[i] ? 1 : 0;
    }
  return total ? static_cast<double>(hit) / total : 0.0;
}

// Non-overlapping window means of the total loss.
inline std::vector<double> window_means(const std::vector<StepRecord>& log, int window) {
  std::vector<double> out;
  for (std::size_t s = 0; s + window <= log.size(); s += window) {
    double m = 0;
    for (int i = 0; i < window; ++i)
      m += log[s + i].total;
    out.push_back(m / window);
  }
  return out;
}

// Five synthetic two-chain complexes with fixed decoding orders.
inline std::vector<TrainExample> toy_training_set(const ModelConfig& cfg, std::uint64_t seed, int count = 5) {
  std::vector<TrainExample> out;
  for (int i = 0; i < count; ++i) {
    Structure s = synth::toy_complex("TOY" + std::to_string(i), splitmix64(seed + i), 12, 18);
    TrainExample ex{featurize_complex(s, {}, cfg), {}};
    ex.order = DecodingOrder::random(ex.features.design, splitmix64(seed ^ (1000 + i)));
    out.push_back(std::move(ex));
  }
  return out;
}

} // namespace binderkit

#endif
