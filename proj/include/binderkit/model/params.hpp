// Named parameter storage, initialization and weight-file I/O.

#ifndef BINDERKIT_MODEL_PARAMS_HPP_
#define BINDERKIT_MODEL_PARAMS_HPP_

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "../core/container.hpp"
#include "../core/random.hpp"
#include "../tensor/ops.hpp"

namespace binderkit {

// Bias and weight scale used for sigmoid gates that start nearly closed:
// sigmoid(-3) ~ 0.047.
inline constexpr double kGateBias = -3.0;
inline constexpr double kGateWeightStd = 1e-2;

template <typename T>
struct ParamStore {
  std::map<std::string, Tensor<T>> tensors;

  bool has(const std::string& name) const { return tensors.count(name) > 0; }
  Tensor<T>& get(const std::string& name) {
    auto it = tensors.find(name);
    if (it == tensors.end())
      fail(ErrorKind::Model, "missing parameter '" + name + "'");
    return it->second;
  }
  const Tensor<T>& get(const std::string& name) const {
    auto it = tensors.find(name);
    if (it == tensors.end())
      fail(ErrorKind::Model, "missing parameter '" + name + "'");
    return it->second;
  }
  std::int64_t count() const {
    std::int64_t n = 0;
    for (const auto& [k, t] : tensors)
      n += t.value.numel();
    return n;
  }
  void zero_grad() {
    for (auto& [k, t] : tensors)
      t.zero_grad();
  }
  std::vector<Tensor<T>*> all() {
    std::vector<Tensor<T>*> out;
    for (auto& [k, t] : tensors)
      out.push_back(&t);
    return out;
  }

  template <typename U>
  ParamStore<U> cast() const {
    ParamStore<U> out;
    for (const auto& [k, t] : tensors)
      out.tensors.emplace(k, Tensor<U>(t.value.template cast<U>(), t.requires_grad));
    return out;
  }

  // Initializers. Weights [in, out] drawn from N(0, 1/in).
  void add_linear(const std::string& name, int in, int out, Rng& rng, bool bias = true) {
    NdArray<T> w({in, out});
    const double sd = 1.0 / std::sqrt(static_cast<double>(in));
    for (T& v : w.data)
      v = static_cast<T>(rng.normal(0.0, sd));
    tensors[name + ".w"] = Tensor<T>(std::move(w));
    if (bias)
      tensors[name + ".b"] = Tensor<T>(NdArray<T>({out}, T(0)));
  }
  // Weights N(0, sd^2); no bias when `bias` is empty.
  void add_small_linear(const std::string& name, int in, int out, Rng& rng, double sd,
                        std::optional<double> bias) {
    NdArray<T> w({in, out});
    for (T& v : w.data)
      v = static_cast<T>(rng.normal(0.0, sd));
    tensors[name + ".w"] = Tensor<T>(std::move(w));
    if (bias)
      tensors[name + ".b"] = Tensor<T>(NdArray<T>({out}, static_cast<T>(*bias)));
  }
  void add_gate(const std::string& name, int in, int out, Rng& rng) {
    add_small_linear(name, in, out, rng, kGateWeightStd, kGateBias);
  }
  void add_layer_norm(const std::string& name, int dim) {
    tensors[name + ".g"] = Tensor<T>(NdArray<T>({dim}, T(1)));
    tensors[name + ".b"] = Tensor<T>(NdArray<T>({dim}, T(0)));
  }
  void add_embedding(const std::string& name, int vocab, int dim, Rng& rng) {
    NdArray<T> w({vocab, dim});
    for (T& v : w.data)
      v = static_cast<T>(rng.normal(0.0, 1.0));
    tensors[name] = Tensor<T>(std::move(w));
  }
};

// Parameters bound to one tape; each tensor becomes a leaf once.
template <typename T>
class Bound {
public:
  Bound(Tape<T>& tape, ParamStore<T>& store) : tape_(tape), store_(store) {}

  Tape<T>& tape() { return tape_; }
  Var<T> operator()(const std::string& name) {
    auto it = cache_.find(name);
    if (it != cache_.end())
      return it->second;
    Var<T> v = tape_.param(store_.get(name));
    cache_.emplace(name, v);
    return v;
  }
  bool has(const std::string& name) const { return store_.has(name); }

  Var<T> linear(const std::string& name, Var<T> x) {
    Var<T> y = matmul(x, (*this)(name + ".w"));
    return store_.has(name + ".b") ? add(y, (*this)(name + ".b")) : y;
  }
  Var<T> layer_norm(const std::string& name, Var<T> x) {
    return binderkit::layer_norm(x, (*this)(name + ".g"), (*this)(name + ".b"));
  }

private:
  Tape<T>& tape_;
  ParamStore<T>& store_;
  std::unordered_map<std::string, Var<T>> cache_;
};

template <typename T>
std::string encode_params(const ParamStore<T>& ps) {
  std::vector<NamedTensor> out;
  for (const auto& [name, t] : ps.tensors)
    out.push_back({name, t.value.template cast<float>()});
  return encode_container(out);
}

// Replaces values of `ps` with the tensors in `bytes`; names and shapes
// must match exactly.
template <typename T>
void decode_params_into(ParamStore<T>& ps, std::string_view bytes) {
  std::vector<NamedTensor> in = decode_container(bytes);
  if (in.size() != ps.tensors.size())
    fail(ErrorKind::Model, "weight file has " + std::to_string(in.size()) + " tensors, model needs " +
                               std::to_string(ps.tensors.size()));
  for (const NamedTensor& nt : in) {
    Tensor<T>& t = ps.get(nt.name);
    if (t.value.shape != nt.value.shape)
      fail(ErrorKind::Model, "parameter '" + nt.name + "' has shape " + shape_str(nt.value.shape) +
                                 ", expected " + shape_str(t.value.shape));
    t.value = nt.value.template cast<T>();
  }
}

} // namespace binderkit

#endif
