// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria (0 when all pass).

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <functional>
#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "binderkit/bench/curate.hpp"
#include "binderkit/bench/eval.hpp"
#include "binderkit/decode/contrastive.hpp"
#include "binderkit/model/train.hpp"
#include "binderkit/msa/stats.hpp"
#include "binderkit/scoring/rank.hpp"
#include "binderkit/scoring/score.hpp"
#include "binderkit/structure/synthetic.hpp"
#include "support/cli_fixtures.hpp"
#include "support/gradcheck.hpp"
#include "support/oracles.hpp"
#include "support/planted_msa.hpp"
#include "support/selectivity_corpus.hpp"

using namespace binderkit;
using oracle::gradcheck;
using oracle::project;
using oracle::random_array;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

constexpr double kInf = std::numeric_limits<double>::infinity();

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

Structure jittered(Structure s, std::uint64_t seed, double sigma = 0.05) {
  Rng rng(seed);
  for (Chain& c : s.chains)
    for (Residue& r : c.residues)
      for (Atom& a : r.atoms)
        a.pos += Vec3{rng.normal(0, sigma), rng.normal(0, sigma), rng.normal(0, sigma)};
  return s;
}

std::vector<bool> chain_mask(const Structure& s, int chain) {
  std::vector<bool> m;
  for (int c = 0; c < static_cast<int>(s.chains.size()); ++c)
    m.insert(m.end(), s.chains[c].size(), c == chain);
  return m;
}

// Every tensor the featurizer emits, by name. Position tensors are
// equivariant and are mapped back through `t` before comparison.
std::vector<std::pair<std::string, NdArray<double>>> feature_tensors(const ComplexFeatures& f,
                                                                     const RigidTransform* undo) {
  auto out = f.residue.named_tensors();
  for (auto& nt : f.atom.named_tensors())
    out.push_back(std::move(nt));
  out.push_back({"residue_edge", f.residue_edge});
  out.push_back({"atom_node", f.atom_node});
  out.push_back({"atom_edge", f.atom_edge});
  out.push_back({"pair", f.pair});
  for (auto& [name, arr] : out)
    if (undo && (name == "atom.centroid_pos" || name == "atom.atom_pos"))
      for (std::int64_t i = 0; i < arr.numel(); i += 3) {
        const Vec3 p = undo->apply(Vec3{arr[i], arr[i + 1], arr[i + 2]});
        arr[i] = p.x;
        arr[i + 1] = p.y;
        arr[i + 2] = p.z;
      }
  return out;
}

template <typename T>
double max_abs_diff(const NdArray<T>& a, const NdArray<T>& b) {
  if (a.shape != b.shape)
    return kInf;
  double m = 0;
  for (std::int64_t i = 0; i < a.numel(); ++i)
    m = std::max(m, std::abs(static_cast<double>(a[i]) - static_cast<double>(b[i])));
  return m;
}

RigidTransform inverse(const RigidTransform& t) {
  RigidTransform inv;
  inv.rotation = t.rotation.transposed();
  inv.translation = inv.rotation * (Vec3{0, 0, 0} - t.translation);
  return inv;
}

// ---------------------------------------------------------------------------

Outcome rigid_motion_invariance() {
  const auto t0 = Clock::now();
  const ModelConfig cfg = ModelConfig::toy();
  RedNet<double> md = init_model<double>(cfg, 6);
  RedNet<float> mf = init_model<float>(cfg, 6);
  std::vector<Structure> fixtures = {jittered(synth::toy_complex("T1", 1), 11),
                                     jittered(synth::toy_complex("T2", 2, 30, 40), 12),
                                     jittered(synth::helix_bundle("HB", 4, 18, 10.0, 3), 13)};
  Rng rng(2024);
  double feat_dev = 0, logit_dev = 0, logit_dev_f = 0;
  for (const Structure& s : fixtures) {
    const std::vector<bool> mask = chain_mask(s, 1);
    const ComplexFeatures f = featurize_complex(s, mask, cfg);
    const auto base_feats = feature_tensors(f, nullptr);
    const DecodingOrder order = DecodingOrder::random(f.design, 1);
    const NdArray<double> base = forward_logits(md, f, f.native, order);
    const NdArray<float> base_f = forward_logits(mf, f, f.native, order);
    for (int trial = 0; trial < 20; ++trial) {
      const RigidTransform t = rng.rigid(40.0);
      const RigidTransform back = inverse(t);
      Structure m = s;
      m.transform(t);
      const ComplexFeatures g = featurize_complex(m, mask, cfg);
      const auto feats = feature_tensors(g, &back);
      for (std::size_t i = 0; i < feats.size(); ++i) {
        if (feats[i].first != base_feats[i].first)
          return {false, "tensor order differs"};
        feat_dev = std::max(feat_dev, max_abs_diff(base_feats[i].second, feats[i].second));
      }
      logit_dev = std::max(logit_dev, max_abs_diff(base, forward_logits(md, g, g.native, order)));
      logit_dev_f = std::max(logit_dev_f, max_abs_diff(base_f, forward_logits(mf, g, g.native, order)));
    }
  }
  const double secs = seconds_since(t0);
  const bool ok = feat_dev <= 1e-9 && logit_dev <= 1e-9 && logit_dev_f <= 1e-4 && secs < 60.0;
  return {ok, "60 motions; max feature dev " + num(feat_dev) + ", logit dev " + num(logit_dev) + " (double) " +
                  num(logit_dev_f) + " (single); " + num(secs) + " s"};
}

// ---------------------------------------------------------------------------

struct ToyNeighborhood {
  NdArray<int> index{{6, 3}, std::vector<int>{1, 6, 6, 0, 2, 3, 1, 3, 4, 2, 4, 5, 0, 3, 6, 6, 6, 6}};
  NdArray<std::uint8_t> mask{{6, 3}, std::vector<std::uint8_t>{1, 0, 0, 1, 1, 1, 1, 1, 1, 1, 1, 0, 1, 1, 0, 0, 0, 0}};
};

// Gates and output projections start near zero; open them so every branch
// carries gradient.
void open_gates(ParamStore<double>& ps, Rng& rng, double scale) {
  for (auto& [name, t] : ps.tensors)
    if (name.find("gate") != std::string::npos || name.find("_out") != std::string::npos)
      t.value = random_array(rng, t.value.shape, scale);
}

double grad_gat(std::uint64_t seed) {
  ToyNeighborhood nb;
  ParamStore<double> ps;
  Rng rng(10 + seed);
  init_gat_layer(ps, "gat", 8, 5, 2, rng);
  open_gates(ps, rng, 0.5);
  Tensor<double> s(random_array(rng, {6, 8}));
  Tensor<double> p(random_array(rng, {6, 3, 5}));
  std::vector<Tensor<double>*> all = ps.all();
  all.push_back(&s);
  all.push_back(&p);
  return gradcheck(all, [&](Tape<double>& t) {
    Bound<double> P(t, ps);
    return project(gat_layer(P, "gat", t.param(s), t.param(p), nb.index, nb.mask), 99 + seed);
  });
}

double grad_pair_attention(std::uint64_t seed) {
  NdArray<std::uint8_t> m({5, 5}, 1);
  m[0 * 5 + 3] = 0;
  m[2 * 5 + 1] = 0;
  ParamStore<double> ps;
  Rng rng(30 + seed);
  init_pair_bias_attention(ps, "pa", 8, 3, 2, rng);
  open_gates(ps, rng, 0.5);
  Tensor<double> s(random_array(rng, {5, 8}));
  Tensor<double> p(random_array(rng, {5, 5, 3}));
  std::vector<Tensor<double>*> all = ps.all();
  all.push_back(&s);
  all.push_back(&p);
  return gradcheck(all, [&](Tape<double>& t) {
    Bound<double> P(t, ps);
    return project(pair_bias_attention(P, "pa", t.param(s), t.param(p), m), 7 + seed);
  });
}

double grad_egat(std::uint64_t seed) {
  Rng rng(50 + seed);
  const int n = 4, m = 9;
  std::vector<Vec3> x, y;
  for (int i = 0; i < n; ++i)
    x.push_back({rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5)});
  for (int j = 0; j < m; ++j)
    y.push_back({rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5)});
  std::vector<int> src, dst;
  for (int i = 0; i < n - 1; ++i)
    for (int j = 0; j < m; ++j)
      if (rng.uniform() < 0.5 || j == i) {
        src.push_back(i);
        dst.push_back(j);
      }
  const PaddedEdges edges = pad_edges(n, m, src, dst);
  Tensor<double> q(random_array(rng, {n, 8})), k(random_array(rng, {m, 8}));
  Tensor<double> e(pad_edge_rows<double>(edges, random_array(rng, {static_cast<std::int64_t>(src.size()), 3})));
  ParamStore<double> ps;
  Rng init(60 + seed);
  init_egat_layer(ps, "eg", 8, 8, 3, 2, init);
  std::vector<Tensor<double>*> all = ps.all();
  for (Tensor<double>* v : {&q, &k, &e})
    all.push_back(v);
  return gradcheck(all, [&](Tape<double>& t) {
    Bound<double> P(t, ps);
    return project(egat_layer(P, "eg", t.param(q), t.param(k), x, y, edges, t.param(e)), seed);
  });
}

double grad_caconv(std::uint64_t seed) {
  ParamStore<double> ps;
  Rng init(70 + seed);
  init_caconv_layer(ps, "cc", 4, 3, 2, 6, init);
  // Positive biases keep most ReLUs active.
  for (auto& [name, t] : ps.tensors)
    if (name.back() == 'b')
      std::fill(t.value.data.begin(), t.value.data.end(), 0.5);
  Rng rng(80 + seed);
  CaConvGeometry geo;
  for (int i = 0; i < 2; ++i) {
    geo.src_pos.push_back({rng.uniform(-4, 4), rng.uniform(-4, 4), rng.uniform(-4, 4)});
    geo.src_frame.push_back(rng.rotation());
    geo.frame_valid.push_back(1);
  }
  for (int j = 0; j < 4; ++j)
    geo.dst_pos.push_back({rng.uniform(-4, 4), rng.uniform(-4, 4), rng.uniform(-4, 4)});
  const PaddedEdges edges = pad_edges(2, 4, {0, 0, 0, 0, 1, 1}, {0, 1, 2, 3, 1, 3});
  Tensor<double> xq(random_array(rng, {2, 4})), xv(random_array(rng, {4, 3}));
  Tensor<double> e(random_array(rng, {2, 4, 2}));
  std::vector<Tensor<double>*> all = ps.all();
  for (Tensor<double>* v : {&xq, &xv, &e})
    all.push_back(v);
  return gradcheck(all, [&](Tape<double>& t) {
    Bound<double> P(t, ps);
    return project(caconv_layer(P, "cc", t.param(xq), t.param(xv), geo, edges, t.param(e)), seed);
  });
}

double grad_loss(std::uint64_t seed) {
  NdArray<int> idx({4, 2}, std::vector<int>{1, 2, 0, 3, 1, 4, 2, 0});
  NdArray<std::uint8_t> em({4, 2}, std::vector<std::uint8_t>{1, 1, 1, 1, 1, 0, 1, 1});
  const std::vector<int> labels = {0, 32, 5, 20};
  Rng rng(seed);
  Tensor<double> x(random_array(rng, {4, 33}, 2.0));
  Tensor<double> e(random_array(rng, {4, 2, 33 * 33}));
  return gradcheck({&x, &e}, [&](Tape<double>& t) {
    return rednet_loss<double>(t.param(x), labels, {{"a", {1, 1, 0, 1}, 1.0}, {"b", {0, 1, 1, 0}, 0.5}},
                               t.param(e), &idx, &em, {1, 1, 1, 0}, 1.0)
        .total;
  });
}

Outcome gradient_correctness() {
  const std::vector<std::pair<std::string, std::function<double(std::uint64_t)>>> layers = {
      {"gat", grad_gat}, {"pair_attention", grad_pair_attention}, {"egat", grad_egat},
      {"caconv", grad_caconv}, {"loss", grad_loss}};
  bool ok = true;
  std::string detail;
  for (const auto& [name, fn] : layers) {
    double worst = 0;
    for (std::uint64_t seed = 0; seed < 5; ++seed)
      worst = std::max(worst, fn(seed));
    ok = ok && worst < 1e-5;
    detail += (detail.empty() ? "" : ", ") + name + " " + num(worst);
  }
  return {ok, "5 seeds, max rel err: " + detail};
}

// ---------------------------------------------------------------------------

Outcome causality() {
  const Structure s = synth::toy_complex("CZ", 11, 30, 20);
  const ModelConfig cfg = ModelConfig::toy();
  const ComplexFeatures f = featurize_complex(s, {}, cfg);
  if (f.n_design() != 30)
    return {false, "fixture has " + std::to_string(f.n_design()) + " design positions"};
  RedNet<double> model = init_model<double>(cfg, 5);
  Rng rng(12);
  const int R = cfg.vocab;
  int checked = 0;
  for (int o = 0; o < 10; ++o) {
    const DecodingOrder order = DecodingOrder::random(f.design, 100 + o);
    const NdArray<double> base = forward_logits(model, f, f.native, order);
    for (int cut = 0; cut < 30; cut += 3) {
      std::vector<int> changed = f.native;
      for (int t = cut; t < 30; ++t)
        changed[order.positions[t]] = static_cast<int>((f.native[order.positions[t]] + 1 + rng.index(19)) % 20);
      const NdArray<double> out = forward_logits(model, f, changed, order);
      for (int t = 0; t <= cut; ++t) {
        const int p = order.positions[t];
        for (int c = 0; c < R; ++c)
          if (out[p * R + c] != base[p * R + c])
            return {false, "order " + std::to_string(o) + " step " + std::to_string(t) + " changed"};
      }
      for (int i = 0; i < f.n; ++i)
        if (!f.design[i])
          for (int c = 0; c < R; ++c)
            if (out[i * R + c] != base[i * R + c])
              return {false, "context residue " + std::to_string(i) + " changed"};
      ++checked;
    }
  }
  return {true, "10 orders x 10 cut points on 30 design positions, " + std::to_string(checked) +
                    " perturbations, all earlier logits bit-identical"};
}

// ---------------------------------------------------------------------------

Outcome decoding_degeneracies() {
  ModelConfig cfg = ModelConfig::toy();
  cfg.width = 16;
  cfg.heads = 2;
  cfg.residue_layers = 1;
  cfg.decoder_layers = 1;
  cfg.k_neighbors = 12;
  cfg.atom_k_max = 12;
  RedNet<double> model = init_model<double>(cfg, 42);
  const ComplexFeatures on = featurize_complex(synth::toy_complex("ON", 5, 8, 14), {}, cfg);
  const ComplexFeatures off = featurize_complex(synth::toy_complex("OFF", 6, 8, 14), {}, cfg);

  auto q_dev = [](const DecodeResult& a, const DecodeResult& b) {
    if (a.trace.size() != b.trace.size())
      return kInf;
    double m = 0;
    for (std::size_t t = 0; t < a.trace.size(); ++t) {
      if (a.trace[t].candidates != b.trace[t].candidates || a.trace[t].position != b.trace[t].position)
        return kInf;
      for (std::size_t i = 0; i < a.trace[t].q.size(); ++i)
        m = std::max(m, std::abs(a.trace[t].q[i] - b.trace[t].q[i]));
    }
    return a.sequence == b.sequence ? m : kInf;
  };

  // alpha = 0 against standard decoding, sampled and greedy.
  double dev_alpha0 = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const DecodeContext ctx = make_context(on, &off, std::nullopt, 3 + seed);
    for (double tau : {1.0, 0.5, 1e-3}) {
      const DecodeResult a = contrastive_decode(model, ctx, DecodeConfig{0.0, 0.3, tau, seed, DecodeMode::Standard});
      const DecodeResult b =
          contrastive_decode(model, ctx, DecodeConfig{0.0, 0.3, tau, seed, DecodeMode::ContrastOfftarget});
      dev_alpha0 = std::max(dev_alpha0, q_dev(a, b));
    }
  }

  // beta = 1: every emitted token is an argmax of the on-context distribution.
  int beta_violations = 0, beta_steps = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const DecodeContext ctx = make_context(on, &off, std::nullopt, 6 + seed);
    const DecodeResult r = contrastive_decode(model, ctx, DecodeConfig{2.0, 1.0, 1.0, seed, DecodeMode::ContrastOfftarget});
    for (const StepTrace& st : r.trace) {
      ++beta_steps;
      const double mx = *std::max_element(st.p_on.begin(), st.p_on.end());
      for (int c : st.candidates)
        beta_violations += st.p_on[c] != mx;
      beta_violations += st.p_on[st.token] != mx;
    }
  }

  // Identical on and off contexts.
  double dev_same = 0;
  const DecodeContext same = make_context(on, &on, std::nullopt, 4);
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const DecodeResult ref = contrastive_decode(model, same, DecodeConfig{0.0, 0.3, 0.8, seed, DecodeMode::Standard});
    for (double alpha : {0.5, 1.0, 2.0})
      dev_same = std::max(dev_same, q_dev(ref, contrastive_decode(model, same,
                                                                  DecodeConfig{alpha, 0.3, 0.8, seed,
                                                                               DecodeMode::ContrastOfftarget})));
  }
  const bool ok = dev_alpha0 <= 1e-10 && beta_violations == 0 && dev_same <= 1e-10;
  return {ok, "alpha=0 max |dq| " + num(dev_alpha0) + "; beta=1 off-argmax " + std::to_string(beta_violations) +
                  " of " + std::to_string(beta_steps) + " steps; identical contexts max |dq| " + num(dev_same)};
}

// ---------------------------------------------------------------------------

Outcome candidate_monotonicity() {
  Rng rng(3);
  int violations = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> p(20);
    double z = 0;
    for (double& v : p)
      z += (v = std::exp(2.0 * rng.normal()));
    for (double& v : p)
      v /= z;
    double b1 = rng.uniform(), b2 = rng.uniform();
    if (b1 > b2)
      std::swap(b1, b2);
    const std::vector<int> loose = candidate_set(p, b1), tight = candidate_set(p, b2);
    if (!std::includes(loose.begin(), loose.end(), tight.begin(), tight.end()))
      ++violations;
  }
  return {violations == 0, "1000 vectors, " + std::to_string(violations) + " violations"};
}

// ---------------------------------------------------------------------------

std::set<std::pair<std::pair<int, int>, std::pair<int, int>>> as_oracle(const ContactSet& cs) {
  std::set<std::pair<std::pair<int, int>, std::pair<int, int>>> out;
  for (const auto& [a, b] : cs.pairs)
    out.insert({{a.chain, a.residue}, {b.chain, b.residue}});
  return out;
}

Outcome oracle_equivalence() {
  std::vector<std::string> bad;
  // k-NN on 500 residues.
  {
    const Structure s = jittered(synth::helix_bundle("BND", 25, 20, 10.0, 99, false), 1, 0.3);
    const ResidueGraph g = build_residue_graph(s, {});
    const auto ref = oracle::knn(g.ca, 48);
    bool same = s.residue_count() == 500;
    for (int i = 0; i < g.n && same; ++i)
      for (int k = 0; k < 48; ++k)
        same = same && g.neighbor_index[i * 48 + k] == ref[i][k];
    if (!same)
      bad.push_back("knn");
  }
  // Contacts.
  {
    std::vector<Structure> fx;
    for (std::uint64_t seed : {1, 2, 3})
      fx.push_back(synth::toy_complex("C", seed, 25, 35));
    fx.push_back(synth::helix_bundle("H", 4, 30, 10.0, 5));
    fx.push_back(jittered(synth::helix_bundle("BIG", 16, 30, 9.0, 8), 4, 0.5));  // 480 residues
    bool heavy = true, ca = true;
    for (const Structure& s : fx) {
      heavy = heavy && as_oracle(contacts(s, ContactDef::Heavy8)) == oracle::contacts(s, false);
      ca = ca && as_oracle(contacts(s, ContactDef::Ca10)) == oracle::contacts(s, true);
    }
    if (!heavy)
      bad.push_back("heavy8");
    if (!ca)
      bad.push_back("ca10");
  }
  Rng rng(3);
  // Jaccard.
  {
    bool same = true;
    for (int trial = 0; trial < 300; ++trial) {
      std::set<std::pair<int, int>> a, b;
      const int n = static_cast<int>(rng.index(8));
      for (int k = 0; k < n; ++k) {
        a.insert({static_cast<int>(rng.index(4)), static_cast<int>(rng.index(4))});
        b.insert({static_cast<int>(rng.index(4)), static_cast<int>(rng.index(4))});
      }
      same = same && jaccard_difficulty(a, b) == oracle::jaccard(a, b);
    }
    if (!same)
      bad.push_back("jaccard");
  }
  // Kendall tau-b with ties.
  {
    bool same = true;
    for (int trial = 0; trial < 300; ++trial) {
      const int n = 2 + static_cast<int>(rng.index(80));
      std::vector<double> x(n), y(n);
      for (int i = 0; i < n; ++i) {
        x[i] = static_cast<double>(rng.index(6));
        y[i] = static_cast<double>(rng.index(6));
      }
      const std::optional<double> t = kendall_tau_b(x, y);
      const double o = oracle::kendall_tau_b(x, y);
      same = same && (t ? *t == o : std::isnan(o));
    }
    if (!same)
      bad.push_back("kendall");
  }
  // Meff on up to 50 rows.
  {
    bool same = true;
    const std::string alphabet = "ACDEFGHIKL-";
    for (int trial = 0; trial < 100; ++trial) {
      const int n = 2 + static_cast<int>(rng.index(49)), w = 5 + static_cast<int>(rng.index(40));
      std::string base(w, 'A');
      for (char& c : base)
        c = alphabet[rng.index(10)];
      std::vector<std::string> rows;
      for (int i = 0; i < n; ++i) {
        std::string r = base;
        const double rate = rng.uniform(0.0, 0.7);
        for (char& c : r)
          if (rng.uniform() < rate)
            c = alphabet[rng.index(alphabet.size())];
        rows.push_back(r);
      }
      same = same && meff(rows) == oracle::identity_components(rows, 0.65);
    }
    if (!same)
      bad.push_back("meff");
  }
  std::string detail = "knn, heavy8, ca10, jaccard, kendall, meff";
  if (!bad.empty()) {
    detail = "mismatch in:";
    for (const std::string& b : bad)
      detail += " " + b;
  }
  return {bad.empty(), detail};
}

// ---------------------------------------------------------------------------

Outcome toy_training() {
  const auto t0 = Clock::now();
  const ModelConfig cfg = ModelConfig::toy();
  RedNet<double> model = init_model<double>(cfg, 1);
  std::vector<TrainExample> data = toy_training_set(cfg, 1, 5);
  TrainConfig tc;
  tc.steps = 200;
  tc.seed = 1;
  const std::vector<StepRecord> log = train(model, data, tc);
  const std::vector<double> windows = window_means(log, 10);
  int increases = 0;
  for (std::size_t i = 1; i < windows.size(); ++i)
    increases += windows[i] > windows[i - 1];
  double nsr = 0;
  for (const TrainExample& ex : data)
    nsr += sequence_recovery(ex.features, greedy_decode(model, ex.features, ex.order));
  nsr /= static_cast<double>(data.size());
  const double secs = seconds_since(t0);
  const bool ok = log.size() == 200 && increases == 0 && nsr > 0.5 && secs < 300.0;
  return {ok, "loss " + num(log.front().total) + " -> " + num(log.back().total) + ", " +
                  std::to_string(increases) + " window increases, NSR " + num(nsr) + ", " + num(secs) + " s"};
}

// ---------------------------------------------------------------------------

Outcome pairing_recovery() {
  int exact = 0, invariant = 0;
  for (int inst = 0; inst < 50; ++inst) {
    Rng rng(1000 + inst);
    const planted::Instance pi = planted::make_instance(rng);
    const PairedMsa p = pair_by_attention(pi.m1, similarity_from_attention(pi.attn1), pi.m2,
                                          similarity_from_attention(pi.attn2));
    std::set<std::pair<int, int>> got;
    for (int i = 1; i < p.depth(); ++i)
      got.insert({p.rows[i].row1, p.rows[i].row2});
    exact += got == pi.truth;
    const double lambda = rng.uniform(0.05, 20.0);
    const PairedMsa q = pair_by_attention(pi.m1, similarity_from_attention(planted::scaled(pi.attn1, lambda)),
                                          pi.m2, similarity_from_attention(planted::scaled(pi.attn2, lambda)));
    invariant += q.sequences() == p.sequences();
  }
  return {exact == 50 && invariant == 50, std::to_string(exact) + "/50 exact pairings, " +
                                              std::to_string(invariant) + "/50 unchanged under rescaling"};
}

// ---------------------------------------------------------------------------

Outcome curation() {
  const corpus::Planted pc = corpus::selectivity_corpus();
  CurationParams p;
  p.on_target_entry = "ON";
  const CurationResult r = curate_selectivity_set(pc.entries, p);
  if (r.cases.size() != 1)
    return {false, std::to_string(r.cases.size()) + " cases emitted"};
  const SelectivityCase& c = r.cases[0];
  const std::string on = pc.entries[c.on.binder.entry].id, off = pc.entries[c.off.binder.entry].id;
  if (on != "ON" || off != "VALID")
    return {false, "emitted " + on + "/" + off};
  std::string detail = "case ON/VALID;";
  for (const auto& [id, reason] : pc.expected_reason) {
    const Rejection* hit = nullptr;
    for (const Rejection& rej : r.rejections)
      if (rej.off && pc.entries[rej.off->binder.entry].id == id && rej.cluster == c.cluster)
        hit = &rej;
    if (!hit || hit->reasons != std::vector<std::string>{reason})
      return {false, id + " not rejected for '" + reason + "'"};
    detail += " " + id + "=" + reason;
  }
  return {true, detail};
}

// ---------------------------------------------------------------------------

Outcome metric_formulas() {
  std::vector<std::string> bad;
  ModelConfig cfg = ModelConfig::toy();
  cfg.width = 16;
  cfg.heads = 2;
  RedNet<double> model = init_model<double>(cfg, 3);
  const ComplexFeatures f = featurize_complex(synth::toy_complex("SC", 4, 8, 12), {}, cfg);
  const std::vector<int> pos = f.design_positions();
  std::vector<int> wt;
  for (int p : pos)
    wt.push_back(f.native[p]);
  const LogProbTable bound = logprob_table(model, f, f.native, pos);
  const LogProbTable complex = logprob_table(model, f, f.native, [&] {
    std::vector<int> all(f.n);
    for (int i = 0; i < f.n; ++i)
      all[i] = i;
    return all;
  }());
  const LogProbTable unbound = logprob_table(model, featurize_complex(unbound_binder(synth::toy_complex("SC", 4, 8, 12)), {}, cfg),
                                             wt, [&] {
                                               std::vector<int> all(pos.size());
                                               for (std::size_t i = 0; i < all.size(); ++i)
                                                 all[i] = static_cast<int>(i);
                                               return all;
                                             }());
  const ScoreReport w = score_sequence(wt, wt, bound, unbound, complex, f.native);
  if (!w.ll_ref || *w.ll_ref != 0.0)
    bad.push_back("ll_ref");

  // Context-symmetric model: the unbound table equals the bound one.
  std::vector<int> des = wt;
  des[1] = (des[1] + 3) % 20;
  des[4] = (des[4] + 7) % 20;
  std::vector<int> full = f.native;
  full[pos[1]] = des[1];
  full[pos[4]] = des[4];
  const LogProbTable sym = logprob_table(model, f, full, pos);
  const ScoreReport s = score_sequence(des, wt, sym, sym, complex, f.native);
  if (s.ll_cd != 0.0 || !s.ll_cd_ref || *s.ll_cd_ref != 0.0)
    bad.push_back("ll_cd");

  double ppl_dev = 0;
  for (double ll : {w.ll, s.ll, -0.1, -1.7, std::log(1.0 / 20)})
    ppl_dev = std::max(ppl_dev, std::abs(perplexity(ll) - std::exp(-ll)));
  if (ppl_dev > 1e-9)
    bad.push_back("ppl");

  // Top-k with fewer true contacts than k: hand-computed hits / k.
  std::vector<ScoredContact> pred = {{0, 0, 0.9}, {1, 1, 0.8}, {2, 2, 0.7}};
  for (int i = 3; i < 20; ++i)
    pred.push_back({i, i, 0.1});
  const std::set<std::pair<int, int>> truth = {{0, 0}, {1, 1}, {2, 2}};
  const double t1 = topk_precision(pred, truth, 10);
  const double t2 = topk_precision({{0, 0, 1.0}}, truth, 10);
  const double t3 = topk_precision({{5, 5, 1.0}, {0, 0, 0.5}, {1, 1, 0.4}}, truth, 10);
  if (t1 != 3.0 / 10 || t2 != 1.0 / 10 || t3 != 2.0 / 10)
    bad.push_back("topk");

  std::string detail = "ll_ref(WT) " + num(*w.ll_ref) + ", ll_cd(sym) " + num(s.ll_cd) + ", max |PPL-exp(-LL)| " +
                       num(ppl_dev) + ", top-k " + num(t1) + "/" + num(t2) + "/" + num(t3);
  for (const std::string& b : bad)
    detail += "; bad " + b;
  return {bad.empty(), detail};
}

// ---------------------------------------------------------------------------

Outcome determinism() {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / ("binderkit_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  clifx::write_fixtures(dir);
  int ok = 0, total = 0;
  std::string failures;
  for (const clifx::Invocation& inv : clifx::invocations(true)) {
    ++total;
    std::string why;
    if (clifx::deterministic(BINDERKIT_CLI, dir, inv, 3, why))
      ++ok;
    else
      failures += "; " + inv.name + ": " + why;
  }
  fs::remove_all(dir);
  return {ok == total, std::to_string(ok) + "/" + std::to_string(total) + " invocations byte-identical over 3 runs" +
                           failures};
}

} // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"rigid-motion invariance", rigid_motion_invariance},
      {"gradient correctness", gradient_correctness},
      {"causality", causality},
      {"contrastive decoding degeneracies", decoding_degeneracies},
      {"candidate-set monotonicity", candidate_monotonicity},
      {"oracle equivalence", oracle_equivalence},
      {"toy training", toy_training},
      {"attention pairing recovery", pairing_recovery},
      {"benchmark curation", curation},
      {"metric formulas", metric_formulas},
      {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s %zu. %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed;
}
