// Structure, featurization, model and decoding subcommands.

#ifndef BINDERKIT_TOOLS_CLI_MODEL_COMMANDS_HPP_
#define BINDERKIT_TOOLS_CLI_MODEL_COMMANDS_HPP_

#include <map>

#include "binderkit/bench/align.hpp"
#include "binderkit/core/container.hpp"
#include "binderkit/decode/contrastive.hpp"
#include "binderkit/model/train.hpp"
#include "binderkit/scoring/rank.hpp"
#include "binderkit/scoring/score.hpp"
#include "binderkit/structure/io.hpp"
#include "support.hpp"

namespace binderkit::cli {

// ---------------------------------------------------------------------------
// dump-structure

struct DumpStructureArgs {
  std::string input;
  std::string out;
};

inline void run_dump_structure(const DumpStructureArgs& a, Run& run) {
  const Structure s = load_structure(a.input, run);
  const std::string text = to_json_text(structure_to_json(s));
  if (a.out.empty())
    std::cout << text;
  else
    run.write(a.out, text);
  run.summary() = {{"chains", s.chains.size()}, {"residues", s.residue_count()}};
}

// ---------------------------------------------------------------------------
// featurize

struct FeaturizeArgs {
  std::string input;
  std::vector<std::string> design_chains;
  std::string out;
  int k = 48;
  double radius = 15.0;
  int k_max = 96;
};

inline void run_featurize(const FeaturizeArgs& a, Run& run) {
  Structure s = load_structure(a.input, run);
  for (const std::string& c : a.design_chains)
    chain_index(s, c);
  s.set_design_chains(a.design_chains);
  const std::vector<bool> mask = design_mask_from_roles(s);
  const ResidueGraph rg = build_residue_graph(s, mask, {}, a.k);
  const AtomGraph ag = build_atom_graph(s, mask, {}, a.radius, a.k_max);
  std::vector<NamedTensor> tensors;
  NdArray<double> tokens({rg.n}), design({rg.n});
  for (int i = 0; i < rg.n; ++i) {
    tokens[i] = rg.nodes[i].aa;
    design[i] = rg.nodes[i].design ? 1.0 : 0.0;
  }
  tensors.push_back({"residue.tokens", tokens.cast<float>()});
  tensors.push_back({"residue.design_mask", design.cast<float>()});
  for (auto& [name, t] : rg.named_tensors())
    tensors.push_back({name, t.cast<float>()});
  for (auto& [name, t] : ag.named_tensors())
    tensors.push_back({name, t.cast<float>()});
  run.write(a.out, encode_container(tensors));
  run.summary() = {{"residues", rg.n}, {"atoms", ag.n_atoms}, {"atom_edges", ag.n_edges()},
                   {"tensors", tensors.size()}};
}

// ---------------------------------------------------------------------------
// train-toy

struct TrainToyArgs {
  std::string out;
  std::string config;
  std::string log;
  int steps = 200;
  int structures = 5;
  double lr = 3e-3;
  double lambda_edge = 1.0;
};

inline void run_train_toy(const TrainToyArgs& a, std::uint64_t seed, Run& run) {
  ModelConfig cfg = ModelConfig::toy();
  if (!a.config.empty())
    cfg = config_from_text(run.read(a.config), cfg);
  RedNet<double> model = init_model<double>(cfg, seed);
  std::vector<TrainExample> data = toy_training_set(cfg, seed, a.structures);
  TrainConfig tc;
  tc.steps = a.steps;
  tc.adam.lr = a.lr;
  tc.lambda_edge = a.lambda_edge;
  tc.seed = seed;
  const std::vector<StepRecord> log = train(model, data, tc);
  double nsr = 0.0;
  for (const TrainExample& ex : data)
    nsr += sequence_recovery(ex.features, greedy_decode(model, ex.features, ex.order));
  nsr /= static_cast<double>(data.size());

  run.write(a.out, encode_params(model.params));
  run.write(a.out + ".cfg", config_to_text(cfg));
  if (!a.log.empty()) {
    std::string text = "step\ttotal\tnode\tedge\n";
    for (const StepRecord& r : log)
      text += std::to_string(r.step) + "\t" + fmt(r.total) + "\t" + fmt(r.node) + "\t" + fmt(r.edge) + "\n";
    run.write(a.log, text);
  }
  run.summary() = {{"steps", log.size()},
                   {"first_loss", log.empty() ? Json(nullptr) : Json(log.front().total)},
                   {"final_loss", log.empty() ? Json(nullptr) : Json(log.back().total)},
                   {"train_nsr", nsr}};
}

// ---------------------------------------------------------------------------
// logits

struct LogitsArgs {
  std::string input;
  std::vector<std::string> design_chains;
  std::string out;
  ModelSource model;
  bool left_to_right = false;
  bool masked = false;
};

inline std::string vocab_name(int t) {
  if (t < kNumAminoAcids)
    return std::string(1, kOneLetter[t]);
  if (t == kTokenUnk)
    return "UNK";
  if (t == kTokenMask)
    return "MASK";
  return "RES" + std::to_string(t);
}

inline void run_logits(LogitsArgs a, std::uint64_t seed, Run& run) {
  Structure s = load_structure(a.input, run);
  for (const std::string& c : a.design_chains)
    chain_index(s, c);
  s.set_design_chains(a.design_chains);
  a.model.init_seed = seed;
  RedNet<double> model = load_model(a.model, run);
  const ComplexFeatures f = featurize_complex(s, {}, model.config);
  const DecodingOrder order = a.left_to_right ? DecodingOrder::left_to_right(f.design)
                                              : DecodingOrder::random(f.design, seed);
  const std::vector<int> tokens = a.masked ? f.masked_tokens() : f.native;
  const NdArray<double> logits = forward_logits(model, f, tokens, order);
  const std::vector<int> rank = order.ranks(f.design);
  const int r = model.config.vocab;

  std::string text = "index\tchain\tseq_id\tnative\tdesign\torder";
  for (int t = 0; t < r; ++t)
    text += "\t" + vocab_name(t);
  text += "\n";
  for (int i = 0; i < f.n; ++i) {
    const ResidueNode& nd = f.nodes[i];
    text += std::to_string(i) + "\t" + s.chains[nd.chain].id + "\t" +
            std::to_string(nd.seq_id) + "\t" + one_letter(f.native[i]) + "\t" +
            (f.design[i] ? "1" : "0") + "\t" + std::to_string(rank[i]);
    for (int t = 0; t < r; ++t)
      text += "\t" + fmt(logits[static_cast<std::int64_t>(i) * r + t]);
    text += "\n";
  }
  run.write(a.out, text);
  run.summary() = {{"residues", f.n}, {"design_positions", f.n_design()}};
}

// ---------------------------------------------------------------------------
// design

struct DesignArgs {
  std::string on;
  std::string off;
  std::string design_chain;
  std::string off_design_chain;
  std::string out;
  std::string trace;
  ModelSource model;
  double alpha = 1.0;
  double beta = 0.9;
  double temp = 1e-3;
  int n = 8;
  std::string mode = "contrast_offtarget";
  bool left_to_right = false;
};

inline std::uint64_t sample_seed(std::uint64_t seed, int k) {
  return splitmix64(seed ^ (0xD1B54A32D192ED03ULL * static_cast<std::uint64_t>(k + 1)));
}

inline Json trace_json(int sample, const StepTrace& st) {
  Json j;
  j["sample"] = sample;
  j["step"] = st.step;
  j["position"] = st.position;
  j["matched"] = st.matched;
  j["clamped"] = st.clamped;
  j["p_on"] = st.p_on;
  j["p_off"] = st.p_off;
  j["scores"] = st.scores;
  j["candidates"] = st.candidates;
  j["q"] = st.q;
  j["token"] = std::string(1, one_letter(st.token));
  return j;
}

// One JSON object per line, floats at 17 digits.
inline std::string json_line(const Json& j) {
  std::string text = to_json_text(j);
  std::string out;
  bool in_string = false, escaped = false;
  for (char c : text) {
    if (in_string) {
      out.push_back(c);
      if (escaped)
        escaped = false;
      else if (c == '\\')
        escaped = true;
      else if (c == '"')
        in_string = false;
      continue;
    }
    if (c == '"')
      in_string = true;
    if (c == '\n' || c == ' ')
      continue;
    out.push_back(c);
  }
  return out + "\n";
}

// Maps the design residues of the on context onto those of the off context
// through a global alignment of the two binder chains.
inline std::vector<int> off_positions_by_alignment(const Chain& on_binder, const ComplexFeatures& f_on,
                                                   const Chain& off_binder, const ComplexFeatures& f_off) {
  const SequenceAlignment al = align_sequences(on_binder.tokens(), off_binder.tokens());
  const std::vector<int> on_pos = f_on.design_positions();
  const std::vector<int> off_pos = f_off.design_positions();
  require(on_pos.size() == on_binder.size() && off_pos.size() == off_binder.size(),
          "design positions must be exactly the binder residues");
  std::vector<int> out(on_pos.size(), -1);
  for (std::size_t i = 0; i < on_pos.size(); ++i)
    if (al.a_to_b[i] >= 0)
      out[i] = off_pos[al.a_to_b[i]];
  return out;
}

inline void run_design(DesignArgs a, std::uint64_t seed, int threads, Run& run) {
  DecodeConfig base;
  base.alpha = a.alpha;
  base.beta = a.beta;
  base.tau = a.temp;
  base.mode = parse_mode(a.mode);
  base.validate();
  if (a.n <= 0)
    fail(ErrorKind::Contract, "--n must be positive");

  Structure on = load_structure(a.on, run);
  const int on_chain = chain_index(on, a.design_chain);
  on.set_design_chains({a.design_chain});
  a.model.init_seed = seed;
  RedNet<double> model = load_model(a.model, run);
  const ComplexFeatures f_on = featurize_complex(on, {}, model.config);

  std::optional<ComplexFeatures> f_alt;
  std::optional<std::vector<int>> alt_positions;
  if (base.mode == DecodeMode::ContrastOfftarget) {
    if (a.off.empty())
      fail(ErrorKind::Contract, "mode contrast_offtarget needs --off");
    Structure off = load_structure(a.off, run);
    const std::string off_chain_id = a.off_design_chain.empty() ? a.design_chain : a.off_design_chain;
    const int off_chain = chain_index(off, off_chain_id);
    off.set_design_chains({off_chain_id});
    f_alt = featurize_complex(off, {}, model.config);
    alt_positions = off_positions_by_alignment(on.chains[on_chain], f_on, off.chains[off_chain], *f_alt);
  } else if (base.mode == DecodeMode::ContrastUnbound) {
    f_alt = featurize_complex(unbound_binder(on), {}, model.config);
  }

  std::vector<DecodeResult> results(a.n);
  std::vector<RedNet<double>> models(static_cast<std::size_t>(std::max(1, std::min(threads, a.n))), model);
  parallel_for(a.n, threads, [&](int k, int w) {
    DecodeConfig cfg = base;
    cfg.seed = sample_seed(seed, k);
    const DecodeContext ctx = make_context(f_on, f_alt ? &*f_alt : nullptr, alt_positions,
                                           splitmix64(cfg.seed), a.left_to_right);
    results[k] = contrastive_decode(models[w], ctx, cfg);
  });

  std::string fasta, trace;
  Json per = Json::array();
  for (int k = 0; k < a.n; ++k) {
    const DecodeResult& r = results[k];
    fasta += ">design_" + std::to_string(k) + " seed=" + std::to_string(sample_seed(seed, k)) +
             " alpha=" + fmt(a.alpha) + " beta=" + fmt(a.beta) + " tau=" + fmt(a.temp) + " mode=" +
             mode_name(base.mode) + " mean_ll=" + fmt(r.mean_ll) + "\n" + r.sequence + "\n";
    if (r.unmatched_steps > 0)
      std::cerr << "binderkit: design_" << k << ": " << r.unmatched_steps
                << " position(s) without an off-target match decoded from the on context only\n";
    if (!a.trace.empty())
      for (const StepTrace& st : r.trace)
        trace += json_line(trace_json(k, st));
    per.push_back({{"sequence", r.sequence}, {"mean_ll", r.mean_ll}, {"unmatched_steps", r.unmatched_steps}});
  }
  run.write(a.out, fasta);
  if (!a.trace.empty())
    run.write(a.trace, trace);
  run.summary() = {{"design_positions", f_on.n_design()}, {"designs", per}};
}

// ---------------------------------------------------------------------------
// score

struct ScoreArgs {
  std::string bound;
  std::string unbound;
  std::string design_chain;
  std::string wt;
  std::string mut;
  std::string out;
  std::string affinity;
  std::string rank_out;
  bool lower_is_better = false;
  ModelSource model;
};

struct Variant {
  std::string name;
  std::vector<int> tokens;
};

// One variant per line: `[name<TAB>]spec` where spec is WT, a full binder
// sequence, or comma-separated substitutions such as A12G (1-based binder
// position, wild-type letter checked).
inline std::vector<Variant> parse_variants(std::string_view text, const std::vector<int>& wt,
                                           const std::string& path) {
  std::vector<Variant> out;
  int line_no = 0;
  for (const std::string& raw : lines_of(text)) {
    ++line_no;
    std::string_view line = binderkit::detail::trim(raw);
    if (line.empty() || line[0] == '#')
      continue;
    const std::string where = path + " line " + std::to_string(line_no);
    std::string name, spec;
    if (auto tab = line.find('\t'); tab != std::string_view::npos) {
      name = std::string(binderkit::detail::trim(line.substr(0, tab)));
      spec = std::string(binderkit::detail::trim(line.substr(tab + 1)));
    } else {
      spec = std::string(line);
      name = spec;
    }
    Variant v{name, wt};
    const bool full = spec.size() == wt.size() &&
                      std::all_of(spec.begin(), spec.end(), [](char c) { return std::isalpha(static_cast<unsigned char>(c)); });
    if (spec == "WT") {
    } else if (full) {
      v.tokens = tokens_from_string(spec);
    } else {
      for (const std::string& m : split(spec, ',')) {
        int pos = 0;
        if (m.size() < 3 || !binderkit::detail::parse_int(m.substr(1, m.size() - 2), pos))
          fail(ErrorKind::Parse, where + ": bad substitution '" + m + "'");
        if (pos < 1 || pos > static_cast<int>(wt.size()))
          fail(ErrorKind::Parse, where + ": position " + std::to_string(pos) + " outside binder of length " +
                                     std::to_string(wt.size()));
        if (token_from_one_letter(m.front()) != wt[pos - 1])
          fail(ErrorKind::Parse, where + ": wild-type at " + std::to_string(pos) + " is " + one_letter(wt[pos - 1]) +
                                     ", not " + m.front());
        const int to = token_from_one_letter(m.back());
        if (to >= kNumAminoAcids)
          fail(ErrorKind::Parse, where + ": '" + m.back() + "' is not an amino acid");
        v.tokens[pos - 1] = to;
      }
    }
    for (int t : v.tokens)
      if (t >= kNumAminoAcids)
        fail(ErrorKind::Parse, where + ": sequence has a non-standard residue");
    out.push_back(std::move(v));
  }
  if (out.empty())
    fail(ErrorKind::Parse, path + ": no variants");
  return out;
}

inline const std::vector<std::string>& score_columns() {
  static const std::vector<std::string> c = {"ll", "ll_global", "ll_mt", "ll_ref", "ll_cd", "ll_cd_ref"};
  return c;
}

inline std::optional<double> score_field(const ScoreReport& r, const std::string& name) {
  if (name == "ll") return r.ll;
  if (name == "ll_global") return r.ll_global;
  if (name == "ll_mt") return r.ll_mt;
  if (name == "ll_ref") return r.ll_ref;
  if (name == "ll_cd") return r.ll_cd;
  return r.ll_cd_ref;
}

inline void run_score(ScoreArgs a, std::uint64_t seed, int threads, Run& run) {
  Structure bound = load_structure(a.bound, run);
  const int bc = chain_index(bound, a.design_chain);
  bound.set_design_chains({a.design_chain});
  Structure unbound = a.unbound.empty() ? unbound_binder(bound) : load_structure(a.unbound, run);
  if (!a.unbound.empty()) {
    chain_index(unbound, a.design_chain);
    unbound.set_design_chains({a.design_chain});
  }
  a.model.init_seed = seed;
  RedNet<double> model = load_model(a.model, run);
  const ComplexFeatures fb = featurize_complex(bound, {}, model.config);
  const ComplexFeatures fu = featurize_complex(unbound, {}, model.config);
  const std::vector<int> bpos = fb.design_positions();
  const std::vector<int> upos = fu.design_positions();
  const std::vector<int> wt = a.wt.empty() ? bound.chains[bc].tokens()
                                           : tokens_from_string(read_fasta_sequence(run.read(a.wt), a.wt));
  if (wt.size() != bpos.size() || upos.size() != bpos.size())
    fail(ErrorKind::Contract, "wild-type length " + std::to_string(wt.size()) + ", bound binder " +
                                  std::to_string(bpos.size()) + " and unbound binder " + std::to_string(upos.size()) +
                                  " residues must agree");
  const std::vector<Variant> variants = parse_variants(run.read(a.mut), wt, a.mut);

  std::vector<ScoreReport> reports(variants.size());
  std::vector<RedNet<double>> models(
      static_cast<std::size_t>(std::max(1, std::min<int>(threads, static_cast<int>(variants.size())))), model);
  std::vector<int> all(fb.n);
  std::iota(all.begin(), all.end(), 0);
  parallel_for(static_cast<int>(variants.size()), threads, [&](int k, int w) {
    std::vector<int> tb = fb.native, tu = fu.native;
    for (std::size_t i = 0; i < bpos.size(); ++i) {
      tb[bpos[i]] = variants[k].tokens[i];
      tu[upos[i]] = variants[k].tokens[i];
    }
    const LogProbTable complex_lp = logprob_table(models[w], fb, tb, all);
    LogProbTable bound_lp;
    for (int p : bpos)
      bound_lp.push_back(complex_lp[p]);
    const LogProbTable unbound_lp = logprob_table(models[w], fu, tu, upos);
    reports[k] = score_sequence(variants[k].tokens, wt, bound_lp, unbound_lp, complex_lp, tb);
  });

  std::string text = "name\tsequence\tn_binder\tn_complex\tn_mutated";
  for (const std::string& c : score_columns())
    text += "\t" + c;
  text += "\tppl\n";
  for (std::size_t k = 0; k < variants.size(); ++k) {
    const ScoreReport& r = reports[k];
    text += variants[k].name + "\t" + sequence_string(variants[k].tokens) + "\t" + std::to_string(r.n_binder) +
            "\t" + std::to_string(r.n_complex) + "\t" + std::to_string(r.n_mutated);
    for (const std::string& c : score_columns())
      text += "\t" + fmt(score_field(r, c));
    text += "\t" + fmt(perplexity(r.ll)) + "\n";
  }
  run.write(a.out, text);
  run.summary() = {{"variants", variants.size()}, {"binder_length", wt.size()}};

  if (a.affinity.empty())
    return;
  const Table aff = parse_tsv(run.read(a.affinity), a.affinity);
  const int name_col = aff.column("name", a.affinity);
  const int val_col = aff.column("affinity", a.affinity);
  std::map<std::string, double> measured;
  for (const auto& row : aff.rows)
    measured[row[name_col]] = parse_number(row[val_col], a.affinity);
  NdcgConfig nc;
  nc.higher_is_better = !a.lower_is_better;
  std::string rt = "metric\tn\tspearman\tkendall\tndcg\n";
  for (const std::string& c : score_columns()) {
    std::vector<std::pair<double, double>> pairs;
    for (std::size_t k = 0; k < variants.size(); ++k) {
      auto it = measured.find(variants[k].name);
      const std::optional<double> v = score_field(reports[k], c);
      if (it != measured.end() && v)
        pairs.push_back({*v, it->second});
    }
    if (pairs.size() < 2) {
      rt += c + "\t" + std::to_string(pairs.size()) + "\tNA\tNA\tNA\n";
      continue;
    }
    const RankMetrics m = rank_metrics(pairs, nc);
    rt += c + "\t" + std::to_string(m.n) + "\t" + fmt(m.spearman) + "\t" + fmt(m.kendall) + "\t" + fmt(m.ndcg) + "\n";
  }
  run.write(a.rank_out.empty() ? a.out + ".rank.tsv" : a.rank_out, rt);
}

} // namespace binderkit::cli

#endif
