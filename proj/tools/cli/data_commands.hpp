// MSA pairing and benchmark subcommands.

#ifndef BINDERKIT_TOOLS_CLI_DATA_COMMANDS_HPP_
#define BINDERKIT_TOOLS_CLI_DATA_COMMANDS_HPP_

#include "binderkit/bench/curate.hpp"
#include "binderkit/bench/eval.hpp"
#include "binderkit/msa/pairing.hpp"
#include "binderkit/msa/stats.hpp"
#include "model_commands.hpp"

namespace binderkit::cli {

// ---------------------------------------------------------------------------
// pair-msa

struct PairMsaArgs {
  std::string msa1, msa2;
  std::string attn1, attn2;
  std::string strategy = "colattn";
  std::string agg = "sum";
  std::string out;
  std::string stats;
};

inline MsaBlock load_msa(const std::string& path, Run& run) {
  const std::string text = run.read(path);
  std::string ext = std::filesystem::path(path).extension().string();
  const bool sto = ext == ".sto" || ext == ".stk" || text.rfind("# STOCKHOLM", 0) == 0;
  return sto ? parse_stockholm(text) : parse_a3m(text);
}

inline AttentionStack load_attention(const std::string& path, Run& run) {
  std::vector<std::string> warnings;
  AttentionStack st = attention_from_container(decode_container(run.read(path)), &warnings);
  for (const std::string& w : warnings)
    std::cerr << "binderkit: " << path << ": " << w << "\n";
  return st;
}

inline void run_pair_msa(const PairMsaArgs& a, Run& run) {
  const MsaBlock m1 = load_msa(a.msa1, run);
  const MsaBlock m2 = load_msa(a.msa2, run);
  PairedMsa paired;
  if (a.strategy == "colattn") {
    if (a.attn1.empty() || a.attn2.empty())
      fail(ErrorKind::Contract, "strategy colattn needs --attn1 and --attn2");
    const Aggregation agg = a.agg == "mean" ? Aggregation::Mean : Aggregation::Sum;
    paired = pair_by_attention(m1, similarity_from_attention(load_attention(a.attn1, run), agg), m2,
                               similarity_from_attention(load_attention(a.attn2, run), agg));
  } else if (a.strategy == "phylo") {
    paired = pair_phylogeny(m1, m2);
  } else {
    paired = block_diagonalize(m1, m2);
  }
  run.write(a.out, write_paired_a3m(paired));
  const MsaStats st = msa_stats(paired);
  const Json stats = {{"depth", st.depth}, {"n_species", st.n_species}, {"meff", st.meff}};
  if (!a.stats.empty())
    run.write(a.stats, to_json_text(stats));
  run.summary() = stats;
}

// ---------------------------------------------------------------------------
// bench contacts

struct ContactsArgs {
  std::string input;
  std::string def = "heavy8";
  std::string out;
  std::string pred;
  std::string chain_a, chain_b;
  std::string metrics;
};

inline std::vector<ScoredContact> load_predictions(const std::string& path, Run& run) {
  const Table t = parse_tsv(run.read(path), path);
  const int ci = t.column("i", path), cj = t.column("j", path), cs = t.column("score", path);
  std::vector<ScoredContact> out;
  for (const auto& row : t.rows) {
    ScoredContact c;
    c.i = static_cast<int>(parse_number(row[ci], path));
    c.j = static_cast<int>(parse_number(row[cj], path));
    c.score = parse_number(row[cs], path);
    out.push_back(c);
  }
  return out;
}

inline void run_bench_contacts(const ContactsArgs& a, Run& run) {
  const Structure s = load_structure(a.input, run);
  const ContactSet cs = contacts(s, parse_contact_def(a.def));
  std::string text = "chain1\tresidue1\tseq_id1\tchain2\tresidue2\tseq_id2\n";
  for (const auto& [x, y] : cs.pairs)
    text += s.chains[x.chain].id + "\t" + std::to_string(x.residue) + "\t" +
            std::to_string(s.chains[x.chain].residues[x.residue].seq_id) + "\t" + s.chains[y.chain].id + "\t" +
            std::to_string(y.residue) + "\t" + std::to_string(s.chains[y.chain].residues[y.residue].seq_id) + "\n";
  run.write(a.out, text);
  run.summary() = {{"definition", contact_def_name(cs.def)}, {"contacts", cs.size()}};
  if (a.pred.empty() && a.metrics.empty())
    return;
  if (s.chains.size() < 2)
    fail(ErrorKind::Contract, "contact metrics need two chains in '" + a.input + "'");
  const int ca = a.chain_a.empty() ? 0 : chain_index(s, a.chain_a);
  const int cb = a.chain_b.empty() ? 1 : chain_index(s, a.chain_b);
  const std::set<std::pair<int, int>> truth = interface_pairs(cs, ca, cb);
  const std::size_t la = s.chains[ca].size(), lb = s.chains[cb].size();
  std::string m = "metric\tk\tvalue\n";
  m += "n_contacts\tNA\t" + std::to_string(truth.size()) + "\n";
  m += "density\tNA\t" + fmt(contact_density(truth.size(), la, lb)) + "\n";
  if (!a.pred.empty()) {
    const std::vector<ScoredContact> pred = load_predictions(a.pred, run);
    for (const char* name : {"10", "25", "50", "L/10", "L/5"}) {
      const int k = resolve_top_k(parse_top_k(name), static_cast<int>(std::min(la, lb)));
      m += std::string("top_") + name + "_precision\t" + std::to_string(k) + "\t" +
           fmt(topk_precision(pred, truth, k)) + "\n";
    }
  }
  run.write(a.metrics.empty() ? a.out + ".metrics.tsv" : a.metrics, m);
}

// ---------------------------------------------------------------------------
// bench curate

struct CurateArgs {
  std::vector<std::string> inputs;
  std::string out;
  std::string on_target;
  int sample = -1;
  CurationParams params;
};

inline Json heterodimer_json(const std::vector<Structure>& entries, const Heterodimer& h) {
  return {{"entry", entries[h.binder.entry].id},
          {"binder_chain", entries[h.binder.entry].chains[h.binder.chain].id},
          {"target_chain", entries[h.target.entry].chains[h.target.chain].id}};
}

inline void run_bench_curate(CurateArgs a, std::uint64_t seed, Run& run) {
  std::vector<Structure> entries;
  for (const std::string& path : a.inputs)
    entries.push_back(load_structure(path, run));
  a.params.seed = seed;
  if (!a.on_target.empty())
    a.params.on_target_entry = a.on_target;
  if (a.sample >= 0)
    a.params.sample = a.sample;
  const CurationResult res = curate_selectivity_set(entries, a.params);

  Json j;
  j["n_entries"] = entries.size();
  j["n_clusters"] = res.n_clusters;
  Json clusters = Json::array();
  for (const auto& members : res.clusters) {
    Json c = Json::array();
    for (const ChainRef& m : members)
      c.push_back(chain_label(entries, m));
    clusters.push_back(c);
  }
  j["clusters"] = clusters;
  Json cases = Json::array();
  for (const SelectivityCase& c : res.cases) {
    const Chain& ob = entries[c.on.binder.entry].chains[c.on.binder.chain];
    const Chain& fb = entries[c.off.binder.entry].chains[c.off.binder.chain];
    cases.push_back({{"cluster", c.cluster},
                     {"on_target", heterodimer_json(entries, c.on)},
                     {"off_target", heterodimer_json(entries, c.off)},
                     {"on_binder_sequence", ob.sequence()},
                     {"off_binder_sequence", fb.sequence()},
                     {"identity", c.identity},
                     {"coverage", c.coverage},
                     {"rmsd", c.rmsd},
                     {"difficulty", c.difficulty},
                     {"binder_map", c.binder_map},
                     {"target_map", c.target_map}});
  }
  j["cases"] = cases;
  Json rej = Json::array();
  for (const Rejection& r : res.rejections) {
    Json x = {{"cluster", r.cluster}};
    x["on_target"] = r.on ? heterodimer_json(entries, *r.on) : Json(nullptr);
    x["off_target"] = r.off ? heterodimer_json(entries, *r.off) : Json(nullptr);
    x["reasons"] = r.reasons;
    rej.push_back(x);
  }
  j["rejections"] = rej;
  run.write(a.out, to_json_text(j));
  run.summary() = {{"clusters", res.n_clusters}, {"cases", res.cases.size()}, {"rejections", res.rejections.size()}};
}

// ---------------------------------------------------------------------------
// bench selectivity

struct SelectivityArgs {
  std::string input;
  std::string out;
  std::vector<double> thresholds = default_selectivity_thresholds();
};

inline void run_bench_selectivity(const SelectivityArgs& a, Run& run) {
  const Table t = parse_tsv(run.read(a.input), a.input);
  const int on = t.column("score_on", a.input), off = t.column("score_off", a.input);
  std::vector<std::pair<double, double>> scores;
  for (const auto& row : t.rows)
    scores.push_back({parse_number(row[on], a.input), parse_number(row[off], a.input)});
  std::string text = "threshold\tn_cases\tsuccess_rate\n";
  for (const SelectivityRate& r : selectivity_success(scores, a.thresholds))
    text += fmt(r.threshold) + "\t" + std::to_string(scores.size()) + "\t" + fmt(r.rate) + "\n";
  run.write(a.out, text);
  run.summary() = {{"cases", scores.size()}};
}

// ---------------------------------------------------------------------------
// bench recovery

struct RecoveryArgs {
  std::vector<std::string> inputs;
  std::string design_chain;
  std::string out;
  std::string cases_out;
  ModelSource model;
  double beta = 0.0;
  double temp = 1e-3;
  bool left_to_right = false;
};

inline void run_bench_recovery(RecoveryArgs a, std::uint64_t seed, int threads, Run& run) {
  a.model.init_seed = seed;
  RedNet<double> model = load_model(a.model, run);
  std::vector<Structure> structures;
  std::vector<ComplexFeatures> feats;
  std::vector<ComplexClass> classes;
  for (const std::string& path : a.inputs) {
    Structure s = load_structure(path, run);
    const int bc = chain_index(s, a.design_chain);
    s.set_design_chains({a.design_chain});
    classes.push_back(classify_complex(s, bc));
    feats.push_back(featurize_complex(s, {}, model.config));
    structures.push_back(std::move(s));
  }
  const int n = static_cast<int>(structures.size());
  std::vector<RecoveryCase> cases(n);
  std::vector<RedNet<double>> models(static_cast<std::size_t>(std::max(1, std::min(threads, n))), model);
  parallel_for(n, threads, [&](int k, int w) {
    const ComplexFeatures& f = feats[k];
    DecodeConfig cfg;
    cfg.alpha = 0.0;
    cfg.beta = a.beta;
    cfg.tau = a.temp;
    cfg.mode = DecodeMode::Standard;
    cfg.seed = sample_seed(seed, k);
    const DecodeContext ctx = make_context(f, nullptr, std::nullopt, splitmix64(cfg.seed), a.left_to_right);
    const DecodeResult r = contrastive_decode(models[w], ctx, cfg);
    RecoveryCase& c = cases[k];
    c.cls = classes[k];
    c.designed = r.tokens;
    for (int p : f.design_positions())
      c.native.push_back(f.native[p]);
    c.logp = logprob_table(models[w], f, f.native, f.design_positions());
  });
  const std::map<ComplexClass, EvalRow> rows = eval_recovery(cases);
  std::string text = "class\tn_cases\tn_positions\tnsr\tll\tppl\n";
  for (const auto& [cls, r] : rows)
    text += std::string(complex_class_name(cls)) + "\t" + std::to_string(r.n_cases) + "\t" +
            std::to_string(r.n_positions) + "\t" + fmt(r.nsr) + "\t" + fmt(r.ll) + "\t" + fmt(r.ppl) + "\n";
  run.write(a.out, text);
  if (!a.cases_out.empty()) {
    std::string ct = "id\tclass\tnative\tdesigned\n";
    for (int k = 0; k < n; ++k)
      ct += structures[k].id + "\t" + complex_class_name(cases[k].cls) + "\t" + sequence_string(cases[k].native) +
            "\t" + sequence_string(cases[k].designed) + "\n";
    run.write(a.cases_out, ct);
  }
  run.summary() = {{"structures", n}};
}

// ---------------------------------------------------------------------------
// bench rank-decoys

struct RankDecoysArgs {
  std::vector<std::string> decoys;
  std::string pred;
  std::string top_k = "L/10";
  std::string out;
};

inline void run_bench_rank_decoys(const RankDecoysArgs& a, Run& run) {
  std::vector<Structure> decoys;
  for (const std::string& path : a.decoys)
    decoys.push_back(load_structure(path, run));
  const std::vector<ScoredContact> pred = load_predictions(a.pred, run);
  int k = 0;
  if (!a.top_k.empty() && std::all_of(a.top_k.begin(), a.top_k.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
    k = std::stoi(a.top_k);
  } else {
    if (decoys.empty() || decoys[0].chains.size() < 2)
      fail(ErrorKind::Contract, "L-relative top-k needs a first decoy with two chains");
    k = resolve_top_k(parse_top_k(a.top_k),
                      static_cast<int>(std::min(decoys[0].chains[0].size(), decoys[0].chains[1].size())));
  }
  if (k <= 0)
    fail(ErrorKind::Contract, "--top-k must be positive");
  std::string text = "rank\tindex\tid\tscore\n";
  int rank = 0;
  for (const DecoyScore& d : rank_decoys(decoys, pred, k))
    text += std::to_string(++rank) + "\t" + std::to_string(d.index) + "\t" + d.id + "\t" + std::to_string(d.score) + "\n";
  run.write(a.out, text);
  run.summary() = {{"decoys", decoys.size()}, {"top_k", k}};
}

} // namespace binderkit::cli

#endif
