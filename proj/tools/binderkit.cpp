// binderkit command-line interface.
//
// Exit codes: 0 success (and --help), 1 I/O failure, 2 usage error,
// 3 any other error (parse, contract, model). Errors are written to stderr
// as one JSON object.

#include "cli/data_commands.hpp"

using namespace binderkit;
using namespace binderkit::cli;

namespace {

struct Globals {
  std::uint64_t seed = 0;
  int threads = 1;
  std::string manifest;
};

void report_error(const char* kind, const std::string& message) {
  Json j = {{"error", kind}, {"message", message}};
  std::cerr << j.dump() << "\n";
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"binderkit: protein binder featurization, design, scoring, MSA pairing and benchmarks"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "Seed for every random choice")->capture_default_str();
  app.add_option("--threads", g.threads, "Worker threads (0 = all cores, 1 = serial)")->capture_default_str();
  app.add_option("--manifest", g.manifest, "Run manifest path (default: <out>.manifest.json)");
  app.set_version_flag("--version", kVersion);

  DumpStructureArgs dump;
  CLI::App* c_dump = app.add_subcommand("dump-structure", "Write a JSON dump of a PDB or mmCIF file");
  c_dump->add_option("--input", dump.input, "Structure file")->required();
  c_dump->add_option("--out", dump.out, "Output JSON (stdout when omitted)");

  FeaturizeArgs feat;
  CLI::App* c_feat = app.add_subcommand("featurize", "Write residue and atom graph tensors");
  c_feat->add_option("--input", feat.input, "Structure file")->required();
  c_feat->add_option("--design-chains", feat.design_chains, "Design chain ids")->delimiter(',')->required();
  c_feat->add_option("--out", feat.out, "Tensor container")->required();
  c_feat->add_option("--k", feat.k, "Residue neighbors")->capture_default_str();
  c_feat->add_option("--radius", feat.radius, "Atom graph radius (Å)")->capture_default_str();
  c_feat->add_option("--k-max", feat.k_max, "Atoms per residue centroid")->capture_default_str();

  TrainToyArgs train_args;
  CLI::App* c_train = app.add_subcommand("train-toy", "Train the model on the synthetic toy set");
  c_train->add_option("--out", train_args.out, "Weight container (config written to <out>.cfg)")->required();
  c_train->add_option("--config", train_args.config, "Model config key-value file (default: toy)");
  c_train->add_option("--log", train_args.log, "Per-step loss TSV");
  c_train->add_option("--steps", train_args.steps, "Optimizer steps")->capture_default_str();
  c_train->add_option("--structures", train_args.structures, "Toy complexes")->capture_default_str();
  c_train->add_option("--lr", train_args.lr, "Adam learning rate")->capture_default_str();
  c_train->add_option("--lambda-edge", train_args.lambda_edge, "Edge loss weight")->capture_default_str();

  LogitsArgs logits;
  CLI::App* c_logits = app.add_subcommand("logits", "Write per-residue model logits");
  c_logits->add_option("--input", logits.input, "Structure file")->required();
  c_logits->add_option("--design-chains", logits.design_chains, "Design chain ids")->delimiter(',')->required();
  c_logits->add_option("--out", logits.out, "Logits TSV")->required();
  add_model_options(*c_logits, logits.model);
  c_logits->add_flag("--left-to-right", logits.left_to_right, "Left-to-right decoding order");
  c_logits->add_flag("--masked", logits.masked, "Mask every design token");

  DesignArgs design;
  CLI::App* c_design = app.add_subcommand("design", "Design binder sequences");
  c_design->add_option("--on", design.on, "On-target complex")->required();
  c_design->add_option("--off", design.off, "Off-target complex");
  c_design->add_option("--design-chain", design.design_chain, "Binder chain id")->required();
  c_design->add_option("--off-design-chain", design.off_design_chain, "Binder chain id in --off");
  c_design->add_option("--alpha", design.alpha, "Contrast strength")->capture_default_str();
  c_design->add_option("--beta", design.beta, "Candidate truncation")->capture_default_str();
  c_design->add_option("--temp", design.temp, "Temperature")->capture_default_str();
  c_design->add_option("--n", design.n, "Sequences to design")->capture_default_str();
  c_design->add_option("--mode", design.mode, "Decoding mode")
      ->check(CLI::IsMember({"standard", "contrast_offtarget", "contrast_unbound"}))
      ->capture_default_str();
  c_design->add_option("--out", design.out, "Output FASTA")->required();
  c_design->add_option("--trace", design.trace, "Per-step JSON-lines trace");
  c_design->add_flag("--left-to-right", design.left_to_right, "Left-to-right decoding order");
  add_model_options(*c_design, design.model);

  ScoreArgs score;
  CLI::App* c_score = app.add_subcommand("score", "Score binder variants");
  c_score->add_option("--bound", score.bound, "Bound complex")->required();
  c_score->add_option("--unbound", score.unbound, "Unbound binder (default: bound complex without targets)");
  c_score->add_option("--design-chain", score.design_chain, "Binder chain id")->required();
  c_score->add_option("--wt", score.wt, "Wild-type FASTA (default: binder sequence of --bound)");
  c_score->add_option("--mut", score.mut, "Variant list")->required();
  c_score->add_option("--out", score.out, "Scores TSV")->required();
  c_score->add_option("--affinity", score.affinity, "TSV with name and affinity columns");
  c_score->add_option("--rank-out", score.rank_out, "Rank metrics TSV (default: <out>.rank.tsv)");
  c_score->add_flag("--lower-is-better", score.lower_is_better, "Lower affinity values bind tighter");
  add_model_options(*c_score, score.model);

  PairMsaArgs pair;
  CLI::App* c_pair = app.add_subcommand("pair-msa", "Pair two MSAs into interolog rows");
  c_pair->add_option("--msa1", pair.msa1, "First MSA (A3M or Stockholm)")->required();
  c_pair->add_option("--msa2", pair.msa2, "Second MSA")->required();
  c_pair->add_option("--attn1", pair.attn1, "Column attention container for --msa1");
  c_pair->add_option("--attn2", pair.attn2, "Column attention container for --msa2");
  c_pair->add_option("--strategy", pair.strategy, "Pairing strategy")
      ->check(CLI::IsMember({"colattn", "phylo", "block"}))
      ->capture_default_str();
  c_pair->add_option("--agg", pair.agg, "Attention aggregation")
      ->check(CLI::IsMember({"sum", "mean"}))
      ->capture_default_str();
  c_pair->add_option("--out", pair.out, "Paired A3M")->required();
  c_pair->add_option("--stats", pair.stats, "Depth / species / Meff JSON");

  CLI::App* c_bench = app.add_subcommand("bench", "Benchmark tools");
  c_bench->require_subcommand(1);

  ContactsArgs contacts_args;
  CLI::App* b_contacts = c_bench->add_subcommand("contacts", "Inter-chain contacts and top-k precision");
  b_contacts->add_option("--input", contacts_args.input, "Structure file")->required();
  b_contacts->add_option("--def", contacts_args.def, "Contact definition")
      ->check(CLI::IsMember({"heavy8", "ca10"}))
      ->capture_default_str();
  b_contacts->add_option("--out", contacts_args.out, "Contacts TSV")->required();
  b_contacts->add_option("--pred", contacts_args.pred, "Predicted contacts TSV (i, j, score)");
  b_contacts->add_option("--chain-a", contacts_args.chain_a, "First chain (default: first)");
  b_contacts->add_option("--chain-b", contacts_args.chain_b, "Second chain (default: second)");
  b_contacts->add_option("--metrics", contacts_args.metrics, "Metrics TSV (default: <out>.metrics.tsv)");

  CurateArgs curate;
  CLI::App* b_curate = c_bench->add_subcommand("curate", "Curate selective-binder cases");
  b_curate->add_option("--inputs", curate.inputs, "Structure files")->required();
  b_curate->add_option("--out", curate.out, "Curation manifest JSON")->required();
  b_curate->add_option("--on-target", curate.on_target, "Entry id to use as on-target where present");
  b_curate->add_option("--sample", curate.sample, "Uniform subsample size (-1 keeps all)")->capture_default_str();
  b_curate->add_option("--interface-ca", curate.params.interface_ca, "Heterodimer Cα distance (Å)")
      ->capture_default_str();
  b_curate->add_option("--cluster-identity", curate.params.cluster_identity, "Binder cluster identity")
      ->capture_default_str();
  b_curate->add_option("--min-entries", curate.params.min_entries, "Minimum entries per cluster")
      ->capture_default_str();
  b_curate->add_option("--max-entries", curate.params.max_entries, "Maximum entries per cluster")
      ->capture_default_str();
  b_curate->add_option("--min-coverage", curate.params.min_coverage, "Binder coverage")->capture_default_str();
  b_curate->add_option("--min-identity", curate.params.min_identity, "Binder identity")->capture_default_str();
  b_curate->add_option("--max-rmsd", curate.params.max_rmsd, "Binder Cα RMSD (Å)")->capture_default_str();
  b_curate->add_option("--max-difficulty", curate.params.max_difficulty, "Jaccard difficulty bound")
      ->capture_default_str();

  SelectivityArgs sel;
  CLI::App* b_sel = c_bench->add_subcommand("selectivity", "Selectivity success rates");
  b_sel->add_option("--input", sel.input, "TSV with score_on and score_off columns")->required();
  b_sel->add_option("--out", sel.out, "Rates TSV")->required();
  b_sel->add_option("--thresholds", sel.thresholds, "Score difference thresholds")
      ->delimiter(',')
      ->capture_default_str();

  RecoveryArgs rec;
  CLI::App* b_rec = c_bench->add_subcommand("recovery", "Sequence recovery by complex class");
  b_rec->add_option("--inputs", rec.inputs, "Structure files")->required();
  b_rec->add_option("--design-chain", rec.design_chain, "Binder chain id")->required();
  b_rec->add_option("--out", rec.out, "Per-class TSV")->required();
  b_rec->add_option("--cases-out", rec.cases_out, "Per-structure TSV");
  b_rec->add_option("--beta", rec.beta, "Candidate truncation")->capture_default_str();
  b_rec->add_option("--temp", rec.temp, "Temperature")->capture_default_str();
  b_rec->add_flag("--left-to-right", rec.left_to_right, "Left-to-right decoding order");
  add_model_options(*b_rec, rec.model);

  RankDecoysArgs decoys;
  CLI::App* b_decoys = c_bench->add_subcommand("rank-decoys", "Rank docking decoys by predicted contacts");
  b_decoys->add_option("--decoys", decoys.decoys, "Decoy structure files")->required();
  b_decoys->add_option("--pred", decoys.pred, "Predicted contacts TSV (i, j, score)")->required();
  b_decoys->add_option("--top-k", decoys.top_k, "10|25|50|L/10|L/5 or an integer")->capture_default_str();
  b_decoys->add_option("--out", decoys.out, "Ranking TSV")->required();

  bind_env(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  CLI::App* cmd = app.get_subcommands().front();
  CLI::App* leaf = cmd;
  std::string name = cmd->get_name();
  if (cmd == c_bench) {
    leaf = c_bench->get_subcommands().front();
    name += " " + leaf->get_name();
  }
  Run run(name);
  Json config = options_json(app);
  const Json leaf_config = options_json(*leaf);
  for (auto it = leaf_config.begin(); it != leaf_config.end(); ++it)
    config[it.key()] = it.value();
  run.set_config(config);
  const int threads = resolve_threads(g.threads);

  std::string out;
  try {
    if (cmd == c_dump) {
      run_dump_structure(dump, run);
      out = dump.out;
    } else if (cmd == c_feat) {
      run_featurize(feat, run);
      out = feat.out;
    } else if (cmd == c_train) {
      run_train_toy(train_args, g.seed, run);
      out = train_args.out;
    } else if (cmd == c_logits) {
      run_logits(logits, g.seed, run);
      out = logits.out;
    } else if (cmd == c_design) {
      run_design(design, g.seed, threads, run);
      out = design.out;
    } else if (cmd == c_score) {
      run_score(score, g.seed, threads, run);
      out = score.out;
    } else if (cmd == c_pair) {
      run_pair_msa(pair, run);
      out = pair.out;
    } else if (leaf == b_contacts) {
      run_bench_contacts(contacts_args, run);
      out = contacts_args.out;
    } else if (leaf == b_curate) {
      run_bench_curate(curate, g.seed, run);
      out = curate.out;
    } else if (leaf == b_sel) {
      run_bench_selectivity(sel, run);
      out = sel.out;
    } else if (leaf == b_rec) {
      run_bench_recovery(rec, g.seed, threads, run);
      out = rec.out;
    } else if (leaf == b_decoys) {
      run_bench_rank_decoys(decoys, run);
      out = decoys.out;
    }
    const std::string manifest = g.manifest.empty() ? (out.empty() ? "" : out + ".manifest.json") : g.manifest;
    if (!manifest.empty())
      run.write_manifest(manifest);
  } catch (const Error& e) {
    report_error(error_kind_name(e.kind()), e.what());
    return e.kind() == ErrorKind::Io ? 1 : 3;
  } catch (const std::exception& e) {
    report_error("internal", e.what());
    return 3;
  }
  return 0;
}
