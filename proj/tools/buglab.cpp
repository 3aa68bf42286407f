// buglab — self-supervised bug detection and repair for a Python subset.
//
// Commands: gen-corpus | augment | train | eval | scan | graph-dump | selftest
// Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "buglab/corpus/generator.hpp"
#include "buglab/eval/eval.hpp"
#include "buglab/graph/variants.hpp"
#include "buglab/lang/parser.hpp"
#include "buglab/lang/printer.hpp"
#include "buglab/model/network.hpp"
#include "buglab/model/optimizer.hpp"
#include "buglab/rewrite/augment.hpp"
#include "buglab/train/train.hpp"

#include "fig2.hpp"
#include "gradcheck.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace buglab;

namespace {

struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open " + path);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

// every input file, sorted, for a file-or-directory argument
std::vector<std::string> input_files(const std::string& path) {
  if (fs::is_directory(path)) {
    std::vector<std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(path))
      if (e.is_regular_file() && e.path().extension() == ".py") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw DataError("no .py files under " + path);
    return files;
  }
  if (!fs::exists(path)) throw DataError("no such input: " + path);
  return {path};
}

// one unit per function: the function made focal, siblings kept as context
std::vector<SourceUnit> per_function_units(const SourceUnit& u) {
  std::vector<SourceUnit> out;
  for (size_t i = 0; i < u.functions.size(); ++i) {
    SourceUnit v;
    v.text = u.text;
    v.functions.push_back(u.functions[i]);
    for (size_t j = 0; j < u.functions.size(); ++j)
      if (j != i) v.functions.push_back(u.functions[j]);
    out.push_back(std::move(v));
  }
  return out;
}

std::vector<SourceUnit> load_units(const std::string& src) {
  std::vector<SourceUnit> units;
  for (const std::string& f : input_files(src)) {
    SourceUnit u = parse(read_file(f));
    for (SourceUnit& v : per_function_units(u)) units.push_back(std::move(v));
  }
  if (units.empty()) throw DataError("no functions found under " + src);
  return units;
}

std::vector<SourceUnit> synthetic_units(int n, std::uint64_t seed) {
  std::vector<SourceUnit> units;
  for (int i = 0; i < n; ++i) {
    GeneratorConfig cfg;
    cfg.seed = seed + static_cast<std::uint64_t>(i);
    units.push_back(generate_corpus(cfg));
  }
  return units;
}

std::vector<CodeGraph> load_graphs(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open " + path);
  std::vector<CodeGraph> graphs;
  std::string line;
  size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      graphs.push_back(deserialize_graph(line));
    } catch (const MalformedGraphError& e) {
      throw DataError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (graphs.empty()) throw DataError("no graphs in " + path);
  return graphs;
}

Vocabulary load_vocab(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open vocabulary " + path);
  return Vocabulary::load(is);
}

// ---- commands -------------------------------------------------------------

int cmd_gen_corpus(const std::string& src, int functions, std::uint64_t seed, int variants,
                   const std::string& out) {
  std::vector<SourceUnit> units = src.empty() ? synthetic_units(functions, seed) : load_units(src);
  std::vector<CodeGraph> graphs;
  if (variants > 0) {
    graphs = generate_random_bugs(units, variants, seed ^ 0x9e3779b97f4a7c15ULL);
  } else {
    for (const SourceUnit& u : units) graphs.push_back(clean_graph(u));
  }
  std::ofstream os(out);
  if (!os) throw DataError("cannot write " + out);
  for (const CodeGraph& g : graphs) os << serialize_graph(g) << "\n";
  std::cerr << "wrote " << graphs.size() << " graphs to " << out << "\n";
  return 0;
}

int cmd_augment(const std::string& in, const std::string& out, const AugmentationConfig& cfg) {
  std::vector<std::string> files = input_files(in);
  bool in_dir = fs::is_directory(in);
  if (in_dir) fs::create_directories(out);
  for (const std::string& f : files) {
    SourceUnit u = parse(read_file(f));
    SourceUnit v = augment(u, cfg);
    std::string target = in_dir ? (fs::path(out) / fs::relative(f, in)).string() : out;
    fs::create_directories(fs::path(target).parent_path().empty()
                               ? fs::path(".")
                               : fs::path(target).parent_path());
    std::ofstream os(target);
    if (!os) throw DataError("cannot write " + target);
    os << print_unit(v);
  }
  std::cerr << "augmented " << files.size() << " file(s)\n";
  return 0;
}

int cmd_train(const std::string& src, int gen_functions, double holdout_fraction,
              int holdout_variants, const ModelConfig& mc, const TrainConfig& tc) {
  std::vector<SourceUnit> units =
      src.empty() ? synthetic_units(gen_functions, tc.seed + 1000003) : load_units(src);
  size_t holdout_n =
      std::min(units.size() - 1, static_cast<size_t>(holdout_fraction * units.size()));
  std::vector<SourceUnit> holdout_units(units.end() - static_cast<long>(holdout_n), units.end());
  units.resize(units.size() - holdout_n);

  std::cerr << "preparing " << units.size() << " training functions, " << holdout_units.size()
            << " held out\n";
  std::vector<TrainFunction> corpus = prepare_corpus(units);
  Vocabulary vocab = corpus_vocabulary(corpus, mc.vocab_size);
  std::vector<CodeGraph> holdout =
      generate_random_bugs(holdout_units, holdout_variants, tc.seed + 2000003);

  fs::create_directories(tc.out_dir);
  {
    std::ofstream os(tc.out_dir + "/vocab.txt");
    vocab.save(os);
  }
  ModelConfig cfg = mc;
  cfg.vocab_size = vocab.size();
  ModelParameters detector(cfg);
  ModelConfig scfg = cfg;
  scfg.seed = cfg.seed + 1;
  ModelParameters selector(scfg);

  TrainResult r = run_training(corpus, holdout, detector, selector, vocab, tc);
  for (const TelemetryRow& row : r.telemetry)
    std::cerr << "meta-epoch " << row.meta_epoch << ": detector " << row.detector_loss
              << " selector " << row.selector_loss << " holdout joint " << row.holdout_joint
              << " loc " << row.holdout_loc << " repair " << row.holdout_repair << "\n";
  std::cerr << "artifacts in " << tc.out_dir << "\n";
  return 0;
}

int cmd_eval(const std::string& model, const std::string& vocab_path, const std::string& corpus,
             const std::string& out) {
  ModelParameters params = ModelParameters::load(model);
  Vocabulary vocab = load_vocab(vocab_path);
  if (vocab.size() != params.config.vocab_size)
    throw DataError("vocabulary size " + std::to_string(vocab.size()) +
                    " does not match checkpoint vocab_size " +
                    std::to_string(params.config.vocab_size));
  std::vector<CodeGraph> graphs = load_graphs(corpus);
  MetricReport m = evaluate(params, vocab, graphs);
  std::cout << format_report(m);
  if (!out.empty()) {
    std::ofstream os(out);
    if (!os) throw DataError("cannot write " + out);
    os << report_to_json(m).dump(2) << "\n";
  }
  return 0;
}

int cmd_scan(const std::string& model, const std::string& vocab_path,
             const std::vector<std::string>& paths, int top_n, double threshold,
             const std::string& out) {
  ModelParameters params = ModelParameters::load(model);
  Vocabulary vocab = load_vocab(vocab_path);
  std::ofstream os;
  if (!out.empty()) {
    os.open(out);
    if (!os) throw DataError("cannot write " + out);
  }
  std::ostream& sink = out.empty() ? std::cout : os;
  size_t total = 0;
  for (const std::string& p : paths) {
    for (const std::string& f : input_files(p)) {
      SourceUnit u;
      try {
        u = parse(read_file(f));
      } catch (const SyntaxError& e) {
        std::cerr << "skipping " << f << ": " << e.what() << "\n";
        continue;
      }
      for (const Warning& w : scan_unit(params, vocab, u, f, top_n, threshold)) {
        sink << warning_to_json(w).dump() << "\n";
        ++total;
      }
    }
  }
  std::cerr << total << " warning(s)\n";
  return 0;
}

int cmd_graph_dump(const std::string& file, int function) {
  SourceUnit u = parse(read_file(file));
  std::vector<SourceUnit> units = per_function_units(u);
  if (function < 0 || static_cast<size_t>(function) >= units.size())
    throw DataError("function index out of range (file has " + std::to_string(units.size()) +
                    " functions)");
  std::cout << serialize_graph(clean_graph(units[static_cast<size_t>(function)])) << "\n";
  return 0;
}

int cmd_selftest() {
  int failures = 0;
  auto report = [&](const std::string& name, const std::string& err) {
    if (err.empty()) {
      std::cout << "PASS " << name << "\n";
    } else {
      std::cout << "FAIL " << name << ": " << err << "\n";
      ++failures;
    }
  };
  report("rewrite enumeration on the running example", oracles::check_example_enumeration());
  report("metric identities on random confusion counts", oracles::check_metric_identities());

  // tiny end-to-end gradient check
  std::string grad_err;
  try {
    GeneratorConfig gc;
    gc.seed = 424242;
    SourceUnit u = generate_corpus(gc);
    std::vector<TrainFunction> corpus = prepare_corpus({u});
    Vocabulary vocab = corpus_vocabulary(corpus, 200);
    ModelConfig mc;
    mc.hidden_dim = 8;
    mc.vocab_size = static_cast<int>(vocab.size());
    mc.seed = 99;
    ModelParameters params(mc);
    CodeGraph g = corpus[0].graph;
    if (g.candidates.empty()) throw std::runtime_error("probe snippet has no candidates");
    g.target = g.candidates[0].rewrite;  // loss target: repair candidate 0
    gradcheck::Result r =
        gradcheck::check(params, vocab, g, gradcheck::LossKind::DetectorBuggy, {}, 0, 2);
    if (r.max_rel_err >= 1e-4)
      grad_err = "max relative error " + std::to_string(r.max_rel_err) + " at " + r.worst_param;
  } catch (const std::exception& e) {
    grad_err = e.what();
  }
  report("gradient check on a small model", grad_err);
  return failures == 0 ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"self-supervised bug detection and repair for a Python subset"};
  app.require_subcommand(1);
  app.set_config("--config", "", "read options from a key=value config file");

  // gen-corpus
  auto* gen = app.add_subcommand("gen-corpus", "generate a graph corpus (JSON lines)");
  std::string gen_src, gen_out;
  int gen_functions = 100, gen_variants = 0;
  std::uint64_t gen_seed = 1;
  gen->add_option("--src", gen_src, "source file/directory (default: synthetic functions)");
  gen->add_option("--functions", gen_functions, "synthetic function count")->check(CLI::PositiveNumber);
  gen->add_option("--seed", gen_seed, "random seed");
  gen->add_option("--variants", gen_variants,
                  "random buggy variants per function (0 = clean graphs only)");
  gen->add_option("--out", gen_out, "output path")->required();

  // augment
  auto* aug = app.add_subcommand("augment", "apply augmentation rewrites to source files");
  std::string aug_in, aug_out;
  AugmentationConfig aug_cfg;
  aug->add_option("--in", aug_in, "input file or directory")->required();
  aug->add_option("--out", aug_out, "output file or directory")->required();
  aug_cfg.variable_renaming = aug_cfg.comment_deletion = true;
  aug_cfg.comparison_mirroring = aug_cfg.if_else_branch_swap = true;
  aug->add_option("--seed", aug_cfg.seed, "random seed");
  aug->add_option("--probability", aug_cfg.probability, "per-augmentation probability");
  aug->add_flag("!--no-rename", aug_cfg.variable_renaming, "disable variable renaming");
  aug->add_flag("!--no-comment-deletion", aug_cfg.comment_deletion, "disable comment deletion");
  aug->add_flag("!--no-mirror", aug_cfg.comparison_mirroring, "disable comparison mirroring");
  aug->add_flag("!--no-branch-swap", aug_cfg.if_else_branch_swap,
                "disable if/else branch swapping");

  // train
  auto* tr = app.add_subcommand("train", "co-train detector and selector");
  std::string tr_src;
  int tr_gen_functions = 500, tr_holdout_variants = 9;
  double tr_holdout_fraction = 0.1;
  ModelConfig tr_mc;
  TrainConfig tr_tc;
  tr->add_option("--src", tr_src, "source file/directory (default: synthetic corpus)");
  tr->add_option("--gen-functions", tr_gen_functions, "synthetic corpus size");
  tr->add_option("--out-dir", tr_tc.out_dir, "artifact directory")->required();
  tr->add_option("-d,--hidden-dim", tr_mc.hidden_dim, "model width (default 256)");
  tr->add_option("--vocab-size", tr_mc.vocab_size, "maximum vocabulary size");
  tr->add_option("--seed", tr_tc.seed, "random seed");
  tr->add_option("--meta-epochs", tr_tc.meta_epochs, "co-training meta-epochs (default 10)");
  tr->add_option("-k,--samples", tr_tc.k, "selector samples per snippet (default 5)");
  tr->add_option("--nu", tr_tc.max_uses, "pool uses per entry (default 4)");
  tr->add_option("--epsilon", tr_tc.epsilon, "epsilon-greedy exploration (default 0.02)");
  tr->add_option("--batch-size", tr_tc.batch_size, "graphs per optimizer step");
  tr->add_option("--lr", tr_tc.optimizer.learning_rate, "learning rate (default 1e-4)");
  tr->add_option("--warmup", tr_tc.optimizer.warmup_steps, "warmup steps (default 800)");
  tr->add_option("--clip", tr_tc.optimizer.clip_norm, "gradient norm clip (default 0.5)");
  tr->add_option("--dropout", tr_mc.dropout, "dropout rate (default 0.2)");
  tr->add_option("--snapshot-every", tr_tc.snapshot_every, "checkpoint cadence in meta-epochs");
  tr->add_option("--holdout-fraction", tr_holdout_fraction, "held-out corpus fraction");
  tr->add_option("--holdout-variants", tr_holdout_variants, "buggy variants per held-out function");

  // eval
  auto* ev = app.add_subcommand("eval", "score a detector on a graph corpus");
  std::string ev_model, ev_vocab, ev_corpus, ev_out;
  ev->add_option("--model", ev_model, "detector checkpoint")->required();
  ev->add_option("--vocab", ev_vocab, "vocabulary file")->required();
  ev->add_option("--corpus", ev_corpus, "graph corpus (JSON lines)")->required();
  ev->add_option("--out", ev_out, "write the report as JSON");

  // scan
  auto* sc = app.add_subcommand("scan", "scan source files for likely bugs");
  std::string sc_model, sc_vocab, sc_out;
  std::vector<std::string> sc_paths;
  int sc_top_n = 3;
  double sc_threshold = 0.5;
  sc->add_option("--model", sc_model, "detector checkpoint")->required();
  sc->add_option("--vocab", sc_vocab, "vocabulary file")->required();
  sc->add_option("paths", sc_paths, "files or directories to scan")->required();
  sc->add_option("--top-n", sc_top_n, "warnings per flagged function");
  sc->add_option("--threshold", sc_threshold, "confidence threshold (1 - p(NoBug))");
  sc->add_option("--out", sc_out, "write warnings as JSON lines");

  // graph-dump
  auto* gd = app.add_subcommand("graph-dump", "print one function's code graph");
  std::string gd_file;
  int gd_function = 0;
  gd->add_option("--file", gd_file, "source file")->required();
  gd->add_option("--function", gd_function, "function index within the file");

  app.add_subcommand("selftest", "run the built-in oracle checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (gen->parsed()) return cmd_gen_corpus(gen_src, gen_functions, gen_seed, gen_variants, gen_out);
    if (aug->parsed()) return cmd_augment(aug_in, aug_out, aug_cfg);
    if (tr->parsed())
      return cmd_train(tr_src, tr_gen_functions, tr_holdout_fraction, tr_holdout_variants, tr_mc,
                       tr_tc);
    if (ev->parsed()) return cmd_eval(ev_model, ev_vocab, ev_corpus, ev_out);
    if (sc->parsed()) return cmd_scan(sc_model, sc_vocab, sc_paths, sc_top_n, sc_threshold, sc_out);
    if (gd->parsed()) return cmd_graph_dump(gd_file, gd_function);
    return cmd_selftest();
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const SyntaxError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const MalformedGraphError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const CheckpointError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const GroundTruthError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
}
