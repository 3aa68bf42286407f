#pragma once

// Sequential co-training loop: the selector proposes hard bugs, the detector
// learns to localize and repair them, and the selector in turn learns to
// prefer the rewrites the detector got most wrong. Both sides feed bounded
// replay pools (entries evicted after `max_uses` draws). The loop is
// single-threaded and fully deterministic under its seed.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "buglab/eval/eval.hpp"
#include "buglab/graph/variants.hpp"
#include "buglab/model/network.hpp"
#include "buglab/model/optimizer.hpp"
#include "buglab/train/pool.hpp"

namespace buglab {

struct TrainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A corpus function with its pre-extracted clean graph.
struct TrainFunction {
  SourceUnit unit;
  CodeGraph graph;  // target NOBUG; candidates enumerated
};

inline std::vector<TrainFunction> prepare_corpus(const std::vector<SourceUnit>& units) {
  std::vector<TrainFunction> out;
  out.reserve(units.size());
  for (const SourceUnit& u : units) out.push_back({u, clean_graph(u)});
  return out;
}

// Vocabulary over every node label occurring in the corpus graphs.
inline Vocabulary corpus_vocabulary(const std::vector<TrainFunction>& corpus,
                                    int max_size = 15000) {
  std::vector<std::string> labels;
  for (const TrainFunction& f : corpus)
    for (const GraphNode& n : f.graph.nodes) labels.push_back(n.label);
  return build_vocabulary(labels, max_size);
}

// Detector-pool entry: a buggy variant graph (target = inverse rewrite) or
// the unmodified snippet (target NOBUG). `observed_candidate` is the sampled
// candidate's index in the *original* graph, -1 for NOBUG entries.
struct PoolEntry {
  CodeGraph graph;
  int function_index = -1;
  int observed_candidate = -1;
};

// Selector-pool entry: the original snippet, the observed candidate set, and
// the observed rewrite with maximal detector loss as target (-1 = NoBug).
struct HardEntry {
  int function_index = -1;
  int target_candidate = -1;
  std::vector<int> observed;  // candidate indices; nobug handled separately
  bool observed_nobug = false;
};

// Alg.-1 buggy-dataset step: per function, k selector samples applied through
// the source-text round trip, plus the one unmodified NOBUG entry. Samples
// whose inverse fails to enumerate in the rewritten snippet are re-drawn;
// NoBug draws contribute extra NOBUG entries. Functions without candidates
// contribute only the NOBUG entry.
inline std::vector<PoolEntry> make_buggy_dataset(const std::vector<TrainFunction>& corpus,
                                                 ModelParameters& selector,
                                                 const Vocabulary& vocab, int k, double epsilon,
                                                 std::mt19937_64& rng) {
  ModelRunner runner(selector, vocab, /*training=*/false);
  std::vector<PoolEntry> out;
  for (size_t fi = 0; fi < corpus.size(); ++fi) {
    const TrainFunction& f = corpus[fi];
    if (!f.graph.candidates.empty()) {
      ModelOutput sel = runner.run(f.graph);
      for (int s = 0; s < k; ++s) {
        std::optional<CodeGraph> g;
        int pick = -1;
        for (int attempt = 0; attempt < 8 && !g; ++attempt) {
          pick = sample_rewrite(sel, rng, epsilon);
          if (pick < 0) break;  // NoBug drawn
          g = buggy_variant_graph(f.unit, f.graph.candidates[static_cast<size_t>(pick)].rewrite);
        }
        if (g)
          out.push_back({std::move(*g), static_cast<int>(fi), pick});
        else
          out.push_back({f.graph, static_cast<int>(fi), -1});
      }
    }
    out.push_back({f.graph, static_cast<int>(fi), -1});
  }
  return out;
}

// Alg.-1 hard-dataset step: per function, the observed rewrite whose buggy
// variant maximizes the detector loss (ties: lowest candidate index, NoBug
// last). `entries` is the buggy dataset of the same meta-epoch; detector
// losses are evaluated with the current detector.
inline std::vector<HardEntry> make_hard_dataset(const std::vector<TrainFunction>& corpus,
                                                ModelParameters& detector,
                                                const Vocabulary& vocab,
                                                const std::vector<PoolEntry>& entries) {
  ModelRunner runner(detector, vocab, /*training=*/false);
  struct Best {
    HardEntry hard;
    double best_loss = 0.0;
    bool seen = false;
  };
  std::vector<Best> per_fn(corpus.size());
  for (const PoolEntry& e : entries) {
    Best& b = per_fn[static_cast<size_t>(e.function_index)];
    b.hard.function_index = e.function_index;
    if (e.observed_candidate < 0)
      b.hard.observed_nobug = true;
    else
      b.hard.observed.push_back(e.observed_candidate);
    ModelOutput out = runner.run(e.graph);
    Var loss = detector_loss(out, e.graph);
    double l = out.tape->val(loss)(0, 0);
    // argmax with deterministic ties: strictly greater wins; equal losses
    // prefer the candidate earlier in canonical order, NoBug last
    bool better = !b.seen || l > b.best_loss ||
                  (l == b.best_loss && e.observed_candidate >= 0 &&
                   (b.hard.target_candidate < 0 || e.observed_candidate < b.hard.target_candidate));
    if (better) {
      b.best_loss = l;
      b.hard.target_candidate = e.observed_candidate;
      b.seen = true;
    }
  }
  std::vector<HardEntry> out;
  for (Best& b : per_fn) {
    if (!b.seen) continue;
    std::sort(b.hard.observed.begin(), b.hard.observed.end());
    b.hard.observed.erase(std::unique(b.hard.observed.begin(), b.hard.observed.end()),
                          b.hard.observed.end());
    out.push_back(std::move(b.hard));
  }
  return out;
}

struct TrainConfig {
  int meta_epochs = 10;
  int k = 5;             // selector samples per snippet
  int max_uses = 4;      // pool eviction threshold (nu)
  double epsilon = 0.02;
  int batch_size = 32;   // graphs per optimizer step (gradient accumulation)
  int snapshot_every = 0;  // checkpoint cadence in meta-epochs; 0 = final only
  std::uint64_t seed = 1;
  std::string out_dir;   // telemetry/manifest/checkpoints; empty = keep in memory
  OptimizerConfig optimizer;
};

struct TelemetryRow {
  int meta_epoch = 0;
  double detector_loss = 0.0;
  double selector_loss = 0.0;
  double holdout_joint = 0.0;
  double holdout_loc = 0.0;
  double holdout_repair = 0.0;
};

struct TrainResult {
  std::vector<TelemetryRow> telemetry;
};

namespace detail {

inline std::uint64_t fnv1a(const std::string& s, std::uint64_t h = 1469598103934665603ULL) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

// mean-of-batch gradients: scale the accumulated sums before the Adam step
inline void scale_grads(ModelParameters& p, double s) {
  for (size_t i = 0; i < p.count(); ++i) p.grad_at(i) *= s;
}

}  // namespace detail

// Sequential co-training. Returns telemetry; `detector` and `selector` are
// updated in place and the final detector is the trained artefact. With
// meta_epochs = 0 both parameter sets are returned untouched.
inline TrainResult run_training(const std::vector<TrainFunction>& corpus,
                                const std::vector<CodeGraph>& holdout,
                                ModelParameters& detector, ModelParameters& selector,
                                const Vocabulary& vocab, const TrainConfig& cfg) {
  TrainResult result;
  std::mt19937_64 rng(cfg.seed);
  AdamOptimizer adam_d(detector, cfg.optimizer);
  AdamOptimizer adam_s(selector, cfg.optimizer);
  DataPool<PoolEntry> pool_d(cfg.max_uses, rng());
  DataPool<HardEntry> pool_s(cfg.max_uses, rng());

  std::ofstream csv;
  if (!cfg.out_dir.empty()) {
    std::filesystem::create_directories(cfg.out_dir);
    csv.open(cfg.out_dir + "/telemetry.csv");
    csv << "meta_epoch,detector_loss,selector_loss,holdout_joint,holdout_loc,holdout_repair\n";

    std::uint64_t h = 1469598103934665603ULL;
    for (const TrainFunction& f : corpus) h = detail::fnv1a(f.unit.text, h);
    nlohmann::json manifest = {
        {"seed", cfg.seed},
        {"meta_epochs", cfg.meta_epochs},
        {"k", cfg.k},
        {"max_uses", cfg.max_uses},
        {"epsilon", cfg.epsilon},
        {"batch_size", cfg.batch_size},
        {"dropout", detector.config.dropout},
        {"learning_rate", cfg.optimizer.learning_rate},
        {"warmup_steps", cfg.optimizer.warmup_steps},
        {"clip_norm", cfg.optimizer.clip_norm},
        {"hidden_dim", detector.config.hidden_dim},
        {"vocab_size", detector.config.vocab_size},
        {"corpus_functions", corpus.size()},
        {"holdout_samples", holdout.size()},
        {"corpus_hash", h},
        {"format_version", 1}};
    std::ofstream(cfg.out_dir + "/manifest.json") << manifest.dump(2) << "\n";
  }

  for (int epoch = 1; epoch <= cfg.meta_epochs; ++epoch) {
    TelemetryRow row;
    row.meta_epoch = epoch;
    try {
      // 1. selector proposes a fresh buggy dataset into the detector pool
      std::vector<PoolEntry> buggy =
          make_buggy_dataset(corpus, selector, vocab, cfg.k, cfg.epsilon, rng);
      size_t added_d = buggy.size();
      for (PoolEntry& e : buggy) pool_d.add(e);  // copies; `buggy` reused below

      // 2. detector trains on pool draws (as many as were just added)
      {
        ModelRunner runner(detector, vocab, /*training=*/true, rng());
        double total = 0.0;
        size_t n = 0, in_batch = 0;
        for (size_t i = 0; i < added_d; ++i) {
          std::optional<PoolEntry> e = pool_d.sample();
          if (!e) break;
          ModelOutput out = runner.run(e->graph);
          Var loss = detector_loss(out, e->graph);
          total += out.tape->val(loss)(0, 0);
          out.tape->backward(loss);
          ++n;
          if (++in_batch == static_cast<size_t>(cfg.batch_size)) {
            detail::scale_grads(detector, 1.0 / static_cast<double>(in_batch));
            adam_d.step();
            in_batch = 0;
          }
        }
        if (in_batch > 0) {
          detail::scale_grads(detector, 1.0 / static_cast<double>(in_batch));
          adam_d.step();
        }
        row.detector_loss = n > 0 ? total / static_cast<double>(n) : 0.0;
      }

      // 3. hardest observed rewrites under the updated detector
      std::vector<HardEntry> hard = make_hard_dataset(corpus, detector, vocab, buggy);
      size_t added_s = hard.size();
      for (HardEntry& e : hard) pool_s.add(e);

      // 4. selector trains toward those hard choices
      {
        ModelRunner runner(selector, vocab, /*training=*/true, rng());
        double total = 0.0;
        size_t n = 0, in_batch = 0;
        for (size_t i = 0; i < added_s; ++i) {
          std::optional<HardEntry> e = pool_s.sample();
          if (!e) break;
          const CodeGraph& g = corpus[static_cast<size_t>(e->function_index)].graph;
          ModelOutput out = runner.run(g);
          std::vector<int> observed = e->observed;
          if (e->observed_nobug) observed.push_back(out.nobug_column_joint());
          int target =
              e->target_candidate >= 0 ? e->target_candidate : out.nobug_column_joint();
          Var loss = selector_loss(out, observed, target);
          total += out.tape->val(loss)(0, 0);
          out.tape->backward(loss);
          ++n;
          if (++in_batch == static_cast<size_t>(cfg.batch_size)) {
            detail::scale_grads(selector, 1.0 / static_cast<double>(in_batch));
            adam_s.step();
            in_batch = 0;
          }
        }
        if (in_batch > 0) {
          detail::scale_grads(selector, 1.0 / static_cast<double>(in_batch));
          adam_s.step();
        }
        row.selector_loss = n > 0 ? total / static_cast<double>(n) : 0.0;
      }
    } catch (const NonFiniteGradientError& e) {
      throw TrainError("meta-epoch " + std::to_string(epoch) + ": " + e.what());
    }

    if (!holdout.empty()) {
      MetricReport m = evaluate(detector, vocab, holdout);
      row.holdout_joint = m.joint_accuracy;
      row.holdout_loc = m.loc_accuracy;
      row.holdout_repair = m.repair_accuracy;
    }
    result.telemetry.push_back(row);
    if (csv.is_open()) {
      csv << row.meta_epoch << ',' << row.detector_loss << ',' << row.selector_loss << ','
          << row.holdout_joint << ',' << row.holdout_loc << ',' << row.holdout_repair << '\n';
      csv.flush();
    }
    if (!cfg.out_dir.empty() && cfg.snapshot_every > 0 && epoch % cfg.snapshot_every == 0) {
      detector.save(cfg.out_dir + "/detector_epoch" + std::to_string(epoch) + ".bin");
      selector.save(cfg.out_dir + "/selector_epoch" + std::to_string(epoch) + ".bin");
    }
  }

  if (!cfg.out_dir.empty() && cfg.meta_epochs > 0) {
    detector.save(cfg.out_dir + "/detector.bin");
    selector.save(cfg.out_dir + "/selector.bin");
  }
  return result;
}

}  // namespace buglab
