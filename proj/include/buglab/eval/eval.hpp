#pragma once

// Evaluation harness: random-bug corpus construction, detector scoring
// against ground truth, and a source-scanning mode that renders ranked
// warnings with rewrite diffs.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "buglab/eval/metrics.hpp"
#include "buglab/graph/variants.hpp"
#include "buglab/model/network.hpp"

namespace buglab {

// Per eligible function: the original (target NOBUG) plus `variants` copies,
// each with one uniformly random enumerated rewrite applied. Functions with
// no candidates emit only the original. Deterministic under `seed`.
inline std::vector<CodeGraph> generate_random_bugs(const std::vector<SourceUnit>& units,
                                                   int variants, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<CodeGraph> out;
  for (const SourceUnit& u : units) {
    CodeGraph original = clean_graph(u);
    std::vector<PotentialRewrite> picks;
    for (const CandidateEntry& c : original.candidates) picks.push_back(c.rewrite);
    out.push_back(std::move(original));
    if (picks.empty()) continue;
    for (int v = 0; v < variants; ++v) {
      // re-draw when the picked rewrite's inverse is not enumerable in the
      // rewritten snippet; give up on the variant after a few attempts
      for (int attempt = 0; attempt < 8; ++attempt) {
        const PotentialRewrite& pr = picks[static_cast<size_t>(rng() % picks.size())];
        std::optional<CodeGraph> g = buggy_variant_graph(u, pr);
        if (g) {
          out.push_back(std::move(*g));
          break;
        }
      }
    }
  }
  return out;
}

// One detector prediction reduced to an EvalRecord.
inline EvalRecord make_record(const ModelOutput& out, const CodeGraph& g) {
  EvalRecord rec;
  rec.confidence = 1.0 - out.p_nobug();
  Eigen::VectorXd ploc = out.p_loc();
  int pred_group = 0;
  for (int i = 1; i < ploc.size(); ++i)
    if (ploc(i) > ploc(pred_group)) pred_group = i;
  int nobug = out.nobug_column();
  rec.predicted_nobug = pred_group == nobug;
  if (!g.target) return rec;

  rec.truth_nobug = false;
  rec.bug_kind = g.target->rule.kind;
  int truth_cand = -1;
  for (size_t c = 0; c < g.candidates.size(); ++c)
    if (g.candidates[c].rewrite == *g.target) {
      truth_cand = static_cast<int>(c);
      break;
    }
  if (truth_cand < 0) throw GroundTruthError("ground-truth rewrite is not among the candidates");
  int truth_group = out.tensors.cand_group[static_cast<size_t>(truth_cand)];
  rec.loc_match = !rec.predicted_nobug && pred_group == truth_group;

  auto best_in_group = [&](int group) {
    Eigen::VectorXd pr = out.p_rew(group);
    int best = 0;
    for (int i = 1; i < pr.size(); ++i)
      if (pr(i) > pr(best)) best = i;
    return out.tensors.groups[static_cast<size_t>(group)].cand_index[static_cast<size_t>(best)];
  };
  if (rec.loc_match) rec.rewrite_match = best_in_group(pred_group) == truth_cand;
  rec.repair_at_truth = best_in_group(truth_group) == truth_cand;
  return rec;
}

inline MetricReport evaluate(ModelParameters& params, const Vocabulary& vocab,
                             const std::vector<CodeGraph>& corpus) {
  ModelRunner runner(params, vocab, /*training=*/false);
  std::vector<EvalRecord> records;
  records.reserve(corpus.size());
  for (const CodeGraph& g : corpus) {
    ModelOutput out = runner.run(g);
    records.push_back(make_record(out, g));
  }
  return compute_metrics(records);
}

// ---- scanning ---------------------------------------------------------------

struct Warning {
  std::string file;
  int line = 0;
  int col = 0;
  std::string kind;
  std::string repair_diff;
  double confidence = 0.0;
};

namespace detail {

inline void offset_to_line_col(const std::string& text, size_t offset, int& line, int& col) {
  line = 1;
  col = 1;
  for (size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
}

// unified one-hunk diff of the lines that changed between the two prints
inline std::string render_diff(const std::string& before, const std::string& after) {
  auto split = [](const std::string& s) {
    std::vector<std::string> lines;
    std::istringstream is(s);
    std::string l;
    while (std::getline(is, l)) lines.push_back(l);
    return lines;
  };
  std::vector<std::string> a = split(before), b = split(after);
  size_t lo = 0;
  while (lo < a.size() && lo < b.size() && a[lo] == b[lo]) ++lo;
  size_t ahi = a.size(), bhi = b.size();
  while (ahi > lo && bhi > lo && a[ahi - 1] == b[bhi - 1]) {
    --ahi;
    --bhi;
  }
  std::string out;
  for (size_t i = lo; i < ahi; ++i) out += "- " + a[i] + "\n";
  for (size_t i = lo; i < bhi; ++i) out += "+ " + b[i] + "\n";
  return out;
}

}  // namespace detail

// Scans every function of a parsed unit. A function yields warnings when
// 1 - p_loc(NoBug) >= threshold: the top-n candidates by joint probability,
// each rendered as a diff against the current source.
inline std::vector<Warning> scan_unit(ModelParameters& params, const Vocabulary& vocab,
                                      const SourceUnit& u, const std::string& file, int top_n,
                                      double threshold) {
  ModelRunner runner(params, vocab, /*training=*/false);
  std::vector<Warning> warnings;
  for (size_t fi = 0; fi < u.functions.size(); ++fi) {
    SourceUnit focal;
    focal.text = u.text;
    focal.functions.push_back(u.functions[fi]);
    for (size_t j = 0; j < u.functions.size(); ++j)
      if (j != fi) focal.functions.push_back(u.functions[j]);
    ExtractionInfo info;
    CodeGraph g = clean_graph(focal, &info);
    if (g.candidates.empty()) continue;
    ModelOutput out = runner.run(g);
    double confidence = 1.0 - out.p_nobug();
    if (confidence < threshold) continue;

    Eigen::VectorXd joint = out.p_joint();
    std::vector<int> order(g.candidates.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::stable_sort(order.begin(), order.end(),
                     [&](int x, int y) { return joint(x) > joint(y); });
    std::string before = print_tree(focal.functions[0]);
    for (int rank = 0; rank < top_n && rank < static_cast<int>(order.size()); ++rank) {
      const CandidateEntry& cand = g.candidates[static_cast<size_t>(order[static_cast<size_t>(rank)])];
      Warning w;
      w.file = file;
      Span span = info.node_spans[static_cast<size_t>(cand.node_id)];
      detail::offset_to_line_col(u.text, static_cast<size_t>(span.begin), w.line, w.col);
      w.kind = rule_kind_name(cand.rewrite.rule.kind);
      w.confidence = joint(order[static_cast<size_t>(rank)]);
      TreePtr repaired = apply_rewrite(focal.functions[0], cand.rewrite);
      w.repair_diff = detail::render_diff(before, print_tree(repaired));
      warnings.push_back(std::move(w));
    }
  }
  return warnings;
}

inline nlohmann::json warning_to_json(const Warning& w) {
  return {{"file", w.file},       {"line", w.line},
          {"col", w.col},         {"kind", w.kind},
          {"repair_diff", w.repair_diff}, {"confidence", w.confidence}};
}

}  // namespace buglab
