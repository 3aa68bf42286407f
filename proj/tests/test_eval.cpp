#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "buglab/corpus/generator.hpp"
#include "buglab/eval/eval.hpp"
#include "buglab/eval/metrics.hpp"
#include "buglab/graph/variants.hpp"
#include "buglab/lang/parser.hpp"

using namespace buglab;

namespace {

// random but internally consistent records: rewrite_match implies loc_match,
// loc_match implies a warned buggy sample, repair flags only on buggy ones
std::vector<EvalRecord> random_records(std::mt19937_64& rng, size_t n) {
  std::vector<EvalRecord> recs;
  for (size_t i = 0; i < n; ++i) {
    EvalRecord r;
    r.truth_nobug = rng() % 3 == 0;
    if (!r.truth_nobug)
      r.bug_kind = static_cast<RuleKind>(rng() % 8);  // all bug kinds
    r.predicted_nobug = rng() % 3 == 0;
    if (!r.predicted_nobug && !r.truth_nobug) {
      r.loc_match = rng() % 2 == 0;
      if (r.loc_match) r.rewrite_match = rng() % 2 == 0;
    }
    if (!r.truth_nobug) r.repair_at_truth = rng() % 2 == 0;
    r.confidence = static_cast<double>(rng() % 1000) / 999.0;
    recs.push_back(r);
  }
  return recs;
}

}  // namespace

TEST_CASE("metric identities hold on random confusion counts") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<EvalRecord> recs = random_records(rng, 40 + rng() % 60);
    MetricReport m = compute_metrics(recs);

    // independent counting pass
    long dfw = 0, dtw = 0, tw = 0, fw = 0, buggy = 0, repair = 0, joint = 0, loc = 0;
    for (const EvalRecord& r : recs) {
      bool warned = !r.predicted_nobug;
      bool is_dtw = !r.truth_nobug && r.loc_match;
      bool is_dfw = warned && !is_dtw;
      bool is_tw = is_dtw && r.rewrite_match;
      if (!r.truth_nobug) ++buggy;
      if (is_dtw) ++dtw;
      if (is_dfw) ++dfw;
      if (is_tw) ++tw;
      if (is_dfw || (warned && !r.rewrite_match)) ++fw;
      if (!r.truth_nobug && r.repair_at_truth) ++repair;
      if (r.truth_nobug ? r.predicted_nobug : r.rewrite_match) ++joint;
      if (r.truth_nobug ? r.predicted_nobug : r.loc_match) ++loc;
    }
    REQUIRE(m.dfw == dfw);
    REQUIRE(m.dtw == dtw);
    REQUIRE(m.tw == tw);
    REQUIRE(m.fw == fw);
    REQUIRE(m.num_buggy == buggy);
    if (dfw + dtw > 0)
      REQUIRE(m.fdr == static_cast<double>(dfw) / static_cast<double>(dfw + dtw));
    REQUIRE(m.dpr == 1.0 - m.fdr);
    if (buggy > 0) {
      REQUIRE(m.dre == static_cast<double>(dtw) / static_cast<double>(buggy));
      REQUIRE(m.racc == static_cast<double>(repair) / static_cast<double>(buggy));
      REQUIRE(m.re == static_cast<double>(tw) / static_cast<double>(buggy));
    }
    if (tw + fw > 0) REQUIRE(m.pr == static_cast<double>(tw) / static_cast<double>(tw + fw));
    REQUIRE(m.joint_accuracy ==
            static_cast<double>(joint) / static_cast<double>(recs.size()));
    REQUIRE(m.loc_accuracy == static_cast<double>(loc) / static_cast<double>(recs.size()));
  }
}

TEST_CASE("joint correctness implies location correctness on every record") {
  std::mt19937_64 rng(11);
  std::vector<EvalRecord> recs = random_records(rng, 500);
  for (const EvalRecord& r : recs) {
    bool joint = r.truth_nobug ? r.predicted_nobug : r.rewrite_match;
    bool loc = r.truth_nobug ? r.predicted_nobug : r.loc_match;
    if (joint) REQUIRE(loc);
  }
}

TEST_CASE("recall is monotone along the PR curve and AUC is bounded") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    MetricReport m = compute_metrics(random_records(rng, 200));
    for (size_t i = 1; i < m.pr_curve.size(); ++i)
      REQUIRE(m.pr_curve[i].first >= m.pr_curve[i - 1].first);
    REQUIRE(m.pr_auc >= 0.0);
    REQUIRE(m.pr_auc <= 1.0 + 1e-12);
  }
}

TEST_CASE("a perfect predictor scores PR-AUC 1 on a balanced corpus") {
  std::vector<EvalRecord> recs;
  for (int i = 0; i < 50; ++i) {
    EvalRecord buggy;
    buggy.truth_nobug = false;
    buggy.bug_kind = RuleKind::VarMisuse;
    buggy.predicted_nobug = false;
    buggy.loc_match = buggy.rewrite_match = buggy.repair_at_truth = true;
    buggy.confidence = 0.9;
    recs.push_back(buggy);
    EvalRecord clean;
    clean.truth_nobug = true;
    clean.predicted_nobug = true;
    clean.confidence = 0.1;
    recs.push_back(clean);
  }
  MetricReport m = compute_metrics(recs);
  REQUIRE(m.pr_auc == Catch::Approx(1.0));
  REQUIRE(m.joint_accuracy == 1.0);
}

TEST_CASE("direct formula example: DTW=8, DFW=2 gives FDR 0.2 and DPr 0.8") {
  std::vector<EvalRecord> recs;
  for (int i = 0; i < 8; ++i) {
    EvalRecord r;
    r.truth_nobug = false;
    r.bug_kind = RuleKind::WrongBinaryOp;
    r.predicted_nobug = false;
    r.loc_match = true;
    recs.push_back(r);
  }
  for (int i = 0; i < 2; ++i) {
    EvalRecord r;
    r.truth_nobug = false;
    r.bug_kind = RuleKind::WrongBinaryOp;
    r.predicted_nobug = false;
    r.loc_match = false;
    recs.push_back(r);
  }
  MetricReport m = compute_metrics(recs);
  REQUIRE(m.dtw == 8);
  REQUIRE(m.dfw == 2);
  REQUIRE(m.fdr == Catch::Approx(0.2));
  REQUIRE(m.dpr == Catch::Approx(0.8));
}

TEST_CASE("random-bug corpora have the documented shape and determinism") {
  GeneratorConfig gcfg;
  gcfg.seed = 21;
  gcfg.functions = 4;
  std::vector<SourceUnit> units;
  for (int i = 0; i < 4; ++i) {
    GeneratorConfig one = gcfg;
    one.seed = 100 + static_cast<std::uint64_t>(i);
    one.functions = 1;
    units.push_back(generate_corpus(one));
  }

  std::vector<CodeGraph> corpus = generate_random_bugs(units, 9, 5);
  REQUIRE(corpus.size() == units.size() * 10);  // 1 original + 9 variants each
  size_t clean = 0;
  for (const CodeGraph& g : corpus) {
    if (!g.target) {
      ++clean;
      continue;
    }
    bool found = false;
    for (const CandidateEntry& c : g.candidates)
      if (c.rewrite == *g.target) found = true;
    REQUIRE(found);
  }
  REQUIRE(clean == units.size());

  std::vector<CodeGraph> again = generate_random_bugs(units, 9, 5);
  REQUIRE(again.size() == corpus.size());
  for (size_t i = 0; i < corpus.size(); ++i)
    REQUIRE(serialize_graph(again[i]) == serialize_graph(corpus[i]));

  REQUIRE(generate_random_bugs(units, 0, 5).size() == units.size());
}

TEST_CASE("functions without candidates emit only the original") {
  std::vector<SourceUnit> units = {parse("def f(a):\n  return a\n")};
  std::vector<CodeGraph> corpus = generate_random_bugs(units, 9, 1);
  REQUIRE(corpus.size() == 1);
  REQUIRE_FALSE(corpus[0].target.has_value());
}

TEST_CASE("evaluating an untrained model produces a well-formed report") {
  std::vector<SourceUnit> units;
  for (int i = 0; i < 3; ++i) {
    GeneratorConfig one;
    one.seed = 300 + static_cast<std::uint64_t>(i);
    units.push_back(generate_corpus(one));
  }
  std::vector<CodeGraph> corpus = generate_random_bugs(units, 3, 9);

  ModelConfig mc;
  mc.hidden_dim = 16;
  mc.vocab_size = 200;
  mc.seed = 3;
  ModelParameters params(mc);
  std::vector<std::string> labels;
  for (const CodeGraph& g : corpus)
    for (const GraphNode& n : g.nodes) labels.push_back(n.label);
  Vocabulary vocab = build_vocabulary(labels, 200);

  MetricReport m = evaluate(params, vocab, corpus);
  REQUIRE(m.num_samples == static_cast<long>(corpus.size()));
  REQUIRE(m.num_buggy == static_cast<long>(corpus.size() - units.size()));
  REQUIRE(std::isfinite(m.pr_auc));
  REQUIRE(m.joint_accuracy <= m.loc_accuracy + 1e-12);
  // report serializes both ways
  nlohmann::json j = report_to_json(m);
  REQUIRE(j.at("num_samples").get<long>() == m.num_samples);
  REQUIRE_FALSE(format_report(m).empty());
}

TEST_CASE("scan respects the threshold and renders one-token misuse diffs") {
  SourceUnit u = parse(
      "def f(a, b):\n  c = a + b\n  if c < a:\n    c = c * b\n  return c\n");
  ModelConfig mc;
  mc.hidden_dim = 16;
  mc.vocab_size = 100;
  mc.seed = 5;
  ModelParameters params(mc);
  CodeGraph g = clean_graph(u);
  std::vector<std::string> labels;
  for (const GraphNode& n : g.nodes) labels.push_back(n.label);
  Vocabulary vocab = build_vocabulary(labels, 100);

  REQUIRE(scan_unit(params, vocab, u, "f.py", 3, 1.0).empty());

  std::vector<Warning> all = scan_unit(params, vocab, u, "f.py", 1000, 0.0);
  REQUIRE_FALSE(all.empty());
  bool saw_misuse = false;
  for (const Warning& w : all) {
    REQUIRE(w.line >= 1);
    REQUIRE(w.col >= 1);
    REQUIRE(w.confidence >= 0.0);
    if (w.kind == "VarMisuse") {
      saw_misuse = true;
      // exactly one removed and one added line, differing in a single token
      size_t minus = 0, plus = 0;
      std::istringstream is(w.repair_diff);
      std::string line;
      while (std::getline(is, line)) {
        if (line.rfind("- ", 0) == 0) ++minus;
        if (line.rfind("+ ", 0) == 0) ++plus;
      }
      REQUIRE(minus == 1);
      REQUIRE(plus == 1);
    }
    nlohmann::json j = warning_to_json(w);
    REQUIRE(j.at("file") == "f.py");
  }
  REQUIRE(saw_misuse);
}
