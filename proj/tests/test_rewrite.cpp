#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <set>
#include <string>
#include <vector>

#include "buglab/corpus/generator.hpp"
#include "buglab/lang/parser.hpp"
#include "buglab/lang/printer.hpp"
#include "buglab/lang/symbols.hpp"
#include "buglab/rewrite/augment.hpp"
#include "buglab/rewrite/rules.hpp"
#include "fig2.hpp"

using namespace buglab;

namespace {

struct Site {
  std::vector<int> path;
  int span_begin;
  std::string descriptor;
  std::set<std::string> payloads;
};

// Groups candidates by location and orders sites by source position. The
// position of an assignment-operator site is its operator token; everything
// else uses the node at the rewrite location.
std::vector<Site> group_sites(const TreePtr& fn, const std::vector<PotentialRewrite>& cands) {
  std::map<std::vector<int>, Site> by_loc;
  for (const PotentialRewrite& pr : cands) {
    TreePtr n = node_at(fn, pr.location);
    Site& s = by_loc[pr.location.path];
    s.path = pr.location.path;
    if (pr.rule.kind == RuleKind::WrongAssignOp) {
      s.span_begin = n->children[1]->span.begin;
      s.descriptor = n->children[1]->token;
    } else if (pr.rule.kind == RuleKind::ArgSwap) {
      s.span_begin = n->span.begin;
      s.descriptor = "argswap";
    } else if (s.descriptor.empty()) {
      s.span_begin = n->span.begin;
      s.descriptor = n->token;
    }
    s.payloads.insert(pr.rule.payload());
  }
  std::vector<Site> out;
  for (auto& [_, s] : by_loc) out.push_back(std::move(s));
  std::sort(out.begin(), out.end(),
            [](const Site& a, const Site& b) { return a.span_begin < b.span_begin; });
  return out;
}

std::vector<PotentialRewrite> enumerate_for(const SourceUnit& u, size_t i = 0) {
  SymbolTable tbl = resolve_symbols(u);
  return enumerate_rewrites(u.functions[i], tbl);
}

const PotentialRewrite& find_candidate(const std::vector<PotentialRewrite>& cands,
                                       RuleKind kind, const std::string& payload) {
  for (const PotentialRewrite& pr : cands)
    if (pr.rule.kind == kind && pr.rule.payload() == payload) return pr;
  FAIL("no candidate " << rule_kind_name(kind) << ":" << payload);
  static PotentialRewrite dummy;
  return dummy;
}

}  // namespace

TEST_CASE("running example enumerates exactly the expected 63 rewrites") {
  SourceUnit u = parse(fig2::source());
  std::vector<PotentialRewrite> cands = enumerate_for(u);
  CHECK(cands.size() == 63);

  std::vector<Site> sites = group_sites(u.functions[0], cands);
  const auto& expected = fig2::expected();
  REQUIRE(sites.size() == expected.size());
  for (size_t i = 0; i < sites.size(); ++i) {
    INFO("site " << i << " (" << expected[i].first << ")");
    std::string want_desc = expected[i].first.substr(expected[i].first.find(' ') + 1);
    CHECK(sites[i].descriptor == want_desc);
    CHECK(sites[i].payloads == expected[i].second);
  }
}

TEST_CASE("enumeration is deterministic and canonically ordered") {
  SourceUnit u = parse(fig2::source());
  auto a = enumerate_for(u);
  auto b = enumerate_for(u);
  CHECK(a == b);
  for (size_t i = 1; i < a.size(); ++i) {
    bool ordered =
        a[i - 1].location.path < a[i].location.path ||
        (a[i - 1].location.path == a[i].location.path &&
         (a[i - 1].rule.kind < a[i].rule.kind ||
          (a[i - 1].rule.kind == a[i].rule.kind &&
           a[i - 1].rule.payload() < a[i].rule.payload())));
    CHECK(ordered);
  }
}

TEST_CASE("applying rewrites produces the expected source") {
  SourceUnit u = parse(fig2::source());
  const TreePtr& fn = u.functions[0];
  auto cands = enumerate_for(u);

  auto applied = [&](RuleKind kind, const std::string& payload) {
    return print_tree(apply_rewrite(fn, find_candidate(cands, kind, payload)));
  };

  CHECK(applied(RuleKind::WrongComparisonOp, "not in").find("if a not in b:") !=
        std::string::npos);
  CHECK(applied(RuleKind::ArgSwap, "2,3").find("c += bar(c, b)") != std::string::npos);
  CHECK(applied(RuleKind::WrongAssignOp, "=").find("c = bar(b, c)") != std::string::npos);
  CHECK(applied(RuleKind::UnaryNegToggle, "not:add").find("if not c_is_neg or a is int:") !=
        std::string::npos);
  CHECK(applied(RuleKind::WrongLiteral, "False").find("return False, c") != std::string::npos);
}

TEST_CASE("removing a negation is enumerated and self-locating") {
  SourceUnit u = parse("def f(a, b):\n  if not a or b:\n    return 1\n  return 0\n");
  auto cands = enumerate_for(u);
  const PotentialRewrite& pr = find_candidate(cands, RuleKind::UnaryNegToggle, "not:remove");
  TreePtr after = apply_rewrite(u.functions[0], pr);
  CHECK(print_tree(after).find("if a or b:") != std::string::npos);
  TreePtr back = apply_rewrite(after, invert_rewrite(pr));
  CHECK(tree_equal(back, u.functions[0]));
}

TEST_CASE("unary minus can be removed and restored") {
  SourceUnit u = parse("def f(a, b):\n  c = -a + b\n  return c\n");
  auto cands = enumerate_for(u);
  const PotentialRewrite& pr = find_candidate(cands, RuleKind::UnaryNegToggle, "-:remove");
  TreePtr after = apply_rewrite(u.functions[0], pr);
  CHECK(print_tree(after).find("c = a + b") != std::string::npos);
  TreePtr back = apply_rewrite(after, invert_rewrite(pr));
  CHECK(tree_equal(back, u.functions[0]));
}

TEST_CASE("stale rewrites are rejected") {
  SourceUnit u = parse(fig2::source());
  auto cands = enumerate_for(u);
  const PotentialRewrite& swap_in = find_candidate(cands, RuleKind::WrongComparisonOp, "not in");

  SourceUnit other = parse("def g(x, y):\n  return x + y\n");
  CHECK_THROWS_AS(apply_rewrite(other.functions[0], swap_in), std::exception);

  // applying twice: the site no longer holds the expected token
  TreePtr once = apply_rewrite(u.functions[0], swap_in);
  CHECK_THROWS_AS(apply_rewrite(once, swap_in), StaleRewriteError);
}

TEST_CASE("identity rewrite leaves the tree untouched") {
  SourceUnit u = parse(fig2::source());
  PotentialRewrite id = identity_rewrite();
  CHECK(is_identity(id));
  CHECK(apply_rewrite(u.functions[0], id).get() == u.functions[0].get());
}

TEST_CASE("every enumerated rewrite round-trips through its inverse") {
  int pairs = 0;
  int inverse_enumerated = 0;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    GeneratorConfig cfg;
    cfg.seed = seed;
    cfg.functions = 2;
    SourceUnit u = generate_corpus(cfg);
    SymbolTable tbl = resolve_symbols(u);
    for (const TreePtr& fn : u.functions) {
      for (const PotentialRewrite& pr : enumerate_rewrites(fn, tbl)) {
        TreePtr buggy = apply_rewrite(fn, pr);
        PotentialRewrite inv = invert_rewrite(pr);
        TreePtr restored = apply_rewrite(buggy, inv);
        REQUIRE(tree_equal(restored, fn));
        ++pairs;

        SourceUnit bu;
        bu.functions = {buggy};
        SymbolTable btbl = resolve_symbols(bu);
        auto bcands = enumerate_rewrites(buggy, btbl);
        if (std::find(bcands.begin(), bcands.end(), inv) != bcands.end())
          ++inverse_enumerated;
      }
    }
  }
  CHECK(pairs >= 1000);
  // a small number of inverses fall outside the enumerable set (e.g. a
  // variable restoration whose original symbol lost its defining statement)
  CHECK(inverse_enumerated >= pairs * 9 / 10);
}

TEST_CASE("rewritten trees differ from the original by a local token edit") {
  GeneratorConfig cfg;
  cfg.seed = 7;
  cfg.functions = 3;
  SourceUnit u = generate_corpus(cfg);
  SymbolTable tbl = resolve_symbols(u);
  for (const TreePtr& fn : u.functions) {
    for (const PotentialRewrite& pr : enumerate_rewrites(fn, tbl)) {
      TreePtr buggy = apply_rewrite(fn, pr);
      CHECK_FALSE(tree_equal(buggy, fn));
      // outside the rewrite location, everything is untouched
      TreeLocation parent = pr.location;
      if (!parent.path.empty()) parent.path.pop_back();
      CHECK(print_tree(buggy) != print_tree(fn));
      CHECK(node_at(buggy, parent)->kind == node_at(fn, parent)->kind);
    }
  }
}

TEST_CASE("variable renaming preserves structure and consistency") {
  SourceUnit u = parse(fig2::source());
  AugmentationConfig cfg;
  cfg.variable_renaming = true;
  cfg.seed = 3;
  SourceUnit aug = augment(u, cfg);
  REQUIRE(aug.functions.size() == 1);
  CHECK_FALSE(tree_equal(aug.functions[0], u.functions[0]));

  // renaming only changes Name tokens, never the shape
  std::string before = print_tree(u.functions[0]);
  std::string after = print_tree(aug.functions[0]);
  CHECK(before != after);
  SourceUnit reparsed = parse(after);
  SymbolTable t0 = resolve_symbols(u);
  SymbolTable t1 = resolve_symbols(reparsed);
  CHECK(t0.symbols.size() == t1.symbols.size());
  CHECK(enumerate_for(u).size() == enumerate_for(reparsed).size());
}

TEST_CASE("comment deletion removes trivia only") {
  SourceUnit u = parse(
      "def f(a):\n"
      "  \"\"\"adds one\"\"\"\n"
      "  # increment\n"
      "  b = a + 1\n"
      "  return b\n");
  AugmentationConfig cfg;
  cfg.comment_deletion = true;
  SourceUnit aug = augment(u, cfg);
  std::string out = print_tree(aug.functions[0]);
  CHECK(out.find("adds one") == std::string::npos);
  CHECK(out.find("increment") == std::string::npos);
  CHECK(out.find("b = a + 1") != std::string::npos);
}

TEST_CASE("comparison mirroring flips operands and operator") {
  SourceUnit u = parse("def f(a, b):\n  if a < b:\n    return a <= 0\n  return b == a\n");
  AugmentationConfig cfg;
  cfg.comparison_mirroring = true;
  SourceUnit aug = augment(u, cfg);
  std::string out = print_tree(aug.functions[0]);
  CHECK(out.find("if b > a:") != std::string::npos);
  CHECK(out.find("return 0 >= a") != std::string::npos);
  CHECK(out.find("return a == b") != std::string::npos);
}

TEST_CASE("if-else branch swap negates the condition and swaps bodies") {
  SourceUnit u = parse(
      "def f(x, y):\n"
      "  if x and y:\n"
      "    return 1\n"
      "  else:\n"
      "    return 0\n");
  AugmentationConfig cfg;
  cfg.if_else_branch_swap = true;
  SourceUnit aug = augment(u, cfg);
  std::string out = print_tree(aug.functions[0]);
  CHECK(out.find("if not x or not y:") != std::string::npos);
  CHECK(out.find(":\n    return 0") != std::string::npos);

  // swapping twice restores the original function
  SourceUnit twice = augment(aug, cfg);
  CHECK(print_tree(twice.functions[0]) == print_tree(u.functions[0]));
}

TEST_CASE("branch swap uses complement comparison operators") {
  SourceUnit u = parse(
      "def f(x):\n"
      "  if x < 0:\n"
      "    return -1\n"
      "  else:\n"
      "    return 1\n");
  AugmentationConfig cfg;
  cfg.if_else_branch_swap = true;
  SourceUnit aug = augment(u, cfg);
  std::string out = print_tree(aug.functions[0]);
  CHECK(out.find("if x >= 0:") != std::string::npos);
}

TEST_CASE("if statements without else are left alone by branch swap") {
  SourceUnit u = parse("def f(x):\n  if x > 0:\n    x -= 1\n  return x\n");
  AugmentationConfig cfg;
  cfg.if_else_branch_swap = true;
  SourceUnit aug = augment(u, cfg);
  CHECK(tree_equal(aug.functions[0], u.functions[0]));
}

TEST_CASE("augmentations are deterministic under a fixed seed") {
  GeneratorConfig gcfg;
  gcfg.seed = 11;
  gcfg.functions = 4;
  gcfg.allow_comments = true;
  SourceUnit u = generate_corpus(gcfg);
  AugmentationConfig cfg;
  cfg.variable_renaming = true;
  cfg.comment_deletion = true;
  cfg.comparison_mirroring = true;
  cfg.if_else_branch_swap = true;
  cfg.probability = 0.5;
  cfg.seed = 99;
  SourceUnit a = augment(u, cfg);
  SourceUnit b = augment(u, cfg);
  REQUIRE(a.functions.size() == b.functions.size());
  for (size_t i = 0; i < a.functions.size(); ++i)
    CHECK(tree_equal(a.functions[i], b.functions[i]));
}

TEST_CASE("generated corpora parse and print losslessly") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    GeneratorConfig cfg;
    cfg.seed = seed;
    cfg.functions = 3;
    SourceUnit u = generate_corpus(cfg);
    REQUIRE(u.functions.size() == 3);
    SourceUnit round = parse(print_unit(u));
    REQUIRE(round.functions.size() == 3);
    for (size_t i = 0; i < 3; ++i) CHECK(tree_equal(round.functions[i], u.functions[i]));
  }
}
