#include <catch2/catch_amalgamated.hpp>

#include "buglab/lang/ast.hpp"
#include "buglab/lang/parser.hpp"
#include "buglab/lang/printer.hpp"
#include "buglab/lang/symbols.hpp"
#include "buglab/lang/tree_json.hpp"
#include "fig2.hpp"
#include "test_util.hpp"

using namespace buglab;

TEST_CASE("minimal function parses") {
  auto fn = parse_function("def f(a):\n  return a\n");
  REQUIRE(fn->kind == NodeKind::FunctionDef);
  REQUIRE(fn->children.size() == 3);  // name, one param, block
  CHECK(fn->children[0]->token == "f");
  CHECK(fn->children[1]->kind == NodeKind::Param);
  const auto& block = fn->children[2];
  REQUIRE(block->children.size() == 1);
  CHECK(block->children[0]->kind == NodeKind::Return);
}

TEST_CASE("running example snippet parses without error") {
  SourceUnit u = parse(fig2::source());
  REQUIRE(u.functions.size() == 1);
  const auto& fn = u.functions[0];
  CHECK(fn->children.size() == 5);  // name + 3 params + block
  CHECK(fn->children[3]->children.size() == 2);  // c=0 default
}

TEST_CASE("malformed input raises a syntax error with position") {
  CHECK_THROWS_AS(parse("def f(:"), SyntaxError);
  try {
    parse("def f(:");
  } catch (const SyntaxError& e) {
    CHECK(e.line == 1);
    CHECK(e.col == 7);
  }
}

TEST_CASE("out-of-subset constructs are reported as unsupported") {
  CHECK_THROWS_WITH(parse("def f(a):\n  for x in a:\n    return x\n"),
                    Catch::Matchers::ContainsSubstring("unsupported construct"));
  CHECK_THROWS_WITH(parse("class C:\n  pass\n"),
                    Catch::Matchers::ContainsSubstring("unsupported construct"));
  CHECK_THROWS_WITH(parse("def f(a):\n  return lambda: a\n"),
                    Catch::Matchers::ContainsSubstring("unsupported construct"));
}

TEST_CASE("node_at follows the recursive location definition") {
  auto fn = parse_function(fig2::source());
  CHECK(node_at(fn, TreeLocation{}).get() == fn.get());  // s[eps] = s
  // s[(2,3)] is the third child of the second child
  auto second = fn->children[1];
  REQUIRE(second->kind == NodeKind::Param);
  auto direct = node_at(fn, TreeLocation{{2}});
  CHECK(direct.get() == second.get());
  auto fifth = node_at(fn, TreeLocation{{5}});
  auto nested = node_at(fn, TreeLocation{{5, 2}});
  CHECK(nested.get() == fifth->children[1].get());
  // leaves have no children
  auto leaf_loc = testutil::find_leaf(fn, NodeKind::Name, "foo");
  CHECK_THROWS_AS(node_at(fn, leaf_loc.child(1)), InvalidPathError);
  // invalid paths are rejected, never truncated
  CHECK_THROWS_AS(node_at(fn, TreeLocation{{99}}), InvalidPathError);
  try {
    node_at(fn, TreeLocation{{99}});
  } catch (const InvalidPathError& e) {
    CHECK(e.bad_index == 99);
  }
}

TEST_CASE("replace_at is functional and identity-stable") {
  auto fn = parse_function(fig2::source());
  auto zero_loc = testutil::find_leaf(fn, NodeKind::Literal, "0", 1);  // the one in `c < 0`
  auto replaced = replace_at(fn, zero_loc, make_leaf(NodeKind::Literal, "1"));
  CHECK_FALSE(tree_equal(fn, replaced));
  std::string text = print_tree(replaced);
  CHECK(text.find("c_is_neg = c < 1") != std::string::npos);
  // original is untouched
  CHECK(node_at(fn, zero_loc)->token == "0");
  // identity replacement
  auto same = replace_at(fn, zero_loc, node_at(fn, zero_loc));
  CHECK(tree_equal(fn, same));
}

TEST_CASE("print/parse round trip on the running example") {
  auto fn = parse_function(fig2::source());
  std::string printed = print_tree(fn);
  auto fn2 = parse_function(printed);
  CHECK(tree_equal(fn, fn2));
  CHECK(print_tree(fn2) == printed);
}

TEST_CASE("round trip preserves comments and docstrings") {
  const char* src =
      "def f(a):\n"
      "  \"\"\"Adds one.\"\"\"\n"
      "  # increment\n"
      "  a += 1\n"
      "  return a\n";
  auto fn = parse_function(src);
  std::string printed = print_tree(fn);
  CHECK(printed.find("\"\"\"Adds one.\"\"\"") != std::string::npos);
  CHECK(printed.find("# increment") != std::string::npos);
  CHECK(tree_equal(fn, parse_function(printed)));
}

TEST_CASE("printer parenthesizes by precedence") {
  auto fn = parse_function("def f(a, b):\n  x = (a + b) * 2\n  y = not (a + b)\n  return x, y\n");
  std::string printed = print_tree(fn);
  CHECK(printed.find("(a + b) * 2") != std::string::npos);
  CHECK(printed.find("not (a + b)") != std::string::npos);
  CHECK(tree_equal(fn, parse_function(printed)));
}

TEST_CASE("negative integer literals fold into one leaf") {
  auto fn = parse_function("def f():\n  return -1\n");
  auto lit = node_at(fn, testutil::find_leaf(fn, NodeKind::Literal, "-1"));
  CHECK(lit->kind == NodeKind::Literal);
  CHECK(print_tree(fn).find("return -1") != std::string::npos);
}

TEST_CASE("tree JSON round trip") {
  auto fn = parse_function(fig2::source());
  auto j = tree_to_json(fn);
  auto fn2 = tree_from_json(j);
  CHECK(tree_equal(fn, fn2));
}

TEST_CASE("symbol resolution on the running example") {
  SourceUnit u = parse(fig2::source());
  SymbolTable tbl = resolve_symbols(u);
  const auto& fn = u.functions[0];

  // every `c` occurrence maps to the same parameter symbol
  std::vector<const SyntaxTree*> c_occ;
  testutil::walk(fn, {}, [&](const TreePtr& n, const TreeLocation&) {
    if (n->kind == NodeKind::Name && n->token == "c") c_occ.push_back(n.get());
  });
  REQUIRE(c_occ.size() == 7);  // param def + 6 uses
  const Symbol* c_sym = tbl.symbol_of(c_occ[0]);
  REQUIRE(c_sym != nullptr);
  CHECK(c_sym->kind == SymbolKind::Parameter);
  for (const SyntaxTree* o : c_occ) CHECK(tbl.symbol_of(o)->id == c_sym->id);

  // `bar` and `int` resolve to opaque module-level symbols
  auto bar_loc = testutil::find_leaf(fn, NodeKind::Name, "bar");
  const Symbol* bar_sym = tbl.symbol_of(node_at(fn, bar_loc).get());
  REQUIRE(bar_sym != nullptr);
  CHECK(bar_sym->kind == SymbolKind::Function);
  CHECK(bar_sym->unresolved);
}

TEST_CASE("two locals get two distinct symbols; one name maps to one symbol") {
  SourceUnit u = parse("def f(a):\n  x = a\n  y = x\n  return a, y\n");
  SymbolTable tbl = resolve_symbols(u);
  const auto& fn = u.functions[0];
  auto x_sym = tbl.symbol_of(node_at(fn, testutil::find_leaf(fn, NodeKind::Name, "x", 0)).get());
  auto y_sym = tbl.symbol_of(node_at(fn, testutil::find_leaf(fn, NodeKind::Name, "y", 0)).get());
  REQUIRE(x_sym);
  REQUIRE(y_sym);
  CHECK(x_sym->id != y_sym->id);
  // shadow-free subset: all `a` occurrences map to the parameter
  auto a0 = tbl.symbol_of(node_at(fn, testutil::find_leaf(fn, NodeKind::Name, "a", 0)).get());
  auto a2 = tbl.symbol_of(node_at(fn, testutil::find_leaf(fn, NodeKind::Name, "a", 2)).get());
  CHECK(a0->id == a2->id);
  CHECK(a0->kind == SymbolKind::Parameter);
}

TEST_CASE("in_scope_before matches the example listing") {
  SourceUnit u = parse(fig2::source());
  SymbolTable tbl = resolve_symbols(u);
  const auto& fn = u.functions[0];

  auto names = [&](const TreeLocation& loc) {
    std::vector<std::string> out;
    for (const Symbol* s : in_scope_before(fn, tbl, loc)) out.push_back(s->name);
    return out;
  };

  // l1: the `a` in `a in b`
  auto l1 = testutil::find_leaf(fn, NodeKind::Name, "a", 1);
  CHECK(names(l1) == std::vector<std::string>{"b", "c"});
  // l13: the `c_is_neg` in the second if condition
  auto l13 = testutil::find_leaf(fn, NodeKind::Name, "c_is_neg", 1);
  CHECK(names(l13) == std::vector<std::string>{"a", "b", "c"});
  // l10: `c` in `c < 0` — c_is_neg is being defined on that line, not before
  auto l10 = testutil::find_leaf(fn, NodeKind::Name, "c", 3);
  CHECK(names(l10) == std::vector<std::string>{"a", "b"});

  // not-a-name location
  CHECK_THROWS_AS(in_scope_before(fn, tbl, TreeLocation{}), NotANameError);
}

TEST_CASE("first statement of a zero-parameter function sees no symbols") {
  SourceUnit u = parse("def f():\n  x = 1\n  return x\n");
  SymbolTable tbl = resolve_symbols(u);
  const auto& fn = u.functions[0];
  auto x_use = testutil::find_leaf(fn, NodeKind::Name, "x", 1);
  CHECK(in_scope_before(fn, tbl, x_use).empty());
}
