#pragma once

// Semantics-preserving data augmentations, applied per function:
//   VariableRenaming     rename one local variable/parameter to a fresh name
//   CommentDeletion      drop comments and docstrings
//   ComparisonMirroring  a < b  ->  b > a   (and <=/>=; ==/!= keep the operator)
//   IfElseBranchSwap     if c: A else: B  ->  if not c: B else: A,
//                        with `not c` simplified by De Morgan / complement ops

#include <cstdint>
#include <random>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "buglab/lang/ast.hpp"
#include "buglab/lang/symbols.hpp"

namespace buglab {

struct AugmentationConfig {
  bool variable_renaming = false;
  bool comment_deletion = false;
  bool comparison_mirroring = false;
  bool if_else_branch_swap = false;
  // independent application probability per function, per augmentation
  double probability = 1.0;
  std::uint64_t seed = 0;
};

namespace detail {

inline double unit_draw(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline TreePtr rename_occurrences(const TreePtr& n, const SymbolTable& tbl, int symbol_id,
                                  const std::string& fresh) {
  if (n->kind == NodeKind::Name) {
    const Symbol* s = tbl.symbol_of(n.get());
    if (s && s->id == symbol_id) return make_leaf(NodeKind::Name, fresh, n->span);
    return n;
  }
  if (n->is_leaf()) return n;
  std::vector<TreePtr> kids;
  kids.reserve(n->children.size());
  bool changed = false;
  for (const TreePtr& c : n->children) {
    TreePtr r = rename_occurrences(c, tbl, symbol_id, fresh);
    changed |= (r != c);
    kids.push_back(std::move(r));
  }
  if (!changed) return n;
  return make_node(n->kind, std::move(kids), n->span);
}

inline TreePtr rename_one_variable(const TreePtr& fn, const SymbolTable& tbl,
                                   std::mt19937_64& rng) {
  std::vector<const Symbol*> locals;
  std::unordered_set<std::string> taken;
  for (const Symbol& s : tbl.symbols) {
    taken.insert(s.name);
    if (s.scope != fn.get()) continue;
    if (s.kind == SymbolKind::Variable || s.kind == SymbolKind::Parameter)
      locals.push_back(&s);
  }
  if (locals.empty()) return fn;
  const Symbol* victim = locals[rng() % locals.size()];
  std::string fresh;
  for (int i = 0;; ++i) {
    fresh = "v" + std::to_string(i);
    if (!taken.count(fresh)) break;
  }
  return rename_occurrences(fn, tbl, victim->id, fresh);
}

inline bool is_trivia(const TreePtr& stmt) {
  return stmt->kind == NodeKind::Comment || stmt->kind == NodeKind::Docstring;
}

inline TreePtr delete_comments(const TreePtr& n) {
  if (n->is_leaf()) return n;
  std::vector<TreePtr> kids;
  kids.reserve(n->children.size());
  bool changed = false;
  for (const TreePtr& c : n->children) {
    if (n->kind == NodeKind::Block && is_trivia(c)) {
      changed = true;
      continue;
    }
    TreePtr r = delete_comments(c);
    changed |= (r != c);
    kids.push_back(std::move(r));
  }
  if (!changed) return n;
  // never leave an empty block behind
  if (n->kind == NodeKind::Block && kids.empty()) return n;
  return make_node(n->kind, std::move(kids), n->span);
}

inline const std::string* mirrored_op(const std::string& op) {
  static const std::unordered_map<std::string, std::string> m = {
      {"<", ">"}, {">", "<"}, {"<=", ">="}, {">=", "<="}, {"==", "=="}, {"!=", "!="}};
  auto it = m.find(op);
  return it == m.end() ? nullptr : &it->second;
}

inline TreePtr mirror_comparisons(const TreePtr& n) {
  if (n->is_leaf()) return n;
  std::vector<TreePtr> kids;
  kids.reserve(n->children.size());
  bool changed = false;
  for (const TreePtr& c : n->children) {
    TreePtr r = mirror_comparisons(c);
    changed |= (r != c);
    kids.push_back(std::move(r));
  }
  if (n->kind == NodeKind::Compare) {
    if (const std::string* flipped = mirrored_op(kids[1]->token)) {
      return make_node(NodeKind::Compare,
                       {kids[2], make_leaf(NodeKind::Op, *flipped, kids[1]->span), kids[0]},
                       n->span);
    }
  }
  if (!changed) return n;
  return make_node(n->kind, std::move(kids), n->span);
}

inline const std::string* complement_op(const std::string& op) {
  static const std::unordered_map<std::string, std::string> m = {
      {"<", ">="},    {">=", "<"},        {">", "<="},         {"<=", ">"},
      {"==", "!="},   {"!=", "=="},       {"in", "not in"},    {"not in", "in"},
      {"is", "is not"}, {"is not", "is"}};
  auto it = m.find(op);
  return it == m.end() ? nullptr : &it->second;
}

// Logical negation, simplified where the structure allows it.
inline TreePtr negate_expr(const TreePtr& e) {
  switch (e->kind) {
    case NodeKind::UnaryOp:
      if (e->children[0]->token == "not") return e->children[1];
      break;
    case NodeKind::Compare:
      if (const std::string* c = complement_op(e->children[1]->token))
        return make_node(NodeKind::Compare,
                         {e->children[0], make_leaf(NodeKind::Op, *c, e->children[1]->span),
                          e->children[2]},
                         e->span);
      break;
    case NodeKind::BoolOp: {
      const std::string flipped = e->children[1]->token == "and" ? "or" : "and";
      return make_node(NodeKind::BoolOp,
                       {negate_expr(e->children[0]),
                        make_leaf(NodeKind::Op, flipped, e->children[1]->span),
                        negate_expr(e->children[2])},
                       e->span);
    }
    case NodeKind::Literal:
      if (e->token == "True") return make_leaf(NodeKind::Literal, "False", e->span);
      if (e->token == "False") return make_leaf(NodeKind::Literal, "True", e->span);
      break;
    default:
      break;
  }
  return make_node(NodeKind::UnaryOp, {make_leaf(NodeKind::Op, "not", e->span), e}, e->span);
}

inline TreePtr swap_if_else(const TreePtr& n) {
  if (n->is_leaf()) return n;
  std::vector<TreePtr> kids;
  kids.reserve(n->children.size());
  bool changed = false;
  for (const TreePtr& c : n->children) {
    TreePtr r = swap_if_else(c);
    changed |= (r != c);
    kids.push_back(std::move(r));
  }
  if (n->kind == NodeKind::If && kids.size() == 3)
    return make_node(NodeKind::If, {negate_expr(kids[0]), kids[2], kids[1]}, n->span);
  if (!changed) return n;
  return make_node(n->kind, std::move(kids), n->span);
}

}  // namespace detail

// Applies the enabled augmentations to each function independently,
// deterministically in cfg.seed.
inline SourceUnit augment(const SourceUnit& unit, const AugmentationConfig& cfg) {
  std::mt19937_64 rng(cfg.seed);
  SourceUnit out;
  for (const TreePtr& fn : unit.functions) {
    TreePtr cur = fn;
    if (cfg.variable_renaming && detail::unit_draw(rng) < cfg.probability) {
      SourceUnit tmp;
      tmp.functions = {cur};
      SymbolTable tbl = resolve_symbols(tmp);
      cur = detail::rename_one_variable(cur, tbl, rng);
    }
    if (cfg.comment_deletion && detail::unit_draw(rng) < cfg.probability)
      cur = detail::delete_comments(cur);
    if (cfg.comparison_mirroring && detail::unit_draw(rng) < cfg.probability)
      cur = detail::mirror_comparisons(cur);
    if (cfg.if_else_branch_swap && detail::unit_draw(rng) < cfg.probability)
      cur = detail::swap_if_else(cur);
    out.functions.push_back(cur);
  }
  return out;
}

}  // namespace buglab
