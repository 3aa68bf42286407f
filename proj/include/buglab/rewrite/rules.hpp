#pragma once

// Bug-inducing rewrites: enumeration, application, inversion.
//
// Rule kinds and their locations:
//   VarMisuse          Name leaf in a read position (aug-assign targets read)
//   ArgSwap            Call node; payload "i,j" = 1-based child indices
//   WrongBinaryOp      Op leaf under BinaryOp
//   WrongBooleanOp     Op leaf under BoolOp
//   WrongComparisonOp  Op leaf under Compare (comparison/membership/identity class)
//   WrongAssignOp      Assign or AugAssign statement node
//   UnaryNegToggle     operand of a boolean operator (add/remove `not`),
//                      or a UnaryOp("-") node (remove only)
//   WrongLiteral       Literal leaf in {-2,-1,0,1,2,True,False}
//
// Operator classes: comparison {< <= > >= == !=}, membership {in, not in},
// identity {is, is not}, boolean {and, or}, arithmetic {+ - * / // %},
// assignment {= += -= *= /= //= %=}. Rewrites never cross classes.

#include <algorithm>
#include <array>
#include <stdexcept>
#include <string>
#include <vector>

#include "buglab/lang/ast.hpp"
#include "buglab/lang/symbols.hpp"

namespace buglab {

enum class RuleKind {
  VarMisuse,
  ArgSwap,
  WrongBinaryOp,
  WrongBooleanOp,
  WrongComparisonOp,
  WrongAssignOp,
  UnaryNegToggle,
  WrongLiteral,
  Identity,
};

inline const char* rule_kind_name(RuleKind k) {
  switch (k) {
    case RuleKind::VarMisuse: return "VarMisuse";
    case RuleKind::ArgSwap: return "ArgSwap";
    case RuleKind::WrongBinaryOp: return "WrongBinaryOp";
    case RuleKind::WrongBooleanOp: return "WrongBooleanOp";
    case RuleKind::WrongComparisonOp: return "WrongComparisonOp";
    case RuleKind::WrongAssignOp: return "WrongAssignOp";
    case RuleKind::UnaryNegToggle: return "UnaryNegToggle";
    case RuleKind::WrongLiteral: return "WrongLiteral";
    case RuleKind::Identity: return "Identity";
  }
  return "?";
}

inline bool rule_kind_from_name(const std::string& s, RuleKind& out) {
  static const std::pair<const char*, RuleKind> table[] = {
      {"VarMisuse", RuleKind::VarMisuse},
      {"ArgSwap", RuleKind::ArgSwap},
      {"WrongBinaryOp", RuleKind::WrongBinaryOp},
      {"WrongBooleanOp", RuleKind::WrongBooleanOp},
      {"WrongComparisonOp", RuleKind::WrongComparisonOp},
      {"WrongAssignOp", RuleKind::WrongAssignOp},
      {"UnaryNegToggle", RuleKind::UnaryNegToggle},
      {"WrongLiteral", RuleKind::WrongLiteral},
      {"Identity", RuleKind::Identity},
  };
  for (auto& [name, kind] : table)
    if (s == name) {
      out = kind;
      return true;
    }
  return false;
}

// `before` holds the current content, `after` the replacement. For
// UnaryNegToggle `before` is "add" or "remove" and `after` names the
// toggled operator ("not" or "-"); the serialized payload is "not:add" etc.
struct RewriteRule {
  RuleKind kind = RuleKind::Identity;
  std::string before;
  std::string after;

  std::string payload() const {
    if (kind == RuleKind::UnaryNegToggle) return after + ":" + before;
    return after;
  }
  bool operator==(const RewriteRule& o) const {
    return kind == o.kind && before == o.before && after == o.after;
  }
};

struct PotentialRewrite {
  TreeLocation location;
  RewriteRule rule;

  bool operator==(const PotentialRewrite& o) const {
    return location == o.location && rule == o.rule;
  }
};

inline PotentialRewrite identity_rewrite() { return {TreeLocation{}, RewriteRule{}}; }
inline bool is_identity(const PotentialRewrite& pr) { return pr.rule.kind == RuleKind::Identity; }

struct StaleRewriteError : std::runtime_error {
  StaleRewriteError(const std::string& what) : std::runtime_error("stale rewrite: " + what) {}
};
struct NonInvertibleError : std::runtime_error {
  NonInvertibleError(const std::string& what)
      : std::runtime_error("rewrite has no inverse: " + what) {}
};

namespace opclass {

inline const std::vector<std::string>& comparison() {
  static const std::vector<std::string> v = {"<", "<=", ">", ">=", "==", "!="};
  return v;
}
inline const std::vector<std::string>& membership() {
  static const std::vector<std::string> v = {"in", "not in"};
  return v;
}
inline const std::vector<std::string>& identity_test() {
  static const std::vector<std::string> v = {"is", "is not"};
  return v;
}
inline const std::vector<std::string>& boolean() {
  static const std::vector<std::string> v = {"and", "or"};
  return v;
}
inline const std::vector<std::string>& arithmetic() {
  static const std::vector<std::string> v = {"+", "-", "*", "/", "//", "%"};
  return v;
}
inline const std::vector<std::string>& assignment() {
  static const std::vector<std::string> v = {"=", "+=", "-=", "*=", "/=", "//=", "%="};
  return v;
}
inline const std::vector<std::string>& int_literals() {
  static const std::vector<std::string> v = {"-2", "-1", "0", "1", "2"};
  return v;
}

inline bool contains(const std::vector<std::string>& cls, const std::string& op) {
  return std::find(cls.begin(), cls.end(), op) != cls.end();
}

// The compatibility class of a comparison-position operator, or null.
inline const std::vector<std::string>* compare_class_of(const std::string& op) {
  if (contains(comparison(), op)) return &comparison();
  if (contains(membership(), op)) return &membership();
  if (contains(identity_test(), op)) return &identity_test();
  return nullptr;
}

// True when both ops belong to one compatibility class.
inline bool same_class(const std::string& a, const std::string& b) {
  for (const auto* cls : {&comparison(), &membership(), &identity_test(), &boolean(),
                          &arithmetic(), &assignment()}) {
    if (contains(*cls, a) && contains(*cls, b)) return true;
  }
  return false;
}

}  // namespace opclass

namespace detail {

inline bool is_negatable_atom(const TreePtr& n) {
  return n->kind == NodeKind::Name || n->kind == NodeKind::Call;
}

class RewriteEnumerator {
 public:
  RewriteEnumerator(const TreePtr& fn, const SymbolTable& tbl) : fn_(fn), tbl_(tbl) {}

  std::vector<PotentialRewrite> run() {
    size_t n = fn_->children.size();
    visit(fn_->children[n - 1], TreeLocation{{static_cast<int>(n)}});
    std::sort(out_.begin(), out_.end(), [](const PotentialRewrite& a, const PotentialRewrite& b) {
      if (a.location.path != b.location.path) return a.location.path < b.location.path;
      if (a.rule.kind != b.rule.kind) return a.rule.kind < b.rule.kind;
      return a.rule.payload() < b.rule.payload();
    });
    return std::move(out_);
  }

 private:
  const TreePtr& fn_;
  const SymbolTable& tbl_;
  std::vector<PotentialRewrite> out_;

  void add(TreeLocation loc, RuleKind kind, std::string before, std::string after) {
    out_.push_back({std::move(loc), {kind, std::move(before), std::move(after)}});
  }

  void var_misuse_at(const TreePtr& n, const TreeLocation& loc) {
    const Symbol* sym = tbl_.symbol_of(n.get());
    if (!sym) return;
    if (sym->kind != SymbolKind::Variable && sym->kind != SymbolKind::Parameter) return;
    for (const Symbol* cand : in_scope_before(fn_, tbl_, loc))
      add(loc, RuleKind::VarMisuse, n->token, cand->name);
  }

  void visit_expr(const TreePtr& n, const TreeLocation& loc, bool read_position = true) {
    switch (n->kind) {
      case NodeKind::Name:
        if (read_position) var_misuse_at(n, loc);
        break;
      case NodeKind::Literal: {
        const std::string& t = n->token;
        if (opclass::contains(opclass::int_literals(), t)) {
          for (const std::string& r : opclass::int_literals())
            if (r != t) add(loc, RuleKind::WrongLiteral, t, r);
        } else if (t == "True") {
          add(loc, RuleKind::WrongLiteral, "True", "False");
        } else if (t == "False") {
          add(loc, RuleKind::WrongLiteral, "False", "True");
        }
        break;
      }
      case NodeKind::Attribute:
        visit_expr(n->children[0], loc.child(1), read_position);
        break;
      case NodeKind::Call: {
        // callee in name position contributes nothing; attribute callees are reads
        if (n->children[0]->kind == NodeKind::Attribute)
          visit_expr(n->children[0], loc.child(1));
        int argc = static_cast<int>(n->children.size()) - 1;
        for (int i = 1; i <= argc; ++i)
          for (int j = i + 1; j <= argc; ++j)
            if (!tree_equal(n->children[i], n->children[j])) {
              std::string p = std::to_string(i + 1) + "," + std::to_string(j + 1);
              add(loc, RuleKind::ArgSwap, p, p);
            }
        for (int i = 1; i <= argc; ++i) visit_expr(n->children[i], loc.child(i + 1));
        break;
      }
      case NodeKind::BinaryOp: {
        visit_expr(n->children[0], loc.child(1));
        const std::string& op = n->children[1]->token;
        for (const std::string& r : opclass::arithmetic())
          if (r != op) add(loc.child(2), RuleKind::WrongBinaryOp, op, r);
        visit_expr(n->children[2], loc.child(3));
        break;
      }
      case NodeKind::Compare: {
        visit_expr(n->children[0], loc.child(1));
        const std::string& op = n->children[1]->token;
        if (const auto* cls = opclass::compare_class_of(op))
          for (const std::string& r : *cls)
            if (r != op) add(loc.child(2), RuleKind::WrongComparisonOp, op, r);
        visit_expr(n->children[2], loc.child(3));
        break;
      }
      case NodeKind::BoolOp: {
        const std::string& op = n->children[1]->token;
        add(loc.child(2), RuleKind::WrongBooleanOp, op, op == "and" ? "or" : "and");
        for (int ci : {1, 3}) {
          const TreePtr& operand = n->children[ci - 1];
          TreeLocation oloc = loc.child(ci);
          if (is_negatable_atom(operand)) {
            add(oloc, RuleKind::UnaryNegToggle, "add", "not");
          } else if (operand->kind == NodeKind::UnaryOp && operand->children[0]->token == "not" &&
                     is_negatable_atom(operand->children[1])) {
            add(oloc, RuleKind::UnaryNegToggle, "remove", "not");
          }
          visit_expr(operand, oloc);
        }
        break;
      }
      case NodeKind::UnaryOp: {
        if (n->children[0]->token == "-")
          add(loc, RuleKind::UnaryNegToggle, "remove", "-");
        visit_expr(n->children[1], loc.child(2));
        break;
      }
      default:
        break;
    }
  }

  void visit(const TreePtr& n, const TreeLocation& loc) {
    switch (n->kind) {
      case NodeKind::Block: {
        for (size_t i = 0; i < n->children.size(); ++i)
          visit(n->children[i], loc.child(static_cast<int>(i + 1)));
        break;
      }
      case NodeKind::Assign:
      case NodeKind::AugAssign: {
        const TreePtr& target = n->children[0];
        if (target->kind == NodeKind::Name) {
          const std::string& op = n->children[1]->token;
          for (const std::string& r : opclass::assignment())
            if (r != op) add(loc, RuleKind::WrongAssignOp, op, r);
        }
        // aug-assign targets are read before written; plain targets are not reads
        if (n->kind == NodeKind::AugAssign) {
          visit_expr(target, loc.child(1));
        } else if (target->kind == NodeKind::Attribute) {
          visit_expr(target, loc.child(1));
        }
        visit_expr(n->children[2], loc.child(3));
        break;
      }
      case NodeKind::ExprStmt:
        visit_expr(n->children[0], loc.child(1));
        break;
      case NodeKind::Return:
        for (size_t i = 0; i < n->children.size(); ++i)
          visit_expr(n->children[i], loc.child(static_cast<int>(i + 1)));
        break;
      case NodeKind::If:
        visit_expr(n->children[0], loc.child(1));
        visit(n->children[1], loc.child(2));
        if (n->children.size() == 3) visit(n->children[2], loc.child(3));
        break;
      case NodeKind::While:
        visit_expr(n->children[0], loc.child(1));
        visit(n->children[1], loc.child(2));
        break;
      default:
        break;  // comments, docstrings
    }
  }
};

}  // namespace detail

// All bug-inducing candidates of a resolved function, in deterministic
// (location, kind, payload) order. The identity rule is not enumerated.
inline std::vector<PotentialRewrite> enumerate_rewrites(const TreePtr& fn,
                                                        const SymbolTable& tbl) {
  return detail::RewriteEnumerator(fn, tbl).run();
}

namespace detail {

inline std::pair<int, int> argswap_indices(const RewriteRule& r) {
  auto comma = r.after.find(',');
  return {std::stoi(r.after.substr(0, comma)), std::stoi(r.after.substr(comma + 1))};
}

}  // namespace detail

// Re-checks the matcher, then applies the transform at pr.location.
inline TreePtr apply_rewrite(const TreePtr& s, const PotentialRewrite& pr) {
  if (is_identity(pr)) return s;
  TreePtr n = node_at(s, pr.location);
  const RewriteRule& r = pr.rule;
  switch (r.kind) {
    case RuleKind::VarMisuse:
      if (n->kind != NodeKind::Name || n->token != r.before)
        throw StaleRewriteError("expected name '" + r.before + "'");
      return replace_at(s, pr.location, make_leaf(NodeKind::Name, r.after, n->span));
    case RuleKind::WrongLiteral:
      if (n->kind != NodeKind::Literal || n->token != r.before)
        throw StaleRewriteError("expected literal '" + r.before + "'");
      return replace_at(s, pr.location, make_leaf(NodeKind::Literal, r.after, n->span));
    case RuleKind::WrongBinaryOp:
    case RuleKind::WrongBooleanOp:
    case RuleKind::WrongComparisonOp:
      if (n->kind != NodeKind::Op || n->token != r.before ||
          !opclass::same_class(r.before, r.after))
        throw StaleRewriteError("expected operator '" + r.before + "'");
      return replace_at(s, pr.location, make_leaf(NodeKind::Op, r.after, n->span));
    case RuleKind::WrongAssignOp: {
      if ((n->kind != NodeKind::Assign && n->kind != NodeKind::AugAssign) ||
          n->children[1]->token != r.before)
        throw StaleRewriteError("expected assignment with '" + r.before + "'");
      NodeKind k = (r.after == "=") ? NodeKind::Assign : NodeKind::AugAssign;
      auto repl = make_node(k,
                            {n->children[0], make_leaf(NodeKind::Op, r.after, n->children[1]->span),
                             n->children[2]},
                            n->span);
      return replace_at(s, pr.location, repl);
    }
    case RuleKind::ArgSwap: {
      auto [i, j] = detail::argswap_indices(r);
      if (n->kind != NodeKind::Call || static_cast<size_t>(j) > n->children.size() || i < 2 ||
          i >= j)
        throw StaleRewriteError("expected call with arguments " + r.after);
      std::vector<TreePtr> kids = n->children;
      std::swap(kids[i - 1], kids[j - 1]);
      return replace_at(s, pr.location, make_node(NodeKind::Call, std::move(kids), n->span));
    }
    case RuleKind::UnaryNegToggle: {
      if (r.before == "add") {
        if (n->kind == NodeKind::Op)
          throw StaleRewriteError("cannot negate an operator");
        auto wrapped =
            make_node(NodeKind::UnaryOp, {make_leaf(NodeKind::Op, r.after, n->span), n}, n->span);
        return replace_at(s, pr.location, wrapped);
      }
      if (n->kind != NodeKind::UnaryOp || n->children[0]->token != r.after)
        throw StaleRewriteError("expected unary '" + r.after + "'");
      return replace_at(s, pr.location, n->children[1]);
    }
    case RuleKind::Identity:
      return s;
  }
  throw StaleRewriteError("unknown rule kind");
}

// The inverse rewrite, valid at the same location of the rewritten tree;
// applying it restores the original. Bug rules only.
inline PotentialRewrite invert_rewrite(const PotentialRewrite& pr) {
  RewriteRule inv = pr.rule;
  switch (pr.rule.kind) {
    case RuleKind::VarMisuse:
    case RuleKind::WrongLiteral:
    case RuleKind::WrongBinaryOp:
    case RuleKind::WrongBooleanOp:
    case RuleKind::WrongComparisonOp:
    case RuleKind::WrongAssignOp:
      std::swap(inv.before, inv.after);
      break;
    case RuleKind::ArgSwap:
    case RuleKind::Identity:
      break;  // self-inverse
    case RuleKind::UnaryNegToggle:
      inv.before = (pr.rule.before == "add") ? "remove" : "add";
      break;
  }
  return {pr.location, inv};
}

}  // namespace buglab
