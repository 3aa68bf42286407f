#pragma once

// Syntax trees for the Python subset, with formal tree locations.
//
// Children layout per node kind:
//   FunctionDef : Name(function name), Param..., Block
//   Param       : Name | Name, Literal(default)
//   Block       : stmt+            (Docstring first when present)
//   Assign      : target(Name|Attribute), Op("="), expr
//   AugAssign   : target(Name), Op("+=" etc.), expr
//   If          : cond, Block [, Block(else)]
//   While       : cond, Block
//   Return      : expr+
//   ExprStmt    : expr
//   Call        : callee(Name|Attribute), arg...
//   Attribute   : base(Name|Attribute), Name(attr)
//   BinaryOp    : left, Op, right
//   BoolOp      : left, Op("and"|"or"), right
//   Compare     : left, Op, right
//   UnaryOp     : Op("not"|"-"), operand
//   Name, Literal, Op, Docstring, Comment : leaves carrying a lexeme
//
// Operators live in dedicated Op leaves so that a rewrite location can
// address the operator itself. Negative integer literals are folded into
// a single Literal leaf ("-1"), so UnaryOp("-") only wraps non-literals.

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace buglab {

enum class NodeKind {
  FunctionDef,
  Param,
  Block,
  Assign,
  AugAssign,
  If,
  While,
  Return,
  ExprStmt,
  Call,
  Attribute,
  BinaryOp,
  BoolOp,
  Compare,
  UnaryOp,
  Name,
  Literal,
  Op,
  Docstring,
  Comment,
};

inline const char* node_kind_name(NodeKind k) {
  switch (k) {
    case NodeKind::FunctionDef: return "FunctionDef";
    case NodeKind::Param: return "Param";
    case NodeKind::Block: return "Block";
    case NodeKind::Assign: return "Assign";
    case NodeKind::AugAssign: return "AugAssign";
    case NodeKind::If: return "If";
    case NodeKind::While: return "While";
    case NodeKind::Return: return "Return";
    case NodeKind::ExprStmt: return "ExprStmt";
    case NodeKind::Call: return "Call";
    case NodeKind::Attribute: return "Attribute";
    case NodeKind::BinaryOp: return "BinaryOp";
    case NodeKind::BoolOp: return "BoolOp";
    case NodeKind::Compare: return "Compare";
    case NodeKind::UnaryOp: return "UnaryOp";
    case NodeKind::Name: return "Name";
    case NodeKind::Literal: return "Literal";
    case NodeKind::Op: return "Op";
    case NodeKind::Docstring: return "Docstring";
    case NodeKind::Comment: return "Comment";
  }
  return "?";
}

inline bool node_kind_from_name(const std::string& s, NodeKind& out) {
  static const std::pair<const char*, NodeKind> table[] = {
      {"FunctionDef", NodeKind::FunctionDef}, {"Param", NodeKind::Param},
      {"Block", NodeKind::Block},             {"Assign", NodeKind::Assign},
      {"AugAssign", NodeKind::AugAssign},     {"If", NodeKind::If},
      {"While", NodeKind::While},             {"Return", NodeKind::Return},
      {"ExprStmt", NodeKind::ExprStmt},       {"Call", NodeKind::Call},
      {"Attribute", NodeKind::Attribute},     {"BinaryOp", NodeKind::BinaryOp},
      {"BoolOp", NodeKind::BoolOp},           {"Compare", NodeKind::Compare},
      {"UnaryOp", NodeKind::UnaryOp},         {"Name", NodeKind::Name},
      {"Literal", NodeKind::Literal},         {"Op", NodeKind::Op},
      {"Docstring", NodeKind::Docstring},     {"Comment", NodeKind::Comment},
  };
  for (auto& [name, kind] : table) {
    if (s == name) {
      out = kind;
      return true;
    }
  }
  return false;
}

struct Span {
  int begin = 0;  // character offset, inclusive
  int end = 0;    // character offset, exclusive
};

struct SyntaxTree;
using TreePtr = std::shared_ptr<const SyntaxTree>;

struct SyntaxTree {
  NodeKind kind{};
  std::vector<TreePtr> children;
  std::string token;  // lexeme; leaves only
  Span span;

  bool is_leaf() const { return children.empty(); }
};

inline TreePtr make_leaf(NodeKind kind, std::string token, Span span = {}) {
  auto n = std::make_shared<SyntaxTree>();
  n->kind = kind;
  n->token = std::move(token);
  n->span = span;
  return n;
}

inline TreePtr make_node(NodeKind kind, std::vector<TreePtr> children, Span span = {}) {
  auto n = std::make_shared<SyntaxTree>();
  n->kind = kind;
  n->children = std::move(children);
  n->span = span;
  return n;
}

// Structural equality; spans are layout metadata and do not participate.
inline bool tree_equal(const TreePtr& a, const TreePtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->kind != b->kind || a->token != b->token) return false;
  if (a->children.size() != b->children.size()) return false;
  for (size_t i = 0; i < a->children.size(); ++i)
    if (!tree_equal(a->children[i], b->children[i])) return false;
  return true;
}

// A tree location: sequence of 1-based child indices. Empty = the root.
struct TreeLocation {
  std::vector<int> path;

  bool operator==(const TreeLocation& o) const { return path == o.path; }
  bool operator<(const TreeLocation& o) const { return path < o.path; }

  std::string to_string() const {
    std::string s = "(";
    for (size_t i = 0; i < path.size(); ++i) {
      if (i) s += ",";
      s += std::to_string(path[i]);
    }
    return s + ")";
  }

  TreeLocation child(int i) const {
    TreeLocation l = *this;
    l.path.push_back(i);
    return l;
  }
};

struct InvalidPathError : std::runtime_error {
  int bad_index;
  explicit InvalidPathError(int idx)
      : std::runtime_error("invalid tree path at child index " + std::to_string(idx)),
        bad_index(idx) {}
};

inline TreePtr node_at(const TreePtr& s, const TreeLocation& loc) {
  TreePtr cur = s;
  for (int i : loc.path) {
    if (i < 1 || static_cast<size_t>(i) > cur->children.size()) throw InvalidPathError(i);
    cur = cur->children[i - 1];
  }
  return cur;
}

// Functional replacement: returns a new tree sharing untouched subtrees.
inline TreePtr replace_at(const TreePtr& s, const TreeLocation& loc, const TreePtr& t,
                          size_t depth = 0) {
  if (depth == loc.path.size()) return t;
  int i = loc.path[depth];
  if (i < 1 || static_cast<size_t>(i) > s->children.size()) throw InvalidPathError(i);
  auto n = std::make_shared<SyntaxTree>(*s);
  n->children[i - 1] = replace_at(s->children[i - 1], loc, t, depth + 1);
  return n;
}

struct SourceUnit {
  std::string text;
  std::vector<TreePtr> functions;
};

}  // namespace buglab
