#pragma once

// Canonical printer: 2-space indent, single spaces around operators,
// minimal parentheses by precedence. parse(print(s)) == s for well-formed
// trees; comments and docstrings are printed verbatim.

#include <string>

#include "buglab/lang/ast.hpp"

namespace buglab {

namespace detail {

// Higher binds tighter.
inline int precedence_of(const TreePtr& e) {
  switch (e->kind) {
    case NodeKind::BoolOp: return e->children[1]->token == "or" ? 1 : 2;
    case NodeKind::Compare: return 3;
    case NodeKind::BinaryOp: {
      const std::string& op = e->children[1]->token;
      return (op == "+" || op == "-") ? 4 : 5;
    }
    case NodeKind::UnaryOp: return 6;
    default: return 7;  // atoms, calls, attributes
  }
}

inline void print_expr(const TreePtr& e, std::string& out, int min_prec) {
  int prec = precedence_of(e);
  bool parens = prec < min_prec;
  if (parens) out += "(";
  switch (e->kind) {
    case NodeKind::Name:
    case NodeKind::Literal:
      out += e->token;
      break;
    case NodeKind::Attribute:
      print_expr(e->children[0], out, 7);
      out += ".";
      out += e->children[1]->token;
      break;
    case NodeKind::Call: {
      print_expr(e->children[0], out, 7);
      out += "(";
      for (size_t i = 1; i < e->children.size(); ++i) {
        if (i > 1) out += ", ";
        print_expr(e->children[i], out, 0);
      }
      out += ")";
      break;
    }
    case NodeKind::UnaryOp: {
      const std::string& op = e->children[0]->token;
      out += op;
      if (op == "not") out += " ";
      print_expr(e->children[1], out, 6);
      break;
    }
    case NodeKind::BinaryOp:
    case NodeKind::Compare:
    case NodeKind::BoolOp: {
      print_expr(e->children[0], out, prec);
      out += " ";
      out += e->children[1]->token;
      out += " ";
      print_expr(e->children[2], out, prec + 1);
      break;
    }
    default:
      out += "<?>";
      break;
  }
  if (parens) out += ")";
}

inline void print_block(const TreePtr& block, std::string& out, int indent);

inline void print_stmt(const TreePtr& s, std::string& out, int indent) {
  std::string pad(indent, ' ');
  switch (s->kind) {
    case NodeKind::Comment:
    case NodeKind::Docstring:
      out += pad + s->token + "\n";
      break;
    case NodeKind::Assign:
    case NodeKind::AugAssign:
      out += pad;
      print_expr(s->children[0], out, 0);
      out += " " + s->children[1]->token + " ";
      print_expr(s->children[2], out, 0);
      out += "\n";
      break;
    case NodeKind::ExprStmt:
      out += pad;
      print_expr(s->children[0], out, 0);
      out += "\n";
      break;
    case NodeKind::If:
      out += pad + "if ";
      print_expr(s->children[0], out, 0);
      out += ":\n";
      print_block(s->children[1], out, indent + 2);
      if (s->children.size() == 3) {
        out += pad + "else:\n";
        print_block(s->children[2], out, indent + 2);
      }
      break;
    case NodeKind::While:
      out += pad + "while ";
      print_expr(s->children[0], out, 0);
      out += ":\n";
      print_block(s->children[1], out, indent + 2);
      break;
    case NodeKind::Return:
      out += pad + "return ";
      for (size_t i = 0; i < s->children.size(); ++i) {
        if (i) out += ", ";
        print_expr(s->children[i], out, 0);
      }
      out += "\n";
      break;
    default:
      break;
  }
}

inline void print_block(const TreePtr& block, std::string& out, int indent) {
  for (const TreePtr& s : block->children) print_stmt(s, out, indent);
}

}  // namespace detail

inline std::string print_tree(const TreePtr& fn) {
  std::string out = "def " + fn->children[0]->token + "(";
  size_t n = fn->children.size();
  for (size_t i = 1; i + 1 < n; ++i) {
    if (i > 1) out += ", ";
    const TreePtr& p = fn->children[i];
    out += p->children[0]->token;
    if (p->children.size() == 2) out += "=" + p->children[1]->token;
  }
  out += "):\n";
  detail::print_block(fn->children[n - 1], out, 2);
  return out;
}

inline std::string print_unit(const SourceUnit& u) {
  std::string out;
  for (size_t i = 0; i < u.functions.size(); ++i) {
    if (i) out += "\n";
    out += print_tree(u.functions[i]);
  }
  return out;
}

inline std::string print_expr(const TreePtr& e) {
  std::string out;
  detail::print_expr(e, out, 0);
  return out;
}

}  // namespace buglab
