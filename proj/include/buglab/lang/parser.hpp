#pragma once

// Recursive-descent parser for the Python subset.
//
// program    := funcdef+
// funcdef    := "def" NAME "(" [param ("," param)*] ")" ":" suite
// param      := NAME ["=" literal]
// suite      := NEWLINE INDENT block DEDENT | simple_stmt   (inline form accepted)
// block      := docstring? stmt+
// stmt       := assign | augassign | exprstmt | if | while | return | comment
// expr       := or-expr over and-expr over comparison over arithmetic over unary over atom
//
// Constructs outside the subset are rejected with "unsupported construct".

#include <cstring>
#include <set>

#include "buglab/lang/ast.hpp"
#include "buglab/lang/lexer.hpp"

namespace buglab {

namespace detail {

inline const std::set<std::string>& keywords() {
  static const std::set<std::string> kw = {"def", "if",  "else", "while", "return",
                                           "and", "or",  "not",  "in",    "is",
                                           "True", "False"};
  return kw;
}

inline const std::set<std::string>& unsupported_keywords() {
  static const std::set<std::string> kw = {
      "for",    "class", "import", "from",   "try",    "except", "finally", "with",
      "lambda", "yield", "global", "nonlocal", "raise", "assert", "del",     "pass",
      "break",  "continue", "elif", "None",   "async",  "await"};
  return kw;
}

class Parser {
 public:
  explicit Parser(const std::string& text) : text_(text), toks_(lex(text)) {}

  SourceUnit parse_unit() {
    SourceUnit u;
    u.text = text_;
    while (!at(LexKind::End)) {
      if (at(LexKind::Comment)) {  // module-level comments are not attached
        advance();
        expect_newline();
        continue;
      }
      u.functions.push_back(parse_funcdef());
    }
    if (u.functions.empty()) err("expected a function definition");
    return u;
  }

 private:
  const std::string& text_;
  std::vector<Lexeme> toks_;
  size_t pos_ = 0;

  const Lexeme& cur() const { return toks_[pos_]; }
  bool at(LexKind k) const { return cur().kind == k; }
  bool at_op(const char* s) const { return cur().kind == LexKind::Op && cur().text == s; }
  bool at_name(const char* s) const { return cur().kind == LexKind::Name && cur().text == s; }
  void advance() { ++pos_; }

  [[noreturn]] void err(const std::string& msg) const {
    throw SyntaxError(msg, cur().line, cur().col);
  }

  Lexeme expect_op(const char* s) {
    if (!at_op(s)) err(std::string("expected '") + s + "'");
    Lexeme t = cur();
    advance();
    return t;
  }
  Lexeme expect_name() {
    if (!at(LexKind::Name) || keywords().count(cur().text)) err("expected identifier");
    if (unsupported_keywords().count(cur().text)) err("unsupported construct: " + cur().text);
    Lexeme t = cur();
    advance();
    return t;
  }
  void expect_newline() {
    if (!at(LexKind::Newline)) err("expected end of line");
    advance();
  }

  static Span span_of(const Lexeme& t) { return {t.begin, t.end}; }
  static Span join(Span a, Span b) { return {a.begin, b.end}; }
  static Span tree_span(const TreePtr& t) { return t->span; }

  TreePtr parse_funcdef() {
    if (at(LexKind::Name) && unsupported_keywords().count(cur().text))
      err("unsupported construct: " + cur().text);
    if (!at_name("def")) err("expected 'def'");
    Lexeme def_tok = cur();
    advance();
    Lexeme name = expect_name();
    std::vector<TreePtr> children;
    children.push_back(make_leaf(NodeKind::Name, name.text, span_of(name)));
    expect_op("(");
    if (!at_op(")")) {
      while (true) {
        children.push_back(parse_param());
        if (at_op(",")) {
          advance();
          continue;
        }
        break;
      }
    }
    expect_op(")");
    expect_op(":");
    TreePtr body = parse_suite();
    Span sp = join(span_of(def_tok), body->span);
    children.push_back(body);
    return make_node(NodeKind::FunctionDef, std::move(children), sp);
  }

  TreePtr parse_param() {
    Lexeme name = expect_name();
    auto nm = make_leaf(NodeKind::Name, name.text, span_of(name));
    if (at_op("=")) {
      advance();
      TreePtr lit = parse_literal_atom();
      return make_node(NodeKind::Param, {nm, lit}, join(nm->span, lit->span));
    }
    return make_node(NodeKind::Param, {nm}, nm->span);
  }

  TreePtr parse_literal_atom() {
    if (at(LexKind::Int) || at(LexKind::String) || at_name("True") || at_name("False")) {
      Lexeme t = cur();
      advance();
      return make_leaf(NodeKind::Literal, t.text, span_of(t));
    }
    if (at_op("-") && toks_[pos_ + 1].kind == LexKind::Int) {
      Lexeme minus = cur();
      advance();
      Lexeme t = cur();
      advance();
      return make_leaf(NodeKind::Literal, "-" + t.text, {minus.begin, t.end});
    }
    err("expected literal");
  }

  // suite := NEWLINE INDENT block DEDENT | simple statement on the same line
  TreePtr parse_suite() {
    if (at(LexKind::Newline)) {
      advance();
      if (!at(LexKind::Indent)) err("expected indented block");
      advance();
      TreePtr b = parse_block();
      if (!at(LexKind::Dedent)) err("expected dedent");
      advance();
      return b;
    }
    TreePtr s = parse_stmt();
    return make_node(NodeKind::Block, {s}, s->span);
  }

  TreePtr parse_block() {
    std::vector<TreePtr> stmts;
    bool first = true;
    while (!at(LexKind::Dedent) && !at(LexKind::End)) {
      TreePtr s = parse_stmt(first);
      first = false;
      stmts.push_back(s);
    }
    if (stmts.empty()) err("empty block");
    return make_node(NodeKind::Block, stmts, join(stmts.front()->span, stmts.back()->span));
  }

  TreePtr parse_stmt(bool block_start = false) {
    if (at(LexKind::Comment)) {
      Lexeme t = cur();
      advance();
      if (at(LexKind::Newline)) advance();
      return make_leaf(NodeKind::Comment, t.text, span_of(t));
    }
    if (block_start && at(LexKind::String)) {
      // a string literal opening a block is its docstring
      Lexeme t = cur();
      advance();
      expect_newline();
      return make_leaf(NodeKind::Docstring, t.text, span_of(t));
    }
    if (at(LexKind::Name) && unsupported_keywords().count(cur().text))
      err("unsupported construct: " + cur().text);
    if (at_name("def")) err("unsupported construct: nested def");
    if (at_name("if")) return parse_if();
    if (at_name("while")) return parse_while();
    if (at_name("return")) return parse_return();

    TreePtr target = parse_expr();
    if (at(LexKind::Op)) {
      const std::string& op = cur().text;
      static const char* aug_ops[] = {"+=", "-=", "*=", "/=", "//=", "%="};
      bool is_aug = false;
      for (const char* a : aug_ops) is_aug |= (op == a);
      if (op == "=" || is_aug) {
        if (is_aug && target->kind != NodeKind::Name)
          err("augmented assignment target must be a name");
        if (!is_aug && target->kind != NodeKind::Name && target->kind != NodeKind::Attribute)
          err("assignment target must be a name or attribute");
        Lexeme op_tok = cur();
        advance();
        TreePtr value = parse_expr();
        expect_newline();
        auto op_leaf = make_leaf(NodeKind::Op, op_tok.text, span_of(op_tok));
        NodeKind k = is_aug ? NodeKind::AugAssign : NodeKind::Assign;
        return make_node(k, {target, op_leaf, value}, join(target->span, value->span));
      }
    }
    expect_newline();
    return make_node(NodeKind::ExprStmt, {target}, target->span);
  }

  TreePtr parse_if() {
    Lexeme if_tok = cur();
    advance();
    TreePtr cond = parse_expr();
    expect_op(":");
    TreePtr then_b = parse_suite();
    Span sp = join(span_of(if_tok), then_b->span);
    if (at_name("else")) {
      advance();
      expect_op(":");
      TreePtr else_b = parse_suite();
      return make_node(NodeKind::If, {cond, then_b, else_b}, join(sp, else_b->span));
    }
    return make_node(NodeKind::If, {cond, then_b}, sp);
  }

  TreePtr parse_while() {
    Lexeme w_tok = cur();
    advance();
    TreePtr cond = parse_expr();
    expect_op(":");
    TreePtr body = parse_suite();
    return make_node(NodeKind::While, {cond, body}, join(span_of(w_tok), body->span));
  }

  TreePtr parse_return() {
    Lexeme r_tok = cur();
    advance();
    std::vector<TreePtr> exprs;
    exprs.push_back(parse_expr());
    while (at_op(",")) {
      advance();
      exprs.push_back(parse_expr());
    }
    Span sp = join(span_of(r_tok), exprs.back()->span);
    expect_newline();
    return make_node(NodeKind::Return, exprs, sp);
  }

  TreePtr parse_expr() { return parse_or(); }

  TreePtr parse_or() {
    TreePtr left = parse_and();
    while (at_name("or")) {
      Lexeme op = cur();
      advance();
      TreePtr right = parse_and();
      left = make_node(NodeKind::BoolOp,
                       {left, make_leaf(NodeKind::Op, "or", span_of(op)), right},
                       join(left->span, right->span));
    }
    return left;
  }

  TreePtr parse_and() {
    TreePtr left = parse_cmp();
    while (at_name("and")) {
      Lexeme op = cur();
      advance();
      TreePtr right = parse_cmp();
      left = make_node(NodeKind::BoolOp,
                       {left, make_leaf(NodeKind::Op, "and", span_of(op)), right},
                       join(left->span, right->span));
    }
    return left;
  }

  TreePtr parse_cmp() {
    TreePtr left = parse_arith();
    std::string op;
    Span op_span;
    if (at(LexKind::Op)) {
      static const char* cmps[] = {"<", "<=", ">", ">=", "==", "!="};
      for (const char* c : cmps)
        if (cur().text == c) op = c;
      if (!op.empty()) {
        op_span = span_of(cur());
        advance();
      }
    }
    if (op.empty() && at_name("in")) {
      op = "in";
      op_span = span_of(cur());
      advance();
    } else if (op.empty() && at_name("not") && toks_[pos_ + 1].kind == LexKind::Name &&
               toks_[pos_ + 1].text == "in") {
      op = "not in";
      op_span = {cur().begin, toks_[pos_ + 1].end};
      advance();
      advance();
    } else if (op.empty() && at_name("is")) {
      Lexeme is_tok = cur();
      advance();
      if (at_name("not")) {
        op = "is not";
        op_span = {is_tok.begin, cur().end};
        advance();
      } else {
        op = "is";
        op_span = span_of(is_tok);
      }
    }
    if (op.empty()) return left;
    TreePtr right = parse_arith();
    return make_node(NodeKind::Compare, {left, make_leaf(NodeKind::Op, op, op_span), right},
                     join(left->span, right->span));
  }

  TreePtr parse_arith() {
    TreePtr left = parse_term();
    while (at_op("+") || at_op("-")) {
      Lexeme op = cur();
      advance();
      TreePtr right = parse_term();
      left = make_node(NodeKind::BinaryOp,
                       {left, make_leaf(NodeKind::Op, op.text, span_of(op)), right},
                       join(left->span, right->span));
    }
    return left;
  }

  TreePtr parse_term() {
    TreePtr left = parse_unary();
    while (at_op("*") || at_op("/") || at_op("//") || at_op("%")) {
      Lexeme op = cur();
      advance();
      TreePtr right = parse_unary();
      left = make_node(NodeKind::BinaryOp,
                       {left, make_leaf(NodeKind::Op, op.text, span_of(op)), right},
                       join(left->span, right->span));
    }
    return left;
  }

  TreePtr parse_unary() {
    if (at_name("not")) {
      Lexeme op = cur();
      advance();
      TreePtr operand = parse_unary();
      return make_node(NodeKind::UnaryOp,
                       {make_leaf(NodeKind::Op, "not", span_of(op)), operand},
                       join(span_of(op), operand->span));
    }
    if (at_op("-")) {
      Lexeme op = cur();
      advance();
      if (at(LexKind::Int)) {  // fold negative integer literals
        Lexeme t = cur();
        advance();
        return parse_postfix_tail(
            make_leaf(NodeKind::Literal, "-" + t.text, {op.begin, t.end}));
      }
      TreePtr operand = parse_unary();
      return make_node(NodeKind::UnaryOp, {make_leaf(NodeKind::Op, "-", span_of(op)), operand},
                       join(span_of(op), operand->span));
    }
    return parse_postfix();
  }

  TreePtr parse_postfix() { return parse_postfix_tail(parse_atom()); }

  TreePtr parse_postfix_tail(TreePtr base) {
    while (true) {
      if (at_op(".")) {
        if (base->kind != NodeKind::Name && base->kind != NodeKind::Attribute)
          err("unsupported construct: attribute on non-name");
        advance();
        Lexeme attr = expect_name();
        base = make_node(NodeKind::Attribute,
                         {base, make_leaf(NodeKind::Name, attr.text, span_of(attr))},
                         join(base->span, span_of(attr)));
        continue;
      }
      if (at_op("(")) {
        if (base->kind != NodeKind::Name && base->kind != NodeKind::Attribute)
          err("unsupported construct: call of non-name");
        advance();
        std::vector<TreePtr> children{base};
        if (!at_op(")")) {
          while (true) {
            if (at(LexKind::Name) && !keywords().count(cur().text) &&
                toks_[pos_ + 1].kind == LexKind::Op && toks_[pos_ + 1].text == "=")
              err("unsupported construct: keyword argument");
            children.push_back(parse_expr());
            if (at_op(",")) {
              advance();
              continue;
            }
            break;
          }
        }
        Lexeme close = expect_op(")");
        Span sp = join(children.front()->span, span_of(close));
        base = make_node(NodeKind::Call, std::move(children), sp);
        continue;
      }
      break;
    }
    return base;
  }

  TreePtr parse_atom() {
    if (at_name("True") || at_name("False")) {
      Lexeme t = cur();
      advance();
      return make_leaf(NodeKind::Literal, t.text, span_of(t));
    }
    if (at(LexKind::Name)) {
      if (unsupported_keywords().count(cur().text))
        err("unsupported construct: " + cur().text);
      if (keywords().count(cur().text)) err("unexpected keyword '" + cur().text + "'");
      Lexeme t = cur();
      advance();
      return make_leaf(NodeKind::Name, t.text, span_of(t));
    }
    if (at(LexKind::Int)) {
      Lexeme t = cur();
      advance();
      return make_leaf(NodeKind::Literal, t.text, span_of(t));
    }
    if (at(LexKind::String)) {
      Lexeme t = cur();
      advance();
      return make_leaf(NodeKind::Literal, t.text, span_of(t));
    }
    if (at_op("(")) {
      advance();
      TreePtr e = parse_expr();
      expect_op(")");
      return e;
    }
    err("expected expression");
  }
};

}  // namespace detail

inline SourceUnit parse(const std::string& text) { return detail::Parser(text).parse_unit(); }

inline TreePtr parse_function(const std::string& text) {
  SourceUnit u = parse(text);
  return u.functions.front();
}

}  // namespace buglab
