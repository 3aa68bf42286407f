#pragma once

// Indentation-aware lexer for the Python subset.

#include <cctype>
#include <cstring>
#include <stdexcept>
#include <string>
#include <vector>

namespace buglab {

enum class LexKind { Name, Int, String, Op, Comment, Newline, Indent, Dedent, End };

struct Lexeme {
  LexKind kind;
  std::string text;
  int begin = 0;
  int end = 0;
  int line = 1;
  int col = 1;
};

struct SyntaxError : std::runtime_error {
  int line, col;
  SyntaxError(const std::string& msg, int line_, int col_)
      : std::runtime_error("syntax error at " + std::to_string(line_) + ":" +
                           std::to_string(col_) + ": " + msg),
        line(line_),
        col(col_) {}
};

namespace detail {
inline bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
inline bool is_ident(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
}  // namespace detail

inline std::vector<Lexeme> lex(const std::string& text) {
  std::vector<Lexeme> out;
  std::vector<int> indents{0};
  size_t pos = 0;
  int line = 1;
  const size_t n = text.size();

  auto col_of = [&](size_t p, size_t line_start) { return static_cast<int>(p - line_start) + 1; };

  size_t line_start = 0;
  bool at_line_start = true;

  while (pos <= n) {
    if (at_line_start) {
      line_start = pos;
      size_t p = pos;
      while (p < n && (text[p] == ' ' || text[p] == '\t')) ++p;
      if (p >= n) break;
      if (text[p] == '\n') {  // blank line
        pos = p + 1;
        ++line;
        continue;
      }
      int indent = 0;
      for (size_t q = pos; q < p; ++q) indent += (text[q] == '\t') ? 8 : 1;
      if (indent > indents.back()) {
        indents.push_back(indent);
        out.push_back({LexKind::Indent, "", (int)pos, (int)p, line, 1});
      } else {
        while (indent < indents.back()) {
          indents.pop_back();
          out.push_back({LexKind::Dedent, "", (int)pos, (int)p, line, 1});
        }
        if (indent != indents.back())
          throw SyntaxError("inconsistent indentation", line, col_of(p, line_start));
      }
      pos = p;
      at_line_start = false;
      continue;
    }

    if (pos >= n) break;
    char c = text[pos];
    int col = col_of(pos, line_start);

    if (c == '\n') {
      if (!out.empty() && out.back().kind != LexKind::Newline &&
          out.back().kind != LexKind::Indent)
        out.push_back({LexKind::Newline, "\n", (int)pos, (int)pos + 1, line, col});
      ++pos;
      ++line;
      at_line_start = true;
      continue;
    }
    if (c == ' ' || c == '\t') {
      ++pos;
      continue;
    }
    if (c == '#') {
      size_t p = pos;
      while (p < n && text[p] != '\n') ++p;
      out.push_back({LexKind::Comment, text.substr(pos, p - pos), (int)pos, (int)p, line, col});
      pos = p;
      continue;
    }
    if (detail::is_ident_start(c)) {
      size_t p = pos;
      while (p < n && detail::is_ident(text[p])) ++p;
      out.push_back({LexKind::Name, text.substr(pos, p - pos), (int)pos, (int)p, line, col});
      pos = p;
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      size_t p = pos;
      while (p < n && std::isdigit(static_cast<unsigned char>(text[p]))) ++p;
      out.push_back({LexKind::Int, text.substr(pos, p - pos), (int)pos, (int)p, line, col});
      pos = p;
      continue;
    }
    if (c == '"' || c == '\'') {
      char quote = c;
      size_t p = pos + 1;
      // triple-quoted strings (docstrings)
      bool triple = (p + 1 < n && text[p] == quote && text[p + 1] == quote);
      if (triple) {
        p += 2;
        while (p + 2 < n && !(text[p] == quote && text[p + 1] == quote && text[p + 2] == quote)) {
          if (text[p] == '\n') ++line;
          ++p;
        }
        if (p + 2 >= n) throw SyntaxError("unterminated string", line, col);
        p += 3;
      } else {
        while (p < n && text[p] != quote && text[p] != '\n') {
          if (text[p] == '\\' && p + 1 < n) ++p;
          ++p;
        }
        if (p >= n || text[p] != quote) throw SyntaxError("unterminated string", line, col);
        ++p;
      }
      out.push_back({LexKind::String, text.substr(pos, p - pos), (int)pos, (int)p, line, col});
      pos = p;
      continue;
    }

    // multi-character operators first
    static const char* ops3[] = {"//="};
    static const char* ops2[] = {"==", "!=", "<=", ">=", "+=", "-=", "*=", "/=", "%=", "//"};
    static const char* ops1 = "+-*/%<>=().,:";
    std::string tok;
    for (const char* op : ops3)
      if (text.compare(pos, 3, op) == 0) tok = op;
    if (tok.empty())
      for (const char* op : ops2)
        if (text.compare(pos, 2, op) == 0) tok = op;
    if (tok.empty() && std::strchr(ops1, c)) tok = std::string(1, c);
    if (tok.empty()) throw SyntaxError(std::string("unexpected character '") + c + "'", line, col);
    out.push_back({LexKind::Op, tok, (int)pos, (int)(pos + tok.size()), line, col});
    pos += tok.size();
  }

  if (!out.empty() && out.back().kind != LexKind::Newline && out.back().kind != LexKind::Dedent)
    out.push_back({LexKind::Newline, "\n", (int)n, (int)n, line, 1});
  while (indents.size() > 1) {
    indents.pop_back();
    out.push_back({LexKind::Dedent, "", (int)n, (int)n, line, 1});
  }
  out.push_back({LexKind::End, "", (int)n, (int)n, line, 1});
  return out;
}

}  // namespace buglab
