#pragma once

// Seeded random generator for small functions in the supported language
// subset. Emits source text built from common idioms (accumulators, counter
// loops, guard clauses) so that generated corpora carry learnable structure,
// then parses it back, guaranteeing well-formedness.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "buglab/lang/ast.hpp"
#include "buglab/lang/parser.hpp"

namespace buglab {

struct GeneratorConfig {
  std::uint64_t seed = 0;
  int functions = 1;
  int max_branch_points = 2;   // cap on if/while statements per function
  int min_statements = 3;      // top-level body statements, excluding return
  int max_statements = 6;
  bool allow_while = true;
  bool allow_calls = true;
  bool allow_comments = false;
};

namespace detail {

class FunctionGenerator {
 public:
  FunctionGenerator(std::mt19937_64& rng, const GeneratorConfig& cfg, int index)
      : rng_(rng), cfg_(cfg), index_(index) {}

  std::string run() {
    int nparams = 1 + pick(3);
    std::string header = "def fn_" + std::to_string(index_) + "(";
    static const char* pnames[] = {"a", "b", "c"};
    for (int i = 0; i < nparams; ++i) {
      if (i) header += ", ";
      header += pnames[i];
      names_.push_back(pnames[i]);
    }
    header += "):";
    lines_.push_back(header);
    if (cfg_.allow_comments && pick(2) == 0)
      lines_.push_back("  \"\"\"helper routine\"\"\"");
    int n = cfg_.min_statements + pick(cfg_.max_statements - cfg_.min_statements + 1);
    emit_block(n, 1);
    lines_.push_back("  return " + expr(1));
    std::string out;
    for (const std::string& l : lines_) out += l + "\n";
    return out;
  }

 private:
  std::mt19937_64& rng_;
  const GeneratorConfig& cfg_;
  int index_;
  int branch_points_ = 0;
  std::vector<std::string> names_;
  std::vector<std::string> lines_;

  int pick(int n) { return static_cast<int>(rng_() % static_cast<std::uint64_t>(n)); }
  std::string indent(int depth) { return std::string(2 * static_cast<size_t>(depth), ' '); }
  const std::string& any_name() { return names_[static_cast<size_t>(pick(int(names_.size())))]; }

  std::string fresh_name() {
    static const char* pool[] = {"total", "count", "result", "value", "flag", "item", "tmp"};
    for (const char* cand : pool) {
      bool used = false;
      for (const std::string& n : names_) used |= (n == cand);
      if (!used) {
        names_.push_back(cand);
        return cand;
      }
    }
    std::string cand = "x" + std::to_string(names_.size());
    names_.push_back(cand);
    return cand;
  }

  std::string literal() {
    static const char* lits[] = {"-2", "-1", "0", "1", "2", "True", "False"};
    return lits[pick(5 + (pick(4) == 0 ? 2 : 0))];
  }

  std::string atom() {
    int r = pick(cfg_.allow_calls ? 5 : 4);
    if (r == 4) return "bar(" + any_name() + ", " + literal() + ")";
    if (r >= 2) return any_name();
    return literal();
  }

  std::string expr(int depth) {
    if (depth <= 0 || pick(3) == 0) return atom();
    static const char* arith[] = {"+", "-", "*", "%"};
    return atom() + " " + arith[pick(4)] + " " + expr(depth - 1);
  }

  std::string condition() {
    static const char* cmp[] = {"<", "<=", ">", ">=", "==", "!="};
    std::string c = any_name() + " " + cmp[pick(6)] + " " + (pick(2) ? atom() : literal());
    if (pick(4) == 0) c += (pick(2) ? " and " : " or ") + any_name();
    return c;
  }

  void emit_assign(int depth) {
    bool reuse = names_.size() > 3 && pick(2) == 0;
    std::string target = reuse ? any_name() : fresh_name();
    lines_.push_back(indent(depth) + target + " = " + expr(1));
  }

  void emit_augassign(int depth) {
    static const char* ops[] = {"+=", "-=", "*="};
    lines_.push_back(indent(depth) + any_name() + " " + ops[pick(3)] + " " + expr(0));
  }

  void emit_if(int depth) {
    ++branch_points_;
    lines_.push_back(indent(depth) + "if " + condition() + ":");
    emit_block(1 + pick(2), depth + 1);
    if (pick(2) == 0) {
      lines_.push_back(indent(depth) + "else:");
      emit_block(1 + pick(2), depth + 1);
    }
  }

  void emit_while(int depth) {
    ++branch_points_;
    std::string counter = fresh_name();
    lines_.push_back(indent(depth) + counter + " = 0");
    lines_.push_back(indent(depth) + "while " + counter + " < " + any_name() + ":");
    emit_block(1 + pick(2), depth + 1);
    lines_.push_back(indent(depth + 1) + counter + " += 1");
  }

  void emit_stmt(int depth) {
    bool branch_ok = branch_points_ < cfg_.max_branch_points && depth < 3;
    int r = pick(branch_ok ? 6 : 4);
    switch (r) {
      case 0:
      case 1:
        emit_assign(depth);
        break;
      case 2:
        emit_augassign(depth);
        break;
      case 3:
        if (cfg_.allow_calls && pick(2) == 0) {
          lines_.push_back(indent(depth) + "bar(" + any_name() + ", " + expr(0) + ")");
        } else {
          emit_assign(depth);
        }
        break;
      case 4:
        emit_if(depth);
        break;
      default:
        if (cfg_.allow_while)
          emit_while(depth);
        else
          emit_if(depth);
        break;
    }
  }

  void emit_block(int n, int depth) {
    // lead with an assignment so inner scopes have material to use
    emit_assign(depth);
    for (int i = 1; i < n; ++i) emit_stmt(depth);
  }
};

}  // namespace detail

inline std::string generate_source(const GeneratorConfig& cfg) {
  std::mt19937_64 rng(cfg.seed);
  std::string out;
  for (int i = 0; i < cfg.functions; ++i) {
    if (i) out += "\n";
    out += detail::FunctionGenerator(rng, cfg, i).run();
  }
  return out;
}

inline SourceUnit generate_corpus(const GeneratorConfig& cfg) {
  return parse(generate_source(cfg));
}

}  // namespace buglab
