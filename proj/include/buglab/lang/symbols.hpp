#pragma once

// Function-local symbol resolution over a parsed SourceUnit.
//
// Scoping is function-local; parameters are in scope from the function
// start. Functions defined in the unit are resolvable callees from any
// function. Unresolved names become opaque module-level function symbols
// (unknown arity), so variable rewrites never target them.
//
// A variable's effective definition point is the end of its first defining
// statement; "defined before" comparisons use strict source order against
// these offsets.

#include <algorithm>
#include <climits>
#include <map>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "buglab/lang/ast.hpp"

namespace buglab {

enum class SymbolKind { Variable, Function, Parameter };

struct Symbol {
  int id = -1;
  std::string name;
  SymbolKind kind = SymbolKind::Variable;
  const SyntaxTree* scope = nullptr;  // owning FunctionDef; nullptr = module level
  int def_offset = INT_MAX;           // effective definition offset; INT_MAX if never defined
  bool unresolved = false;
};

struct SymbolTable {
  std::vector<Symbol> symbols;
  // Name leaves in executable positions, plus outermost Attribute nodes
  // (mapped to their root symbol).
  std::unordered_map<const SyntaxTree*, int> occurrences;

  const Symbol* symbol_of(const SyntaxTree* node) const {
    auto it = occurrences.find(node);
    return it == occurrences.end() ? nullptr : &symbols[it->second];
  }
};

struct NotANameError : std::runtime_error {
  NotANameError() : std::runtime_error("location does not point at a name occurrence") {}
};

namespace detail {

class Resolver {
 public:
  explicit Resolver(const SourceUnit& u) : unit_(u) {}

  SymbolTable run() {
    for (const TreePtr& fn : unit_.functions) {
      int id = add_symbol(fn->children[0]->token, SymbolKind::Function, nullptr, 0);
      tbl_.occurrences[fn->children[0].get()] = id;
      module_.emplace(fn->children[0]->token, id);
    }
    for (const TreePtr& fn : unit_.functions) resolve_function(fn);
    return std::move(tbl_);
  }

 private:
  const SourceUnit& unit_;
  SymbolTable tbl_;
  std::map<std::string, int> module_;
  std::map<std::string, int> locals_;
  const SyntaxTree* scope_ = nullptr;

  int add_symbol(const std::string& name, SymbolKind kind, const SyntaxTree* scope,
                 int def_offset, bool unresolved = false) {
    Symbol s;
    s.id = static_cast<int>(tbl_.symbols.size());
    s.name = name;
    s.kind = kind;
    s.scope = scope;
    s.def_offset = def_offset;
    s.unresolved = unresolved;
    tbl_.symbols.push_back(s);
    return s.id;
  }

  void resolve_function(const TreePtr& fn) {
    locals_.clear();
    scope_ = fn.get();
    size_t n = fn->children.size();
    for (size_t i = 1; i + 1 < n; ++i) {
      const TreePtr& param = fn->children[i];
      int id = add_symbol(param->children[0]->token, SymbolKind::Parameter, scope_,
                          fn->span.begin);
      locals_[param->children[0]->token] = id;
      tbl_.occurrences[param->children[0].get()] = id;
    }
    collect_defs(fn->children[n - 1]);
    resolve_uses_block(fn->children[n - 1]);
  }

  // First pass: register every assignment target as a local variable with
  // its effective definition offset (end of the defining statement).
  void collect_defs(const TreePtr& block) {
    for (const TreePtr& s : block->children) {
      switch (s->kind) {
        case NodeKind::Assign:
        case NodeKind::AugAssign: {
          const TreePtr& target = s->children[0];
          if (target->kind == NodeKind::Name) {
            auto it = locals_.find(target->token);
            if (it == locals_.end()) {
              locals_[target->token] =
                  add_symbol(target->token, SymbolKind::Variable, scope_, s->span.end);
            } else {
              Symbol& sym = tbl_.symbols[it->second];
              sym.def_offset = std::min(sym.def_offset, s->span.end);
            }
          }
          break;
        }
        case NodeKind::If:
          collect_defs(s->children[1]);
          if (s->children.size() == 3) collect_defs(s->children[2]);
          break;
        case NodeKind::While:
          collect_defs(s->children[1]);
          break;
        default:
          break;
      }
    }
  }

  void resolve_uses_block(const TreePtr& block) {
    for (const TreePtr& s : block->children) {
      switch (s->kind) {
        case NodeKind::Assign:
        case NodeKind::AugAssign:
          resolve_target(s->children[0]);
          resolve_expr(s->children[2]);
          break;
        case NodeKind::ExprStmt:
          resolve_expr(s->children[0]);
          break;
        case NodeKind::Return:
          for (const TreePtr& e : s->children) resolve_expr(e);
          break;
        case NodeKind::If:
          resolve_expr(s->children[0]);
          resolve_uses_block(s->children[1]);
          if (s->children.size() == 3) resolve_uses_block(s->children[2]);
          break;
        case NodeKind::While:
          resolve_expr(s->children[0]);
          resolve_uses_block(s->children[1]);
          break;
        default:
          break;
      }
    }
  }

  void resolve_target(const TreePtr& t) {
    if (t->kind == NodeKind::Name) {
      tbl_.occurrences[t.get()] = locals_.at(t->token);
    } else if (t->kind == NodeKind::Attribute) {
      resolve_expr(t);  // `a.b = x` reads `a`
    }
  }

  void resolve_expr(const TreePtr& e) {
    switch (e->kind) {
      case NodeKind::Name: {
        tbl_.occurrences[e.get()] = resolve_name(e->token);
        break;
      }
      case NodeKind::Attribute: {
        // Resolve the root name; map the outermost Attribute node too.
        const SyntaxTree* root = e.get();
        while (root->kind == NodeKind::Attribute) root = root->children[0].get();
        int id = resolve_name(root->token);
        tbl_.occurrences[root] = id;
        tbl_.occurrences[e.get()] = id;
        break;
      }
      case NodeKind::Call:
        resolve_expr(e->children[0]);
        for (size_t i = 1; i < e->children.size(); ++i) resolve_expr(e->children[i]);
        break;
      case NodeKind::BinaryOp:
      case NodeKind::BoolOp:
      case NodeKind::Compare:
        resolve_expr(e->children[0]);
        resolve_expr(e->children[2]);
        break;
      case NodeKind::UnaryOp:
        resolve_expr(e->children[1]);
        break;
      default:
        break;  // literals, ops
    }
  }

  int resolve_name(const std::string& name) {
    auto it = locals_.find(name);
    if (it != locals_.end()) return it->second;
    auto mit = module_.find(name);
    if (mit != module_.end()) return mit->second;
    int id = add_symbol(name, SymbolKind::Function, nullptr, INT_MAX, /*unresolved=*/true);
    module_.emplace(name, id);
    return id;
  }
};

}  // namespace detail

inline SymbolTable resolve_symbols(const SourceUnit& u) { return detail::Resolver(u).run(); }

// Variable/parameter symbols of the function whose first definition precedes
// the name occurrence at `loc`, excluding the symbol occurring there.
// Sorted by name.
inline std::vector<const Symbol*> in_scope_before(const TreePtr& fn, const SymbolTable& tbl,
                                                  const TreeLocation& loc) {
  TreePtr node = node_at(fn, loc);
  if (node->kind != NodeKind::Name) throw NotANameError();
  const Symbol* at_loc = tbl.symbol_of(node.get());
  if (!at_loc) throw NotANameError();
  std::vector<const Symbol*> out;
  for (const Symbol& s : tbl.symbols) {
    if (s.scope != fn.get()) continue;
    if (s.kind != SymbolKind::Variable && s.kind != SymbolKind::Parameter) continue;
    if (s.id == at_loc->id) continue;
    if (s.def_offset < node->span.begin) out.push_back(&s);
  }
  std::sort(out.begin(), out.end(),
            [](const Symbol* a, const Symbol* b) { return a->name < b->name; });
  return out;
}

}  // namespace buglab
