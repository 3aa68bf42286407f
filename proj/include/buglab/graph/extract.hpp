#pragma once

// Code-graph extraction: syntax/token structure, symbol occurrences, local
// call signatures, statement-level control flow, and forward may-dataflow
// (LastMayUse / LastMayWrite / MayFinalUseOf). Reversed edge variants are not
// materialized; the model adds them. Token projection of the extracted graph.

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "buglab/graph/graph.hpp"
#include "buglab/lang/ast.hpp"
#include "buglab/lang/symbols.hpp"
#include "buglab/rewrite/rules.hpp"

namespace buglab {

// Extraction byproducts needed by token projection but not serialized.
struct ExtractionInfo {
  std::vector<Span> node_spans;             // per node id; {0,0} when spanless
  std::vector<int> symbol_first_token;      // per node id; -1 except Symbol nodes
};

namespace detail {

class GraphBuilder {
 public:
  GraphBuilder(const SourceUnit& u, const SymbolTable& tbl,
               const std::vector<PotentialRewrite>& candidates)
      : u_(u), tbl_(tbl), candidates_(candidates) {}

  CodeGraph run(ExtractionInfo* info) {
    for (const TreePtr& fn : u_.functions) build_syntax(fn, /*parent=*/-1);
    for (size_t i = 1; i < g_.token_ids.size(); ++i)
      add_edge(g_.token_ids[i - 1], RelationKind::NextToken, g_.token_ids[i]);
    for (const TreePtr& fn : u_.functions) emit_occurrences(fn, nullptr);
    index_functions();
    for (const TreePtr& fn : u_.functions) emit_calls(fn->children.back());
    for (const TreePtr& fn : u_.functions) emit_control_flow(fn);
    for (const TreePtr& fn : u_.functions) emit_dataflow(fn);
    g_.nobug_id = add_node(EntityKind::SyntaxNode, "NoBug", Span{});
    attach_candidates();
    if (info) *info = std::move(info_);
    return std::move(g_);
  }

 private:
  const SourceUnit& u_;
  const SymbolTable& tbl_;
  const std::vector<PotentialRewrite>& candidates_;
  CodeGraph g_;
  ExtractionInfo info_;
  std::unordered_map<int, int> symbol_node_;  // symbol id -> graph node
  struct FnSignature {
    int fn_node = -1;
    int doc_node = -1;
    std::vector<int> formal_nodes;
    size_t param_count = 0;
  };
  std::map<std::string, FnSignature> signatures_;

  int add_node(EntityKind kind, std::string label, Span span) {
    int id = static_cast<int>(g_.nodes.size());
    g_.nodes.push_back({id, kind, std::move(label)});
    info_.node_spans.push_back(span);
    info_.symbol_first_token.push_back(-1);
    return id;
  }

  void add_edge(int src, RelationKind rel, int dst) { g_.edges.push_back({src, rel, dst}); }

  int node_of(const SyntaxTree* t) const {
    auto it = g_.node_of_tree.find(t);
    return it == g_.node_of_tree.end() ? -1 : it->second;
  }

  // ---- syntax structure & tokens -----------------------------------------

  int build_syntax(const TreePtr& n, int parent) {
    if (n->kind == NodeKind::Comment) return -1;
    int id;
    if (n->kind == NodeKind::Docstring) {
      id = add_node(EntityKind::Documentation, n->token, n->span);
    } else if (n->is_leaf()) {
      id = add_node(EntityKind::Token, n->token, n->span);
      g_.token_ids.push_back(id);
    } else {
      id = add_node(EntityKind::SyntaxNode, node_kind_name(n->kind), n->span);
    }
    g_.node_of_tree[n.get()] = id;
    if (parent >= 0) add_edge(parent, RelationKind::SyntaxChild, id);
    int prev_child = -1;
    for (const TreePtr& c : n->children) {
      int cid = build_syntax(c, id);
      if (cid >= 0 && prev_child >= 0)
        add_edge(prev_child, RelationKind::SyntaxNextSibling, cid);
      if (cid >= 0) prev_child = cid;
    }
    return id;
  }

  // ---- symbols -------------------------------------------------------------

  int symbol_node(int sym_id) {
    auto it = symbol_node_.find(sym_id);
    if (it != symbol_node_.end()) return it->second;
    int id = add_node(EntityKind::Symbol, tbl_.symbols[static_cast<size_t>(sym_id)].name, Span{});
    symbol_node_.emplace(sym_id, id);
    return id;
  }

  // Emits OccurrenceOf for Name leaves outside attribute chains and for
  // outermost Attribute nodes, in deterministic tree order.
  void emit_occurrences(const TreePtr& n, const SyntaxTree* parent) {
    bool inside_attr_root = parent && parent->kind == NodeKind::Attribute;
    const Symbol* sym = tbl_.symbol_of(n.get());
    if (sym && !(n->kind == NodeKind::Name && inside_attr_root) &&
        !(n->kind == NodeKind::Attribute && inside_attr_root)) {
      int occ = node_of(n.get());
      if (occ >= 0) {
        int snode = symbol_node(sym->id);
        add_edge(occ, RelationKind::OccurrenceOf, snode);
        if (info_.symbol_first_token[static_cast<size_t>(snode)] < 0 &&
            g_.nodes[static_cast<size_t>(occ)].kind == EntityKind::Token)
          info_.symbol_first_token[static_cast<size_t>(snode)] = occ;
      }
    }
    if (n->kind == NodeKind::Attribute) {
      emit_occurrences(n->children[0], n.get());
      return;  // selector names are not occurrences
    }
    for (const TreePtr& c : n->children) emit_occurrences(c, n.get());
  }

  // ---- local call signatures ------------------------------------------------

  void index_functions() {
    for (const TreePtr& fn : u_.functions) {
      const std::string& name = fn->children[0]->token;
      if (signatures_.count(name)) continue;
      FnSignature sig;
      sig.fn_node = node_of(fn.get());
      sig.param_count = fn->children.size() - 2;
      for (size_t i = 1; i + 1 < fn->children.size(); ++i) {
        const TreePtr& pname = fn->children[i]->children[0];
        sig.formal_nodes.push_back(
            add_node(EntityKind::FormalArgName, pname->token, pname->span));
      }
      const TreePtr& body = fn->children.back();
      if (!body->children.empty() && body->children[0]->kind == NodeKind::Docstring)
        sig.doc_node = node_of(body->children[0].get());
      signatures_.emplace(name, std::move(sig));
    }
  }

  void emit_calls(const TreePtr& n) {
    if (n->kind == NodeKind::Call && n->children[0]->kind == NodeKind::Name) {
      auto it = signatures_.find(n->children[0]->token);
      if (it != signatures_.end()) {
        const FnSignature& sig = it->second;
        size_t argc = n->children.size() - 1;
        for (size_t i = 0; i < argc && i < sig.param_count; ++i)
          add_edge(node_of(n->children[i + 1].get()), RelationKind::FormalArg,
                   sig.formal_nodes[i]);
        if (sig.doc_node >= 0) add_edge(node_of(n.get()), RelationKind::CallDoc, sig.doc_node);
      }
    }
    for (const TreePtr& c : n->children) emit_calls(c);
  }

  // ---- control flow ----------------------------------------------------------

  static bool is_statement(const TreePtr& s) {
    return s->kind != NodeKind::Comment && s->kind != NodeKind::Docstring;
  }

  // Entry node of a block, or `follow` when the block holds no statements.
  int block_entry(const TreePtr& block, int follow) const {
    for (const TreePtr& s : block->children)
      if (is_statement(s)) return node_of(s.get());
    return follow;
  }

  void emit_stmt_flow(const TreePtr& s, int succ) {
    int id = node_of(s.get());
    switch (s->kind) {
      case NodeKind::If: {
        int then_entry = block_entry(s->children[1], succ);
        if (then_entry >= 0) add_edge(id, RelationKind::ControlFlowNext, then_entry);
        emit_block_flow(s->children[1], succ);
        if (s->children.size() == 3) {
          int else_entry = block_entry(s->children[2], succ);
          if (else_entry >= 0) add_edge(id, RelationKind::ControlFlowNext, else_entry);
          emit_block_flow(s->children[2], succ);
        } else if (succ >= 0) {
          add_edge(id, RelationKind::ControlFlowNext, succ);
        }
        break;
      }
      case NodeKind::While: {
        // fallthrough from the body loops back to the While statement
        int body_entry = block_entry(s->children[1], id);
        add_edge(id, RelationKind::ControlFlowNext, body_entry);
        emit_block_flow(s->children[1], id);
        if (succ >= 0) add_edge(id, RelationKind::ControlFlowNext, succ);
        break;
      }
      case NodeKind::Return:
        break;  // no successor
      default:
        if (succ >= 0) add_edge(id, RelationKind::ControlFlowNext, succ);
        break;
    }
    if (s->kind == NodeKind::Assign || s->kind == NodeKind::AugAssign) {
      const TreePtr& target = s->children[0];
      int tnode = node_of(target.get());
      if (tnode >= 0 &&
          (target->kind == NodeKind::Name || target->kind == NodeKind::Attribute))
        add_edge(tnode, RelationKind::AssignedFrom, node_of(s->children[2].get()));
    }
  }

  void emit_block_flow(const TreePtr& block, int follow) {
    std::vector<const TreePtr*> stmts;
    for (const TreePtr& s : block->children)
      if (is_statement(s)) stmts.push_back(&s);
    for (size_t i = 0; i < stmts.size(); ++i) {
      int succ = (i + 1 < stmts.size()) ? node_of(stmts[i + 1]->get()) : follow;
      emit_stmt_flow(*stmts[i], succ);
    }
  }

  void emit_control_flow(const TreePtr& fn) {
    emit_block_flow(fn->children.back(), /*follow=*/-1);
    int fn_node = node_of(fn.get());
    emit_returns(fn->children.back(), fn_node);
  }

  void emit_returns(const TreePtr& n, int fn_node) {
    if (n->kind == NodeKind::Return) {
      for (const TreePtr& v : n->children)
        add_edge(node_of(v.get()), RelationKind::ReturnsFrom, fn_node);
      return;
    }
    for (const TreePtr& c : n->children) emit_returns(c, fn_node);
  }

  // ---- may-dataflow -----------------------------------------------------------

  struct FlowState {
    // symbol id -> occurrence node ids that may be the most recent use/write
    std::map<int, std::set<int>> lastuse, lastwrite;

    bool operator==(const FlowState& o) const {
      return lastuse == o.lastuse && lastwrite == o.lastwrite;
    }
    static FlowState join(const FlowState& a, const FlowState& b) {
      FlowState out = a;
      for (const auto& [sym, occs] : b.lastuse) out.lastuse[sym].insert(occs.begin(), occs.end());
      for (const auto& [sym, occs] : b.lastwrite)
        out.lastwrite[sym].insert(occs.begin(), occs.end());
      return out;
    }
  };

  using FlowEdge = std::tuple<int, RelationKind, int>;
  std::set<FlowEdge> flow_edges_;
  std::vector<FlowState> exit_states_;

  const Symbol* variable_symbol(const SyntaxTree* n) const {
    const Symbol* s = tbl_.symbol_of(n);
    if (s && (s->kind == SymbolKind::Variable || s->kind == SymbolKind::Parameter)) return s;
    return nullptr;
  }

  void flow_read(FlowState& st, const SyntaxTree* occ) {
    const Symbol* s = variable_symbol(occ);
    if (!s) return;
    int node = node_of(occ);
    for (int prev : st.lastuse[s->id]) flow_edges_.insert({node, RelationKind::LastMayUse, prev});
    for (int prev : st.lastwrite[s->id])
      flow_edges_.insert({node, RelationKind::LastMayWrite, prev});
    st.lastuse[s->id] = {node};
  }

  void flow_write(FlowState& st, const SyntaxTree* occ) {
    const Symbol* s = variable_symbol(occ);
    if (!s) return;
    int node = node_of(occ);
    st.lastuse[s->id] = {node};
    st.lastwrite[s->id] = {node};
  }

  // left-to-right reads of an expression
  void flow_expr(FlowState& st, const TreePtr& e) {
    switch (e->kind) {
      case NodeKind::Name:
        flow_read(st, e.get());
        break;
      case NodeKind::Attribute:
        flow_read(st, e.get());  // the whole chain reads its root symbol
        break;
      case NodeKind::Call:
        if (e->children[0]->kind == NodeKind::Attribute) flow_expr(st, e->children[0]);
        for (size_t i = 1; i < e->children.size(); ++i) flow_expr(st, e->children[i]);
        break;
      case NodeKind::BinaryOp:
      case NodeKind::BoolOp:
      case NodeKind::Compare:
        flow_expr(st, e->children[0]);
        flow_expr(st, e->children[2]);
        break;
      case NodeKind::UnaryOp:
        flow_expr(st, e->children[1]);
        break;
      default:
        break;
    }
  }

  FlowState flow_stmt(FlowState st, const TreePtr& s) {
    switch (s->kind) {
      case NodeKind::Assign: {
        flow_expr(st, s->children[2]);
        const TreePtr& target = s->children[0];
        if (target->kind == NodeKind::Name)
          flow_write(st, target.get());
        else if (target->kind == NodeKind::Attribute)
          flow_read(st, target.get());
        break;
      }
      case NodeKind::AugAssign:
        flow_expr(st, s->children[2]);
        flow_read(st, s->children[0].get());
        flow_write(st, s->children[0].get());
        break;
      case NodeKind::ExprStmt:
        flow_expr(st, s->children[0]);
        break;
      case NodeKind::Return:
        for (const TreePtr& v : s->children) flow_expr(st, v);
        exit_states_.push_back(st);
        break;
      case NodeKind::If: {
        flow_expr(st, s->children[0]);
        FlowState then_st = flow_block(st, s->children[1]);
        FlowState else_st =
            (s->children.size() == 3) ? flow_block(st, s->children[2]) : st;
        st = FlowState::join(then_st, else_st);
        break;
      }
      case NodeKind::While: {
        FlowState entry = st;
        for (int iter = 0; iter < 64; ++iter) {
          FlowState cond_st = entry;
          flow_expr(cond_st, s->children[0]);
          FlowState body_out = flow_block(cond_st, s->children[1]);
          FlowState next = FlowState::join(st, body_out);
          if (next == entry) {
            st = cond_st;  // loop exits after a condition evaluation
            break;
          }
          entry = next;
        }
        break;
      }
      default:
        break;
    }
    return st;
  }

  FlowState flow_block(FlowState st, const TreePtr& block) {
    for (const TreePtr& s : block->children)
      if (is_statement(s)) st = flow_stmt(std::move(st), s);
    return st;
  }

  void emit_dataflow(const TreePtr& fn) {
    flow_edges_.clear();
    exit_states_.clear();
    FlowState st;
    for (size_t i = 1; i + 1 < fn->children.size(); ++i) {
      const TreePtr& pname = fn->children[i]->children[0];
      const Symbol* s = variable_symbol(pname.get());
      if (!s) continue;
      st.lastuse[s->id] = {node_of(pname.get())};
      st.lastwrite[s->id] = {node_of(pname.get())};
    }
    exit_states_.push_back(flow_block(st, fn->children.back()));

    FlowState exit;
    for (const FlowState& e : exit_states_) exit = FlowState::join(exit, e);
    for (const auto& [sym, occs] : exit.lastuse) {
      int snode = symbol_node(sym);
      for (int occ : occs) flow_edges_.insert({occ, RelationKind::MayFinalUseOf, snode});
    }
    for (const auto& [src, rel, dst] : flow_edges_) add_edge(src, rel, dst);
  }

  // ---- candidates ----------------------------------------------------------------

  void attach_candidates() {
    const TreePtr& focal = u_.functions.front();
    for (const PotentialRewrite& pr : candidates_) {
      TreePtr site = node_at(focal, pr.location);
      CandidateEntry entry;
      entry.rewrite = pr;
      entry.node_id = node_of(site.get());
      if (pr.rule.kind == RuleKind::VarMisuse) {
        for (const Symbol& s : tbl_.symbols)
          if (s.scope == focal.get() && s.name == pr.rule.after &&
              (s.kind == SymbolKind::Variable || s.kind == SymbolKind::Parameter)) {
            entry.meta.push_back(symbol_node(s.id));
            break;
          }
      } else if (pr.rule.kind == RuleKind::ArgSwap) {
        auto [i, j] = detail::argswap_indices(pr.rule);
        entry.meta.push_back(node_of(site->children[static_cast<size_t>(i) - 1].get()));
        entry.meta.push_back(node_of(site->children[static_cast<size_t>(j) - 1].get()));
      }
      g_.candidates.push_back(std::move(entry));
    }
  }
};

}  // namespace detail

// Extracts the code graph of a resolved unit. Candidate locations are
// relative to the first function, which is the focal function of the sample;
// later functions contribute context (signatures, docs, their own flow).
inline CodeGraph extract_graph(const SourceUnit& u, const SymbolTable& tbl,
                               const std::vector<PotentialRewrite>& candidates,
                               ExtractionInfo* info = nullptr) {
  return detail::GraphBuilder(u, tbl, candidates).run(info);
}

// ---- token projection -------------------------------------------------------

struct TokenProjection {
  std::vector<int> token_sequence;                       // V_tok
  std::vector<std::tuple<int, RelationKind, int>> projected_edges;  // E_tok
  std::vector<int> projection_map;                       // node id -> token id
};

// Maps every entity to a token: tokens to themselves, symbols to their first
// occurrence, spanned entities to the first token inside their span (falling
// back to the nearest preceding token), everything else to the first token.
inline TokenProjection project_tokens(const CodeGraph& g, const ExtractionInfo& info) {
  TokenProjection p;
  p.token_sequence = g.token_ids;
  p.projection_map.assign(g.nodes.size(), -1);
  if (g.token_ids.empty()) return p;

  for (const GraphNode& n : g.nodes) {
    size_t id = static_cast<size_t>(n.id);
    if (n.kind == EntityKind::Token) {
      p.projection_map[id] = n.id;
      continue;
    }
    if (n.kind == EntityKind::Symbol && info.symbol_first_token[id] >= 0) {
      p.projection_map[id] = info.symbol_first_token[id];
      continue;
    }
    Span span = info.node_spans[id];
    int inside = -1, preceding = -1;
    for (int tok : g.token_ids) {
      Span ts = info.node_spans[static_cast<size_t>(tok)];
      if (ts.begin >= span.begin && ts.end <= span.end) {
        inside = tok;
        break;
      }
      if (ts.end <= span.begin) preceding = tok;
    }
    if (span.end > span.begin && inside >= 0)
      p.projection_map[id] = inside;
    else if (span.end > span.begin && preceding >= 0)
      p.projection_map[id] = preceding;
    else
      p.projection_map[id] = g.token_ids.front();
  }

  std::set<std::tuple<int, RelationKind, int>> dedup;
  for (const GraphEdge& e : g.edges) {
    int s = p.projection_map[static_cast<size_t>(e.src)];
    int d = p.projection_map[static_cast<size_t>(e.dst)];
    if (s != d) dedup.insert({s, e.rel, d});
  }
  p.projected_edges.assign(dedup.begin(), dedup.end());
  return p;
}

}  // namespace buglab
