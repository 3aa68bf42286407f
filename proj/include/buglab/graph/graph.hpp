#pragma once

// Heterogeneous code-graph types and their JSON-lines serialization.
// One graph per line: {nodes:[{id,kind,label}], edges:[[src,rel,dst]],
// candidates:[{location,kind,payload,node_id,meta}], nobug_id,
// target: {location,kind,payload} | "NOBUG"}.

#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "buglab/lang/ast.hpp"
#include "buglab/rewrite/rules.hpp"

namespace buglab {

enum class EntityKind { Token, SyntaxNode, Symbol, Subtoken, FormalArgName, Documentation };

enum class RelationKind {
  NextToken,
  SyntaxChild,
  SyntaxNextSibling,
  CallDoc,
  FormalArg,
  ControlFlowNext,
  AssignedFrom,
  ReturnsFrom,
  OccurrenceOf,
  LastMayUse,
  LastMayWrite,
  MayFinalUseOf,
};
inline constexpr int kNumRelations = 12;

inline const char* entity_kind_name(EntityKind k) {
  switch (k) {
    case EntityKind::Token: return "Token";
    case EntityKind::SyntaxNode: return "SyntaxNode";
    case EntityKind::Symbol: return "Symbol";
    case EntityKind::Subtoken: return "Subtoken";
    case EntityKind::FormalArgName: return "FormalArgName";
    case EntityKind::Documentation: return "Documentation";
  }
  return "?";
}

inline const char* relation_kind_name(RelationKind r) {
  static const char* names[kNumRelations] = {
      "NextToken",      "SyntaxChild",  "SyntaxNextSibling", "CallDoc",
      "FormalArg",      "ControlFlowNext", "AssignedFrom",   "ReturnsFrom",
      "OccurrenceOf",   "LastMayUse",   "LastMayWrite",      "MayFinalUseOf"};
  return names[static_cast<int>(r)];
}

struct MalformedGraphError : std::runtime_error {
  size_t byte_offset;
  MalformedGraphError(const std::string& what, size_t offset)
      : std::runtime_error("malformed graph at byte " + std::to_string(offset) + ": " + what),
        byte_offset(offset) {}
};

namespace detail {

inline EntityKind entity_kind_from_name(const std::string& s, size_t offset) {
  static const std::pair<const char*, EntityKind> table[] = {
      {"Token", EntityKind::Token},
      {"SyntaxNode", EntityKind::SyntaxNode},
      {"Symbol", EntityKind::Symbol},
      {"Subtoken", EntityKind::Subtoken},
      {"FormalArgName", EntityKind::FormalArgName},
      {"Documentation", EntityKind::Documentation},
  };
  for (auto& [name, kind] : table)
    if (s == name) return kind;
  throw MalformedGraphError("unknown entity kind '" + s + "'", offset);
}

inline RelationKind relation_kind_from_name(const std::string& s, size_t offset) {
  for (int i = 0; i < kNumRelations; ++i)
    if (s == relation_kind_name(static_cast<RelationKind>(i))) return static_cast<RelationKind>(i);
  throw MalformedGraphError("unknown relation kind '" + s + "'", offset);
}

}  // namespace detail

struct GraphNode {
  int id = 0;
  EntityKind kind = EntityKind::Token;
  std::string label;

  bool operator==(const GraphNode& o) const {
    return id == o.id && kind == o.kind && label == o.label;
  }
};

struct GraphEdge {
  int src = 0;
  RelationKind rel = RelationKind::NextToken;
  int dst = 0;

  bool operator==(const GraphEdge& o) const {
    return src == o.src && rel == o.rel && dst == o.dst;
  }
};

// A candidate rewrite anchored at a graph node. `meta` carries the node ids
// the rewrite-scoring heads need: the replacement's Symbol node for a
// variable misuse, the two argument nodes for an argument swap.
struct CandidateEntry {
  PotentialRewrite rewrite;
  int node_id = 0;
  std::vector<int> meta;

  bool operator==(const CandidateEntry& o) const {
    return rewrite == o.rewrite && node_id == o.node_id && meta == o.meta;
  }
};

struct CodeGraph {
  std::vector<GraphNode> nodes;
  std::vector<GraphEdge> edges;
  std::vector<CandidateEntry> candidates;
  int nobug_id = -1;
  // absent target means a known-clean sample ("NOBUG")
  std::optional<PotentialRewrite> target;

  // transient extraction byproducts, not serialized or compared
  std::vector<int> token_ids;                              // source-order token path
  std::unordered_map<const SyntaxTree*, int> node_of_tree; // tree node -> graph node

  bool operator==(const CodeGraph& o) const {
    return nodes == o.nodes && edges == o.edges && candidates == o.candidates &&
           nobug_id == o.nobug_id && target == o.target;
  }
};

namespace detail {

// `before` rides along so that deserialized rewrites stay applicable and
// invertible (the matcher re-checks it).
inline nlohmann::json rewrite_to_json(const PotentialRewrite& pr) {
  return {{"location", pr.location.path},
          {"kind", rule_kind_name(pr.rule.kind)},
          {"payload", pr.rule.payload()},
          {"before", pr.rule.before}};
}

inline PotentialRewrite rewrite_from_json(const nlohmann::json& j, size_t offset) {
  PotentialRewrite pr;
  pr.location.path = j.at("location").get<std::vector<int>>();
  if (!rule_kind_from_name(j.at("kind").get<std::string>(), pr.rule.kind))
    throw MalformedGraphError("unknown rule kind", offset);
  std::string payload = j.at("payload").get<std::string>();
  if (pr.rule.kind == RuleKind::UnaryNegToggle) {
    auto colon = payload.find(':');
    if (colon == std::string::npos) throw MalformedGraphError("bad toggle payload", offset);
    pr.rule.after = payload.substr(0, colon);
  } else {
    pr.rule.after = payload;
  }
  pr.rule.before = j.value("before", std::string());
  return pr;
}

}  // namespace detail

inline std::string serialize_graph(const CodeGraph& g) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const GraphNode& n : g.nodes)
    nodes.push_back({{"id", n.id}, {"kind", entity_kind_name(n.kind)}, {"label", n.label}});
  nlohmann::json edges = nlohmann::json::array();
  for (const GraphEdge& e : g.edges)
    edges.push_back({e.src, relation_kind_name(e.rel), e.dst});
  nlohmann::json cands = nlohmann::json::array();
  for (const CandidateEntry& c : g.candidates) {
    nlohmann::json jc = detail::rewrite_to_json(c.rewrite);
    jc["node_id"] = c.node_id;
    jc["meta"] = c.meta;
    cands.push_back(std::move(jc));
  }
  nlohmann::json j = {{"nodes", std::move(nodes)},
                      {"edges", std::move(edges)},
                      {"candidates", std::move(cands)},
                      {"nobug_id", g.nobug_id}};
  j["target"] = g.target ? detail::rewrite_to_json(*g.target) : nlohmann::json("NOBUG");
  return j.dump();
}

// Parses one serialized graph line. Errors carry the byte offset of the
// failure within `bytes`.
inline CodeGraph deserialize_graph(const std::string& bytes) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(bytes);
  } catch (const nlohmann::json::parse_error& e) {
    throw MalformedGraphError(e.what(), e.byte);
  }
  CodeGraph g;
  try {
    for (const auto& jn : j.at("nodes")) {
      GraphNode n;
      n.id = jn.at("id").get<int>();
      n.kind = detail::entity_kind_from_name(jn.at("kind").get<std::string>(), 0);
      n.label = jn.at("label").get<std::string>();
      g.nodes.push_back(std::move(n));
    }
    for (const auto& je : j.at("edges")) {
      if (!je.is_array() || je.size() != 3) throw MalformedGraphError("bad edge triple", 0);
      g.edges.push_back({je[0].get<int>(),
                         detail::relation_kind_from_name(je[1].get<std::string>(), 0),
                         je[2].get<int>()});
    }
    for (const auto& jc : j.at("candidates")) {
      CandidateEntry c;
      c.rewrite = detail::rewrite_from_json(jc, 0);
      c.node_id = jc.at("node_id").get<int>();
      if (jc.contains("meta")) c.meta = jc.at("meta").get<std::vector<int>>();
      g.candidates.push_back(std::move(c));
    }
    g.nobug_id = j.at("nobug_id").get<int>();
    const auto& jt = j.at("target");
    if (jt.is_string()) {
      if (jt.get<std::string>() != "NOBUG")
        throw MalformedGraphError("bad target marker", 0);
    } else {
      g.target = detail::rewrite_from_json(jt, 0);
    }
  } catch (const nlohmann::json::exception& e) {
    throw MalformedGraphError(e.what(), 0);
  }
  return g;
}

}  // namespace buglab
