#pragma once

// JSON form of syntax trees: {kind, children, token, span}.

#include <nlohmann/json.hpp>

#include "buglab/lang/ast.hpp"

namespace buglab {

inline nlohmann::json tree_to_json(const TreePtr& t) {
  nlohmann::json j;
  j["kind"] = node_kind_name(t->kind);
  j["token"] = t->token;
  j["span"] = {t->span.begin, t->span.end};
  nlohmann::json kids = nlohmann::json::array();
  for (const TreePtr& c : t->children) kids.push_back(tree_to_json(c));
  j["children"] = std::move(kids);
  return j;
}

inline TreePtr tree_from_json(const nlohmann::json& j) {
  NodeKind kind;
  if (!node_kind_from_name(j.at("kind").get<std::string>(), kind))
    throw std::runtime_error("unknown node kind: " + j.at("kind").get<std::string>());
  auto n = std::make_shared<SyntaxTree>();
  n->kind = kind;
  n->token = j.at("token").get<std::string>();
  auto sp = j.at("span");
  n->span = {sp.at(0).get<int>(), sp.at(1).get<int>()};
  for (const auto& c : j.at("children")) n->children.push_back(tree_from_json(c));
  return n;
}

}  // namespace buglab
