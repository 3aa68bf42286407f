#pragma once

// Helpers building sample graphs from a source unit. Rewritten variants go
// through the full text round trip — apply, re-print, re-parse, re-resolve,
// re-enumerate, re-extract — so the resulting graph is exactly what the
// pipeline would produce for that source text. The ground-truth target is
// the inverse rewrite, expressed against the rewritten tree.

#include <optional>
#include <string>
#include <vector>

#include "buglab/graph/extract.hpp"
#include "buglab/lang/parser.hpp"
#include "buglab/lang/printer.hpp"
#include "buglab/rewrite/rules.hpp"

namespace buglab {

// Graph of an unmodified unit; candidates enumerated, target NOBUG.
inline CodeGraph clean_graph(const SourceUnit& u, ExtractionInfo* info = nullptr) {
  SymbolTable tbl = resolve_symbols(u);
  std::vector<PotentialRewrite> cands = enumerate_rewrites(u.functions[0], tbl);
  return extract_graph(u, tbl, cands, info);
}

// Graph of the unit with `pr` applied to its focal function. Returns nullopt
// when the inverse rewrite is not among the rewritten snippet's own
// candidates (callers re-draw); otherwise the graph's target is the inverse.
inline std::optional<CodeGraph> buggy_variant_graph(const SourceUnit& u,
                                                    const PotentialRewrite& pr) {
  SourceUnit v;
  v.functions = u.functions;
  v.functions[0] = apply_rewrite(u.functions[0], pr);
  v.text = print_unit(v);
  SourceUnit w = parse(v.text);
  CodeGraph g = clean_graph(w);
  PotentialRewrite inverse = invert_rewrite(pr);
  bool found = false;
  for (const CandidateEntry& c : g.candidates)
    if (c.rewrite == inverse) {
      found = true;
      break;
    }
  if (!found) return std::nullopt;
  g.target = inverse;
  return g;
}

}  // namespace buglab
