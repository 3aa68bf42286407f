#pragma once

// The running example snippet and its full expected rewrite table,
// used as an end-to-end oracle for the rewrite enumerator.

#include <set>
#include <string>
#include <utility>
#include <vector>

namespace fig2 {

inline const char* source() {
  return "def foo(a, b, c=0):\n"
         "  if a in b:\n"
         "    c += bar(b, c)\n"
         "  c_is_neg = c < 0\n"
         "  if c_is_neg or a is int:\n"
         "    return True, c\n"
         "  return c > 1, c\n";
}

// Expected candidates, keyed by the source text of the rewrite site plus a
// disambiguating occurrence index (0-based, in source order among sites with
// identical text+kind). Values are "kind:payload" strings.
struct ExpectedSite {
  std::string kind;           // rule kind at this site
  std::set<std::string> payloads;
};

// l1..l22 in source order; total payload count is 63.
inline const std::vector<std::pair<std::string, std::set<std::string>>>& expected() {
  static const std::vector<std::pair<std::string, std::set<std::string>>> t = {
      {"l1 a", {"b", "c"}},
      {"l2 in", {"not in"}},
      {"l3 b", {"a", "c"}},
      {"l4 c", {"a", "b"}},
      {"l5 +=", {"=", "-=", "*=", "/=", "//=", "%="}},
      {"l6 argswap", {"2,3"}},
      {"l7 b", {"a", "c"}},
      {"l8 c", {"a", "b"}},
      {"l9 =", {"+=", "-=", "*=", "/=", "//=", "%="}},
      {"l10 c", {"a", "b"}},
      {"l11 <", {"<=", ">", ">=", "==", "!="}},
      {"l12 0", {"-2", "-1", "1", "2"}},
      {"l13 c_is_neg", {"a", "b", "c", "not:add"}},
      {"l14 or", {"and"}},
      {"l15 a", {"b", "c", "c_is_neg"}},
      {"l16 is", {"is not"}},
      {"l17 True", {"False"}},
      {"l18 c", {"a", "b", "c_is_neg"}},
      {"l19 c", {"a", "b", "c_is_neg"}},
      {"l20 >", {">=", "<", "<=", "==", "!="}},
      {"l21 1", {"-2", "-1", "0", "2"}},
      {"l22 c", {"a", "b", "c_is_neg"}},
  };
  return t;
}

}  // namespace fig2
