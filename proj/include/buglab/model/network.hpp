#pragma once

// Detector/selector network: max-pooled subtoken embeddings, an 8-layer
// residual message-passing encoder, a pointer-style location head, and
// per-rewrite scoring heads. One Tape per processed graph.
//
// Message passing (per layer t): for every edge (i -> j) of type k (the 12
// relations plus their reversed variants), m = W_k^t [h_i; h_j]; messages are
// aggregated at the edge source by element-wise max (zero when a node has no
// outgoing edges); the node update is tanh(W_f LayerNorm(GELU(m)) + b_f).
// Layers 4 and 8 read the concatenation of their block input and the
// previous layer's output (residual blocks of four layers).

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "buglab/graph/graph.hpp"
#include "buglab/model/parameters.hpp"
#include "buglab/model/tape.hpp"
#include "buglab/model/vocab.hpp"

namespace buglab {

struct GroundTruthError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Preprocessed graph: per-node subtokens, per-type edge lists, and the
// candidate/location index. Location groups collect the candidates that
// share an anchor node, in first-appearance order.
struct GraphTensors {
  int num_nodes = 0;
  std::vector<std::vector<int>> subtokens;
  std::vector<std::vector<int>> edge_src;  // [kNumEdgeTypes]
  std::vector<std::vector<int>> edge_dst;

  struct LocationGroup {
    int node_id = 0;
    std::vector<int> cand_index;  // indices into graph.candidates
  };
  std::vector<LocationGroup> groups;
  std::vector<int> cand_group;  // candidate -> group
  std::vector<int> cand_pos;    // candidate -> position within group
};

inline GraphTensors preprocess_graph(const CodeGraph& g, const Vocabulary& vocab) {
  GraphTensors t;
  t.num_nodes = static_cast<int>(g.nodes.size());
  t.subtokens.reserve(g.nodes.size());
  for (const GraphNode& n : g.nodes) t.subtokens.push_back(vocab.encode(n.label));
  t.edge_src.resize(kNumEdgeTypes);
  t.edge_dst.resize(kNumEdgeTypes);
  for (const GraphEdge& e : g.edges) {
    int k = static_cast<int>(e.rel);
    t.edge_src[static_cast<size_t>(k)].push_back(e.src);
    t.edge_dst[static_cast<size_t>(k)].push_back(e.dst);
    t.edge_src[static_cast<size_t>(k + kNumRelations)].push_back(e.dst);
    t.edge_dst[static_cast<size_t>(k + kNumRelations)].push_back(e.src);
  }
  for (size_t c = 0; c < g.candidates.size(); ++c) {
    int anchor = g.candidates[c].node_id;
    int gi = -1;
    for (size_t i = 0; i < t.groups.size(); ++i)
      if (t.groups[i].node_id == anchor) {
        gi = static_cast<int>(i);
        break;
      }
    if (gi < 0) {
      gi = static_cast<int>(t.groups.size());
      t.groups.push_back({anchor, {}});
    }
    t.cand_group.push_back(gi);
    t.cand_pos.push_back(static_cast<int>(t.groups[static_cast<size_t>(gi)].cand_index.size()));
    t.groups[static_cast<size_t>(gi)].cand_index.push_back(static_cast<int>(c));
  }
  return t;
}

// One forward pass over one graph. Keeps the tape alive for backward().
struct ModelOutput {
  std::shared_ptr<Tape> tape;
  GraphTensors tensors;
  Var states;                   // H^(8), d×N
  Var loc_scores;               // 1×(G+1); column G is NoBug
  std::vector<Var> rew_scores;  // per group, 1×K_g
  Var logp_joint;               // 1×(C+1); column C is NoBug

  int nobug_column() const { return static_cast<int>(tensors.groups.size()); }

  // NoBug's column in the joint (per-candidate) distribution
  int nobug_column_joint() const { return static_cast<int>(tensors.cand_group.size()); }

  Eigen::VectorXd p_loc() const {
    std::vector<int> all(tensors.groups.size() + 1);
    for (size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
    return Tape::softmax(tape->val(loc_scores), all);
  }
  double p_nobug() const { return p_loc()(static_cast<Eigen::Index>(tensors.groups.size())); }

  Eigen::VectorXd p_rew(int group) const {
    const Mat& s = tape->val(rew_scores[static_cast<size_t>(group)]);
    std::vector<int> all(static_cast<size_t>(s.cols()));
    for (size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
    return Tape::softmax(s, all);
  }

  // joint probabilities over candidates plus NoBug (last entry)
  Eigen::VectorXd p_joint() const {
    const Mat& lp = tape->val(logp_joint);
    Eigen::VectorXd p(lp.cols());
    for (Eigen::Index i = 0; i < lp.cols(); ++i) p(i) = std::exp(lp(0, i));
    return p;
  }
};

class ModelRunner {
 public:
  ModelRunner(ModelParameters& params, const Vocabulary& vocab, bool training = false,
              std::uint64_t dropout_seed = 0)
      : p_(params), vocab_(vocab), training_(training), rng_(dropout_seed) {}

  ModelOutput run(const CodeGraph& g) {
    ModelOutput out;
    out.tape = std::make_shared<Tape>();
    out.tensors = preprocess_graph(g, vocab_);
    Tape& tape = *out.tape;
    const GraphTensors& T = out.tensors;
    const int d = p_.config.hidden_dim;

    Var h0 = tape.embedding_pool(p_.value("embedding"), &p_.grad("embedding"), T.subtokens);
    Var block_input = h0;  // input of the current residual block
    Var h = h0;
    for (int t = 1; t <= kNumLayers; ++t) {
      Var x = h;
      if (t == 4 || t == 8) x = tape.vcat(block_input, h);
      h = layer(tape, T, t, x);
      if (training_ && p_.config.dropout > 0 && t < kNumLayers)
        h = tape.hadamard(h, dropout_mask(d, T.num_nodes));
      if (t == 4) block_input = h;
    }
    out.states = h;

    build_heads(tape, g, out);
    return out;
  }

 private:
  ModelParameters& p_;
  const Vocabulary& vocab_;
  bool training_;
  std::mt19937_64 rng_;

  Mat dropout_mask(int rows, int cols) {
    const double keep = 1.0 - p_.config.dropout;
    Mat m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      double u = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
      m.data()[i] = (u < keep) ? 1.0 / keep : 0.0;
    }
    return m;
  }

  Var layer(Tape& tape, const GraphTensors& T, int t, Var x) {
    const std::string prefix = "layer" + std::to_string(t) + "/";
    std::vector<Var> messages;
    std::vector<int> segments;
    for (int k = 0; k < kNumEdgeTypes; ++k) {
      const auto& src = T.edge_src[static_cast<size_t>(k)];
      if (src.empty()) continue;
      const auto& dst = T.edge_dst[static_cast<size_t>(k)];
      Var pair = tape.vcat(tape.gather_cols(x, src), tape.gather_cols(x, dst));
      const std::string wname = prefix + "rel" + std::to_string(k) + "/W";
      messages.push_back(tape.linear(p_.value(wname), &p_.grad(wname), pair));
      segments.insert(segments.end(), src.begin(), src.end());
    }
    Var agg;
    if (messages.empty()) {
      agg = tape.input(Mat::Zero(p_.config.hidden_dim, T.num_nodes));
    } else {
      agg = tape.segment_max(tape.hcat(messages), std::move(segments), T.num_nodes);
    }
    Var normed = tape.layernorm(tape.gelu(agg), p_.value(prefix + "ln_scale"),
                                &p_.grad(prefix + "ln_scale"), p_.value(prefix + "ln_offset"),
                                &p_.grad(prefix + "ln_offset"));
    Var pre = tape.add_bias(tape.linear(p_.value(prefix + "W_f"), &p_.grad(prefix + "W_f"), normed),
                            p_.value(prefix + "b_f"), &p_.grad(prefix + "b_f"));
    return tape.tanh_(pre);
  }

  Var embed_column(Tape& tape, const std::string& table, int index) {
    return tape.embedding_pool(p_.value(table), &p_.grad(table), {{index}});
  }

  void build_heads(Tape& tape, const CodeGraph& g, ModelOutput& out) {
    const GraphTensors& T = out.tensors;
    const int G = static_cast<int>(T.groups.size());

    std::vector<int> group_nodes;
    for (const auto& grp : T.groups) group_nodes.push_back(grp.node_id);
    Var reps = G > 0 ? tape.gather_cols(out.states, group_nodes) : Var{};
    Var nobug = embed_column(tape, "nobug", 0);
    Var all_reps = G > 0 ? tape.hcat({reps, nobug}) : nobug;

    Var q = tape.rowwise_max(tape.linear(p_.value("loc/W_q"), &p_.grad("loc/W_q"), all_reps));
    Var with_query = tape.vcat(all_reps, tape.replicate_cols(q, G + 1));
    Var hidden = tape.sigmoid_(tape.linear(p_.value("loc/W1"), &p_.grad("loc/W1"), with_query));
    out.loc_scores = tape.linear(p_.value("loc/W2"), &p_.grad("loc/W2"), hidden);

    for (int gi = 0; gi < G; ++gi) {
      const auto& grp = T.groups[static_cast<size_t>(gi)];
      Var r = tape.gather_cols(out.states, {grp.node_id});
      std::vector<Var> scores;
      for (int ci : grp.cand_index) {
        const CandidateEntry& cand = g.candidates[static_cast<size_t>(ci)];
        scores.push_back(candidate_score(tape, out, r, cand));
      }
      out.rew_scores.push_back(tape.hcat(scores));
    }

    // joint log-probabilities: log p_loc(g) + log p_rew(k|g); NoBug last
    Var logp_loc = tape.log_softmax(out.loc_scores);
    std::vector<Var> group_logp_rew;
    for (int gi = 0; gi < G; ++gi)
      group_logp_rew.push_back(tape.log_softmax(out.rew_scores[static_cast<size_t>(gi)]));
    std::vector<Var> joint;
    for (size_t ci = 0; ci < g.candidates.size(); ++ci) {
      int gi = T.cand_group[ci];
      Var lg = tape.gather_cols(logp_loc, {gi});
      Var lr = tape.gather_cols(group_logp_rew[static_cast<size_t>(gi)], {T.cand_pos[ci]});
      joint.push_back(tape.add(lg, lr));
    }
    joint.push_back(tape.gather_cols(logp_loc, {G}));
    out.logp_joint = tape.hcat(joint);
  }

  // score of a single candidate rewrite anchored at location state r (d×1)
  Var candidate_score(Tape& tape, ModelOutput& out, Var r, const CandidateEntry& cand) {
    switch (cand.rewrite.rule.kind) {
      case RuleKind::VarMisuse: {
        // r_l . r_sigma with the replacement symbol's final state
        Var sym = tape.gather_cols(out.states, {cand.meta.at(0)});
        return tape.dot_scores(r, sym);
      }
      case RuleKind::ArgSwap: {
        // two-layer MLP over [r_call; r_arg1; r_arg2]
        Var a1 = tape.gather_cols(out.states, {cand.meta.at(0)});
        Var a2 = tape.gather_cols(out.states, {cand.meta.at(1)});
        Var x = tape.vcat(tape.vcat(r, a1), a2);
        Var hidden = tape.gelu(
            tape.add_bias(tape.linear(p_.value("argswap/W1"), &p_.grad("argswap/W1"), x),
                          p_.value("argswap/b1"), &p_.grad("argswap/b1")));
        return tape.add_bias(
            tape.linear(p_.value("argswap/W2"), &p_.grad("argswap/W2"), hidden),
            p_.value("argswap/b2"), &p_.grad("argswap/b2"));
      }
      case RuleKind::WrongLiteral:
        return tape.dot_scores(
            r, embed_column(tape, "lit_embed", literal_payload_index(cand.rewrite.rule.payload())));
      default:
        // operator-class rewrites and negation toggles share the operator table
        return tape.dot_scores(
            r, embed_column(tape, "op_embed", operator_payload_index(cand.rewrite.rule.payload())));
    }
  }
};

// ---------------------------------------------------------------------------

// detector loss: -log p_loc(l) - log p_rew(inverse|l) for buggy samples,
// -log p_loc(NoBug) for clean ones
inline Var detector_loss(ModelOutput& out, const CodeGraph& g) {
  Tape& tape = *out.tape;
  if (!g.target) return tape.nll(out.loc_scores, out.nobug_column());
  int ci = -1;
  for (size_t i = 0; i < g.candidates.size(); ++i)
    if (g.candidates[i].rewrite == *g.target) {
      ci = static_cast<int>(i);
      break;
    }
  if (ci < 0)
    throw GroundTruthError("ground-truth rewrite is not among the graph's candidates");
  int gi = out.tensors.cand_group[static_cast<size_t>(ci)];
  Var loc = tape.nll(out.loc_scores, gi);
  Var rew = tape.nll(out.rew_scores[static_cast<size_t>(gi)],
                     out.tensors.cand_pos[static_cast<size_t>(ci)]);
  return tape.add(loc, rew);
}

// selector loss: joint NLL of `target_candidate` restricted to the observed
// candidate set (indices into g.candidates)
inline Var selector_loss(ModelOutput& out, const std::vector<int>& observed,
                         int target_candidate) {
  return out.tape->nll(out.logp_joint, target_candidate, observed);
}

// epsilon-greedy sample from the selector's joint distribution over
// candidates plus NoBug; returns a candidate index, or -1 for NoBug
inline int sample_rewrite(const ModelOutput& out, std::mt19937_64& rng, double epsilon) {
  Eigen::VectorXd p = out.p_joint();
  const auto n = p.size();
  double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  int pick;
  if (u < epsilon) {
    pick = static_cast<int>(rng() % static_cast<std::uint64_t>(n));
  } else {
    double r = static_cast<double>(rng() >> 11) * 0x1.0p-53 * p.sum();
    pick = static_cast<int>(n) - 1;
    for (Eigen::Index i = 0; i < n; ++i) {
      r -= p(i);
      if (r <= 0) {
        pick = static_cast<int>(i);
        break;
      }
    }
  }
  return pick == static_cast<int>(n) - 1 ? -1 : pick;
}

}  // namespace buglab
