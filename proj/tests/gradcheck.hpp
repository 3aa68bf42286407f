#pragma once

// Finite-difference gradient checking shared by the unit tests and the
// acceptance gate. Central differences, h scaled per entry, relative error
// |analytic - numeric| / max(|analytic|, |numeric|, 1).

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "buglab/graph/graph.hpp"
#include "buglab/model/network.hpp"
#include "buglab/model/parameters.hpp"

namespace gradcheck {

struct Result {
  double max_rel_err = 0;
  std::string worst_param;
  int entries_checked = 0;
};

enum class LossKind { DetectorBuggy, DetectorClean, Selector };

inline double eval_loss(buglab::ModelParameters& p, const buglab::Vocabulary& vocab,
                        const buglab::CodeGraph& g, LossKind kind,
                        const std::vector<int>& observed, int target) {
  buglab::ModelRunner runner(p, vocab, /*training=*/false);
  buglab::ModelOutput out = runner.run(g);
  buglab::Var loss;
  if (kind == LossKind::Selector)
    loss = buglab::selector_loss(out, observed, target);
  else
    loss = buglab::detector_loss(out, g);
  return out.tape->val(loss)(0, 0);
}

// Checks up to `per_param` randomly chosen entries of every parameter.
inline Result check(buglab::ModelParameters& p, const buglab::Vocabulary& vocab,
                    const buglab::CodeGraph& g, LossKind kind, const std::vector<int>& observed,
                    int target, int per_param = 4, std::uint64_t seed = 1) {
  p.zero_grads();
  {
    buglab::ModelRunner runner(p, vocab, /*training=*/false);
    buglab::ModelOutput out = runner.run(g);
    buglab::Var loss;
    if (kind == LossKind::Selector)
      loss = buglab::selector_loss(out, observed, target);
    else
      loss = buglab::detector_loss(out, g);
    out.tape->backward(loss);
  }

  std::mt19937_64 rng(seed);
  Result res;
  for (const std::string& name : p.names()) {
    buglab::Mat& value = p.value(name);
    const buglab::Mat& analytic = p.grad(name);
    int n = static_cast<int>(value.size());
    int samples = std::min(per_param, n);
    for (int s = 0; s < samples; ++s) {
      Eigen::Index idx = (n <= per_param)
                             ? s
                             : static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(n));
      double orig = value.data()[idx];
      // h small enough that the perturbation rarely crosses an argmax switch
      // of the max-pooling gates (a kink, not a gradient error); roundoff at
      // this h is ~1e-9 relative, far inside the 1e-4 tolerance
      double h = 1e-7 * (1.0 + std::abs(orig));
      value.data()[idx] = orig + h;
      double up = eval_loss(p, vocab, g, kind, observed, target);
      value.data()[idx] = orig - h;
      double down = eval_loss(p, vocab, g, kind, observed, target);
      value.data()[idx] = orig;
      double numeric = (up - down) / (2 * h);
      double a = analytic.data()[idx];
      double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1.0});
      ++res.entries_checked;
      if (rel > res.max_rel_err) {
        res.max_rel_err = rel;
        res.worst_param = name;
      }
    }
  }
  p.zero_grads();
  return res;
}

}  // namespace gradcheck
