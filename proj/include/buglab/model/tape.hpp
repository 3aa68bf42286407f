#pragma once

// Minimal reverse-mode automatic differentiation over Eigen matrices.
// A Tape owns the forward values and the backward closures; parameters are
// referenced by pointer (value + external gradient accumulator) so large
// weight matrices are never copied onto the tape.
//
// Shape convention: node/entity states are d×N (one column per node).

#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include <Eigen/Dense>

namespace buglab {

using Mat = Eigen::MatrixXd;

struct Var {
  int i = -1;
};

class Tape {
 public:
  const Mat& val(Var v) const { return nodes_[static_cast<size_t>(v.i)].value; }
  Mat& grad(Var v) { return nodes_[static_cast<size_t>(v.i)].grad; }

  Var input(Mat v) { return push(std::move(v), {}); }

  // y = W x, accumulating dL/dW into *gW
  Var linear(const Mat& W, Mat* gW, Var x) {
    Var y = push(W * val(x), {x});
    auto self = y;
    node(y).backward = [this, &W, gW, x, self]() {
      const Mat& g = grad(self);
      if (gW) *gW += g * val(x).transpose();
      grad(x) += W.transpose() * g;
    };
    return y;
  }

  Var add(Var a, Var b) {
    Var y = push(val(a) + val(b), {a, b});
    node(y).backward = [this, a, b, y]() {
      grad(a) += grad(y);
      grad(b) += grad(y);
    };
    return y;
  }

  // y = x .+ b (column-vector bias), accumulating dL/db into *gb
  Var add_bias(Var x, const Mat& b, Mat* gb) {
    Var y = push(val(x).colwise() + Eigen::VectorXd(b.col(0)), {x});
    node(y).backward = [this, gb, x, y]() {
      const Mat& g = grad(y);
      if (gb) gb->col(0) += g.rowwise().sum();
      grad(x) += g;
    };
    return y;
  }

  Var scale(Var x, double c) {
    Var y = push(val(x) * c, {x});
    node(y).backward = [this, x, y, c]() { grad(x) += grad(y) * c; };
    return y;
  }

  Var hadamard(Var x, Mat mask) {
    Var y = push(val(x).cwiseProduct(mask), {x});
    node(y).backward = [this, x, y, m = std::move(mask)]() {
      grad(x) += grad(y).cwiseProduct(m);
    };
    return y;
  }

  // vertical concatenation [a; b]
  Var vcat(Var a, Var b) {
    Mat v(val(a).rows() + val(b).rows(), val(a).cols());
    v.topRows(val(a).rows()) = val(a);
    v.bottomRows(val(b).rows()) = val(b);
    Var y = push(std::move(v), {a, b});
    node(y).backward = [this, a, b, y]() {
      grad(a) += grad(y).topRows(val(a).rows());
      grad(b) += grad(y).bottomRows(val(b).rows());
    };
    return y;
  }

  // horizontal concatenation of several blocks
  Var hcat(const std::vector<Var>& xs) {
    Eigen::Index cols = 0;
    for (Var x : xs) cols += val(x).cols();
    Mat v(val(xs[0]).rows(), cols);
    Eigen::Index at = 0;
    for (Var x : xs) {
      v.middleCols(at, val(x).cols()) = val(x);
      at += val(x).cols();
    }
    Var y = push(std::move(v), xs);
    node(y).backward = [this, xs, y]() {
      Eigen::Index at = 0;
      for (Var x : xs) {
        grad(x) += grad(y).middleCols(at, val(x).cols());
        at += val(x).cols();
      }
    };
    return y;
  }

  Var gather_cols(Var x, std::vector<int> idx) {
    Mat v(val(x).rows(), static_cast<Eigen::Index>(idx.size()));
    for (size_t j = 0; j < idx.size(); ++j) v.col(static_cast<Eigen::Index>(j)) = val(x).col(idx[j]);
    Var y = push(std::move(v), {x});
    node(y).backward = [this, x, y, ix = std::move(idx)]() {
      for (size_t j = 0; j < ix.size(); ++j)
        grad(x).col(ix[j]) += grad(y).col(static_cast<Eigen::Index>(j));
    };
    return y;
  }

  // column-wise max over segments; empty segments yield a zero column
  Var segment_max(Var x, std::vector<int> seg, int nseg) {
    const Mat& m = val(x);
    Mat v = Mat::Zero(m.rows(), nseg);
    std::vector<std::vector<int>> arg(
        static_cast<size_t>(nseg),
        std::vector<int>(static_cast<size_t>(m.rows()), -1));
    Mat best = Mat::Constant(m.rows(), nseg, -std::numeric_limits<double>::infinity());
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      int s = seg[static_cast<size_t>(c)];
      for (Eigen::Index r = 0; r < m.rows(); ++r) {
        if (m(r, c) > best(r, s)) {
          best(r, s) = m(r, c);
          arg[static_cast<size_t>(s)][static_cast<size_t>(r)] = static_cast<int>(c);
        }
      }
    }
    for (int s = 0; s < nseg; ++s)
      for (Eigen::Index r = 0; r < m.rows(); ++r)
        if (arg[static_cast<size_t>(s)][static_cast<size_t>(r)] >= 0) v(r, s) = best(r, s);
    Var y = push(std::move(v), {x});
    node(y).backward = [this, x, y, a = std::move(arg)]() {
      const Mat& g = grad(y);
      Mat& gx = grad(x);
      for (size_t s = 0; s < a.size(); ++s)
        for (size_t r = 0; r < a[s].size(); ++r)
          if (a[s][r] >= 0)
            gx(static_cast<Eigen::Index>(r), a[s][r]) += g(static_cast<Eigen::Index>(r),
                                                           static_cast<Eigen::Index>(s));
    };
    return y;
  }

  // element-wise max across columns -> d×1
  Var rowwise_max(Var x) {
    const Mat& m = val(x);
    Mat v(m.rows(), 1);
    std::vector<int> arg(static_cast<size_t>(m.rows()));
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      Eigen::Index c;
      v(r, 0) = m.row(r).maxCoeff(&c);
      arg[static_cast<size_t>(r)] = static_cast<int>(c);
    }
    Var y = push(std::move(v), {x});
    node(y).backward = [this, x, y, a = std::move(arg)]() {
      for (size_t r = 0; r < a.size(); ++r)
        grad(x)(static_cast<Eigen::Index>(r), a[r]) += grad(y)(static_cast<Eigen::Index>(r), 0);
    };
    return y;
  }

  Var replicate_cols(Var x, int n) {
    Var y = push(val(x).replicate(1, n), {x});
    node(y).backward = [this, x, y]() { grad(x) += grad(y).rowwise().sum(); };
    return y;
  }

  // per-column layer normalization followed by a learned affine transform
  Var layernorm(Var x, const Mat& scale, Mat* gscale, const Mat& offset, Mat* goffset,
                double eps = 1e-5) {
    const Mat& m = val(x);
    Mat normed(m.rows(), m.cols());
    std::vector<double> inv_std(static_cast<size_t>(m.cols()));
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      double mean = m.col(c).mean();
      double var = (m.col(c).array() - mean).square().mean();
      double is = 1.0 / std::sqrt(var + eps);
      inv_std[static_cast<size_t>(c)] = is;
      normed.col(c) = (m.col(c).array() - mean) * is;
    }
    Mat out = (normed.array().colwise() * scale.col(0).array()).colwise() +
              offset.col(0).array();
    Var y = push(std::move(out), {x});
    node(y).backward = [this, x, y, n = std::move(normed), is = std::move(inv_std), &scale,
                        gscale, goffset]() {
      const Mat& g = grad(y);
      if (gscale) gscale->col(0) += g.cwiseProduct(n).rowwise().sum();
      if (goffset) goffset->col(0) += g.rowwise().sum();
      Mat& gx = grad(x);
      const double d = static_cast<double>(n.rows());
      for (Eigen::Index c = 0; c < g.cols(); ++c) {
        Eigen::VectorXd gn = g.col(c).cwiseProduct(scale.col(0));  // dL/dnormed
        double sum_gn = gn.sum();
        double sum_gn_n = gn.dot(n.col(c));
        gx.col(c) +=
            is[static_cast<size_t>(c)] *
            (gn.array() - sum_gn / d - n.col(c).array() * (sum_gn_n / d)).matrix();
      }
    };
    return y;
  }

  Var gelu(Var x) {
    const Mat& m = val(x);
    Mat v = m.unaryExpr([](double t) { return 0.5 * t * (1.0 + std::erf(t * M_SQRT1_2)); });
    Var y = push(std::move(v), {x});
    node(y).backward = [this, x, y]() {
      const Mat& m2 = val(x);
      Mat d = m2.unaryExpr([](double t) {
        double cdf = 0.5 * (1.0 + std::erf(t * M_SQRT1_2));
        double pdf = std::exp(-0.5 * t * t) / std::sqrt(2.0 * M_PI);
        return cdf + t * pdf;
      });
      grad(x) += grad(y).cwiseProduct(d);
    };
    return y;
  }

  Var tanh_(Var x) {
    Var y = push(val(x).array().tanh().matrix(), {x});
    node(y).backward = [this, x, y]() {
      grad(x) += grad(y).cwiseProduct((1.0 - val(y).array().square()).matrix());
    };
    return y;
  }

  Var sigmoid_(Var x) {
    Var y = push((1.0 / (1.0 + (-val(x).array()).exp())).matrix(), {x});
    node(y).backward = [this, x, y]() {
      grad(x) += grad(y).cwiseProduct((val(y).array() * (1.0 - val(y).array())).matrix());
    };
    return y;
  }

  // scores = r^T C  (r: d×1, C: d×K) -> 1×K
  Var dot_scores(Var r, Var c) {
    Var y = push(val(r).transpose() * val(c), {r, c});
    node(y).backward = [this, r, c, y]() {
      const Mat& g = grad(y);  // 1×K
      grad(r) += val(c) * g.transpose();
      grad(c) += val(r) * g;
    };
    return y;
  }

  // max-pooled embedding lookup: out.col(n) = max over E.col(id) for the
  // node's subtoken ids; dL/dE accumulates into *gE at the argmax entries
  Var embedding_pool(const Mat& E, Mat* gE, const std::vector<std::vector<int>>& ids) {
    Eigen::Index d = E.rows();
    Mat v(d, static_cast<Eigen::Index>(ids.size()));
    std::vector<std::vector<int>> arg(ids.size(), std::vector<int>(static_cast<size_t>(d)));
    for (size_t n = 0; n < ids.size(); ++n) {
      for (Eigen::Index r = 0; r < d; ++r) {
        double best = -std::numeric_limits<double>::infinity();
        int bi = ids[n][0];
        for (int id : ids[n])
          if (E(r, id) > best) {
            best = E(r, id);
            bi = id;
          }
        v(r, static_cast<Eigen::Index>(n)) = best;
        arg[n][static_cast<size_t>(r)] = bi;
      }
    }
    Var y = push(std::move(v), {});
    node(y).backward = [this, gE, y, a = std::move(arg)]() {
      if (!gE) return;
      const Mat& g = grad(y);
      for (size_t n = 0; n < a.size(); ++n)
        for (size_t r = 0; r < a[n].size(); ++r)
          (*gE)(static_cast<Eigen::Index>(r), a[n][r]) +=
              g(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(n));
    };
    return y;
  }

  // negative log softmax of scores (1×K) at `target`, optionally restricted
  // to an allowed index set (all indices when empty)
  Var nll(Var scores, int target, std::vector<int> allowed = {}) {
    const Mat& s = val(scores);
    std::vector<int> idx = allowed;
    if (idx.empty())
      for (int k = 0; k < static_cast<int>(s.cols()); ++k) idx.push_back(k);
    double mx = -std::numeric_limits<double>::infinity();
    for (int k : idx) mx = std::max(mx, s(0, k));
    double z = 0;
    for (int k : idx) z += std::exp(s(0, k) - mx);
    double lse = mx + std::log(z);
    Mat loss(1, 1);
    loss(0, 0) = lse - s(0, target);
    Var y = push(std::move(loss), {scores});
    node(y).backward = [this, scores, y, target, ix = std::move(idx), lse]() {
      double g = grad(y)(0, 0);
      Mat& gs = grad(scores);
      for (int k : ix) gs(0, k) += g * std::exp(val(scores)(0, k) - lse);
      gs(0, target) -= g;
    };
    return y;
  }

  // y = s - logsumexp(s) over a 1×K score row
  Var log_softmax(Var scores) {
    const Mat& s = val(scores);
    double mx = s.maxCoeff();
    double lse = mx + std::log((s.array() - mx).exp().sum());
    Var y = push((s.array() - lse).matrix(), {scores});
    node(y).backward = [this, scores, y]() {
      const Mat& g = grad(y);
      double gsum = g.sum();
      grad(scores) += (g.array() - val(y).array().exp() * gsum).matrix();
    };
    return y;
  }

  // softmax probabilities over an allowed index set (inference only)
  static Eigen::VectorXd softmax(const Mat& scores, const std::vector<int>& idx) {
    double mx = -std::numeric_limits<double>::infinity();
    for (int k : idx) mx = std::max(mx, scores(0, k));
    double z = 0;
    for (int k : idx) z += std::exp(scores(0, k) - mx);
    Eigen::VectorXd p(static_cast<Eigen::Index>(idx.size()));
    for (size_t j = 0; j < idx.size(); ++j)
      p(static_cast<Eigen::Index>(j)) = std::exp(scores(0, idx[j]) - mx) / z;
    return p;
  }

  void backward(Var loss) {
    grad(loss).setOnes();
    for (int i = loss.i; i >= 0; --i)
      if (nodes_[static_cast<size_t>(i)].backward) nodes_[static_cast<size_t>(i)].backward();
  }

 private:
  struct TapeNode {
    Mat value;
    Mat grad;
    std::function<void()> backward;
  };
  std::vector<TapeNode> nodes_;

  TapeNode& node(Var v) { return nodes_[static_cast<size_t>(v.i)]; }

  Var push(Mat value, const std::vector<Var>&) {
    TapeNode n;
    n.grad = Mat::Zero(value.rows(), value.cols());
    n.value = std::move(value);
    nodes_.push_back(std::move(n));
    return {static_cast<int>(nodes_.size()) - 1};
  }
};

}  // namespace buglab
