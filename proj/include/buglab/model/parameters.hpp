#pragma once

// Named parameter store for the detector/selector networks, with
// deterministic ordering, seeded initialization, and a binary checkpoint
// format (magic "BGLB"). Gradients are accumulated alongside each value.

#include <cstdint>
#include <cstring>
#include <fstream>
#include <random>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "buglab/graph/graph.hpp"
#include "buglab/model/tape.hpp"

namespace buglab {

inline constexpr int kNumLayers = 8;
// forward + reversed variant per relation kind
inline constexpr int kNumEdgeTypes = 2 * kNumRelations;

// operator payloads scored against learned operator embeddings
inline const std::vector<std::string>& operator_payloads() {
  static const std::vector<std::string> v = {
      "=",  "+=", "-=",     "*=", "/=", "//=",    "%=",      "+",        "-",
      "*",  "/",  "//",     "%",  "<",  "<=",     ">",       ">=",       "==",
      "!=", "in", "not in", "is", "is not",       "and",     "or",
      "not:add", "not:remove", "-:add", "-:remove"};
  return v;
}

inline const std::vector<std::string>& literal_payloads() {
  static const std::vector<std::string> v = {"-2", "-1", "0", "1", "2", "True", "False"};
  return v;
}

inline int operator_payload_index(const std::string& payload) {
  const auto& tbl = operator_payloads();
  for (size_t i = 0; i < tbl.size(); ++i)
    if (tbl[i] == payload) return static_cast<int>(i);
  throw std::runtime_error("unknown operator payload: " + payload);
}

inline int literal_payload_index(const std::string& payload) {
  const auto& tbl = literal_payloads();
  for (size_t i = 0; i < tbl.size(); ++i)
    if (tbl[i] == payload) return static_cast<int>(i);
  throw std::runtime_error("unknown literal payload: " + payload);
}

struct ModelConfig {
  int hidden_dim = 256;
  int vocab_size = 15000;
  double dropout = 0.2;
  std::uint64_t seed = 0;

  bool operator==(const ModelConfig& o) const {
    return hidden_dim == o.hidden_dim && vocab_size == o.vocab_size;
  }
};

struct CheckpointError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// layers 4 and 8 consume the concatenated [initial, previous] states
inline int layer_input_dim(int layer, int d) { return (layer == 4 || layer == 8) ? 2 * d : d; }

class ModelParameters {
 public:
  ModelConfig config;

  ModelParameters() = default;

  explicit ModelParameters(const ModelConfig& cfg) : config(cfg) {
    const int d = cfg.hidden_dim;
    define("embedding", d, cfg.vocab_size);
    for (int t = 1; t <= kNumLayers; ++t) {
      int in = layer_input_dim(t, d);
      for (int k = 0; k < kNumEdgeTypes; ++k)
        define("layer" + std::to_string(t) + "/rel" + std::to_string(k) + "/W", d, 2 * in);
      define("layer" + std::to_string(t) + "/W_f", d, d);
      define("layer" + std::to_string(t) + "/b_f", d, 1);
      define("layer" + std::to_string(t) + "/ln_scale", d, 1);
      define("layer" + std::to_string(t) + "/ln_offset", d, 1);
    }
    define("loc/W_q", d, d);
    define("loc/W1", d, 2 * d);
    define("loc/W2", 1, d);
    define("nobug", d, 1);
    define("op_embed", d, static_cast<int>(operator_payloads().size()));
    define("lit_embed", d, static_cast<int>(literal_payloads().size()));
    define("argswap/W1", d, 3 * d);
    define("argswap/b1", d, 1);
    define("argswap/W2", 1, d);
    define("argswap/b2", 1, 1);
    initialize(cfg.seed);
  }

  const std::vector<std::string>& names() const { return names_; }

  const Mat& value(const std::string& name) const { return values_[at(name)]; }
  Mat& value(const std::string& name) { return values_[at(name)]; }
  Mat& grad(const std::string& name) { return grads_[at(name)]; }
  const Mat& grad(const std::string& name) const { return grads_[at(name)]; }

  Mat& value_at(size_t i) { return values_[i]; }
  Mat& grad_at(size_t i) { return grads_[i]; }
  size_t count() const { return values_.size(); }

  void zero_grads() {
    for (Mat& g : grads_) g.setZero();
  }

  long parameter_count() const {
    long n = 0;
    for (const Mat& v : values_) n += static_cast<long>(v.size());
    return n;
  }

  double grad_norm() const {
    double sq = 0;
    for (const Mat& g : grads_) sq += g.squaredNorm();
    return std::sqrt(sq);
  }

  void save(const std::string& path) const {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw CheckpointError("cannot open checkpoint for writing: " + path);
    os.write("BGLB", 4);
    write_u64(os, 1);  // version
    write_u64(os, static_cast<std::uint64_t>(config.hidden_dim));
    write_u64(os, static_cast<std::uint64_t>(config.vocab_size));
    write_u64(os, names_.size());
    for (size_t i = 0; i < names_.size(); ++i) {
      write_u64(os, names_[i].size());
      os.write(names_[i].data(), static_cast<std::streamsize>(names_[i].size()));
      write_u64(os, static_cast<std::uint64_t>(values_[i].rows()));
      write_u64(os, static_cast<std::uint64_t>(values_[i].cols()));
      os.write(reinterpret_cast<const char*>(values_[i].data()),
               static_cast<std::streamsize>(sizeof(double) * static_cast<size_t>(values_[i].size())));
    }
    if (!os) throw CheckpointError("short write while saving checkpoint: " + path);
  }

  static ModelParameters load(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw CheckpointError("cannot open checkpoint: " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "BGLB", 4) != 0)
      throw CheckpointError("bad checkpoint magic: " + path);
    if (read_u64(is) != 1) throw CheckpointError("unsupported checkpoint version");
    ModelParameters p;
    p.config.hidden_dim = static_cast<int>(read_u64(is));
    p.config.vocab_size = static_cast<int>(read_u64(is));
    std::uint64_t n = read_u64(is);
    for (std::uint64_t i = 0; i < n; ++i) {
      std::uint64_t len = read_u64(is);
      std::string name(len, '\0');
      is.read(name.data(), static_cast<std::streamsize>(len));
      auto rows = static_cast<Eigen::Index>(read_u64(is));
      auto cols = static_cast<Eigen::Index>(read_u64(is));
      Mat m(rows, cols);
      is.read(reinterpret_cast<char*>(m.data()),
              static_cast<std::streamsize>(sizeof(double) * static_cast<size_t>(m.size())));
      if (!is) throw CheckpointError("truncated checkpoint: " + path);
      p.index_.emplace(name, p.values_.size());
      p.names_.push_back(std::move(name));
      p.grads_.push_back(Mat::Zero(rows, cols));
      p.values_.push_back(std::move(m));
    }
    return p;
  }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, size_t> index_;
  std::vector<Mat> values_;
  std::vector<Mat> grads_;

  size_t at(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw std::runtime_error("unknown parameter: " + name);
    return it->second;
  }

  void define(const std::string& name, int rows, int cols) {
    index_.emplace(name, values_.size());
    names_.push_back(name);
    values_.push_back(Mat::Zero(rows, cols));
    grads_.push_back(Mat::Zero(rows, cols));
  }

  void initialize(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    for (size_t i = 0; i < values_.size(); ++i) {
      Mat& m = values_[i];
      if (names_[i].find("ln_scale") != std::string::npos) {
        m.setOnes();
        continue;
      }
      if (names_[i].find("ln_offset") != std::string::npos ||
          names_[i].find("b_f") != std::string::npos ||
          names_[i].find("/b") != std::string::npos) {
        m.setZero();
        continue;
      }
      double a = std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols()));
      std::uniform_real_distribution<double> dist(-a, a);
      for (Eigen::Index j = 0; j < m.size(); ++j) m.data()[j] = dist(rng);
    }
  }

  static void write_u64(std::ostream& os, std::uint64_t v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(v));
  }
  static std::uint64_t read_u64(std::istream& is) {
    std::uint64_t v = 0;
    is.read(reinterpret_cast<char*>(&v), sizeof(v));
    if (!is) throw CheckpointError("truncated checkpoint header");
    return v;
  }
};

}  // namespace buglab
