#pragma once

// Bounded replay pool: every entry may be sampled at most `max_uses` times
// and is evicted afterwards. Sampling from an empty pool returns nullopt
// (the sequential trainer's documented empty-pool behaviour; there is no
// blocking mode in single-threaded operation).

#include <cstdint>
#include <optional>
#include <random>
#include <utility>
#include <vector>

namespace buglab {

template <typename T>
class DataPool {
 public:
  DataPool(int max_uses, std::uint64_t seed) : max_uses_(max_uses), rng_(seed) {}

  void add(T entry) { slots_.push_back({std::move(entry), 0}); }

  // uniform draw over live entries; copies out, never re-draws evicted ones
  std::optional<T> sample() {
    if (slots_.empty()) return std::nullopt;
    size_t i = static_cast<size_t>(rng_() % slots_.size());
    T out = slots_[i].value;
    if (++slots_[i].uses >= max_uses_) {
      std::swap(slots_[i], slots_.back());
      slots_.pop_back();
    }
    return out;
  }

  size_t size() const { return slots_.size(); }
  bool empty() const { return slots_.empty(); }
  void clear() { slots_.clear(); }

 private:
  struct Slot {
    T value;
    int uses;
  };
  std::vector<Slot> slots_;
  int max_uses_;
  std::mt19937_64 rng_;
};

}  // namespace buglab
