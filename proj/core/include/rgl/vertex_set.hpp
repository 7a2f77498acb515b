#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <initializer_list>
#include <vector>

#include "rgl/error.hpp"

namespace rgl {

using VertexId = int;

// Set of vertex ids over a fixed universe [0, n), stored as a bitset.
// Set algebra is word-parallel; membership and insert/erase are O(1).
class VertexSet {
 public:
  VertexSet() = default;

  explicit VertexSet(int universe) : n_(universe), words_((universe + 63) / 64, 0) {
    if (universe < 0) throw Error(ErrorKind::invalid_input, "negative universe");
  }

  static VertexSet full(int universe) {
    VertexSet s(universe);
    for (int v = 0; v < universe; ++v) s.words_[v >> 6] |= (1ULL << (v & 63));
    s.count_ = universe;
    return s;
  }

  static VertexSet of(int universe, std::initializer_list<VertexId> vs) {
    VertexSet s(universe);
    for (VertexId v : vs) s.insert(v);
    return s;
  }

  template <class Container>
  static VertexSet from(int universe, const Container& vs) {
    VertexSet s(universe);
    for (VertexId v : vs) s.insert(v);
    return s;
  }

  int universe() const { return n_; }
  int count() const { return count_; }
  bool empty() const { return count_ == 0; }

  bool contains(VertexId v) const {
    return v >= 0 && v < n_ && (words_[v >> 6] >> (v & 63)) & 1;
  }

  void insert(VertexId v) {
    check_range(v);
    std::uint64_t& w = words_[v >> 6];
    std::uint64_t bit = 1ULL << (v & 63);
    if (!(w & bit)) {
      w |= bit;
      ++count_;
    }
  }

  void erase(VertexId v) {
    check_range(v);
    std::uint64_t& w = words_[v >> 6];
    std::uint64_t bit = 1ULL << (v & 63);
    if (w & bit) {
      w &= ~bit;
      --count_;
    }
  }

  void clear() {
    std::fill(words_.begin(), words_.end(), 0);
    count_ = 0;
  }

  VertexSet& operator|=(const VertexSet& o) {
    check_same(o);
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= o.words_[i];
    recount();
    return *this;
  }

  VertexSet& operator&=(const VertexSet& o) {
    check_same(o);
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= o.words_[i];
    recount();
    return *this;
  }

  VertexSet& operator-=(const VertexSet& o) {
    check_same(o);
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= ~o.words_[i];
    recount();
    return *this;
  }

  friend VertexSet operator|(VertexSet a, const VertexSet& b) { return a |= b; }
  friend VertexSet operator&(VertexSet a, const VertexSet& b) { return a &= b; }
  friend VertexSet operator-(VertexSet a, const VertexSet& b) { return a -= b; }

  bool operator==(const VertexSet& o) const {
    return n_ == o.n_ && words_ == o.words_;
  }

  bool intersects(const VertexSet& o) const {
    check_same(o);
    for (std::size_t i = 0; i < words_.size(); ++i)
      if (words_[i] & o.words_[i]) return true;
    return false;
  }

  int intersection_count(const VertexSet& o) const {
    check_same(o);
    int c = 0;
    for (std::size_t i = 0; i < words_.size(); ++i)
      c += std::popcount(words_[i] & o.words_[i]);
    return c;
  }

  bool is_subset_of(const VertexSet& o) const {
    check_same(o);
    for (std::size_t i = 0; i < words_.size(); ++i)
      if (words_[i] & ~o.words_[i]) return false;
    return true;
  }

  // Smallest member, or -1 when empty.
  VertexId first() const {
    for (std::size_t i = 0; i < words_.size(); ++i)
      if (words_[i]) return static_cast<VertexId>(i * 64 + std::countr_zero(words_[i]));
    return -1;
  }

  std::vector<VertexId> to_vector() const {
    std::vector<VertexId> out;
    out.reserve(count_);
    for_each([&](VertexId v) { out.push_back(v); });
    return out;
  }

  template <class F>
  void for_each(F&& f) const {
    for (std::size_t i = 0; i < words_.size(); ++i) {
      std::uint64_t w = words_[i];
      while (w) {
        int b = std::countr_zero(w);
        f(static_cast<VertexId>(i * 64 + b));
        w &= w - 1;
      }
    }
  }

  // First `k` members in ascending order, as a new set.
  VertexSet take(int k) const {
    VertexSet out(n_);
    for_each([&](VertexId v) {
      if (out.count_ < k) out.insert(v);
    });
    return out;
  }

  const std::vector<std::uint64_t>& words() const { return words_; }

 private:
  void check_range(VertexId v) const {
    if (v < 0 || v >= n_)
      throw Error(ErrorKind::invalid_input,
                  "vertex id " + std::to_string(v) + " outside universe [0," +
                      std::to_string(n_) + ")");
  }
  void check_same(const VertexSet& o) const {
    if (n_ != o.n_)
      throw Error(ErrorKind::invalid_input, "vertex sets over different universes");
  }
  void recount() {
    count_ = 0;
    for (std::uint64_t w : words_) count_ += std::popcount(w);
  }

  int n_ = 0;
  int count_ = 0;
  std::vector<std::uint64_t> words_;
};

}  // namespace rgl
