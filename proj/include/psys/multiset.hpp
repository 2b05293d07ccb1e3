#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <string>

#include "psys/error.hpp"

namespace psys {

// Counted bag of object symbols. Counts are non-negative; a symbol with
// count zero is not stored, so equality is count-wise by construction.
// All mutating operations check for overflow and underflow instead of
// wrapping.
class Multiset {
 public:
  using Map = std::map<std::string, std::int64_t>;

  Multiset() = default;
  Multiset(std::initializer_list<std::pair<std::string, std::int64_t>> init) {
    for (const auto& [name, n] : init) add(name, n);
  }

  std::int64_t count(const std::string& name) const {
    auto it = counts_.find(name);
    return it == counts_.end() ? 0 : it->second;
  }

  bool empty() const { return counts_.empty(); }
  std::size_t distinct() const { return counts_.size(); }

  std::int64_t total() const {
    std::int64_t sum = 0;
    for (const auto& [name, n] : counts_) sum = checked_add(sum, n);
    return sum;
  }

  // Adds delta occurrences of name; delta may be negative. Throws on
  // underflow (NegativeCount) and overflow.
  void add(const std::string& name, std::int64_t delta) {
    if (delta == 0) return;
    auto it = counts_.find(name);
    std::int64_t cur = it == counts_.end() ? 0 : it->second;
    std::int64_t next = checked_add(cur, delta);
    if (next < 0) {
      throw MultisetError(MultisetErrorKind::NegativeCount,
                          "multiset count of '" + name + "' would become negative");
    }
    if (next == 0) {
      if (it != counts_.end()) counts_.erase(it);
    } else if (it != counts_.end()) {
      it->second = next;
    } else {
      counts_.emplace(name, next);
    }
  }

  void add(const Multiset& other) {
    for (const auto& [name, n] : other.counts_) add(name, n);
  }

  // Adds `factor` copies of every entry of other.
  void add_scaled(const Multiset& other, std::int64_t factor) {
    for (const auto& [name, n] : other.counts_) add(name, checked_mul(n, factor));
  }

  void subtract(const Multiset& other) {
    for (const auto& [name, n] : other.counts_) add(name, -n);
  }

  bool includes(const Multiset& other) const {
    for (const auto& [name, n] : other.counts_) {
      if (count(name) < n) return false;
    }
    return true;
  }

  const Map& entries() const { return counts_; }

  friend bool operator==(const Multiset&, const Multiset&) = default;
  friend auto operator<=>(const Multiset& a, const Multiset& b) { return a.counts_ <=> b.counts_; }

  static std::int64_t checked_add(std::int64_t a, std::int64_t b) {
    std::int64_t out = 0;
    if (__builtin_add_overflow(a, b, &out)) {
      throw MultisetError(MultisetErrorKind::Overflow, "multiset count overflow");
    }
    return out;
  }

  static std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
    std::int64_t out = 0;
    if (__builtin_mul_overflow(a, b, &out)) {
      throw MultisetError(MultisetErrorKind::Overflow, "multiset count overflow");
    }
    return out;
  }

 private:
  Map counts_;
};

// Count-wise base + add - remove. Throws NegativeCount if any resulting
// count would drop below zero.
inline Multiset mset_apply(const Multiset& base, const Multiset& add, const Multiset& remove) {
  Multiset out = base;
  out.add(add);
  out.subtract(remove);
  return out;
}

}  // namespace psys
