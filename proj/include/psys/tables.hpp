#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "psys/compiled.hpp"
#include "psys/error.hpp"

namespace psys {

// Largest number of communications a single rule can perform in one step
// after t steps: every one needs its own membrane, and the m initial inner
// membranes can at most double per step. Exact integer arithmetic.
inline std::int64_t compute_guess_cap(std::int64_t m, std::int64_t t) {
  if (m < 0 || t < 0) throw Error("guess cap arguments must be non-negative");
  if (m == 0) return 0;
  if (t >= 63) throw MultisetError(MultisetErrorKind::Overflow, "guess cap overflows 64 bits");
  std::int64_t pow = std::int64_t{1} << t;
  std::int64_t out = 0;
  if (__builtin_mul_overflow(m, pow, &out)) {
    throw MultisetError(MultisetErrorKind::Overflow, "guess cap overflows 64 bits");
  }
  return out;
}

// Guessed communication counts per (rule, step). Only send-in/send-out
// rules across the skin boundary ever get entries; the inner simulation
// decrements them and may drive them negative before the final check.
struct InteractionTable {
  std::map<std::pair<std::size_t, std::int64_t>, std::int64_t> entries;

  std::int64_t get(std::size_t rule, std::int64_t t) const {
    auto it = entries.find({rule, t});
    return it == entries.end() ? 0 : it->second;
  }
  void set(std::size_t rule, std::int64_t t, std::int64_t value) { entries[{rule, t}] = value; }

  friend bool operator==(const InteractionTable&, const InteractionTable&) = default;
};

// Per (object, step) count of skin objects no rule touched. Only positive
// counts are stored; an absent entry reads as zero.
struct UnusedTable {
  std::map<std::pair<std::string, std::int64_t>, std::int64_t> entries;

  std::int64_t get(const std::string& object, std::int64_t t) const {
    auto it = entries.find({object, t});
    return it == entries.end() ? 0 : it->second;
  }
  void set(const std::string& object, std::int64_t t, std::int64_t value) {
    if (value != 0) entries[{object, t}] = value;
    else entries.erase({object, t});
  }

  friend bool operator==(const UnusedTable&, const UnusedTable&) = default;
};

// Flat working form of both tables for the simulation loops.
struct DenseTables {
  std::int64_t steps = 0;   // rows 0..steps-1
  std::size_t rule_count = 0;
  std::size_t object_count = 0;
  std::vector<std::int64_t> interaction;  // [rule * steps + t]
  std::vector<std::uint8_t> written;      // entry was produced by the outer run
  std::vector<std::int64_t> unused;       // [object * steps + t]

  DenseTables() = default;
  explicit DenseTables(const CompiledSystem& cs)
      : steps(cs.bound),
        rule_count(cs.rules.size()),
        object_count(cs.object_count()),
        interaction(rule_count * static_cast<std::size_t>(steps), 0),
        written(rule_count * static_cast<std::size_t>(steps), 0),
        unused(object_count * static_cast<std::size_t>(steps), 0) {}

  std::size_t ti(std::size_t rule, std::int64_t t) const {
    return rule * static_cast<std::size_t>(steps) + static_cast<std::size_t>(t);
  }
  std::size_t ui(std::size_t object, std::int64_t t) const {
    return object * static_cast<std::size_t>(steps) + static_cast<std::size_t>(t);
  }

  void set_interaction(std::size_t rule, std::int64_t t, std::int64_t v) {
    interaction[ti(rule, t)] = v;
    written[ti(rule, t)] = 1;
  }

  bool all_written_zero() const {
    for (std::size_t i = 0; i < interaction.size(); ++i) {
      if (written[i] && interaction[i] != 0) return false;
    }
    return true;
  }

  friend bool operator==(const DenseTables&, const DenseTables&) = default;
};

inline InteractionTable interaction_table(const DenseTables& dense) {
  InteractionTable out;
  for (std::size_t r = 0; r < dense.rule_count; ++r) {
    for (std::int64_t t = 0; t < dense.steps; ++t) {
      if (dense.written[dense.ti(r, t)]) out.set(r, t, dense.interaction[dense.ti(r, t)]);
    }
  }
  return out;
}

inline UnusedTable unused_table(const DenseTables& dense, const CompiledSystem& cs) {
  UnusedTable out;
  for (std::size_t o = 0; o < dense.object_count; ++o) {
    for (std::int64_t t = 0; t < dense.steps; ++t) {
      if (dense.unused[dense.ui(o, t)] > 0) out.set(cs.objects[o], t, dense.unused[dense.ui(o, t)]);
    }
  }
  return out;
}

// Rebuilds the dense working form from the public tables.
inline DenseTables dense_tables(const CompiledSystem& cs, const InteractionTable& interaction,
                                const UnusedTable& unused) {
  DenseTables out(cs);
  for (const auto& [key, value] : interaction.entries) {
    out.set_interaction(key.first, key.second, value);
  }
  for (const auto& [key, value] : unused.entries) {
    out.unused[out.ui(static_cast<std::size_t>(cs.object_ids.at(key.first)), key.second)] = value;
  }
  return out;
}

inline nlohmann::json table_dump_json(const InteractionTable& interaction,
                                      const UnusedTable& unused) {
  nlohmann::json t = nlohmann::json::array();
  for (const auto& [key, value] : interaction.entries) {
    t.push_back({{"rule", key.first}, {"t", key.second}, {"count", value}});
  }
  nlohmann::json u = nlohmann::json::array();
  for (const auto& [key, value] : unused.entries) {
    u.push_back({{"object", key.first}, {"t", key.second}, {"count", value}});
  }
  return nlohmann::json{{"T", t}, {"U", u}};
}

}  // namespace psys
