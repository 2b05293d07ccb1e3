#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "psys/error.hpp"

namespace psys {

// One nondeterministic choice: an inclusive integer range tagged with the
// algorithm step that asked for it.
struct ChoicePoint {
  std::string_view tag;
  std::int64_t lo = 0;
  std::int64_t hi = 0;
};

struct WitnessEntry {
  std::string tag;
  std::int64_t lo = 0;
  std::int64_t hi = 0;
  std::int64_t value = 0;
  friend bool operator==(const WitnessEntry&, const WitnessEntry&) = default;
};

// The recorded guess sequence of one run; replaying it reproduces the run
// exactly.
struct Witness {
  std::vector<WitnessEntry> choices;
  friend bool operator==(const Witness&, const Witness&) = default;
};

inline constexpr std::int64_t kDefaultChoiceBudget = 10'000'000;

// Counts choice-tree nodes across one decision; shared by nested searches.
struct Budget {
  std::int64_t remaining = kDefaultChoiceBudget;

  void consume(std::int64_t n = 1) {
    remaining -= n;
    if (remaining < 0) throw BudgetExceededError("choice-tree node budget exhausted");
  }
};

class Chooser {
 public:
  virtual ~Chooser() = default;
  virtual std::int64_t guess(const ChoicePoint& point) = 0;
};

// Depth-first backtracking by re-execution: the recorded path is replayed
// up to the last decision, whose value is advanced in ascending order.
class ExhaustiveChooser : public Chooser {
 public:
  explicit ExhaustiveChooser(Budget& budget) : budget_(&budget) {}

  std::int64_t guess(const ChoicePoint& point) override {
    if (point.lo > point.hi) throw Error("choice point has lo > hi");
    if (cursor_ < path_.size()) {
      return path_[cursor_++].value;
    }
    budget_->consume();
    ++nodes_;
    path_.push_back(WitnessEntry{std::string(point.tag), point.lo, point.hi, point.lo});
    ++cursor_;
    return point.lo;
  }

  // Moves to the next leaf in ascending order; false when the tree is done.
  bool advance() {
    while (!path_.empty() && path_.back().value == path_.back().hi) path_.pop_back();
    if (path_.empty()) return false;
    budget_->consume();
    ++nodes_;
    ++path_.back().value;
    cursor_ = 0;
    return true;
  }

  void rewind() { cursor_ = 0; }

  Witness witness() const { return Witness{path_}; }
  std::uint64_t nodes() const { return nodes_; }

 private:
  Budget* budget_;
  std::vector<WitnessEntry> path_;
  std::size_t cursor_ = 0;
  std::uint64_t nodes_ = 0;
};

// Replays a recorded witness; any disagreement with the requested points
// is an error rather than a wrong answer.
class ReplayChooser : public Chooser {
 public:
  explicit ReplayChooser(const Witness& witness) : witness_(&witness) {}

  std::int64_t guess(const ChoicePoint& point) override {
    if (cursor_ >= witness_->choices.size()) {
      throw ReplayError(ReplayErrorKind::Exhausted,
                        "witness ended before choice '" + std::string(point.tag) + "'");
    }
    const WitnessEntry& e = witness_->choices[cursor_++];
    if (e.value < point.lo || e.value > point.hi || e.tag != point.tag) {
      throw ReplayError(ReplayErrorKind::OutOfRange,
                        "witness entry '" + e.tag + "'=" + std::to_string(e.value) +
                            " does not fit choice '" + std::string(point.tag) + "' [" +
                            std::to_string(point.lo) + "," + std::to_string(point.hi) + "]");
    }
    return e.value;
  }

  std::size_t consumed() const { return cursor_; }

 private:
  const Witness* witness_;
  std::size_t cursor_ = 0;
};

// Seeded uniform chooser for smoke tests; never used for verdicts.
class RandomChooser : public Chooser {
 public:
  explicit RandomChooser(std::uint64_t seed) : rng_(seed) {}

  std::int64_t guess(const ChoicePoint& point) override {
    if (point.lo > point.hi) throw Error("choice point has lo > hi");
    std::uint64_t width = static_cast<std::uint64_t>(point.hi - point.lo) + 1;
    return point.lo + static_cast<std::int64_t>(rng_() % width);
  }

 private:
  std::mt19937_64 rng_;
};

struct ExploreOutcome {
  bool accepted = false;
  std::optional<Witness> witness;
  std::uint64_t leaves = 0;
  std::uint64_t nodes = 0;
};

// Complete backtracking over the choice tree of `proc` in ascending value
// order. Returns the first accepting witness, or reports exhaustion.
// `proc` must be a deterministic function of its guesses.
template <typename Proc>
ExploreOutcome explore(Proc&& proc, Budget& budget) {
  ExhaustiveChooser chooser(budget);
  ExploreOutcome out;
  while (true) {
    chooser.rewind();
    bool accepted = proc(static_cast<Chooser&>(chooser));
    ++out.leaves;
    if (accepted) {
      out.accepted = true;
      out.witness = chooser.witness();
      out.nodes = chooser.nodes();
      return out;
    }
    if (!chooser.advance()) {
      out.nodes = chooser.nodes();
      return out;
    }
  }
}

template <typename Proc>
ExploreOutcome explore(Proc&& proc, std::int64_t budget_nodes = kDefaultChoiceBudget) {
  Budget budget{budget_nodes};
  return explore(static_cast<Proc&&>(proc), budget);
}

// Re-runs `proc` against a recorded witness; the result must reproduce
// the recorded run bit for bit.
template <typename Proc>
bool replay(Proc&& proc, const Witness& witness) {
  ReplayChooser chooser(witness);
  return proc(static_cast<Chooser&>(chooser));
}

inline nlohmann::json witness_to_json(const Witness& w) {
  nlohmann::json out = nlohmann::json::array();
  for (const WitnessEntry& e : w.choices) {
    out.push_back({{"tag", e.tag}, {"lo", e.lo}, {"hi", e.hi}, {"value", e.value}});
  }
  return out;
}

inline Witness witness_from_json(const nlohmann::json& j) {
  Witness w;
  for (const auto& e : j) {
    w.choices.push_back(WitnessEntry{e.at("tag").get<std::string>(), e.at("lo").get<std::int64_t>(),
                                     e.at("hi").get<std::int64_t>(),
                                     e.at("value").get<std::int64_t>()});
  }
  return w;
}

}  // namespace psys
