#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <vector>

#include "psys/choice.hpp"
#include "psys/compiled.hpp"
#include "psys/tables.hpp"

namespace psys {

// One inner membrane awaiting simulation: its contents, label, charge and
// the first step it acts in. Division children are pushed with the step
// after their creation, since they spend the creation step coming into
// existence; a child born in the final step is popped with no steps left
// and only gets the halting check.
struct StackEntry {
  std::vector<std::int64_t> contents;
  int label = -1;
  Charge charge = Charge::Neutral;
  std::int64_t t_push = 0;
};

struct InnerStack {
  std::vector<StackEntry> entries;
  std::size_t max_size = 0;

  void push(StackEntry entry) {
    entries.push_back(std::move(entry));
    max_size = std::max(max_size, entries.size());
  }
  StackEntry pop() {
    StackEntry out = std::move(entries.back());
    entries.pop_back();
    return out;
  }
  bool empty() const { return entries.empty(); }
  std::size_t size() const { return entries.size(); }
};

struct QueryStats {
  std::size_t max_stack = 0;
  std::size_t stack_limit = 0;
  std::uint64_t stack_bound_violations = 0;
  std::uint64_t branches = 0;
  std::uint64_t positive_with_nonzero_table = 0;  // must stay zero
};

inline InnerStack init_stack(const CompiledSystem& cs) {
  InnerStack stack;
  for (const CompiledSystem::InnerInit& init : cs.inner) {
    stack.push(StackEntry{init.contents, init.label, Charge::Neutral, 0});
  }
  return stack;
}

namespace detail {

inline bool inner_rule_exists(const CompiledSystem& cs,
                              const std::map<int, std::vector<std::size_t>>& by_label, int label,
                              Charge charge, int trigger) {
  auto it = by_label.find(label);
  if (it == by_label.end()) return false;
  for (std::size_t r : it->second) {
    const CompiledRule& rule = cs.rules[r];
    if (rule.charge == charge && rule.trigger == trigger) return true;
  }
  return false;
}

}  // namespace detail

// Simulates one popped membrane from its first step through step t,
// guessing one 0/1 application per eligible blocking rule (division first,
// then send-in, then send-out) and a count per eligible evolution rule.
// Each applied communication discharges one guessed interaction from the
// table; driving an entry negative can never reach an all-zero table again,
// so the branch dies on the spot. After its last step the membrane must be
// unable to act, where a send-in only counts as enabled if the outer run
// left an idle copy of its trigger at step t. Returns false when the
// branch is rejected.
inline bool simulate_inner_membrane(const CompiledSystem& cs, const StackEntry& entry,
                                    std::int64_t t, DenseTables& tables, Chooser& chooser,
                                    InnerStack& stack) {
  std::vector<std::int64_t> w = entry.contents;
  Charge charge = entry.charge;
  const int label = entry.label;

  auto rules_of = [&](const std::map<int, std::vector<std::size_t>>& by_label)
      -> const std::vector<std::size_t>* {
    auto it = by_label.find(label);
    return it == by_label.end() ? nullptr : &it->second;
  };
  const auto* divides = rules_of(cs.divide_by_label);
  const auto* sendins = rules_of(cs.sendin_by_label);
  const auto* sendouts = rules_of(cs.sendout_by_label);
  const auto* evolves = rules_of(cs.evolve_by_label);

  for (std::int64_t step = entry.t_push; step <= t; ++step) {
    const std::vector<std::int64_t> w0 = w;
    const Charge charge0 = charge;
    std::vector<std::int64_t> removed(cs.object_count(), 0);
    std::vector<std::int64_t> added(cs.object_count(), 0);
    bool blocked = false;
    Charge next_charge = charge0;
    std::optional<std::size_t> division;

    if (divides) {
      for (std::size_t r : *divides) {
        if (blocked) break;
        const CompiledRule& rule = cs.rules[r];
        if (rule.charge != charge0 || w0[rule.trigger] == 0) continue;
        if (chooser.guess(ChoicePoint{"alg2.divide", 0, 1}) == 0) continue;
        blocked = true;
        division = r;
        removed[rule.trigger] += 1;
        added[rule.left_obj] += 1;
        next_charge = rule.left_charge;
      }
    }
    if (sendins) {
      for (std::size_t r : *sendins) {
        if (blocked) break;
        const CompiledRule& rule = cs.rules[r];
        if (rule.charge != charge0) continue;
        if (chooser.guess(ChoicePoint{"alg2.sendin", 0, 1}) == 0) continue;
        blocked = true;
        if (--tables.interaction[tables.ti(r, step)] < 0) return false;
        tables.written[tables.ti(r, step)] = 1;
        added[rule.product] += 1;
        next_charge = rule.new_charge;
      }
    }
    if (sendouts) {
      for (std::size_t r : *sendouts) {
        if (blocked) break;
        const CompiledRule& rule = cs.rules[r];
        if (rule.charge != charge0 || w0[rule.trigger] == 0) continue;
        if (chooser.guess(ChoicePoint{"alg2.sendout", 0, 1}) == 0) continue;
        blocked = true;
        if (--tables.interaction[tables.ti(r, step)] < 0) return false;
        tables.written[tables.ti(r, step)] = 1;
        removed[rule.trigger] += 1;
        next_charge = rule.new_charge;
      }
    }
    if (evolves) {
      for (std::size_t r : *evolves) {
        const CompiledRule& rule = cs.rules[r];
        if (rule.charge != charge0 || w0[rule.trigger] == 0) continue;
        std::int64_t v = chooser.guess(ChoicePoint{"alg2.evolve", 0, w0[rule.trigger]});
        removed[rule.trigger] += v;
        if (removed[rule.trigger] > w0[rule.trigger]) return false;
        for (const auto& [obj, n] : rule.products) {
          added[obj] = Multiset::checked_add(added[obj], Multiset::checked_mul(n, v));
        }
      }
    }

    for (std::size_t obj = 0; obj < cs.object_count(); ++obj) {
      w[obj] = Multiset::checked_add(w0[obj] - removed[obj], added[obj]);
    }
    charge = next_charge;

    // maximal parallelism inside this membrane, plus the idle-pair check:
    // a skin object the outer run left untouched must not have found this
    // membrane free and receptive
    for (std::size_t obj = 0; obj < cs.object_count(); ++obj) {
      if (w0[obj] - removed[obj] <= 0) continue;
      int o = static_cast<int>(obj);
      if (detail::inner_rule_exists(cs, cs.evolve_by_label, label, charge0, o)) return false;
      if (!blocked && (detail::inner_rule_exists(cs, cs.sendout_by_label, label, charge0, o) ||
                       detail::inner_rule_exists(cs, cs.divide_by_label, label, charge0, o))) {
        return false;
      }
    }
    if (!blocked && sendins) {
      for (std::size_t r : *sendins) {
        const CompiledRule& rule = cs.rules[r];
        if (rule.charge == charge0 && tables.unused[tables.ui(rule.trigger, step)] > 0) {
          return false;
        }
      }
    }

    if (division) {
      const CompiledRule& rule = cs.rules[*division];
      StackEntry sibling;
      sibling.contents = w;
      sibling.contents[rule.left_obj] -= 1;
      sibling.contents[rule.right_obj] += 1;
      sibling.label = label;
      sibling.charge = rule.right_charge;
      sibling.t_push = step + 1;
      stack.push(std::move(sibling));
    }
  }

  // halting check after step t
  auto enabled = [&](const std::vector<std::size_t>* rules, bool needs_trigger) {
    if (!rules) return false;
    for (std::size_t r : *rules) {
      const CompiledRule& rule = cs.rules[r];
      if (rule.charge != charge) continue;
      if (needs_trigger && w[rule.trigger] == 0) continue;
      if (!needs_trigger && tables.unused[tables.ui(rule.trigger, t)] == 0) continue;
      return true;
    }
    return false;
  };
  if (enabled(evolves, true) || enabled(sendouts, true) || enabled(divides, true) ||
      enabled(sendins, false)) {
    return false;
  }
  return true;
}

// One guessed branch of the consistency question: drives every inner
// membrane (including division children) through step t and accepts only
// if all of them halt and the interaction table is discharged to exactly
// zero. Mutates `tables`; run it on a copy.
inline bool query_branch(const CompiledSystem& cs, DenseTables& tables, std::int64_t t,
                         Chooser& chooser, QueryStats* stats = nullptr) {
  InnerStack stack = init_stack(cs);
  const std::size_t limit = static_cast<std::size_t>(cs.initial_inner_count + t);
  while (!stack.empty()) {
    StackEntry entry = stack.pop();
    if (!simulate_inner_membrane(cs, entry, t, tables, chooser, stack)) {
      if (stats) {
        stats->branches += 1;
        stats->max_stack = std::max(stats->max_stack, stack.max_size);
        stats->stack_limit = limit;
        if (stack.max_size > limit) stats->stack_bound_violations += 1;
      }
      return false;
    }
  }
  bool zero = tables.all_written_zero();
  if (stats) {
    stats->branches += 1;
    stats->max_stack = std::max(stats->max_stack, stack.max_size);
    stats->stack_limit = limit;
    if (stack.max_size > limit) stats->stack_bound_violations += 1;
    if (zero == false) {
      // rejected by the final zero check; nothing to record
    }
  }
  return zero;
}

struct QueryAnswer {
  bool positive = false;
  Witness witness;  // guesses of the accepting branch, when positive
  QueryStats stats;
};

// Is there a halting run of the inner membranes through step t consistent
// with the guessed tables? Complete backtracking over the guess tree.
inline QueryAnswer answer_query(const CompiledSystem& cs, const DenseTables& tables, std::int64_t t,
                                Budget& budget) {
  QueryAnswer answer;
  ExploreOutcome outcome = explore(
      [&](Chooser& chooser) {
        DenseTables local = tables;
        bool ok = query_branch(cs, local, t, chooser, &answer.stats);
        if (ok && !local.all_written_zero()) answer.stats.positive_with_nonzero_table += 1;
        return ok;
      },
      budget);
  answer.positive = outcome.accepted;
  if (outcome.witness) answer.witness = std::move(*outcome.witness);
  return answer;
}

// Convenience overload for the public table types.
inline QueryAnswer answer_query(const CompiledSystem& cs, const InteractionTable& interaction,
                                const UnusedTable& unused, std::int64_t t, Budget& budget) {
  return answer_query(cs, dense_tables(cs, interaction, unused), t, budget);
}

}  // namespace psys
