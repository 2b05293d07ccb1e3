#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <vector>

#include "psys/choice.hpp"
#include "psys/compiled.hpp"
#include "psys/tables.hpp"

namespace psys {

// Working state of the outer simulation. `w` is the skin multiset by
// object id, `t` the next step to simulate.
struct OuterState {
  std::vector<std::int64_t> w;
  std::vector<std::int64_t> env;
  Charge charge = Charge::Neutral;
  std::int64_t t = 0;
};

inline OuterState initial_outer_state(const CompiledSystem& cs) {
  return OuterState{cs.skin_init, std::vector<std::int64_t>(cs.object_count(), 0),
                    Charge::Neutral, 0};
}

struct OuterStepResult {
  bool rejected = false;
  int emitted = -1;  // object id sent to the environment this step, if any
};

namespace detail {

inline bool has_skin_evolve(const CompiledSystem& cs, Charge charge, int obj) {
  for (std::size_t r : cs.skin_evolve) {
    const CompiledRule& rule = cs.rules[r];
    if (rule.charge == charge && rule.trigger == obj) return true;
  }
  return false;
}

inline bool has_skin_sendout(const CompiledSystem& cs, Charge charge, int obj) {
  for (std::size_t r : cs.skin_sendout) {
    const CompiledRule& rule = cs.rules[r];
    if (rule.charge == charge && rule.trigger == obj) return true;
  }
  return false;
}

}  // namespace detail

// One step of the outer membrane under guessed inner interactions.
//
// All phases read the pre-step multiset and only mark their effects; the
// markings land together at the end of the step. Phase order: guessed
// send-in counts into inner membranes, guessed send-out counts from inner
// membranes, skin evolution counts, the single skin send-out to the
// environment, then the idle-object table row for this step. A branch is
// rejected as soon as its markings overrun an object count, and at the end
// of the step if an untouched object still had an enabled skin rule.
inline OuterStepResult simulate_outer_step(const CompiledSystem& cs, OuterState& state,
                                           DenseTables& tables, Chooser& chooser) {
  const std::vector<std::int64_t> w0 = state.w;
  const Charge charge0 = state.charge;
  const std::int64_t t = state.t;
  const std::int64_t cap = compute_guess_cap(cs.initial_inner_count, t);

  std::vector<std::int64_t> removed(cs.object_count(), 0);
  std::vector<std::int64_t> added(cs.object_count(), 0);

  // guessed transfers into inner membranes; judged only by what the skin
  // can see, so any positive count of the trigger makes the rule eligible
  for (std::size_t r : cs.outer_sendin) {
    const CompiledRule& rule = cs.rules[r];
    int a = rule.trigger;
    if (w0[a] == 0) continue;
    std::int64_t hi = std::min(w0[a], cap);
    std::int64_t v = chooser.guess(ChoicePoint{"alg1.sendin", 0, hi});
    tables.set_interaction(r, t, v);
    removed[a] += v;
    if (removed[a] > w0[a]) return OuterStepResult{true, -1};
  }

  // guessed transfers out of inner membranes; no skin-side condition
  for (std::size_t r : cs.outer_sendout) {
    const CompiledRule& rule = cs.rules[r];
    std::int64_t v = chooser.guess(ChoicePoint{"alg1.sendout", 0, cap});
    tables.set_interaction(r, t, v);
    added[rule.product] = Multiset::checked_add(added[rule.product], v);
  }

  // skin evolution
  for (std::size_t r : cs.skin_evolve) {
    const CompiledRule& rule = cs.rules[r];
    int a = rule.trigger;
    if (rule.charge != charge0 || w0[a] == 0) continue;
    std::int64_t v = chooser.guess(ChoicePoint{"alg1.evolve", 0, w0[a]});
    removed[a] += v;
    if (removed[a] > w0[a]) return OuterStepResult{true, -1};
    for (const auto& [obj, n] : rule.products) {
      added[obj] = Multiset::checked_add(added[obj], Multiset::checked_mul(n, v));
    }
  }

  // skin send-out to the environment; the skin takes at most one blocking
  // rule per step, so later rules stop being eligible once one fires
  int emitted = -1;
  bool skin_blocked = false;
  Charge next_charge = charge0;
  for (std::size_t r : cs.skin_sendout) {
    const CompiledRule& rule = cs.rules[r];
    if (rule.charge != charge0 || w0[rule.trigger] == 0) continue;
    std::int64_t v = chooser.guess(ChoicePoint{"alg1.env", 0, 1});
    if (v == 0) continue;
    skin_blocked = true;
    removed[rule.trigger] += 1;
    if (removed[rule.trigger] > w0[rule.trigger]) return OuterStepResult{true, -1};
    emitted = rule.product;
    next_charge = rule.new_charge;
    break;
  }

  // record idle objects, apply markings
  for (std::size_t obj = 0; obj < cs.object_count(); ++obj) {
    tables.unused[tables.ui(obj, t)] = w0[obj] - removed[obj];
    state.w[obj] = Multiset::checked_add(w0[obj] - removed[obj], added[obj]);
  }
  if (emitted >= 0) state.env[emitted] += 1;
  state.charge = next_charge;
  state.t = t + 1;

  // maximal parallelism seen from the skin: an untouched object must not
  // have an enabled evolution rule, nor an enabled send-out while the skin
  // is free; idle send-in triggers are judged later against the inner side
  for (std::size_t obj = 0; obj < cs.object_count(); ++obj) {
    if (w0[obj] - removed[obj] <= 0) continue;
    if (detail::has_skin_evolve(cs, charge0, static_cast<int>(obj))) return OuterStepResult{true, -1};
    if (!skin_blocked && detail::has_skin_sendout(cs, charge0, static_cast<int>(obj))) {
      return OuterStepResult{true, -1};
    }
  }

  return OuterStepResult{false, emitted};
}

enum class OuterResult { EmitYes, EmitNo };

struct OuterRunOutcome {
  OuterResult result = OuterResult::EmitYes;
  std::int64_t halt_time = 0;   // step during which the result left the skin
  DenseTables tables;
  OuterState final_state;       // state after the emission step
};

// Runs the outer simulation until a result object reaches the environment.
// Returns nothing when the branch dies: a marking conflict, a maximality
// violation, no emission within the bound, or a skin that could still act
// after emitting. The consistency of the guessed tables against the inner
// membranes is the caller's question to ask.
inline std::optional<OuterRunOutcome> run_outermost(const CompiledSystem& cs, Chooser& chooser) {
  OuterState state = initial_outer_state(cs);
  DenseTables tables(cs);
  for (std::int64_t t = 0; t < cs.bound; ++t) {
    OuterStepResult step = simulate_outer_step(cs, state, tables, chooser);
    if (step.rejected) return std::nullopt;
    if (step.emitted < 0) continue;
    if (step.emitted != cs.yes_obj && step.emitted != cs.no_obj) continue;

    // the skin must be unable to act in the next step
    for (std::size_t obj = 0; obj < cs.object_count(); ++obj) {
      if (state.w[obj] <= 0) continue;
      if (detail::has_skin_evolve(cs, state.charge, static_cast<int>(obj)) ||
          detail::has_skin_sendout(cs, state.charge, static_cast<int>(obj))) {
        return std::nullopt;
      }
    }
    OuterRunOutcome out;
    out.result = step.emitted == cs.yes_obj ? OuterResult::EmitYes : OuterResult::EmitNo;
    out.halt_time = t;
    out.tables = std::move(tables);
    out.final_state = std::move(state);
    return out;
  }
  return std::nullopt;
}

}  // namespace psys
