#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "psys/error.hpp"
#include "psys/model.hpp"
#include "psys/multiset.hpp"

namespace psys {

// Identifies one membrane of a configuration: either the skin or the
// inner_index-th distinct inner instance (in the bag's canonical order).
struct SlotRef {
  bool is_skin = true;
  std::size_t inner_index = 0;

  static SlotRef skin() { return SlotRef{true, 0}; }
  static SlotRef inner(std::size_t i) { return SlotRef{false, i}; }
};

// What one membrane does in one step: at most one blocking rule plus a
// per-rule count of evolution applications.
struct MembraneBehavior {
  std::optional<std::size_t> blocking;         // rule ordinal
  std::map<std::size_t, std::int64_t> evolve;  // evolve rule ordinal -> applications

  friend bool operator==(const MembraneBehavior&, const MembraneBehavior&) = default;
  friend auto operator<=>(const MembraneBehavior& a, const MembraneBehavior& b) {
    if (auto c = a.blocking <=> b.blocking; c != 0) return c;
    return a.evolve <=> b.evolve;
  }
};

// Behaviors of the identical instances of one distinct inner membrane
// value, stored as a multiset: equal instances are interchangeable, so a
// send-in pairing is fully described by how many of them take each rule.
struct GroupAssignment {
  MembraneInstance instance;
  std::int64_t multiplicity = 0;
  std::vector<std::pair<MembraneBehavior, std::int64_t>> behaviors;

  friend bool operator==(const GroupAssignment&, const GroupAssignment&) = default;
};

struct RuleAssignment {
  MembraneBehavior skin;
  std::vector<GroupAssignment> groups;

  friend bool operator==(const RuleAssignment&, const RuleAssignment&) = default;
};

struct StepTrace {
  std::int64_t time = 0;
  RuleAssignment assignment;
  Configuration before;
  Configuration after;
};

namespace detail {

inline bool evolve_matches(const Rule& rule, const std::string& label, Charge charge,
                           const std::string& obj) {
  const auto* r = std::get_if<EvolveRule>(&rule.body);
  return r && r->label == label && r->charge == charge && r->trigger == obj;
}

inline bool has_applicable_evolve(const SystemSpec& spec, const std::string& label, Charge charge,
                                  const std::string& obj) {
  for (const Rule& rule : spec.rules) {
    if (evolve_matches(rule, label, charge, obj)) return true;
  }
  return false;
}

inline bool has_applicable_blocking_on_contents(const SystemSpec& spec, const std::string& label,
                                                Charge charge, const std::string& obj,
                                                bool include_divide) {
  for (const Rule& rule : spec.rules) {
    if (const auto* r = std::get_if<SendOutRule>(&rule.body)) {
      if (r->label == label && r->charge == charge && r->inner_object == obj) return true;
    } else if (include_divide) {
      if (const auto* d = std::get_if<DivideRule>(&rule.body)) {
        if (d->label == label && d->charge == charge && d->trigger == obj) return true;
      }
    }
  }
  return false;
}

// Enumerates every way to split `total` applications across `rules`,
// invoking fn on each complete map extension.
template <typename Fn>
void distribute(const std::vector<std::size_t>& rules, std::size_t i, std::int64_t total,
                std::map<std::size_t, std::int64_t>& acc, Fn&& fn) {
  if (i + 1 == rules.size()) {
    if (total > 0) acc[rules[i]] = total;
    fn(acc);
    if (total > 0) acc.erase(rules[i]);
    return;
  }
  for (std::int64_t take = 0; take <= total; ++take) {
    if (take > 0) acc[rules[i]] = take;
    distribute(rules, i + 1, total - take, acc, fn);
    if (take > 0) acc.erase(rules[i]);
  }
}

// All evolve parts of a behavior, given what the blocking choice consumes.
// Maximal parallelism forces every copy of an object with an applicable
// evolution rule to be rewritten, so only full distributions appear.
template <typename Fn>
void enumerate_evolve_maps(const SystemSpec& spec, const std::string& label, Charge charge,
                           const Multiset& contents, const std::string* reserved_trigger,
                           Fn&& fn) {
  std::vector<std::pair<std::vector<std::size_t>, std::int64_t>> pools;
  for (const auto& [obj, count] : contents.entries()) {
    std::int64_t avail = count - (reserved_trigger && *reserved_trigger == obj ? 1 : 0);
    if (avail <= 0) continue;
    std::vector<std::size_t> rules;
    for (const Rule& rule : spec.rules) {
      if (evolve_matches(rule, label, charge, obj)) rules.push_back(rule.ordinal);
    }
    if (!rules.empty()) pools.emplace_back(std::move(rules), avail);
  }
  std::map<std::size_t, std::int64_t> acc;
  auto rec = [&](auto&& self, std::size_t p) -> void {
    if (p == pools.size()) {
      fn(acc);
      return;
    }
    distribute(pools[p].first, 0, pools[p].second, acc,
               [&](std::map<std::size_t, std::int64_t>&) { self(self, p + 1); });
  };
  rec(rec, 0);
}

// All per-membrane behaviors of one inner instance. Staying idle is only
// offered when no send-out or division rule could have fired instead.
inline std::vector<MembraneBehavior> inner_behaviors(const SystemSpec& spec,
                                                     const MembraneInstance& inst,
                                                     const Multiset& skin_contents) {
  std::vector<MembraneBehavior> out;
  std::vector<std::pair<std::optional<std::size_t>, const std::string*>> options;

  bool idle_allowed = true;
  for (const auto& [obj, count] : inst.contents.entries()) {
    (void)count;
    if (has_applicable_evolve(spec, inst.label, inst.charge, obj)) continue;
    if (has_applicable_blocking_on_contents(spec, inst.label, inst.charge, obj, true)) {
      idle_allowed = false;
      break;
    }
  }
  if (idle_allowed) options.emplace_back(std::nullopt, nullptr);

  for (const Rule& rule : spec.rules) {
    if (rule.label() != inst.label || rule.charge() != inst.charge) continue;
    if (const auto* r = std::get_if<SendInRule>(&rule.body)) {
      if (skin_contents.count(r->outer_object) > 0) options.emplace_back(rule.ordinal, nullptr);
    } else if (const auto* r = std::get_if<SendOutRule>(&rule.body)) {
      if (inst.contents.count(r->inner_object) > 0) {
        options.emplace_back(rule.ordinal, &r->inner_object);
      }
    } else if (const auto* r = std::get_if<DivideRule>(&rule.body)) {
      if (inst.contents.count(r->trigger) > 0) options.emplace_back(rule.ordinal, &r->trigger);
    }
  }

  for (const auto& [blocking, trigger] : options) {
    enumerate_evolve_maps(spec, inst.label, inst.charge, inst.contents, trigger,
                          [&](const std::map<std::size_t, std::int64_t>& evolve) {
                            out.push_back(MembraneBehavior{blocking, evolve});
                          });
  }
  return out;
}

// Core enumeration. `tick` runs once per candidate before the maximality
// check (the hook for search budgets); `emit` receives each maximal
// assignment.
template <typename Tick, typename Emit>
void enumerate_assignments_impl(const SystemSpec& spec, const Configuration& conf, Tick&& tick,
                                Emit&& emit) {
  struct Group {
    MembraneInstance instance;
    std::int64_t multiplicity;
    std::vector<MembraneBehavior> behaviors;
  };
  std::vector<Group> groups;
  for (const auto& [inst, count] : conf.inner) {
    groups.push_back(Group{inst, count, inner_behaviors(spec, inst, conf.skin.contents)});
  }

  std::vector<std::vector<std::pair<MembraneBehavior, std::int64_t>>> chosen(groups.size());

  auto finish = [&]() {
    // send-in rules consume objects from the shared skin multiset
    Multiset sendin_used;
    for (std::size_t g = 0; g < groups.size(); ++g) {
      for (const auto& [beh, count] : chosen[g]) {
        if (!beh.blocking) continue;
        const Rule& rule = spec.rules[*beh.blocking];
        if (const auto* r = std::get_if<SendInRule>(&rule.body)) {
          sendin_used.add(r->outer_object, count);
        }
      }
    }

    std::vector<std::optional<std::size_t>> skin_blocking{std::nullopt};
    for (const Rule& rule : spec.rules) {
      const auto* r = std::get_if<SendOutRule>(&rule.body);
      if (r && r->label == spec.skin && r->charge == conf.skin.charge &&
          conf.skin.contents.count(r->inner_object) > 0) {
        skin_blocking.emplace_back(rule.ordinal);
      }
    }

    for (const auto& blocking : skin_blocking) {
      Multiset used = sendin_used;
      const std::string* trigger = nullptr;
      if (blocking) {
        trigger = &std::get<SendOutRule>(spec.rules[*blocking].body).inner_object;
        used.add(*trigger, 1);
      }
      if (!conf.skin.contents.includes(used)) continue;

      Multiset remaining = conf.skin.contents;
      remaining.subtract(used);

      enumerate_evolve_maps(
          spec, spec.skin, conf.skin.charge, remaining, nullptr,
          [&](const std::map<std::size_t, std::int64_t>& evolve) {
            tick();
            // leftover = skin objects not marked by any rule this step
            Multiset leftover = remaining;
            for (const auto& [ordinal, n] : evolve) {
              leftover.add(std::get<EvolveRule>(spec.rules[ordinal].body).trigger, -n);
            }
            for (const auto& [obj, n] : leftover.entries()) {
              (void)n;
              if (!blocking && has_applicable_blocking_on_contents(spec, spec.skin,
                                                                   conf.skin.charge, obj, false)) {
                return;  // an applicable skin send-out stayed idle
              }
              for (const Rule& rule : spec.rules) {
                const auto* r = std::get_if<SendInRule>(&rule.body);
                if (!r || r->outer_object != obj) continue;
                for (std::size_t g = 0; g < groups.size(); ++g) {
                  if (groups[g].instance.label != r->label ||
                      groups[g].instance.charge != r->charge) {
                    continue;
                  }
                  for (const auto& [beh, count] : chosen[g]) {
                    (void)count;
                    if (!beh.blocking) return;  // an idle membrane could absorb obj
                  }
                }
              }
            }

            // a step with no rule application at all is not a step; it can
            // only survive the checks above when the configuration is halted
            bool any_application = blocking.has_value() || !evolve.empty();
            for (std::size_t g = 0; g < groups.size() && !any_application; ++g) {
              for (const auto& [beh, count] : chosen[g]) {
                (void)count;
                if (beh.blocking || !beh.evolve.empty()) {
                  any_application = true;
                  break;
                }
              }
            }
            if (!any_application) return;

            RuleAssignment a;
            a.skin = MembraneBehavior{blocking, evolve};
            for (std::size_t g = 0; g < groups.size(); ++g) {
              a.groups.push_back(
                  GroupAssignment{groups[g].instance, groups[g].multiplicity, chosen[g]});
            }
            emit(std::move(a));
          });
    }
  };

  auto rec_groups = [&](auto&& self, std::size_t g) -> void {
    if (g == groups.size()) {
      finish();
      return;
    }
    auto& slots = chosen[g];
    auto pick = [&](auto&& pick_self, std::size_t b, std::int64_t left) -> void {
      if (b + 1 == groups[g].behaviors.size()) {
        if (left > 0) slots.emplace_back(groups[g].behaviors[b], left);
        self(self, g + 1);
        if (left > 0) slots.pop_back();
        return;
      }
      for (std::int64_t take = 0; take <= left; ++take) {
        if (take > 0) slots.emplace_back(groups[g].behaviors[b], take);
        pick_self(pick_self, b + 1, left - take);
        if (take > 0) slots.pop_back();
      }
    };
    if (groups[g].behaviors.empty()) return;  // unreachable: idle is dropped only when blockable
    pick(pick, 0, groups[g].multiplicity);
  };
  rec_groups(rec_groups, 0);
}

}  // namespace detail

// Rules enabled for one membrane of the configuration: label and charge
// match and the required object is present (for send-in rules on inner
// membranes, present in the skin). Returns rule ordinals in rule order.
inline std::vector<std::size_t> applicable_rules(const SystemSpec& spec, const Configuration& conf,
                                                 SlotRef slot) {
  std::vector<std::size_t> out;
  const MembraneInstance* inst = &conf.skin;
  if (!slot.is_skin) {
    auto it = conf.inner.begin();
    std::advance(it, static_cast<std::ptrdiff_t>(slot.inner_index));
    inst = &it->first;
  }
  for (const Rule& rule : spec.rules) {
    if (rule.label() != inst->label || rule.charge() != inst->charge) continue;
    bool ok = false;
    if (const auto* r = std::get_if<EvolveRule>(&rule.body)) {
      ok = inst->contents.count(r->trigger) > 0;
    } else if (const auto* r = std::get_if<SendInRule>(&rule.body)) {
      // objects cannot enter from the environment, so the skin never
      // receives; inner membranes receive from the skin
      ok = !slot.is_skin && conf.skin.contents.count(r->outer_object) > 0;
    } else if (const auto* r = std::get_if<SendOutRule>(&rule.body)) {
      ok = inst->contents.count(r->inner_object) > 0;
    } else if (const auto* r = std::get_if<DivideRule>(&rule.body)) {
      ok = !slot.is_skin && inst->contents.count(r->trigger) > 0;
    }
    if (ok) out.push_back(rule.ordinal);
  }
  return out;
}

// True when no rule is applicable anywhere in the configuration.
inline bool is_halted(const SystemSpec& spec, const Configuration& conf) {
  if (!applicable_rules(spec, conf, SlotRef::skin()).empty()) return false;
  for (std::size_t i = 0; i < conf.inner.size(); ++i) {
    if (!applicable_rules(spec, conf, SlotRef::inner(i)).empty()) return false;
  }
  return true;
}

// Every maximally parallel rule assignment of the configuration, each
// exactly once up to interchanging identical inner instances.
inline std::vector<RuleAssignment> enumerate_maximal_assignments(const SystemSpec& spec,
                                                                 const Configuration& conf) {
  std::vector<RuleAssignment> out;
  detail::enumerate_assignments_impl(
      spec, conf, [] {}, [&](RuleAssignment&& a) { out.push_back(std::move(a)); });
  return out;
}

// Applies one assignment: evolution effects land before division copies
// the contents, send-out products of inner membranes land in the skin,
// and only skin send-out rules reach the environment.
inline Configuration apply_assignment(const SystemSpec& spec, const Configuration& conf,
                                      const RuleAssignment& a) {
  Configuration next;
  next.env = conf.env;

  Multiset skin = conf.skin.contents;
  Charge skin_charge = conf.skin.charge;
  for (const auto& [ordinal, n] : a.skin.evolve) {
    const auto& r = std::get<EvolveRule>(spec.rules[ordinal].body);
    skin.add(r.trigger, -n);
    skin.add_scaled(r.products, n);
  }
  if (a.skin.blocking) {
    const auto& r = std::get<SendOutRule>(spec.rules[*a.skin.blocking].body);
    skin.add(r.inner_object, -1);
    next.env.add(r.outer_object, 1);
    skin_charge = r.new_charge;
  }

  for (const GroupAssignment& group : a.groups) {
    for (const auto& [beh, count] : group.behaviors) {
      Multiset contents = group.instance.contents;
      Charge charge = group.instance.charge;
      for (const auto& [ordinal, n] : beh.evolve) {
        const auto& r = std::get<EvolveRule>(spec.rules[ordinal].body);
        contents.add(r.trigger, -n);
        contents.add_scaled(r.products, n);
      }
      if (!beh.blocking) {
        next.inner[MembraneInstance{group.instance.label, charge, contents}] += count;
        continue;
      }
      const Rule& rule = spec.rules[*beh.blocking];
      if (const auto* r = std::get_if<SendInRule>(&rule.body)) {
        skin.add(r->outer_object, -count);
        contents.add(r->inner_object, 1);
        next.inner[MembraneInstance{group.instance.label, r->new_charge, contents}] += count;
      } else if (const auto* r = std::get_if<SendOutRule>(&rule.body)) {
        contents.add(r->inner_object, -1);
        skin.add(r->outer_object, count);
        next.inner[MembraneInstance{group.instance.label, r->new_charge, contents}] += count;
      } else if (const auto* r = std::get_if<DivideRule>(&rule.body)) {
        contents.add(r->trigger, -1);
        Multiset left = contents;
        left.add(r->left_object, 1);
        contents.add(r->right_object, 1);
        next.inner[MembraneInstance{group.instance.label, r->left_charge, left}] += count;
        next.inner[MembraneInstance{group.instance.label, r->right_charge, contents}] += count;
      }
    }
  }

  next.skin = MembraneInstance{conf.skin.label, skin_charge, skin};
  return next;
}

// Distinct reachable configurations after one step; empty iff halted.
inline std::vector<Configuration> successors(const SystemSpec& spec, const Configuration& conf) {
  std::vector<Configuration> out;
  for (const RuleAssignment& a : enumerate_maximal_assignments(spec, conf)) {
    out.push_back(apply_assignment(spec, conf, a));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

struct ExhaustiveOptions {
  std::optional<std::int64_t> bound_override;
  std::int64_t op_budget = 10'000'000;  // assignment candidates before giving up
};

struct ExhaustiveResult {
  Verdict verdict = Verdict::Reject;
  std::optional<std::vector<StepTrace>> accepting_trace;
  std::uint64_t expansions = 0;
};

enum class ViolationKind { NonHaltingWithinBound, MissingResult, EarlyResult, MultipleResults };

struct ValidityViolation {
  ViolationKind kind;
  std::vector<StepTrace> trace;
};

struct ValidityReport {
  bool valid = false;
  std::int64_t computations = 0;
  std::vector<ValidityViolation> violations;
};

namespace detail {

// Depth-first search over all computations with memoization on
// (skin, inner bag, time). The environment never influences rule
// applicability, so it is excluded from the key; branches that have
// emitted a result never continue, which keeps subtree outcomes a pure
// function of the key.
class RefSearch {
 public:
  static constexpr unsigned kAccept = 1, kValidNo = 2, kMissing = 4, kEarly = 8, kBound = 16;

  RefSearch(const SystemSpec& spec, std::int64_t bound, std::int64_t op_budget)
      : spec_(spec), bound_(bound), ops_left_(op_budget) {}

  struct Expansion {
    RuleAssignment assignment;
    MembraneInstance skin;
    InnerBag inner;
    Multiset env_add;
    std::int64_t emitted = 0;
    bool emitted_yes = false;
    bool halted_after = false;
  };

  unsigned analyze(const Configuration& conf, std::int64_t t) {
    Key key{conf.skin, conf.inner, t};
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    const auto& exps = expand(conf.skin, conf.inner);
    unsigned flags = 0;
    if (exps.empty()) {
      flags = kMissing;  // halted without producing a result
    } else if (t >= bound_) {
      flags = kBound;
    } else {
      for (const Expansion& e : exps) {
        if (e.emitted >= 1) {
          if (!e.halted_after || e.emitted > 1) {
            flags |= kEarly;
          } else {
            flags |= e.emitted_yes ? kAccept : kValidNo;
          }
        } else if (e.halted_after) {
          flags |= kMissing;
        } else if (t + 1 >= bound_) {
          flags |= kBound;
        } else {
          Configuration child{mset_apply(conf.env, e.env_add, Multiset{}), e.skin, e.inner};
          flags |= analyze(child, t + 1);
        }
      }
    }
    memo_.emplace(std::move(key), flags);
    return flags;
  }

  // Reconstructs the first (in enumeration order) computation whose
  // classification matches `want`, as a step trace.
  std::vector<StepTrace> trace_for(const Configuration& root, unsigned want) {
    std::vector<StepTrace> trace;
    Configuration conf = root;
    std::int64_t t = 0;
    while (true) {
      const auto& exps = expand(conf.skin, conf.inner);
      if (exps.empty() || t >= bound_) return trace;
      bool advanced = false;
      for (const Expansion& e : exps) {
        unsigned got = 0;
        bool terminal = true;
        Configuration child{mset_apply(conf.env, e.env_add, Multiset{}), e.skin, e.inner};
        if (e.emitted >= 1) {
          if (!e.halted_after || e.emitted > 1) got = kEarly;
          else got = e.emitted_yes ? kAccept : kValidNo;
        } else if (e.halted_after) {
          got = kMissing;
        } else if (t + 1 >= bound_) {
          got = kBound;
        } else {
          terminal = false;
          got = analyze(child, t + 1);
        }
        if ((got & want) == 0) continue;
        trace.push_back(StepTrace{t, e.assignment, conf, child});
        if (terminal) return trace;
        conf = std::move(child);
        ++t;
        advanced = true;
        break;
      }
      if (!advanced) return trace;  // defensive; want must be reachable
    }
  }

  // Number of distinct computations, saturating.
  std::int64_t count_paths(const Configuration& conf, std::int64_t t) {
    Key key{conf.skin, conf.inner, t};
    if (auto it = counts_.find(key); it != counts_.end()) return it->second;
    const auto& exps = expand(conf.skin, conf.inner);
    std::int64_t total = 0;
    if (exps.empty() || t >= bound_) {
      total = 1;
    } else {
      for (const Expansion& e : exps) {
        std::int64_t sub;
        if (e.emitted >= 1 || e.halted_after || t + 1 >= bound_) {
          sub = 1;
        } else {
          Configuration child{mset_apply(conf.env, e.env_add, Multiset{}), e.skin, e.inner};
          sub = count_paths(child, t + 1);
        }
        if (__builtin_add_overflow(total, sub, &total)) total = INT64_MAX;
      }
    }
    counts_.emplace(std::move(key), total);
    return total;
  }

  std::uint64_t expansions() const { return expansions_; }

 private:
  struct Key {
    MembraneInstance skin;
    InnerBag inner;
    std::int64_t t;
    friend auto operator<=>(const Key& a, const Key& b) {
      if (auto c = a.t <=> b.t; c != 0) return c;
      if (auto c = a.skin <=> b.skin; c != 0) return c;
      return a.inner <=> b.inner;
    }
    friend bool operator==(const Key&, const Key&) = default;
  };

  using CoreKey = std::pair<MembraneInstance, InnerBag>;

  const std::vector<Expansion>& expand(const MembraneInstance& skin, const InnerBag& inner) {
    CoreKey key{skin, inner};
    if (auto it = expansions_cache_.find(key); it != expansions_cache_.end()) return it->second;

    Configuration conf{Multiset{}, skin, inner};
    std::vector<Expansion> exps;
    std::set<Configuration> seen;
    detail::enumerate_assignments_impl(
        spec_, conf,
        [&] {
          if (--ops_left_ < 0) throw BudgetExceededError("exhaustive search budget exhausted");
          ++expansions_;
        },
        [&](RuleAssignment&& a) {
          Configuration next = apply_assignment(spec_, conf, a);
          if (!seen.insert(next).second) return;
          Expansion e;
          e.assignment = std::move(a);
          e.env_add = next.env;  // conf.env was empty
          e.emitted = next.env.count(kYes) + next.env.count(kNo);
          e.emitted_yes = next.env.count(kYes) > 0;
          e.halted_after = is_halted(spec_, next);
          e.skin = std::move(next.skin);
          e.inner = std::move(next.inner);
          exps.push_back(std::move(e));
        });
    return expansions_cache_.emplace(std::move(key), std::move(exps)).first->second;
  }

  const SystemSpec& spec_;
  std::int64_t bound_;
  std::int64_t ops_left_;
  std::uint64_t expansions_ = 0;
  std::map<Key, unsigned> memo_;
  std::map<Key, std::int64_t> counts_;
  std::map<CoreKey, std::vector<Expansion>> expansions_cache_;
};

}  // namespace detail

// Ground-truth decider: explores every computation of length <= bound.
// The verdict surfaces contract violations before results: a system with
// any invalid computation reports InvalidRecognizer, one with any
// computation that outruns the bound reports BoundExceeded, and only
// otherwise does the existential accept/reject answer apply.
inline ExhaustiveResult decide_exhaustive(const SystemSpec& spec, ExhaustiveOptions opts = {}) {
  std::int64_t bound = opts.bound_override.value_or(spec.bound);
  detail::RefSearch search(spec, bound, opts.op_budget);
  Configuration root = initial_configuration(spec);
  unsigned flags = search.analyze(root, 0);

  ExhaustiveResult result;
  if (flags & (detail::RefSearch::kMissing | detail::RefSearch::kEarly)) {
    result.verdict = Verdict::InvalidRecognizer;
  } else if (flags & detail::RefSearch::kBound) {
    result.verdict = Verdict::BoundExceeded;
  } else if (flags & detail::RefSearch::kAccept) {
    result.verdict = Verdict::Accept;
    result.accepting_trace = search.trace_for(root, detail::RefSearch::kAccept);
  } else {
    result.verdict = Verdict::Reject;
  }
  result.expansions = search.expansions();
  return result;
}

// Enumerates all computations and reports every way the system breaks the
// recognizer contract, each with a witnessing trace.
inline ValidityReport check_recognizer_validity(const SystemSpec& spec,
                                                ExhaustiveOptions opts = {}) {
  std::int64_t bound = opts.bound_override.value_or(spec.bound);
  detail::RefSearch search(spec, bound, opts.op_budget);
  Configuration root = initial_configuration(spec);
  unsigned flags = search.analyze(root, 0);

  ValidityReport report;
  report.valid = (flags & (detail::RefSearch::kMissing | detail::RefSearch::kEarly |
                           detail::RefSearch::kBound)) == 0;
  report.computations = search.count_paths(root, 0);
  if (flags & detail::RefSearch::kBound) {
    report.violations.push_back(ValidityViolation{
        ViolationKind::NonHaltingWithinBound, search.trace_for(root, detail::RefSearch::kBound)});
  }
  if (flags & detail::RefSearch::kMissing) {
    report.violations.push_back(ValidityViolation{
        ViolationKind::MissingResult, search.trace_for(root, detail::RefSearch::kMissing)});
  }
  if (flags & detail::RefSearch::kEarly) {
    report.violations.push_back(ValidityViolation{
        ViolationKind::EarlyResult, search.trace_for(root, detail::RefSearch::kEarly)});
  }
  return report;
}

}  // namespace psys
