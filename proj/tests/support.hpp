#pragma once

// Shared test helpers: fixture loading plus independent oracles that check
// the engines from first principles (direct add-one-rule maximality checks
// and a bag-tracking enumerator for the inner-consistency question). These
// deliberately avoid the code paths they are used to verify.

#include <algorithm>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "psys/psys.hpp"

namespace testsupport {

inline std::string fixture_path(const std::string& name) {
  return std::string(PSYS_FIXTURE_DIR) + "/" + name + ".psys";
}

inline psys::SystemSpec load_fixture(const std::string& name) {
  std::ifstream in(fixture_path(name));
  std::ostringstream buf;
  buf << in.rdbuf();
  return psys::parse_system(buf.str());
}

// ---------------------------------------------------------------------------
// Direct assignment checks.

struct ConcreteMembrane {
  psys::MembraneInstance instance;
  psys::MembraneBehavior behavior;
};

// Flattens the grouped form into one record per concrete membrane.
inline std::vector<ConcreteMembrane> flatten(const psys::RuleAssignment& a) {
  std::vector<ConcreteMembrane> out;
  for (const psys::GroupAssignment& group : a.groups) {
    for (const auto& [beh, count] : group.behaviors) {
      for (std::int64_t i = 0; i < count; ++i) out.push_back({group.instance, beh});
    }
  }
  return out;
}

// Validity from first principles: structure matches the configuration, every
// rule fits its membrane, and no object is consumed more often than present.
inline bool assignment_valid(const psys::SystemSpec& spec, const psys::Configuration& conf,
                             const psys::RuleAssignment& a, std::string* why = nullptr) {
  auto fail = [&](const std::string& msg) {
    if (why) *why = msg;
    return false;
  };

  psys::InnerBag counted;
  for (const psys::GroupAssignment& group : a.groups) {
    std::int64_t total = 0;
    for (const auto& [beh, count] : group.behaviors) {
      (void)beh;
      if (count <= 0) return fail("non-positive behavior count");
      total += count;
    }
    if (total != group.multiplicity) return fail("behavior counts do not cover the group");
    counted[group.instance] += group.multiplicity;
  }
  if (counted != conf.inner) return fail("groups do not match the inner bag");

  psys::Multiset skin_consumed;
  if (a.skin.blocking) {
    const psys::Rule& rule = spec.rules[*a.skin.blocking];
    const auto* r = std::get_if<psys::SendOutRule>(&rule.body);
    if (!r || r->label != spec.skin || r->charge != conf.skin.charge) {
      return fail("skin blocking rule does not apply");
    }
    skin_consumed.add(r->inner_object, 1);
  }
  for (const auto& [ordinal, n] : a.skin.evolve) {
    const auto* r = std::get_if<psys::EvolveRule>(&spec.rules[ordinal].body);
    if (!r || r->label != spec.skin || r->charge != conf.skin.charge || n <= 0) {
      return fail("skin evolve rule does not apply");
    }
    skin_consumed.add(r->trigger, n);
  }

  for (const ConcreteMembrane& mem : flatten(a)) {
    psys::Multiset consumed;
    for (const auto& [ordinal, n] : mem.behavior.evolve) {
      const auto* r = std::get_if<psys::EvolveRule>(&spec.rules[ordinal].body);
      if (!r || r->label != mem.instance.label || r->charge != mem.instance.charge || n <= 0) {
        return fail("inner evolve rule does not apply");
      }
      consumed.add(r->trigger, n);
    }
    if (mem.behavior.blocking) {
      const psys::Rule& rule = spec.rules[*mem.behavior.blocking];
      if (rule.label() != mem.instance.label || rule.charge() != mem.instance.charge ||
          !rule.is_blocking()) {
        return fail("inner blocking rule does not apply");
      }
      if (const auto* r = std::get_if<psys::SendInRule>(&rule.body)) {
        skin_consumed.add(r->outer_object, 1);
      } else if (const auto* r = std::get_if<psys::SendOutRule>(&rule.body)) {
        consumed.add(r->inner_object, 1);
      } else if (const auto* r = std::get_if<psys::DivideRule>(&rule.body)) {
        consumed.add(r->trigger, 1);
      }
    }
    if (!mem.instance.contents.includes(consumed)) return fail("inner membrane over-consumed");
  }
  if (!conf.skin.contents.includes(skin_consumed)) return fail("skin over-consumed");
  return true;
}

// Maximality by the direct definition: no single further rule instance can
// be applied on the leftovers.
inline bool assignment_maximal(const psys::SystemSpec& spec, const psys::Configuration& conf,
                               const psys::RuleAssignment& a, std::string* why = nullptr) {
  auto fail = [&](const std::string& msg) {
    if (why) *why = msg;
    return false;
  };

  psys::Multiset skin_left = conf.skin.contents;
  if (a.skin.blocking) {
    skin_left.add(std::get<psys::SendOutRule>(spec.rules[*a.skin.blocking].body).inner_object, -1);
  }
  for (const auto& [ordinal, n] : a.skin.evolve) {
    skin_left.add(std::get<psys::EvolveRule>(spec.rules[ordinal].body).trigger, -n);
  }

  std::vector<ConcreteMembrane> membranes = flatten(a);
  std::vector<psys::Multiset> leftovers;
  for (const ConcreteMembrane& mem : membranes) {
    psys::Multiset left = mem.instance.contents;
    for (const auto& [ordinal, n] : mem.behavior.evolve) {
      left.add(std::get<psys::EvolveRule>(spec.rules[ordinal].body).trigger, -n);
    }
    if (mem.behavior.blocking) {
      const psys::Rule& rule = spec.rules[*mem.behavior.blocking];
      if (const auto* r = std::get_if<psys::SendInRule>(&rule.body)) {
        skin_left.add(r->outer_object, -1);
      } else if (const auto* r = std::get_if<psys::SendOutRule>(&rule.body)) {
        left.add(r->inner_object, -1);
      } else if (const auto* r = std::get_if<psys::DivideRule>(&rule.body)) {
        left.add(r->trigger, -1);
      }
    }
    leftovers.push_back(std::move(left));
  }

  for (const psys::Rule& rule : spec.rules) {
    if (const auto* r = std::get_if<psys::EvolveRule>(&rule.body)) {
      if (r->label == spec.skin && r->charge == conf.skin.charge &&
          skin_left.count(r->trigger) > 0) {
        return fail("could add skin evolve " + std::to_string(rule.ordinal));
      }
      for (std::size_t i = 0; i < membranes.size(); ++i) {
        if (membranes[i].instance.label == r->label &&
            membranes[i].instance.charge == r->charge && leftovers[i].count(r->trigger) > 0) {
          return fail("could add inner evolve " + std::to_string(rule.ordinal));
        }
      }
    } else if (const auto* r = std::get_if<psys::SendInRule>(&rule.body)) {
      if (skin_left.count(r->outer_object) == 0) continue;
      for (std::size_t i = 0; i < membranes.size(); ++i) {
        if (!membranes[i].behavior.blocking && membranes[i].instance.label == r->label &&
            membranes[i].instance.charge == r->charge) {
          return fail("could add send-in " + std::to_string(rule.ordinal));
        }
      }
    } else if (const auto* r = std::get_if<psys::SendOutRule>(&rule.body)) {
      if (r->label == spec.skin) {
        if (!a.skin.blocking && r->charge == conf.skin.charge && skin_left.count(r->inner_object) > 0) {
          return fail("could add skin send-out " + std::to_string(rule.ordinal));
        }
        continue;
      }
      for (std::size_t i = 0; i < membranes.size(); ++i) {
        if (!membranes[i].behavior.blocking && membranes[i].instance.label == r->label &&
            membranes[i].instance.charge == r->charge && leftovers[i].count(r->inner_object) > 0) {
          return fail("could add inner send-out " + std::to_string(rule.ordinal));
        }
      }
    } else if (const auto* r = std::get_if<psys::DivideRule>(&rule.body)) {
      for (std::size_t i = 0; i < membranes.size(); ++i) {
        if (!membranes[i].behavior.blocking && membranes[i].instance.label == r->label &&
            membranes[i].instance.charge == r->charge && leftovers[i].count(r->trigger) > 0) {
          return fail("could add division " + std::to_string(rule.ordinal));
        }
      }
    }
  }
  return true;
}

// Canonical form for set comparison: behaviors sorted within each group.
inline psys::RuleAssignment normalize_assignment(psys::RuleAssignment a) {
  for (psys::GroupAssignment& group : a.groups) {
    std::sort(group.behaviors.begin(), group.behaviors.end());
  }
  return a;
}

// ---------------------------------------------------------------------------
// Brute-force inner-consistency oracle.
//
// Tracks the full bag of inner membranes step by step, enumerating every
// joint maximally-parallel action whose per-(rule, step) communication
// counts equal the interaction table exactly. Division children join the
// bag and first act in the following step. Answers true iff some run
// reaches step t with every membrane halted afterwards.

namespace detail {

struct BruteBehavior {
  std::optional<std::size_t> blocking;
  std::map<std::size_t, std::int64_t> evolve;
};

inline void brute_distribute(const std::vector<std::size_t>& rules, std::size_t i,
                             std::int64_t total, std::map<std::size_t, std::int64_t>& acc,
                             std::vector<std::map<std::size_t, std::int64_t>>& out) {
  if (i + 1 == rules.size()) {
    if (total > 0) acc[rules[i]] = total;
    out.push_back(acc);
    if (total > 0) acc.erase(rules[i]);
    return;
  }
  for (std::int64_t take = 0; take <= total; ++take) {
    if (take > 0) acc[rules[i]] = take;
    brute_distribute(rules, i + 1, total - take, acc, out);
    if (take > 0) acc.erase(rules[i]);
  }
}

inline std::vector<BruteBehavior> brute_behaviors(const psys::SystemSpec& spec,
                                                  const psys::MembraneInstance& inst) {
  std::vector<std::pair<std::optional<std::size_t>, std::string>> options;  // blocking, trigger
  options.emplace_back(std::nullopt, "");
  for (const psys::Rule& rule : spec.rules) {
    if (rule.label() != inst.label || rule.charge() != inst.charge) continue;
    if (const auto* r = std::get_if<psys::SendInRule>(&rule.body)) {
      (void)r;
      options.emplace_back(rule.ordinal, "");
    } else if (const auto* r = std::get_if<psys::SendOutRule>(&rule.body)) {
      if (inst.contents.count(r->inner_object) > 0) options.emplace_back(rule.ordinal, r->inner_object);
    } else if (const auto* r = std::get_if<psys::DivideRule>(&rule.body)) {
      if (inst.contents.count(r->trigger) > 0) options.emplace_back(rule.ordinal, r->trigger);
    }
  }

  std::vector<BruteBehavior> out;
  for (const auto& [blocking, trigger] : options) {
    // every remaining copy of an object with an applicable evolve rule
    // must be rewritten
    std::vector<std::pair<std::vector<std::size_t>, std::int64_t>> pools;
    bool idle_violation = false;
    for (const auto& [obj, count] : inst.contents.entries()) {
      std::int64_t avail = count - (trigger == obj ? 1 : 0);
      if (avail <= 0) continue;
      std::vector<std::size_t> rules;
      for (const psys::Rule& rule : spec.rules) {
        const auto* r = std::get_if<psys::EvolveRule>(&rule.body);
        if (r && r->label == inst.label && r->charge == inst.charge && r->trigger == obj) {
          rules.push_back(rule.ordinal);
        }
      }
      if (!rules.empty()) {
        pools.emplace_back(std::move(rules), avail);
        continue;
      }
      if (blocking) continue;  // membrane is busy; leftovers may idle
      for (const psys::Rule& rule : spec.rules) {
        if (rule.label() != inst.label || rule.charge() != inst.charge) continue;
        if (const auto* r = std::get_if<psys::SendOutRule>(&rule.body)) {
          if (r->inner_object == obj) idle_violation = true;
        } else if (const auto* r = std::get_if<psys::DivideRule>(&rule.body)) {
          if (r->trigger == obj) idle_violation = true;
        }
      }
    }
    if (idle_violation) continue;

    std::vector<std::map<std::size_t, std::int64_t>> evolve_maps{{}};
    for (const auto& [rules, avail] : pools) {
      std::vector<std::map<std::size_t, std::int64_t>> next;
      for (const auto& base : evolve_maps) {
        std::map<std::size_t, std::int64_t> acc = base;
        std::vector<std::map<std::size_t, std::int64_t>> exts;
        brute_distribute(rules, 0, avail, acc, exts);
        for (auto& e : exts) next.push_back(std::move(e));
      }
      evolve_maps = std::move(next);
    }
    for (auto& evolve : evolve_maps) out.push_back(BruteBehavior{blocking, std::move(evolve)});
  }
  return out;
}

inline psys::MembraneInstance brute_apply_one(const psys::SystemSpec& spec,
                                              const psys::MembraneInstance& inst,
                                              const BruteBehavior& beh,
                                              std::optional<psys::MembraneInstance>* sibling) {
  psys::Multiset contents = inst.contents;
  psys::Charge charge = inst.charge;
  for (const auto& [ordinal, n] : beh.evolve) {
    const auto& r = std::get<psys::EvolveRule>(spec.rules[ordinal].body);
    contents.add(r.trigger, -n);
    contents.add_scaled(r.products, n);
  }
  if (beh.blocking) {
    const psys::Rule& rule = spec.rules[*beh.blocking];
    if (const auto* r = std::get_if<psys::SendInRule>(&rule.body)) {
      contents.add(r->inner_object, 1);
      charge = r->new_charge;
    } else if (const auto* r = std::get_if<psys::SendOutRule>(&rule.body)) {
      contents.add(r->inner_object, -1);
      charge = r->new_charge;
    } else if (const auto* r = std::get_if<psys::DivideRule>(&rule.body)) {
      contents.add(r->trigger, -1);
      psys::Multiset right = contents;
      right.add(r->right_object, 1);
      *sibling = psys::MembraneInstance{inst.label, r->right_charge, right};
      contents.add(r->left_object, 1);
      charge = r->left_charge;
    }
  }
  return psys::MembraneInstance{inst.label, charge, contents};
}

inline bool brute_halted(const psys::SystemSpec& spec, const psys::MembraneInstance& inst,
                         const psys::UnusedTable& unused, std::int64_t t) {
  for (const psys::Rule& rule : spec.rules) {
    if (rule.label() != inst.label || rule.charge() != inst.charge) continue;
    if (const auto* r = std::get_if<psys::EvolveRule>(&rule.body)) {
      if (inst.contents.count(r->trigger) > 0) return false;
    } else if (const auto* r = std::get_if<psys::SendInRule>(&rule.body)) {
      if (unused.get(r->outer_object, t) > 0) return false;
    } else if (const auto* r = std::get_if<psys::SendOutRule>(&rule.body)) {
      if (inst.contents.count(r->inner_object) > 0) return false;
    } else if (const auto* r = std::get_if<psys::DivideRule>(&rule.body)) {
      if (inst.contents.count(r->trigger) > 0) return false;
    }
  }
  return true;
}

inline bool brute_query_rec(const psys::SystemSpec& spec,
                            const std::vector<psys::MembraneInstance>& membranes,
                            const psys::InteractionTable& interaction,
                            const psys::UnusedTable& unused, std::int64_t step, std::int64_t t) {
  if (step > t) {
    for (const psys::MembraneInstance& inst : membranes) {
      if (!brute_halted(spec, inst, unused, t)) return false;
    }
    return true;
  }

  std::vector<std::vector<BruteBehavior>> options;
  for (const psys::MembraneInstance& inst : membranes) {
    options.push_back(brute_behaviors(spec, inst));
  }
  std::vector<std::size_t> pick(membranes.size(), 0);

  while (true) {
    // communication counts must equal the table row for this step
    std::map<std::size_t, std::int64_t> comm;
    for (std::size_t i = 0; i < membranes.size(); ++i) {
      const BruteBehavior& beh = options[i][pick[i]];
      if (!beh.blocking) continue;
      const psys::Rule& rule = spec.rules[*beh.blocking];
      if (rule.is_send_in() || rule.is_send_out()) comm[*beh.blocking] += 1;
    }
    bool counts_ok = true;
    for (const psys::Rule& rule : spec.rules) {
      if (rule.label() == spec.skin || (!rule.is_send_in() && !rule.is_send_out())) continue;
      std::int64_t want = interaction.get(rule.ordinal, step);
      auto it = comm.find(rule.ordinal);
      if ((it == comm.end() ? 0 : it->second) != want) {
        counts_ok = false;
        break;
      }
    }
    if (counts_ok) {
      // idle skin objects must not have found a free receptive membrane
      bool max_ok = true;
      for (std::size_t i = 0; i < membranes.size() && max_ok; ++i) {
        if (options[i][pick[i]].blocking) continue;
        for (const psys::Rule& rule : spec.rules) {
          const auto* r = std::get_if<psys::SendInRule>(&rule.body);
          if (r && r->label == membranes[i].label && r->charge == membranes[i].charge &&
              unused.get(r->outer_object, step) > 0) {
            max_ok = false;
            break;
          }
        }
      }
      if (max_ok) {
        std::vector<psys::MembraneInstance> next;
        for (std::size_t i = 0; i < membranes.size(); ++i) {
          std::optional<psys::MembraneInstance> sibling;
          next.push_back(brute_apply_one(spec, membranes[i], options[i][pick[i]], &sibling));
          if (sibling) next.push_back(std::move(*sibling));
        }
        if (brute_query_rec(spec, next, interaction, unused, step + 1, t)) return true;
      }
    }

    std::size_t i = 0;
    while (i < pick.size() && ++pick[i] == options[i].size()) pick[i++] = 0;
    if (i == pick.size()) return false;
  }
}

}  // namespace detail

inline bool brute_query(const psys::SystemSpec& spec, const psys::InteractionTable& interaction,
                        const psys::UnusedTable& unused, std::int64_t t) {
  std::vector<psys::MembraneInstance> membranes;
  for (const auto& [label, init] : spec.inner_init) {
    membranes.push_back(psys::MembraneInstance{label, psys::Charge::Neutral, init});
  }
  return detail::brute_query_rec(spec, membranes, interaction, unused, 0, t);
}

}  // namespace testsupport
