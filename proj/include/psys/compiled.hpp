#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "psys/error.hpp"
#include "psys/model.hpp"

namespace psys {

// Index-based view of a SystemSpec used by the table-driven decider: object
// symbols and labels become small integers so the per-branch simulation
// works on flat count vectors.
struct CompiledRule {
  enum class Kind { Evolve, SendIn, SendOut, Divide };

  std::size_t ordinal = 0;
  Kind kind = Kind::Evolve;
  int label = -1;
  Charge charge = Charge::Neutral;          // charge required to apply
  int trigger = -1;                         // consumed object (send-in: from the skin)
  int product = -1;                         // produced object (send-in: into the membrane)
  Charge new_charge = Charge::Neutral;      // send-in / send-out result charge
  std::vector<std::pair<int, std::int64_t>> products;  // evolve right-hand side
  int left_obj = -1, right_obj = -1;        // divide children
  Charge left_charge = Charge::Neutral, right_charge = Charge::Neutral;
};

struct CompiledSystem {
  const SystemSpec* source = nullptr;

  std::vector<std::string> objects;  // id -> name
  std::map<std::string, int> object_ids;
  std::vector<std::string> labels;   // id -> name
  std::map<std::string, int> label_ids;

  int skin_label = -1;
  int yes_obj = -1;  // -1 when the alphabet lacks the result object
  int no_obj = -1;

  std::vector<CompiledRule> rules;

  std::vector<std::int64_t> skin_init;  // counts by object id
  struct InnerInit {
    int label;
    std::vector<std::int64_t> contents;
  };
  std::vector<InnerInit> inner;
  std::int64_t initial_inner_count = 0;  // m
  std::int64_t bound = 1;                // T

  // Rules driving the outer simulation: communication across the skin
  // boundary restricted to labels that actually have membranes (labels
  // without an initial membrane can never gain one).
  std::vector<std::size_t> outer_sendin;
  std::vector<std::size_t> outer_sendout;
  std::vector<std::size_t> skin_evolve;
  std::vector<std::size_t> skin_sendout;

  // Per-label rule lists for the inner simulation.
  std::map<int, std::vector<std::size_t>> divide_by_label;
  std::map<int, std::vector<std::size_t>> sendin_by_label;
  std::map<int, std::vector<std::size_t>> sendout_by_label;
  std::map<int, std::vector<std::size_t>> evolve_by_label;

  std::size_t object_count() const { return objects.size(); }

  std::vector<std::int64_t> to_dense(const Multiset& ms) const {
    std::vector<std::int64_t> out(objects.size(), 0);
    for (const auto& [name, n] : ms.entries()) out[static_cast<std::size_t>(object_ids.at(name))] = n;
    return out;
  }

  Multiset to_multiset(const std::vector<std::int64_t>& dense) const {
    Multiset out;
    for (std::size_t i = 0; i < dense.size(); ++i) {
      if (dense[i] != 0) out.add(objects[i], dense[i]);
    }
    return out;
  }
};

inline CompiledSystem compile(const SystemSpec& spec) {
  CompiledSystem cs;
  cs.source = &spec;
  for (const std::string& name : spec.alphabet) {
    cs.object_ids.emplace(name, static_cast<int>(cs.objects.size()));
    cs.objects.push_back(name);
  }
  for (const std::string& name : spec.labels) {
    cs.label_ids.emplace(name, static_cast<int>(cs.labels.size()));
    cs.labels.push_back(name);
  }
  cs.skin_label = cs.label_ids.at(spec.skin);
  if (auto it = cs.object_ids.find(kYes); it != cs.object_ids.end()) cs.yes_obj = it->second;
  if (auto it = cs.object_ids.find(kNo); it != cs.object_ids.end()) cs.no_obj = it->second;

  cs.skin_init = cs.to_dense(spec.skin_init);
  std::set<int> active_inner;
  for (const auto& [label, init] : spec.inner_init) {
    int id = cs.label_ids.at(label);
    cs.inner.push_back(CompiledSystem::InnerInit{id, cs.to_dense(init)});
    active_inner.insert(id);
  }
  cs.initial_inner_count = static_cast<std::int64_t>(cs.inner.size());
  cs.bound = spec.bound;

  for (const Rule& rule : spec.rules) {
    CompiledRule cr;
    cr.ordinal = rule.ordinal;
    cr.label = cs.label_ids.at(rule.label());
    cr.charge = rule.charge();
    if (const auto* r = std::get_if<EvolveRule>(&rule.body)) {
      cr.kind = CompiledRule::Kind::Evolve;
      cr.trigger = cs.object_ids.at(r->trigger);
      for (const auto& [name, n] : r->products.entries()) {
        cr.products.emplace_back(cs.object_ids.at(name), n);
      }
    } else if (const auto* r = std::get_if<SendInRule>(&rule.body)) {
      cr.kind = CompiledRule::Kind::SendIn;
      cr.trigger = cs.object_ids.at(r->outer_object);
      cr.product = cs.object_ids.at(r->inner_object);
      cr.new_charge = r->new_charge;
    } else if (const auto* r = std::get_if<SendOutRule>(&rule.body)) {
      cr.kind = CompiledRule::Kind::SendOut;
      cr.trigger = cs.object_ids.at(r->inner_object);
      cr.product = cs.object_ids.at(r->outer_object);
      cr.new_charge = r->new_charge;
    } else if (const auto* r = std::get_if<DivideRule>(&rule.body)) {
      cr.kind = CompiledRule::Kind::Divide;
      cr.trigger = cs.object_ids.at(r->trigger);
      cr.left_obj = cs.object_ids.at(r->left_object);
      cr.right_obj = cs.object_ids.at(r->right_object);
      cr.left_charge = r->left_charge;
      cr.right_charge = r->right_charge;
    }
    cs.rules.push_back(cr);

    switch (cs.rules.back().kind) {
      case CompiledRule::Kind::Evolve:
        if (cr.label == cs.skin_label) cs.skin_evolve.push_back(cr.ordinal);
        else cs.evolve_by_label[cr.label].push_back(cr.ordinal);
        break;
      case CompiledRule::Kind::SendIn:
        if (active_inner.contains(cr.label)) {
          cs.outer_sendin.push_back(cr.ordinal);
          cs.sendin_by_label[cr.label].push_back(cr.ordinal);
        }
        break;
      case CompiledRule::Kind::SendOut:
        if (cr.label == cs.skin_label) {
          cs.skin_sendout.push_back(cr.ordinal);
        } else if (active_inner.contains(cr.label)) {
          cs.outer_sendout.push_back(cr.ordinal);
          cs.sendout_by_label[cr.label].push_back(cr.ordinal);
        }
        break;
      case CompiledRule::Kind::Divide:
        if (active_inner.contains(cr.label)) cs.divide_by_label[cr.label].push_back(cr.ordinal);
        break;
    }
  }
  return cs;
}

}  // namespace psys
