#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "psys/error.hpp"
#include "psys/multiset.hpp"

namespace psys {

// Distinguished result objects of a recognizer system.
inline constexpr const char* kYes = "yes";
inline constexpr const char* kNo = "no";

enum class Charge : std::uint8_t { Neutral, Positive, Negative };

inline char charge_char(Charge c) {
  switch (c) {
    case Charge::Positive: return '+';
    case Charge::Negative: return '-';
    default: return '0';
  }
}

// [a -> products]_label^charge : rewrites one object inside the membrane.
struct EvolveRule {
  std::string label;
  Charge charge;
  std::string trigger;
  Multiset products;
  friend bool operator==(const EvolveRule&, const EvolveRule&) = default;
};

// outer_object []_label^charge -> [inner_object]_label^new_charge
struct SendInRule {
  std::string label;
  std::string outer_object;
  Charge charge;
  std::string inner_object;
  Charge new_charge;
  friend bool operator==(const SendInRule&, const SendInRule&) = default;
};

// [inner_object]_label^charge -> []_label^new_charge outer_object
struct SendOutRule {
  std::string label;
  Charge charge;
  std::string inner_object;
  Charge new_charge;
  std::string outer_object;
  friend bool operator==(const SendOutRule&, const SendOutRule&) = default;
};

// [trigger]_label^charge -> [left_object]_label^left_charge [right_object]_label^right_charge
struct DivideRule {
  std::string label;
  Charge charge;
  std::string trigger;
  Charge left_charge;
  std::string left_object;
  Charge right_charge;
  std::string right_object;
  friend bool operator==(const DivideRule&, const DivideRule&) = default;
};

struct Rule {
  using Body = std::variant<EvolveRule, SendInRule, SendOutRule, DivideRule>;

  std::size_t ordinal = 0;  // position in the rule list; stable iteration key
  Body body;

  bool is_evolve() const { return std::holds_alternative<EvolveRule>(body); }
  bool is_send_in() const { return std::holds_alternative<SendInRule>(body); }
  bool is_send_out() const { return std::holds_alternative<SendOutRule>(body); }
  bool is_divide() const { return std::holds_alternative<DivideRule>(body); }

  // Communication and division rules occupy their membrane for the step.
  bool is_blocking() const { return !is_evolve(); }

  const std::string& label() const {
    return std::visit([](const auto& r) -> const std::string& { return r.label; }, body);
  }

  Charge charge() const {
    return std::visit([](const auto& r) { return r.charge; }, body);
  }

  friend bool operator==(const Rule&, const Rule&) = default;
};

// A complete system description as parsed and validated.
struct SystemSpec {
  std::set<std::string> alphabet;
  std::set<std::string> labels;
  std::string skin;
  std::vector<std::pair<std::string, Multiset>> inner_init;
  Multiset skin_init;
  std::vector<Rule> rules;
  std::int64_t bound = 1;
  std::optional<std::string> input_label;

  friend bool operator==(const SystemSpec&, const SystemSpec&) = default;
};

struct MembraneInstance {
  std::string label;
  Charge charge = Charge::Neutral;
  Multiset contents;

  friend bool operator==(const MembraneInstance&, const MembraneInstance&) = default;
  friend auto operator<=>(const MembraneInstance& a, const MembraneInstance& b) {
    if (auto c = a.label <=> b.label; c != 0) return c;
    if (auto c = a.charge <=> b.charge; c != 0) return c;
    return a.contents <=> b.contents;
  }
};

// Inner membranes form an unordered bag: instances with equal label, charge
// and contents are interchangeable, so they are stored with a multiplicity.
using InnerBag = std::map<MembraneInstance, std::int64_t>;

struct Configuration {
  Multiset env;
  MembraneInstance skin;
  InnerBag inner;

  std::int64_t inner_count() const {
    std::int64_t n = 0;
    for (const auto& [inst, k] : inner) n += k;
    return n;
  }

  friend bool operator==(const Configuration&, const Configuration&) = default;
  friend auto operator<=>(const Configuration& a, const Configuration& b) {
    if (auto c = a.env <=> b.env; c != 0) return c;
    if (auto c = a.skin <=> b.skin; c != 0) return c;
    return a.inner <=> b.inner;
  }
};

enum class Verdict { Accept, Reject, InvalidRecognizer, BoundExceeded };

inline const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Accept: return "accept";
    case Verdict::Reject: return "reject";
    case Verdict::InvalidRecognizer: return "invalid-recognizer";
    case Verdict::BoundExceeded: return "bound-exceeded";
  }
  return "?";
}

namespace detail {

inline void require_symbol(const SystemSpec& spec, const std::string& name, std::size_t ordinal) {
  if (!spec.alphabet.contains(name)) {
    throw ValidateError(ValidateErrorKind::UnknownSymbol, name,
                        "rule " + std::to_string(ordinal) + " uses undeclared object '" + name + "'",
                        ordinal);
  }
}

inline void require_label(const SystemSpec& spec, const std::string& name, std::size_t ordinal) {
  if (!spec.labels.contains(name)) {
    throw ValidateError(ValidateErrorKind::UnknownLabel, name,
                        "rule " + std::to_string(ordinal) + " uses undeclared label '" + name + "'",
                        ordinal);
  }
}

}  // namespace detail

// Checks every structural invariant: label bijection, symbol and label
// closure of the rules, divide rules confined to inner membranes, and a
// positive step bound. Returns the spec unchanged when it is well formed.
inline const SystemSpec& validate_system(const SystemSpec& spec) {
  if (spec.bound < 1) {
    throw ValidateError(ValidateErrorKind::BadBound, std::to_string(spec.bound),
                        "step bound must be at least 1");
  }
  if (!spec.labels.contains(spec.skin)) {
    throw ValidateError(ValidateErrorKind::UnknownLabel, spec.skin,
                        "skin label '" + spec.skin + "' is not declared");
  }
  std::set<std::string> seen{spec.skin};
  for (const auto& [label, init] : spec.inner_init) {
    if (!spec.labels.contains(label)) {
      throw ValidateError(ValidateErrorKind::UnknownLabel, label,
                          "inner membrane label '" + label + "' is not declared");
    }
    if (!seen.insert(label).second) {
      throw ValidateError(ValidateErrorKind::DuplicateLabel, label,
                          "membrane label '" + label + "' is used more than once");
    }
    for (const auto& [name, n] : init.entries()) {
      if (!spec.alphabet.contains(name)) {
        throw ValidateError(ValidateErrorKind::UnknownSymbol, name,
                            "initial contents of '" + label + "' use undeclared object '" + name + "'");
      }
      (void)n;
    }
  }
  for (const auto& [name, n] : spec.skin_init.entries()) {
    if (!spec.alphabet.contains(name)) {
      throw ValidateError(ValidateErrorKind::UnknownSymbol, name,
                          "skin initial contents use undeclared object '" + name + "'");
    }
    (void)n;
  }
  if (spec.input_label && !spec.labels.contains(*spec.input_label)) {
    throw ValidateError(ValidateErrorKind::UnknownLabel, *spec.input_label,
                        "input membrane label '" + *spec.input_label + "' is not declared");
  }
  for (const Rule& rule : spec.rules) {
    const std::size_t i = rule.ordinal;
    detail::require_label(spec, rule.label(), i);
    if (const auto* r = std::get_if<EvolveRule>(&rule.body)) {
      detail::require_symbol(spec, r->trigger, i);
      for (const auto& [name, n] : r->products.entries()) {
        detail::require_symbol(spec, name, i);
        (void)n;
      }
    } else if (const auto* r = std::get_if<SendInRule>(&rule.body)) {
      detail::require_symbol(spec, r->outer_object, i);
      detail::require_symbol(spec, r->inner_object, i);
    } else if (const auto* r = std::get_if<SendOutRule>(&rule.body)) {
      detail::require_symbol(spec, r->inner_object, i);
      detail::require_symbol(spec, r->outer_object, i);
    } else if (const auto* r = std::get_if<DivideRule>(&rule.body)) {
      detail::require_symbol(spec, r->trigger, i);
      detail::require_symbol(spec, r->left_object, i);
      detail::require_symbol(spec, r->right_object, i);
      if (r->label == spec.skin) {
        throw ValidateError(ValidateErrorKind::DivideOnSkin, r->label,
                            "rule " + std::to_string(i) + " divides the outermost membrane", i);
      }
    }
  }
  return spec;
}

// All membranes start neutral; the environment starts empty.
inline Configuration initial_configuration(const SystemSpec& spec) {
  Configuration conf;
  conf.skin = MembraneInstance{spec.skin, Charge::Neutral, spec.skin_init};
  for (const auto& [label, init] : spec.inner_init) {
    conf.inner[MembraneInstance{label, Charge::Neutral, init}] += 1;
  }
  return conf;
}

// Returns a copy of the spec with `input` added to the initial contents of
// the designated input membrane. Throws when no input membrane is declared.
inline SystemSpec with_input(const SystemSpec& spec, const Multiset& input) {
  if (!spec.input_label) {
    throw Error("system declares no input membrane");
  }
  SystemSpec out = spec;
  for (const auto& [name, n] : input.entries()) {
    if (!out.alphabet.contains(name)) {
      throw ValidateError(ValidateErrorKind::UnknownSymbol, name,
                          "input multiset uses undeclared object '" + name + "'");
    }
    (void)n;
  }
  if (*spec.input_label == spec.skin) {
    out.skin_init.add(input);
    return out;
  }
  for (auto& [label, init] : out.inner_init) {
    if (label == *spec.input_label) {
      init.add(input);
      return out;
    }
  }
  throw ValidateError(ValidateErrorKind::UnknownLabel, *spec.input_label,
                      "input membrane '" + *spec.input_label + "' has no initial membrane");
}

}  // namespace psys
