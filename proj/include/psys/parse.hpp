#pragma once

#include <cctype>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "psys/error.hpp"
#include "psys/model.hpp"
#include "psys/multiset.hpp"

namespace psys {

namespace detail {

inline bool is_symbol_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'';
}

// Character scanner over one line of input, tracking 1-based columns.
class LineScanner {
 public:
  LineScanner(std::string_view text, int line) : text_(text), line_(line) {}

  SourceSpan span() const { return SourceSpan{line_, static_cast<int>(pos_) + 1}; }

  void skip_ws() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t')) ++pos_;
  }

  bool at_end() {
    skip_ws();
    return pos_ >= text_.size();
  }

  char peek() {
    skip_ws();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  void expect(char c, const std::string& expected) {
    skip_ws();
    if (pos_ >= text_.size() || text_[pos_] != c) fail(expected);
    ++pos_;
  }

  // Expects c immediately, without skipping whitespace first.
  void expect_tight(char c, const std::string& expected) {
    if (pos_ >= text_.size() || text_[pos_] != c) fail(expected);
    ++pos_;
  }

  std::string symbol(const std::string& what) {
    skip_ws();
    std::size_t start = pos_;
    while (pos_ < text_.size() && is_symbol_char(text_[pos_])) ++pos_;
    if (pos_ == start) fail(what);
    return std::string(text_.substr(start, pos_ - start));
  }

  std::int64_t integer() {
    skip_ws();
    std::size_t start = pos_;
    bool negative = false;
    if (pos_ < text_.size() && text_[pos_] == '-') {
      negative = true;
      ++pos_;
    }
    std::int64_t value = 0;
    bool any = false;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
      int digit = text_[pos_] - '0';
      if (__builtin_mul_overflow(value, std::int64_t{10}, &value) ||
          __builtin_add_overflow(value, std::int64_t{digit}, &value)) {
        pos_ = start;
        fail("integer within 64-bit range");
      }
      ++pos_;
      any = true;
    }
    if (!any) {
      pos_ = start;
      fail("integer");
    }
    return negative ? -value : value;
  }

  Charge charge() {
    skip_ws();
    if (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == '0' || c == '+' || c == '-') {
        ++pos_;
        return c == '+' ? Charge::Positive : c == '-' ? Charge::Negative : Charge::Neutral;
      }
    }
    fail("charge '0', '+' or '-'");
  }

  [[noreturn]] void fail(const std::string& expected) {
    skip_ws();
    throw ParseError(span(), expected,
                     "line " + std::to_string(line_) + ":" + std::to_string(pos_ + 1) +
                         ": expected " + expected);
  }

 private:
  std::string_view text_;
  int line_;
  std::size_t pos_ = 0;
};

// mset := "." | (symbol ("*" INT)?)+
// Stops at end of line or at a character that cannot start a symbol.
// Zero multiplicities normalize away.
inline Multiset parse_mset(LineScanner& sc) {
  Multiset out;
  if (sc.peek() == '.') {
    sc.expect('.', "'.'");
    return out;
  }
  bool any = false;
  while (is_symbol_char(sc.peek())) {
    std::string name = sc.symbol("object name");
    std::int64_t n = 1;
    if (sc.peek() == '*') {
      sc.expect('*', "'*'");
      n = sc.integer();
      if (n < 0) {
        throw MultisetError(MultisetErrorKind::NegativeMultiplicity,
                            "multiplicity of '" + name + "' is negative");
      }
    }
    out.add(name, n);
    any = true;
  }
  if (!any) sc.fail("multiset ('.' or objects)");
  return out;
}

// rule := "[" a "->" mset "]_" h "^" c
//       | a "[]_" h "^" c "->" "[" b "]_" h "^" c
//       | "[" a "]_" h "^" c "->" "[]_" h "^" c b
//       | "[" a "]_" h "^" c "->" "[" b "]_" h "^" c "[" c "]_" h "^" c
inline Rule::Body parse_rule_body(LineScanner& sc) {
  if (sc.peek() != '[') {
    // send-in: trigger object sits outside the brackets
    std::string outer = sc.symbol("object name");
    sc.expect('[', "'['");
    sc.expect_tight(']', "']'");
    sc.expect_tight('_', "'_'");
    std::string label = sc.symbol("label");
    sc.expect('^', "'^'");
    Charge alpha = sc.charge();
    sc.expect('-', "'->'");
    sc.expect_tight('>', "'->'");
    sc.expect('[', "'['");
    std::string inner = sc.symbol("object name");
    sc.expect(']', "']'");
    sc.expect_tight('_', "'_'");
    SourceSpan label2_span = sc.span();
    std::string label2 = sc.symbol("label");
    sc.expect('^', "'^'");
    Charge beta = sc.charge();
    if (label2 != label) {
      throw ParseError(label2_span, "label '" + label + "'",
                       "send-in rule labels differ: '" + label + "' vs '" + label2 + "'");
    }
    return SendInRule{label, outer, alpha, inner, beta};
  }
  sc.expect('[', "'['");
  std::string first = sc.symbol("object name");
  if (sc.peek() == '-') {
    // evolve: [a -> mset]_h^c
    sc.expect('-', "'->'");
    sc.expect_tight('>', "'->'");
    Multiset products = parse_mset(sc);
    sc.expect(']', "']'");
    sc.expect_tight('_', "'_'");
    std::string label = sc.symbol("label");
    sc.expect('^', "'^'");
    Charge alpha = sc.charge();
    return EvolveRule{label, alpha, first, products};
  }
  sc.expect(']', "']'");
  sc.expect_tight('_', "'_'");
  std::string label = sc.symbol("label");
  sc.expect('^', "'^'");
  Charge alpha = sc.charge();
  sc.expect('-', "'->'");
  sc.expect_tight('>', "'->'");
  sc.expect('[', "'['");
  if (sc.peek() == ']') {
    // send-out: [a]_h^c -> []_h^c b
    sc.expect(']', "']'");
    sc.expect_tight('_', "'_'");
    SourceSpan label2_span = sc.span();
    std::string label2 = sc.symbol("label");
    sc.expect('^', "'^'");
    Charge beta = sc.charge();
    std::string product = sc.symbol("object name");
    if (label2 != label) {
      throw ParseError(label2_span, "label '" + label + "'",
                       "send-out rule labels differ: '" + label + "' vs '" + label2 + "'");
    }
    return SendOutRule{label, alpha, first, beta, product};
  }
  // divide: [a]_h^c -> [b]_h^c [c]_h^c
  std::string left = sc.symbol("object name");
  sc.expect(']', "']'");
  sc.expect_tight('_', "'_'");
  SourceSpan lspan = sc.span();
  std::string llabel = sc.symbol("label");
  sc.expect('^', "'^'");
  Charge beta = sc.charge();
  sc.expect('[', "'['");
  std::string right = sc.symbol("object name");
  sc.expect(']', "']'");
  sc.expect_tight('_', "'_'");
  SourceSpan rspan = sc.span();
  std::string rlabel = sc.symbol("label");
  sc.expect('^', "'^'");
  Charge gamma = sc.charge();
  if (llabel != label) {
    throw ParseError(lspan, "label '" + label + "'",
                     "division rule labels differ: '" + label + "' vs '" + llabel + "'");
  }
  if (rlabel != label) {
    throw ParseError(rspan, "label '" + label + "'",
                     "division rule labels differ: '" + label + "' vs '" + rlabel + "'");
  }
  return DivideRule{label, alpha, first, beta, left, gamma, right};
}

}  // namespace detail

// Parses the standalone multiset syntax, e.g. "a*3 b" or ".".
inline Multiset parse_multiset(std::string_view text) {
  detail::LineScanner sc(text, 1);
  Multiset out = detail::parse_mset(sc);
  if (!sc.at_end()) sc.fail("end of input");
  return out;
}

inline std::string render_multiset(const Multiset& ms) {
  if (ms.empty()) return ".";
  std::string out;
  for (const auto& [name, n] : ms.entries()) {
    if (!out.empty()) out += ' ';
    out += name;
    if (n != 1) out += "*" + std::to_string(n);
  }
  return out;
}

// Parses and validates a complete system description. Every syntax error
// carries the position of the offending token; validation failures are
// annotated with the span of the responsible line where one is known.
inline SystemSpec parse_system(std::string_view text) {
  SystemSpec spec;
  spec.bound = 0;  // so a missing @bound fails validation

  bool saw_header = false, saw_objects = false, saw_labels = false;
  bool saw_skin = false, saw_init = false, saw_bound = false, saw_input = false;
  bool in_rules = false;
  std::optional<std::string> init_label;
  SourceSpan init_label_span{};
  SourceSpan skin_span{}, input_span{}, bound_span{}, objects_span{};
  std::vector<SourceSpan> rule_spans;
  std::vector<std::pair<std::string, SourceSpan>> inner_spans;

  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    std::string_view raw =
        text.substr(pos, eol == std::string_view::npos ? text.size() - pos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;

    if (auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    detail::LineScanner sc(raw, line_no);
    if (sc.at_end()) continue;

    if (!saw_header) {
      sc.expect('@', "'@psys 1' header");
      if (sc.symbol("'psys'") != "psys") sc.fail("'@psys 1' header");
      if (sc.integer() != 1) sc.fail("format version 1");
      if (!sc.at_end()) sc.fail("end of line");
      saw_header = true;
      continue;
    }

    if (sc.peek() == '@') {
      if (in_rules) sc.fail("no sections after @rules");
      SourceSpan at = sc.span();
      sc.expect('@', "'@'");
      std::string section = sc.symbol("section name");
      if (section == "objects") {
        if (!saw_objects) objects_span = at;
        saw_objects = true;
        while (!sc.at_end()) spec.alphabet.insert(sc.symbol("object name"));
      } else if (section == "labels") {
        saw_labels = true;
        while (!sc.at_end()) spec.labels.insert(sc.symbol("label"));
      } else if (section == "skin") {
        if (saw_skin) sc.fail("at most one @skin section");
        saw_skin = true;
        skin_span = at;
        spec.skin = sc.symbol("label");
        if (!sc.at_end()) sc.fail("end of line");
      } else if (section == "inner") {
        std::string label = sc.symbol("label");
        sc.expect(':', "':'");
        Multiset init = detail::parse_mset(sc);
        if (!sc.at_end()) sc.fail("end of line");
        spec.inner_init.emplace_back(label, std::move(init));
        inner_spans.emplace_back(label, at);
      } else if (section == "init") {
        if (saw_init) sc.fail("at most one @init section");
        saw_init = true;
        init_label_span = at;
        init_label = sc.symbol("label");
        sc.expect(':', "':'");
        spec.skin_init = detail::parse_mset(sc);
        if (!sc.at_end()) sc.fail("end of line");
      } else if (section == "input") {
        if (saw_input) sc.fail("at most one @input section");
        saw_input = true;
        input_span = at;
        spec.input_label = sc.symbol("label");
        if (!sc.at_end()) sc.fail("end of line");
      } else if (section == "bound") {
        if (saw_bound) sc.fail("at most one @bound section");
        saw_bound = true;
        bound_span = at;
        spec.bound = sc.integer();
        if (!sc.at_end()) sc.fail("end of line");
      } else if (section == "rules") {
        if (!sc.at_end()) sc.fail("end of line");
        in_rules = true;
      } else {
        throw ParseError(at, "a section directive",
                         "line " + std::to_string(line_no) + ": unknown section '@" + section + "'");
      }
      continue;
    }

    if (!in_rules) sc.fail("a section directive");
    SourceSpan rule_span = sc.span();
    Rule::Body body = detail::parse_rule_body(sc);
    if (!sc.at_end()) sc.fail("end of line");
    spec.rules.push_back(Rule{spec.rules.size(), std::move(body)});
    rule_spans.push_back(rule_span);
  }

  auto missing = [&](const char* what) {
    throw ParseError(SourceSpan{line_no, 1}, what,
                     std::string("missing ") + what + " section");
  };
  if (!saw_header) missing("@psys 1 header");
  if (!saw_objects) missing("@objects");
  if (!saw_labels) missing("@labels");
  if (!saw_skin) missing("@skin");
  if (!saw_bound) missing("@bound");
  if (!in_rules) missing("@rules");
  if (spec.rules.empty()) missing("at least one rule");
  if (init_label && *init_label != spec.skin) {
    throw ParseError(init_label_span, "skin label '" + spec.skin + "'",
                     "@init names '" + *init_label + "' but the skin is '" + spec.skin + "'");
  }

  try {
    validate_system(spec);
  } catch (const ValidateError& e) {
    std::optional<SourceSpan> span;
    if (e.rule_ordinal() && *e.rule_ordinal() < rule_spans.size()) {
      span = rule_spans[*e.rule_ordinal()];
    } else {
      switch (e.kind()) {
        case ValidateErrorKind::BadBound:
          span = saw_bound ? std::optional(bound_span) : std::nullopt;
          break;
        case ValidateErrorKind::DuplicateLabel:
        case ValidateErrorKind::NotShallow:
          for (const auto& [label, s] : inner_spans) {
            if (label == e.element()) span = s;
          }
          break;
        case ValidateErrorKind::UnknownLabel:
          if (e.element() == spec.skin) span = skin_span;
          else if (spec.input_label && e.element() == *spec.input_label) span = input_span;
          for (const auto& [label, s] : inner_spans) {
            if (label == e.element()) span = s;
          }
          break;
        case ValidateErrorKind::UnknownSymbol:
          span = objects_span;
          break;
        default:
          break;
      }
    }
    throw ValidateError(e.kind(), e.element(), e.what(), e.rule_ordinal(), span);
  }
  return spec;
}

inline std::string render_rule(const Rule& rule) {
  std::ostringstream out;
  if (const auto* r = std::get_if<EvolveRule>(&rule.body)) {
    out << '[' << r->trigger << " -> " << render_multiset(r->products) << "]_" << r->label << '^'
        << charge_char(r->charge);
  } else if (const auto* r = std::get_if<SendInRule>(&rule.body)) {
    out << r->outer_object << " []_" << r->label << '^' << charge_char(r->charge) << " -> ["
        << r->inner_object << "]_" << r->label << '^' << charge_char(r->new_charge);
  } else if (const auto* r = std::get_if<SendOutRule>(&rule.body)) {
    out << '[' << r->inner_object << "]_" << r->label << '^' << charge_char(r->charge) << " -> []_"
        << r->label << '^' << charge_char(r->new_charge) << ' ' << r->outer_object;
  } else if (const auto* r = std::get_if<DivideRule>(&rule.body)) {
    out << '[' << r->trigger << "]_" << r->label << '^' << charge_char(r->charge) << " -> ["
        << r->left_object << "]_" << r->label << '^' << charge_char(r->left_charge) << " ["
        << r->right_object << "]_" << r->label << '^' << charge_char(r->right_charge);
  }
  return out.str();
}

// Canonical text form: fixed section order, multisets sorted by object
// name, rules in ordinal order. parse_system(render_system(s)) == s.
inline std::string render_system(const SystemSpec& spec) {
  std::ostringstream out;
  out << "@psys 1\n";
  out << "@objects";
  for (const auto& name : spec.alphabet) out << ' ' << name;
  out << "\n@labels";
  for (const auto& name : spec.labels) out << ' ' << name;
  out << "\n@skin " << spec.skin << '\n';
  for (const auto& [label, init] : spec.inner_init) {
    out << "@inner " << label << " : " << render_multiset(init) << '\n';
  }
  out << "@init " << spec.skin << " : " << render_multiset(spec.skin_init) << '\n';
  if (spec.input_label) out << "@input " << *spec.input_label << '\n';
  out << "@bound " << spec.bound << '\n';
  out << "@rules\n";
  for (const Rule& rule : spec.rules) out << render_rule(rule) << '\n';
  return out.str();
}

}  // namespace psys
