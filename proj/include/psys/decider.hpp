#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "json.hpp"
#include "psys/choice.hpp"
#include "psys/compiled.hpp"
#include "psys/inner.hpp"
#include "psys/model.hpp"
#include "psys/outer.hpp"
#include "psys/parse.hpp"
#include "psys/reference.hpp"
#include "psys/tables.hpp"

namespace psys {

struct DecideOptions {
  std::int64_t budget = kDefaultChoiceBudget;  // choice-tree nodes
};

struct DecideStats {
  std::uint64_t nodes = 0;
  std::uint64_t leaves = 0;
  std::uint64_t queries = 0;          // consistency questions actually searched
  std::uint64_t query_memo_hits = 0;  // answered from the table digest cache
  QueryStats query;
};

struct TableResult {
  Verdict verdict = Verdict::Reject;
  std::optional<Witness> witness;  // present iff verdict is Accept
  std::optional<InteractionTable> interaction;
  std::optional<UnusedTable> unused;
  std::optional<std::int64_t> halt_time;
  DecideStats stats;
};

namespace detail {

inline bool skin_can_act(const CompiledSystem& cs, const OuterState& state) {
  for (std::size_t obj = 0; obj < cs.object_count(); ++obj) {
    if (state.w[obj] <= 0) continue;
    if (has_skin_evolve(cs, state.charge, static_cast<int>(obj)) ||
        has_skin_sendout(cs, state.charge, static_cast<int>(obj))) {
      return true;
    }
  }
  return false;
}

enum class SkinBranch { ValidYes, ValidNo, Invalid, Bound, Rejected };

struct SkinBranchOutcome {
  SkinBranch kind = SkinBranch::Rejected;
  DenseTables tables;
  std::int64_t halt_time = -1;
};

// Systems without inner membranes reduce to plain skin semantics, which the
// simulation observes completely: a stuck skin, a result that fails to halt
// and a bound overrun are all visible, so each branch classifies exactly
// like a computation of the reference engine.
inline SkinBranchOutcome run_skin_branch(const CompiledSystem& cs, Chooser& chooser) {
  OuterState state = initial_outer_state(cs);
  DenseTables tables(cs);
  for (std::int64_t t = 0; t < cs.bound; ++t) {
    if (!skin_can_act(cs, state)) {
      return SkinBranchOutcome{SkinBranch::Invalid, std::move(tables), -1};  // halted, no result
    }
    OuterStepResult step = simulate_outer_step(cs, state, tables, chooser);
    if (step.rejected) return SkinBranchOutcome{SkinBranch::Rejected, std::move(tables), -1};
    if (step.emitted == cs.yes_obj || step.emitted == cs.no_obj) {
      if (skin_can_act(cs, state)) {
        return SkinBranchOutcome{SkinBranch::Invalid, std::move(tables), t};  // kept running
      }
      return SkinBranchOutcome{
          step.emitted == cs.yes_obj ? SkinBranch::ValidYes : SkinBranch::ValidNo,
          std::move(tables), t};
    }
  }
  return SkinBranchOutcome{skin_can_act(cs, state) ? SkinBranch::Bound : SkinBranch::Invalid,
                           std::move(tables), -1};
}

struct QueryKey {
  std::vector<std::int64_t> interaction;
  std::vector<std::uint8_t> written;
  std::vector<std::int64_t> unused;
  std::int64_t t = 0;
  friend auto operator<=>(const QueryKey&, const QueryKey&) = default;
};

}  // namespace detail

// Table-driven decider: explores the outer simulation's guesses, asks the
// inner-membrane consistency question on every branch that emits a result,
// and accepts iff some emitting branch is consistent with a yes. With no
// consistent branch at all, the decider cannot tell a broken recognizer
// from a too-small bound; it reports InvalidRecognizer when some branch at
// least emitted, BoundExceeded otherwise.
inline TableResult decide_table(const SystemSpec& spec, DecideOptions opts = {}) {
  const CompiledSystem cs = compile(spec);
  Budget budget{opts.budget};
  TableResult result;

  if (cs.initial_inner_count == 0) {
    // pure-skin classification; no consistency question exists to ask
    ExhaustiveChooser chooser(budget);
    bool saw_yes = false, saw_invalid = false, saw_bound = false;
    while (true) {
      chooser.rewind();
      detail::SkinBranchOutcome branch = detail::run_skin_branch(cs, chooser);
      result.stats.leaves += 1;
      switch (branch.kind) {
        case detail::SkinBranch::ValidYes:
          if (!saw_yes) {
            result.witness = chooser.witness();
            result.interaction = interaction_table(branch.tables);
            result.unused = unused_table(branch.tables, cs);
            result.halt_time = branch.halt_time;
          }
          saw_yes = true;
          break;
        case detail::SkinBranch::ValidNo: break;
        case detail::SkinBranch::Invalid: saw_invalid = true; break;
        case detail::SkinBranch::Bound: saw_bound = true; break;
        case detail::SkinBranch::Rejected: break;
      }
      if (!chooser.advance()) break;
    }
    result.stats.nodes = chooser.nodes();
    if (saw_invalid) result.verdict = Verdict::InvalidRecognizer;
    else if (saw_bound) result.verdict = Verdict::BoundExceeded;
    else if (saw_yes) result.verdict = Verdict::Accept;
    else result.verdict = Verdict::Reject;
    if (result.verdict != Verdict::Accept) {
      result.witness.reset();
      result.interaction.reset();
      result.unused.reset();
      result.halt_time.reset();
    }
    return result;
  }

  std::map<detail::QueryKey, std::pair<bool, Witness>> memo;
  bool saw_consistent_no = false, saw_emission = false;
  Witness accepting_inner;
  DenseTables accepting_tables;
  std::int64_t accepting_time = -1;

  auto proc = [&](Chooser& chooser) -> bool {
    std::optional<OuterRunOutcome> out = run_outermost(cs, chooser);
    if (!out) return false;
    saw_emission = true;

    detail::QueryKey key{out->tables.interaction, out->tables.written, out->tables.unused,
                         out->halt_time};
    std::pair<bool, Witness> answer;
    if (auto it = memo.find(key); it != memo.end()) {
      result.stats.query_memo_hits += 1;
      answer = it->second;
    } else {
      result.stats.queries += 1;
      QueryAnswer qa = answer_query(cs, out->tables, out->halt_time, budget);
      result.stats.query.max_stack = std::max(result.stats.query.max_stack, qa.stats.max_stack);
      result.stats.query.stack_limit = std::max(result.stats.query.stack_limit, qa.stats.stack_limit);
      result.stats.query.stack_bound_violations += qa.stats.stack_bound_violations;
      result.stats.query.branches += qa.stats.branches;
      result.stats.query.positive_with_nonzero_table += qa.stats.positive_with_nonzero_table;
      answer = {qa.positive, std::move(qa.witness)};
      memo.emplace(std::move(key), answer);
    }
    if (!answer.first) return false;
    if (out->result == OuterResult::EmitYes) {
      accepting_inner = std::move(answer.second);
      accepting_tables = std::move(out->tables);
      accepting_time = out->halt_time;
      return true;
    }
    saw_consistent_no = true;
    return false;
  };

  ExploreOutcome outcome = explore(proc, budget);
  result.stats.nodes = outcome.nodes;
  result.stats.leaves = outcome.leaves;
  if (outcome.accepted) {
    result.verdict = Verdict::Accept;
    Witness w = std::move(*outcome.witness);
    w.choices.insert(w.choices.end(), accepting_inner.choices.begin(),
                     accepting_inner.choices.end());
    result.witness = std::move(w);
    result.interaction = interaction_table(accepting_tables);
    result.unused = unused_table(accepting_tables, cs);
    result.halt_time = accepting_time;
  } else if (saw_consistent_no) {
    result.verdict = Verdict::Reject;
  } else if (saw_emission) {
    result.verdict = Verdict::InvalidRecognizer;
  } else {
    result.verdict = Verdict::BoundExceeded;
  }
  return result;
}

struct ReplayResult {
  Verdict verdict = Verdict::Reject;  // Accept or Reject of the replayed branch
  std::optional<InteractionTable> interaction;
  std::optional<UnusedTable> unused;
  std::optional<std::int64_t> halt_time;
};

// Deterministically re-runs a recorded witness, reproducing the branch and
// its tables bit for bit.
inline ReplayResult replay_table(const SystemSpec& spec, const Witness& witness) {
  const CompiledSystem cs = compile(spec);
  ReplayChooser chooser(witness);
  ReplayResult out;

  if (cs.initial_inner_count == 0) {
    detail::SkinBranchOutcome branch = detail::run_skin_branch(cs, chooser);
    out.verdict =
        branch.kind == detail::SkinBranch::ValidYes ? Verdict::Accept : Verdict::Reject;
    out.interaction = interaction_table(branch.tables);
    out.unused = unused_table(branch.tables, cs);
    if (branch.halt_time >= 0) out.halt_time = branch.halt_time;
    return out;
  }

  std::optional<OuterRunOutcome> run = run_outermost(cs, chooser);
  if (!run) return out;
  out.interaction = interaction_table(run->tables);
  out.unused = unused_table(run->tables, cs);
  out.halt_time = run->halt_time;
  DenseTables scratch = run->tables;
  bool positive = query_branch(cs, scratch, run->halt_time, chooser);
  out.verdict = positive && run->result == OuterResult::EmitYes ? Verdict::Accept : Verdict::Reject;
  return out;
}

struct CompareOptions {
  std::int64_t table_budget = kDefaultChoiceBudget;
  std::int64_t reference_budget = 10'000'000;
};

struct CompareReport {
  std::string id;
  std::optional<Verdict> verdict_reference;  // absent when its budget ran out
  std::optional<Verdict> verdict_table;
  bool agree = false;
  bool skipped = false;
  std::string skip_reason;
  double ms_reference = 0;
  double ms_table = 0;
  std::optional<Witness> witness;                 // table decider, accepting runs
  std::optional<std::size_t> reference_trace_len; // reference decider, accepting runs
};

// Cross-validates the two deciders. Systems the reference engine cannot
// certify as valid recognizers are out of contract and marked skipped, as
// are budget overruns on either side.
inline CompareReport compare(const SystemSpec& spec, std::string id, CompareOptions opts = {}) {
  CompareReport report;
  report.id = std::move(id);
  using clock = std::chrono::steady_clock;

  auto t0 = clock::now();
  try {
    ExhaustiveOptions ref_opts;
    ref_opts.op_budget = opts.reference_budget;
    ExhaustiveResult ref = decide_exhaustive(spec, ref_opts);
    report.verdict_reference = ref.verdict;
    if (ref.accepting_trace) report.reference_trace_len = ref.accepting_trace->size();
  } catch (const BudgetExceededError&) {
    report.skipped = true;
    report.skip_reason = "reference-budget";
  }
  report.ms_reference = std::chrono::duration<double, std::milli>(clock::now() - t0).count();

  if (report.verdict_reference == Verdict::InvalidRecognizer) {
    report.skipped = true;
    report.skip_reason = "invalid-recognizer";
  } else if (report.verdict_reference == Verdict::BoundExceeded) {
    report.skipped = true;
    report.skip_reason = "bound-exceeded";
  }
  if (report.skipped) return report;

  auto t1 = clock::now();
  try {
    TableResult table = decide_table(spec, DecideOptions{opts.table_budget});
    report.verdict_table = table.verdict;
    report.witness = std::move(table.witness);
  } catch (const BudgetExceededError&) {
    report.skipped = true;
    report.skip_reason = "table-budget";
  }
  report.ms_table = std::chrono::duration<double, std::milli>(clock::now() - t1).count();
  if (report.skipped) return report;

  report.agree = report.verdict_reference == report.verdict_table;
  return report;
}

inline nlohmann::json compare_report_json(const CompareReport& r) {
  nlohmann::json out{{"id", r.id},
                     {"agree", r.agree},
                     {"skipped", r.skipped},
                     {"ms_reference", r.ms_reference},
                     {"ms_table", r.ms_table}};
  if (r.verdict_reference) out["verdict_reference"] = verdict_name(*r.verdict_reference);
  if (r.verdict_table) out["verdict_table"] = verdict_name(*r.verdict_table);
  if (!r.skip_reason.empty()) out["skip_reason"] = r.skip_reason;
  if (r.witness) out["witness"] = witness_to_json(*r.witness);
  if (r.reference_trace_len) out["reference_trace_len"] = *r.reference_trace_len;
  return out;
}

struct GenParams {
  std::uint64_t seed = 1;
  int max_inner = 2;
  int max_objects = 4;
  int max_rules = 8;
  std::int64_t bound = 4;
};

namespace detail {

// Hand-rolled draws keep generated systems byte-identical across
// platforms; std::uniform_int_distribution is not portable.
class GenRng {
 public:
  explicit GenRng(std::uint64_t seed) : gen_(seed * 0x9e3779b97f4a7c15ull + 0x2545f4914f6cdd1dull) {}

  std::int64_t range(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(gen_() % static_cast<std::uint64_t>(hi - lo + 1));
  }
  bool chance(int percent) { return range(1, 100) <= percent; }
  template <typename T>
  const T& pick(const std::vector<T>& v) {
    return v[static_cast<std::size_t>(range(0, static_cast<std::int64_t>(v.size()) - 1))];
  }
  Charge charge(int neutral_percent = 34) {
    if (chance(neutral_percent)) return Charge::Neutral;
    return chance(50) ? Charge::Positive : Charge::Negative;
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace detail

// Deterministic random system: rules are drawn first and the alphabet is
// the set of objects they mention, so every object has a rule touching it.
// Send-out rules for yes and no from the skin always exist. There is no
// recognizer-validity guarantee; the comparison harness filters.
inline SystemSpec generate_system(const GenParams& params) {
  if (params.max_inner < 0 || params.max_objects < 1 || params.max_rules < 3 || params.bound < 1) {
    throw Error("generator parameters out of range");
  }
  detail::GenRng rng(params.seed);

  static const std::vector<std::string> kPool{"a", "b", "c", "d", "g", "p", "q", "r",
                                              "u", "v", "w", "x"};
  std::vector<std::string> pool(kPool.begin(),
                                kPool.begin() + std::min<std::size_t>(kPool.size(),
                                                                      static_cast<std::size_t>(
                                                                          params.max_objects)));

  const int m = params.max_inner == 0 ? 0 : static_cast<int>(rng.range(0, params.max_inner));
  std::vector<std::string> inner_labels;
  for (int i = 0; i < m; ++i) inner_labels.push_back("k" + std::to_string(i + 1));

  std::vector<Rule> rules;
  auto push_rule = [&](Rule::Body body) { rules.push_back(Rule{rules.size(), std::move(body)}); };

  auto draw_product = [&]() -> std::string {
    if (rng.chance(18)) return kYes;
    if (rng.chance(10)) return kNo;
    return rng.pick(pool);
  };

  const int extras = static_cast<int>(rng.range(1, params.max_rules - 2));
  for (int i = 0; i < extras; ++i) {
    int roll = static_cast<int>(rng.range(1, 100));
    if (m == 0) roll = roll <= 65 ? 10 : 90;  // evolve or an extra skin send-out
    if (roll <= 34) {
      // evolve
      std::string label = (m > 0 && rng.chance(45)) ? rng.pick(inner_labels) : "h";
      Multiset products;
      int len = static_cast<int>(rng.range(0, 2));
      for (int p = 0; p < len; ++p) products.add(rng.pick(pool), 1);
      push_rule(EvolveRule{label, rng.charge(55), rng.pick(pool), products});
    } else if (roll <= 54 && m > 0) {
      // send-in
      push_rule(SendInRule{rng.pick(inner_labels), rng.pick(pool), rng.charge(55), rng.pick(pool),
                           rng.charge()});
    } else if (roll <= 76 && m > 0) {
      // send-out from an inner membrane
      push_rule(SendOutRule{rng.pick(inner_labels), rng.charge(55), rng.pick(pool), rng.charge(),
                            draw_product()});
    } else if (roll <= 90 && m > 0) {
      // division
      push_rule(DivideRule{rng.pick(inner_labels), rng.charge(55), rng.pick(pool), rng.charge(),
                           rng.pick(pool), rng.charge(), rng.pick(pool)});
    } else {
      // extra skin send-out of a plain object
      push_rule(SendOutRule{"h", rng.charge(55), rng.pick(pool), rng.charge(), rng.pick(pool)});
    }
  }
  push_rule(SendOutRule{"h", rng.charge(60), rng.pick(pool), rng.charge(), kYes});
  push_rule(SendOutRule{"h", rng.charge(60), rng.pick(pool), rng.charge(), kNo});

  SystemSpec spec;
  spec.skin = "h";
  spec.labels.insert("h");
  for (const std::string& label : inner_labels) spec.labels.insert(label);
  spec.rules = std::move(rules);
  spec.bound = params.bound;

  spec.alphabet.insert(kYes);
  spec.alphabet.insert(kNo);
  std::vector<std::string> mentioned;
  auto mention = [&](const std::string& name) {
    if (spec.alphabet.insert(name).second && name != kYes && name != kNo) {
      mentioned.push_back(name);
    }
  };
  for (const Rule& rule : spec.rules) {
    if (const auto* r = std::get_if<EvolveRule>(&rule.body)) {
      mention(r->trigger);
      for (const auto& [name, n] : r->products.entries()) {
        mention(name);
        (void)n;
      }
    } else if (const auto* r = std::get_if<SendInRule>(&rule.body)) {
      mention(r->outer_object);
      mention(r->inner_object);
    } else if (const auto* r = std::get_if<SendOutRule>(&rule.body)) {
      mention(r->inner_object);
      mention(r->outer_object);
    } else if (const auto* r = std::get_if<DivideRule>(&rule.body)) {
      mention(r->trigger);
      mention(r->left_object);
      mention(r->right_object);
    }
  }
  std::sort(mentioned.begin(), mentioned.end());

  for (const std::string& obj : mentioned) {
    int roll = static_cast<int>(rng.range(1, 100));
    if (roll > 55) spec.skin_init.add(obj, roll > 80 ? 2 : 1);
  }
  for (const std::string& label : inner_labels) {
    Multiset init;
    for (const std::string& obj : mentioned) {
      int roll = static_cast<int>(rng.range(1, 100));
      if (roll > 60) init.add(obj, roll > 88 ? 2 : 1);
    }
    spec.inner_init.emplace_back(label, std::move(init));
  }

  validate_system(spec);
  return spec;
}

// Human-oriented JSONL trace of a reference computation: one line per step
// listing the rule applications and a summary of the reached configuration.
inline std::string trace_to_jsonl(const SystemSpec& spec, const std::vector<StepTrace>& trace) {
  (void)spec;
  std::string out;
  for (const StepTrace& step : trace) {
    nlohmann::json apps = nlohmann::json::array();
    auto add_app = [&](const std::string& membrane, std::size_t rule, std::int64_t count) {
      if (count != 0) apps.push_back({{"membrane", membrane}, {"rule", rule}, {"count", count}});
    };
    if (step.assignment.skin.blocking) add_app("skin", *step.assignment.skin.blocking, 1);
    for (const auto& [rule, n] : step.assignment.skin.evolve) add_app("skin", rule, n);
    for (std::size_t g = 0; g < step.assignment.groups.size(); ++g) {
      const GroupAssignment& group = step.assignment.groups[g];
      std::string name = group.instance.label + "[" + std::to_string(g) + "]";
      for (const auto& [beh, count] : group.behaviors) {
        if (beh.blocking) add_app(name, *beh.blocking, count);
        for (const auto& [rule, n] : beh.evolve) add_app(name, rule, n * count);
      }
    }
    std::string summary = "env{" + render_multiset(step.after.env) + "} " +
                          step.after.skin.label + "^" +
                          std::string(1, charge_char(step.after.skin.charge)) + "{" +
                          render_multiset(step.after.skin.contents) + "}";
    for (const auto& [inst, count] : step.after.inner) {
      summary += " " + inst.label + "^" + std::string(1, charge_char(inst.charge)) + "{" +
                 render_multiset(inst.contents) + "}";
      if (count > 1) summary += "*" + std::to_string(count);
    }
    nlohmann::json line{{"time", step.time}, {"applications", apps}, {"config", summary}};
    out += line.dump();
    out += '\n';
  }
  return out;
}

}  // namespace psys
