// Command-line front end: validate, decide, compare and generate systems.
//
// Exit codes: 0 accept, 1 reject, 2 invalid system or recognizer,
// 3 bound/budget exceeded, 4 usage or I/O error.

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "psys/psys.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitAccept = 0;
constexpr int kExitReject = 1;
constexpr int kExitInvalid = 2;
constexpr int kExitBound = 3;
constexpr int kExitUsage = 4;

int exit_for(psys::Verdict v) {
  switch (v) {
    case psys::Verdict::Accept: return kExitAccept;
    case psys::Verdict::Reject: return kExitReject;
    case psys::Verdict::InvalidRecognizer: return kExitInvalid;
    case psys::Verdict::BoundExceeded: return kExitBound;
  }
  return kExitUsage;
}

std::optional<std::string> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

bool write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) return false;
  out << text;
  return static_cast<bool>(out);
}

void print_error(const psys::ParseError& e) {
  std::cerr << "error: line " << e.span().line << ", column " << e.span().column << ": expected "
            << e.expected() << "\n";
}

void print_error(const psys::ValidateError& e) {
  std::cerr << "error: ";
  if (e.span()) std::cerr << "line " << e.span()->line << ", column " << e.span()->column << ": ";
  std::cerr << e.what() << "\n";
}

std::optional<psys::SystemSpec> load_system(const std::string& path, int& exit_code) {
  auto text = read_file(path);
  if (!text) {
    std::cerr << "error: cannot read '" << path << "'\n";
    exit_code = kExitUsage;
    return std::nullopt;
  }
  try {
    return psys::parse_system(*text);
  } catch (const psys::ParseError& e) {
    print_error(e);
  } catch (const psys::ValidateError& e) {
    print_error(e);
  } catch (const psys::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
  }
  exit_code = kExitInvalid;
  return std::nullopt;
}

std::int64_t default_budget() {
  if (const char* env = std::getenv("PSYS_BUDGET")) {
    char* end = nullptr;
    long long v = std::strtoll(env, &end, 10);
    if (end && *end == '\0' && v > 0) return v;
  }
  return psys::kDefaultChoiceBudget;
}

int cmd_validate(const std::string& path) {
  int code = kExitUsage;
  auto spec = load_system(path, code);
  if (!spec) return code;
  std::cout << "valid: objects=" << spec->alphabet.size() << " labels=" << spec->labels.size()
            << " inner=" << spec->inner_init.size() << " rules=" << spec->rules.size()
            << " bound=" << spec->bound << "\n";
  return kExitAccept;
}

int cmd_decide(const std::string& path, const std::string& mode, const std::string& input,
               const std::string& trace_path, const std::string& witness_path,
               std::int64_t budget) {
  if (mode != "reference" && mode != "table") {
    std::cerr << "error: --mode must be 'reference' or 'table'\n";
    return kExitUsage;
  }
  if (!trace_path.empty() && mode != "reference") {
    std::cerr << "error: --trace requires --mode reference\n";
    return kExitUsage;
  }
  if (!witness_path.empty() && mode != "table") {
    std::cerr << "error: --witness requires --mode table\n";
    return kExitUsage;
  }

  int code = kExitUsage;
  auto spec = load_system(path, code);
  if (!spec) return code;

  if (!input.empty()) {
    if (!spec->input_label) {
      std::cerr << "error: --input given but the system declares no @input membrane\n";
      return kExitUsage;
    }
    try {
      *spec = psys::with_input(*spec, psys::parse_multiset(input));
    } catch (const psys::ParseError& e) {
      print_error(e);
      return kExitInvalid;
    } catch (const psys::Error& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kExitInvalid;
    }
  }

  try {
    if (mode == "reference") {
      psys::ExhaustiveOptions opts;
      opts.op_budget = budget;
      psys::ExhaustiveResult result = psys::decide_exhaustive(*spec, opts);
      std::cout << "verdict: " << psys::verdict_name(result.verdict) << " (reference)\n";
      if (!trace_path.empty()) {
        std::string jsonl;
        if (result.accepting_trace) jsonl = psys::trace_to_jsonl(*spec, *result.accepting_trace);
        if (!write_file(trace_path, jsonl)) {
          std::cerr << "error: cannot write '" << trace_path << "'\n";
          return kExitUsage;
        }
        if (result.accepting_trace) {
          std::cout << "trace: " << result.accepting_trace->size() << " steps -> " << trace_path
                    << "\n";
        } else {
          std::cout << "trace: no accepting computation, wrote empty file\n";
        }
      }
      return exit_for(result.verdict);
    }

    psys::TableResult result = psys::decide_table(*spec, psys::DecideOptions{budget});
    std::cout << "verdict: " << psys::verdict_name(result.verdict) << " (table)\n";
    if (!witness_path.empty()) {
      std::string body = result.witness ? psys::witness_to_json(*result.witness).dump(2) : "[]";
      if (!write_file(witness_path, body + "\n")) {
        std::cerr << "error: cannot write '" << witness_path << "'\n";
        return kExitUsage;
      }
      if (result.witness) {
        std::cout << "witness: " << result.witness->choices.size() << " choices -> "
                  << witness_path << "\n";
      }
    }
    return exit_for(result.verdict);
  } catch (const psys::BudgetExceededError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBound;
  }
}

int cmd_compare(const std::string& path, std::int64_t budget, int jobs) {
  std::vector<fs::path> files;
  std::error_code ec;
  if (fs::is_directory(path, ec)) {
    for (const auto& entry : fs::directory_iterator(path, ec)) {
      if (entry.path().extension() == ".psys") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
  } else if (fs::exists(path, ec)) {
    files.emplace_back(path);
  }
  if (files.empty()) {
    std::cerr << "error: no .psys files at '" << path << "'\n";
    return kExitUsage;
  }

  psys::CompareOptions opts;
  opts.table_budget = budget;
  opts.reference_budget = budget;

  std::vector<psys::CompareReport> reports(files.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    while (true) {
      std::size_t i = next.fetch_add(1);
      if (i >= files.size()) return;
      psys::CompareReport report;
      report.id = files[i].filename().string();
      auto text = read_file(files[i].string());
      if (!text) {
        report.skipped = true;
        report.skip_reason = "io-error";
      } else {
        try {
          psys::SystemSpec spec = psys::parse_system(*text);
          report = psys::compare(spec, report.id, opts);
        } catch (const psys::Error&) {
          report.skipped = true;
          report.skip_reason = "parse-error";
        }
      }
      reports[i] = std::move(report);
    }
  };
  jobs = std::max(1, jobs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  std::size_t agreed = 0, decided = 0, skipped = 0;
  for (const psys::CompareReport& r : reports) {
    if (r.skipped) {
      ++skipped;
      std::cout << r.id << ": skipped (" << r.skip_reason << ")\n";
      continue;
    }
    ++decided;
    if (r.agree) {
      ++agreed;
      std::cout << r.id << ": agree " << psys::verdict_name(*r.verdict_reference) << "\n";
    } else {
      std::cout << r.id << ": DISAGREE reference=" << psys::verdict_name(*r.verdict_reference)
                << " table=" << psys::verdict_name(*r.verdict_table) << "\n";
    }
  }
  std::cout << agreed << "/" << decided << " agree";
  if (skipped > 0) std::cout << ", " << skipped << " skipped";
  std::cout << "\n";
  return agreed == decided ? kExitAccept : kExitInvalid;
}

int cmd_gen(std::uint64_t seed, int count, const std::string& out_dir, const psys::GenParams& base) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  for (int i = 0; i < count; ++i) {
    psys::GenParams params = base;
    params.seed = seed + static_cast<std::uint64_t>(i);
    psys::SystemSpec spec = psys::generate_system(params);
    fs::path file = fs::path(out_dir) / ("gen_" + std::to_string(params.seed) + ".psys");
    if (!write_file(file.string(), psys::render_system(spec))) {
      std::cerr << "error: cannot write '" << file.string() << "'\n";
      return kExitUsage;
    }
  }
  std::cout << "wrote " << count << " systems to " << out_dir << "\n";
  return kExitAccept;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"simulator and decision toolkit for shallow charged membrane systems"};
  app.require_subcommand(1);

  std::string path, mode{"table"}, input, trace_path, witness_path, out_dir{"."};
  std::int64_t budget = default_budget();
  std::uint64_t seed = 1;
  int count = 1, jobs = 1;
  psys::GenParams gen_params;

  auto* validate = app.add_subcommand("validate", "parse and validate a .psys file");
  validate->add_option("file", path)->required();

  auto* decide = app.add_subcommand("decide", "decide a system");
  decide->add_option("file", path)->required();
  decide->add_option("--mode", mode, "reference|table");
  decide->add_option("--input", input, "multiset for the @input membrane");
  decide->add_option("--trace", trace_path, "write accepting trace JSONL (reference mode)");
  decide->add_option("--witness", witness_path, "write accepting witness JSON (table mode)");
  decide->add_option("--budget", budget, "search budget");

  auto* compare = app.add_subcommand("compare", "cross-validate the two deciders");
  compare->add_option("path", path, ".psys file or directory")->required();
  compare->add_option("--budget", budget, "search budget per decider");
  compare->add_option("--jobs", jobs, "parallel comparisons");

  auto* gen = app.add_subcommand("gen", "generate random systems");
  gen->add_option("--seed", seed, "first seed");
  gen->add_option("--count", count, "number of systems");
  gen->add_option("--out", out_dir, "output directory");
  gen->add_option("--max-inner", gen_params.max_inner);
  gen->add_option("--max-objects", gen_params.max_objects);
  gen->add_option("--max-rules", gen_params.max_rules);
  gen->add_option("--bound", gen_params.bound);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (validate->parsed()) return cmd_validate(path);
    if (decide->parsed()) return cmd_decide(path, mode, input, trace_path, witness_path, budget);
    if (compare->parsed()) return cmd_compare(path, budget, jobs);
    if (gen->parsed()) return cmd_gen(seed, count, out_dir, gen_params);
  } catch (const psys::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
