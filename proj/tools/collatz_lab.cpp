// collatz-lab: command-line front end for the collatz_lab library.
//
// Exit codes: 0 success, 1 violation or witness found, 2 usage or I/O error.

#include <collatz_lab/collatz_lab.hpp>

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>

namespace {

using namespace collatz_lab;

constexpr int kExitOk = 0;
constexpr int kExitViolation = 1;
constexpr int kExitUsage = 2;

struct Common {
  bool json = false;
  bool strict = false;
  bool force = false;
  unsigned workers = default_workers();
  std::size_t budget = kDefaultBudget;
  std::string out;
};

void add_common(CLI::App* cmd, Common& c, bool with_workers) {
  cmd->add_flag("--json", c.json, "Machine-readable JSON output");
  cmd->add_option("--budget", c.budget, "Step budget per orbit")->check(CLI::PositiveNumber);
  cmd->add_flag("--strict", c.strict, "Treat inconclusive (budget-limited) results as failures");
  if (with_workers) {
    cmd->add_option("--workers", c.workers, "Worker threads")->envname("COLLATZ_LAB_WORKERS")->check(CLI::PositiveNumber);
  }
}

void add_output(CLI::App* cmd, Common& c) {
  cmd->add_option("--out", c.out, "Also write the output to this file");
  cmd->add_flag("--force", c.force, "Write --out even when the run failed");
}

// Prints the text and, when requested, writes it to --out. Files are only
// written for successful runs unless --force.
int emit(const Common& c, const std::string& text, int rc) {
  std::cout << text;
  if (!c.out.empty() && (rc == kExitOk || c.force)) write_file_atomically(c.out, text);
  return rc;
}

template <class R>
std::string join(const std::vector<R>& items, std::string_view sep) {
  std::ostringstream os;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) os << sep;
    os << items[i];
  }
  return os.str();
}

template <class TrajectoryT>
std::string render_trajectory(const TrajectoryT& t, bool reduced, bool json) {
  if (json) {
    ordered_json j;
    j["schema_version"] = kReportSchemaVersion;
    j["map"] = reduced ? "reduced" : "shortcut";
    j["start"] = nat_to_json(t.start);
    j["values"] = ordered_json::array();
    for (const auto& v : t.values) j["values"].push_back(nat_to_json(v));
    j["rules"] = ordered_json::array();
    for (auto r : t.rules) j["rules"].push_back(std::string(to_string(r)));
    j["steps"] = t.steps;
    j["peak"] = nat_to_json(t.peak);
    j["final"] = nat_to_json(t.final_value);
    j["reached_target"] = t.reached_target;
    j["truncated"] = t.truncated;
    return j.dump(2) + "\n";
  }
  std::ostringstream os;
  if (t.truncated) {
    os << "(sequence longer than the storage cap; values omitted)\n";
  } else {
    os << join(t.values, ", ") << "\n";
    os << "rules: " << join(t.rules, ", ") << "\n";
  }
  os << "steps: " << t.steps << "\n";
  os << "peak: " << t.peak << "\n";
  if (!t.reached_target) os << "target not reached within budget (stopped at " << t.final_value << ")\n";
  return os.str();
}

int cmd_trajectory(const std::string& n_text, bool reduced, const Common& c) {
  Nat n = parse_nat(n_text);
  if (reduced) {
    auto t = reduced_orbit(n, c.budget);
    return emit(c, render_trajectory(t, true, c.json), !t.reached_target && c.strict ? kExitViolation : kExitOk);
  }
  auto t = orbit(n, c.budget, Nat(1));
  return emit(c, render_trajectory(t, false, c.json), !t.reached_target && c.strict ? kExitViolation : kExitOk);
}

std::string render_report_text(const RangeReport& r) {
  std::ostringstream os;
  os << r.fact_id << " [" << r.lo << ", " << r.hi << "]: checked " << r.checked << (r.complete() ? "" : " (partial)")
     << ", violations " << r.violations.size() << ", inconclusive " << r.inconclusive.size() << ", "
     << r.elapsed.count() << " s\n";
  for (const auto& v : r.violations) os << "  violation at " << v.x << ": " << v.detail << "\n";
  for (const auto& v : r.inconclusive) os << "  inconclusive at " << v.x << ": " << v.detail << "\n";
  return os.str();
}

int report_exit(const RangeReport& r, bool strict) {
  if (!r.violations.empty()) return kExitViolation;
  if (strict && !r.inconclusive.empty()) return kExitViolation;
  return kExitOk;
}

struct RangeArgs {
  std::string lo;
  std::string hi;
};

std::pair<std::uint64_t, std::uint64_t> parse_range(const RangeArgs& a) {
  std::uint64_t lo = parse_u64(a.lo);
  std::uint64_t hi = parse_u64(a.hi);
  if (lo < 1 || lo > hi) throw std::invalid_argument("range must satisfy 1 <= lo <= hi");
  return {lo, hi};
}

int cmd_verify_range(const RangeArgs& range, const Common& c, const std::string& checkpoint, bool resume,
                     std::uint64_t chunk_size, std::optional<std::uint64_t> max_chunks) {
  auto [lo, hi] = parse_range(range);
  SweepConfig cfg;
  cfg.lo = lo;
  cfg.hi = hi;
  cfg.workers = c.workers;
  cfg.budget = c.budget;
  cfg.chunk_size = chunk_size;
  cfg.resume = resume;
  cfg.max_chunks = max_chunks;
  if (!checkpoint.empty()) cfg.checkpoint = checkpoint;

  SweepResult result = run_sweep(cfg);
  int rc = report_exit(result.report, c.strict);
  if (c.json) return emit(c, to_json(result).dump(2) + "\n", rc);

  std::ostringstream os;
  os << render_report_text(result.report);
  os << "verified_up_to: " << result.verified_up_to << "\n";
  os << "max_steps: " << result.stats.max_steps << " at " << result.stats.max_steps_at << "\n";
  os << "max_peak: " << result.stats.max_peak << " at " << result.stats.max_peak_at << "\n";
  return emit(c, os.str(), rc);
}

std::vector<RangeReport> run_suite(const std::string& suite, std::uint64_t lo, std::uint64_t hi, const Common& c) {
  std::vector<RangeReport> reports;
  const bool all = suite == "all";
  if (all || suite == "predecessors") reports.push_back(verify_predecessor_structure(lo, hi, c.workers));
  if (all || suite == "transitions") reports.push_back(verify_transitions(lo, hi, c.workers));
  if (all || suite == "reduction") reports.push_back(verify_reduction(lo, hi, c.budget, c.workers));
  if (all || suite == "fact5") reports.push_back(verify_range("fact5", lo, hi, check_small_cycles, c.workers));
  if (all || suite == "fact7") {
    std::size_t budget = c.budget;
    reports.push_back(
        verify_range("fact7", lo, hi, [budget](std::uint64_t x) { return check_c0_chain(x, budget); }, c.workers));
  }
  return reports;
}

int cmd_facts(const std::string& suite, const RangeArgs& range, const Common& c) {
  auto [lo, hi] = parse_range(range);
  auto reports = run_suite(suite, lo, hi, c);
  int rc = kExitOk;
  for (const auto& r : reports) rc = std::max(rc, report_exit(r, c.strict));

  if (c.json) {
    ordered_json j;
    j["schema_version"] = kReportSchemaVersion;
    j["suite"] = suite;
    j["reports"] = ordered_json::array();
    for (const auto& r : reports) j["reports"].push_back(to_json(r));
    return emit(c, j.dump(2) + "\n", rc);
  }
  std::string text;
  for (const auto& r : reports) text += render_report_text(r);
  return emit(c, text, rc);
}

int cmd_tree(bool reduced, std::optional<std::uint64_t> root, std::optional<std::uint64_t> max_value,
             std::optional<std::size_t> max_depth, bool dot, const Common& c) {
  Flavor flavor = reduced ? Flavor::Reduced : Flavor::Full;
  Tree tree = build_tree(flavor, root.value_or(reduced ? 2 : 1), TreeLimits{max_depth, max_value});
  if (c.json && dot) throw std::invalid_argument("choose one of --dot and --json");
  std::string text = c.json ? export_json(tree) + "\n" : export_dot(tree);
  return emit(c, text, kExitOk);
}

bool in_trivial_family(const CycleCandidate& cand) { return cand.x == 1 || cand.x == 2; }

int cmd_cycles(unsigned max_len, const Common& c) {
  auto found = search_cycles(max_len, c.workers);
  bool only_trivial = std::all_of(found.begin(), found.end(), in_trivial_family);
  int rc = only_trivial ? kExitOk : kExitViolation;

  if (c.json) {
    ordered_json j;
    j["schema_version"] = kReportSchemaVersion;
    j["max_len"] = max_len;
    j["candidates"] = ordered_json::array();
    for (const auto& cand : found) {
      j["candidates"].push_back(
          {{"k", cand.seq.k()}, {"sequence", cand.seq.str()}, {"x", nat_to_json(cand.x)}, {"simple", cand.simple}});
    }
    j["only_trivial_cycle"] = only_trivial;
    return emit(c, j.dump(2) + "\n", rc);
  }
  std::ostringstream os;
  for (const auto& cand : found) {
    os << "k=" << cand.seq.k() << " " << cand.seq.str() << " x=" << cand.x << (cand.simple ? " simple" : " non-simple")
       << "\n";
  }
  os << found.size() << " consistent candidates up to length " << max_len << "; "
     << (only_trivial ? "all belong to the 1-2 cycle" : "NEW CYCLE FOUND") << "\n";
  return emit(c, os.str(), rc);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Shortcut Collatz map laboratory: orbits, range verification, residue-class facts, trees, cycles"};
  app.require_subcommand(1);

  Common common;
  RangeArgs range;

  auto* traj = app.add_subcommand("trajectory", "Print the orbit of N under T (or T' with --reduced)");
  std::string n_text;
  bool reduced = false;
  traj->add_option("n", n_text, "Starting value")->required();
  traj->add_flag("--reduced", reduced, "Iterate the reduced map on class [2]");
  add_common(traj, common, false);
  add_output(traj, common);

  auto* verify = app.add_subcommand("verify-range", "Check that every start in [LO, HI] reaches 1");
  std::string checkpoint;
  bool resume = false;
  std::uint64_t chunk_size = kDefaultChunkSize;
  std::optional<std::uint64_t> max_chunks;
  verify->add_option("lo", range.lo, "First start")->required();
  verify->add_option("hi", range.hi, "Last start")->required();
  verify->add_option("--checkpoint", checkpoint, "Checkpoint file (JSON, replaced atomically per chunk)");
  verify->add_flag("--resume", resume, "Continue from --checkpoint");
  verify->add_option("--chunk-size", chunk_size, "Starts per chunk")->check(CLI::PositiveNumber);
  verify->add_option("--max-chunks", max_chunks, "Stop after this many chunks (resumable)");
  add_common(verify, common, true);
  add_output(verify, common);

  auto* facts = app.add_subcommand("facts", "Verify residue-class facts over [LO, HI]");
  std::string suite;
  facts->add_option("suite", suite, "Suite to run")
      ->required()
      ->check(CLI::IsMember({"predecessors", "transitions", "reduction", "fact5", "fact7", "all"}));
  facts->add_option("lo", range.lo, "First value")->required();
  facts->add_option("hi", range.hi, "Last value")->required();
  add_common(facts, common, true);
  add_output(facts, common);

  auto* tree = app.add_subcommand("tree", "Build the backward tree and export it as DOT or JSON");
  std::optional<std::uint64_t> root, max_value;
  std::optional<std::size_t> max_depth;
  bool dot = false;
  bool tree_reduced = false;
  tree->add_flag("--reduced", tree_reduced, "Reduced tree on class [2] (root 2)");
  tree->add_option("--root", root, "Root vertex (default 1, or 2 with --reduced)");
  tree->add_option("--max-value", max_value, "Value cap");
  tree->add_option("--max-depth", max_depth, "Depth cap");
  tree->add_flag("--dot", dot, "DOT output (default)");
  tree->add_flag("--json", common.json, "JSON output");
  add_output(tree, common);

  auto* cycles = app.add_subcommand("cycles", "Exhaustive search for cycles of T by rule word");
  unsigned max_len = 20;
  cycles->add_option("--max-len", max_len, "Longest rule word to enumerate (1..30)");
  add_common(cycles, common, true);
  add_output(cycles, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*traj) return cmd_trajectory(n_text, reduced, common);
    if (*verify) return cmd_verify_range(range, common, checkpoint, resume, chunk_size, max_chunks);
    if (*facts) return cmd_facts(suite, range, common);
    if (*tree) return cmd_tree(tree_reduced, root, max_value, max_depth, dot, common);
    if (*cycles) return cmd_cycles(max_len, common);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
