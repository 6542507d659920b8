#pragma once

// Convergence sweep over a range [lo, hi] of starting values with
// checkpoint/resume. Chunks of the range are handed out in ascending order
// to a worker pool; a chunk counts as verified only once every chunk below
// it is, which is what makes the below-floor early exit sound.
//
// Per start value n the orbit is followed only until it drops below n
// (values below n are verified by induction). Statistics still need the
// full stopping time and peak:
//   - steps: the remainder is looked up in a shared table of already
//     finished starts, or walked until a tabulated value or 1 is hit;
//   - peak: if the drop lands inside the range, the rest of the orbit is
//     the orbit of a smaller start m >= lo, whose peak is already counted,
//     so the range maximum (and its smallest argument) is unaffected. If
//     the drop lands below lo the orbit is followed to 1.

#include "collatz_lab/core_map.hpp"
#include "collatz_lab/json_io.hpp"
#include "collatz_lab/report.hpp"

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

namespace collatz_lab {

inline constexpr int kCheckpointSchemaVersion = 1;
inline constexpr std::uint64_t kDefaultChunkSize = std::uint64_t{1} << 16;
inline constexpr std::size_t kDefaultSweepBudget = 1'000'000;
inline constexpr std::uint64_t kDefaultMemoEntries = std::uint64_t{1} << 24;

struct SweepStats {
  std::uint64_t observed = 0;
  std::size_t max_steps = 0;
  std::uint64_t max_steps_at = 0;
  Nat max_peak = 0;
  std::uint64_t max_peak_at = 0;

  template <Natural T>
  void observe(std::uint64_t n, std::size_t steps, const T& peak) {
    if (observed == 0 || steps > max_steps || (steps == max_steps && n < max_steps_at)) {
      max_steps = steps;
      max_steps_at = n;
    }
    if (observed == 0 || peak > max_peak || (peak == max_peak && n < max_peak_at)) {
      max_peak = peak;
      max_peak_at = n;
    }
    ++observed;
  }

  // Associative and commutative; ties go to the smaller argument.
  void merge(const SweepStats& o) {
    if (o.observed == 0) return;
    if (observed == 0) {
      *this = o;
      return;
    }
    if (o.max_steps > max_steps || (o.max_steps == max_steps && o.max_steps_at < max_steps_at)) {
      max_steps = o.max_steps;
      max_steps_at = o.max_steps_at;
    }
    if (o.max_peak > max_peak || (o.max_peak == max_peak && o.max_peak_at < max_peak_at)) {
      max_peak = o.max_peak;
      max_peak_at = o.max_peak_at;
    }
    observed += o.observed;
  }

  friend bool operator==(const SweepStats&, const SweepStats&) = default;
};

struct Checkpoint {
  int schema_version = kCheckpointSchemaVersion;
  std::string task = "verify-range";
  std::uint64_t lo = 1;
  std::uint64_t hi = 1;
  std::uint64_t chunk_size = kDefaultChunkSize;
  std::size_t budget = kDefaultSweepBudget;
  std::uint64_t verified_up_to = 1;
  SweepStats stats;
  std::vector<Finding> violations;
  std::vector<Finding> inconclusive;
  std::string timestamp;
};

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline ordered_json stats_to_json(const SweepStats& s) {
  return {{"observed", s.observed},
          {"max_steps", s.max_steps},
          {"max_steps_at", s.max_steps_at},
          {"max_peak", nat_to_json(s.max_peak)},
          {"max_peak_at", s.max_peak_at}};
}

inline SweepStats stats_from_json(const ordered_json& j) {
  SweepStats s;
  s.observed = j.at("observed").get<std::uint64_t>();
  s.max_steps = j.at("max_steps").get<std::size_t>();
  s.max_steps_at = j.at("max_steps_at").get<std::uint64_t>();
  s.max_peak = nat_from_json(j.at("max_peak"));
  s.max_peak_at = j.at("max_peak_at").get<std::uint64_t>();
  return s;
}

inline ordered_json to_json(const Checkpoint& c) {
  ordered_json j;
  j["schema_version"] = c.schema_version;
  j["task"] = c.task;
  j["range"] = {c.lo, c.hi};
  j["chunk_size"] = c.chunk_size;
  j["budget"] = c.budget;
  j["verified_up_to"] = c.verified_up_to;
  j["stats"] = stats_to_json(c.stats);
  j["violations"] = findings_to_json(c.violations);
  j["inconclusive"] = findings_to_json(c.inconclusive);
  j["timestamp"] = c.timestamp;
  return j;
}

inline Checkpoint checkpoint_from_json(const std::string& text) {
  Checkpoint c;
  try {
    auto j = ordered_json::parse(text);
    c.schema_version = j.at("schema_version").get<int>();
    if (c.schema_version != kCheckpointSchemaVersion) throw CheckpointError("unsupported checkpoint schema_version");
    c.task = j.at("task").get<std::string>();
    c.lo = j.at("range").at(0).get<std::uint64_t>();
    c.hi = j.at("range").at(1).get<std::uint64_t>();
    c.chunk_size = j.at("chunk_size").get<std::uint64_t>();
    c.budget = j.at("budget").get<std::size_t>();
    c.verified_up_to = j.at("verified_up_to").get<std::uint64_t>();
    c.stats = stats_from_json(j.at("stats"));
    c.violations = findings_from_json(j.at("violations"));
    c.inconclusive = findings_from_json(j.at("inconclusive"));
    c.timestamp = j.value("timestamp", "");
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("malformed checkpoint: ") + e.what());
  }
  if (c.lo == 0 || c.lo > c.verified_up_to || c.verified_up_to > c.hi)
    throw CheckpointError("checkpoint violates lo <= verified_up_to <= hi");
  return c;
}

struct SweepConfig {
  std::uint64_t lo = 1;
  std::uint64_t hi = 1;
  unsigned workers = 1;
  std::uint64_t chunk_size = kDefaultChunkSize;
  std::size_t budget = kDefaultSweepBudget;
  std::optional<std::filesystem::path> checkpoint;
  bool resume = false;
  // Stop after this many chunks in this invocation (leaves a resumable checkpoint).
  std::optional<std::uint64_t> max_chunks;
  std::uint64_t memo_entries = kDefaultMemoEntries;
};

struct SweepResult {
  RangeReport report;
  SweepStats stats;
  std::uint64_t verified_up_to = 0;

  bool complete() const { return report.complete(); }
};

namespace sweep_detail {

enum class Verdict : std::uint8_t { Converged, Violation, Inconclusive };

template <Natural T>
struct Evaluation {
  Verdict verdict = Verdict::Converged;
  std::size_t steps = 0;
  T peak{};
  const char* detail = "";
};

// Stopping times of finished starts in [lo, lo + size), stored as steps + 1
// so that 0 means unknown. Relaxed atomics suffice: a missing entry only
// costs a longer walk, never a different answer.
class StepTable {
 public:
  StepTable(std::uint64_t lo, std::uint64_t hi, std::uint64_t max_entries)
      : lo_(lo), size_(std::min<std::uint64_t>(hi - lo + 1, max_entries)), cells_(size_) {}

  template <Natural T>
  std::optional<std::size_t> lookup(const T& v) const {
    if (v < lo_ || v - lo_ >= size_) return std::nullopt;
    auto idx = static_cast<std::uint64_t>(T(v - lo_));
    std::uint32_t s = cells_[idx].load(std::memory_order_relaxed);
    if (s == 0) return std::nullopt;
    return s - 1;
  }

  void store(std::uint64_t n, std::size_t steps) {
    if (n < lo_ || n - lo_ >= size_ || steps >= 0xffffffffu) return;
    cells_[n - lo_].store(static_cast<std::uint32_t>(steps + 1), std::memory_order_relaxed);
  }

 private:
  std::uint64_t lo_;
  std::uint64_t size_;
  std::vector<std::atomic<std::uint32_t>> cells_;
};

template <Natural T>
Evaluation<T> evaluate(std::uint64_t start, std::uint64_t lo, std::size_t budget, const StepTable& table) {
  Evaluation<T> e;
  const T n(start);
  T v = n;
  e.peak = n;
  if (v == 1) return e;

  // Follow the orbit until it drops below the start.
  while (true) {
    if (e.steps == budget) {
      e.verdict = Verdict::Inconclusive;
      e.detail = "step budget exhausted before dropping below start";
      return e;
    }
    v = step(v).value;
    ++e.steps;
    if (v > e.peak) e.peak = v;
    if (v < n) break;
    if (v == n) {
      e.verdict = Verdict::Violation;
      e.detail = "orbit returns to its start: nontrivial cycle";
      return e;
    }
  }

  const bool drop_in_range = v >= lo;
  while (v != 1) {
    if (drop_in_range) {
      if (auto known = table.lookup(v)) {
        e.steps += *known;
        break;
      }
    }
    if (e.steps == budget) {
      e.verdict = Verdict::Inconclusive;
      e.detail = "step budget exhausted while completing stopping time";
      return e;
    }
    v = step(v).value;
    ++e.steps;
    if (!drop_in_range && v > e.peak) e.peak = v;
  }
  if (e.steps > budget) {
    e.verdict = Verdict::Inconclusive;
    e.detail = "stopping time exceeds step budget";
  }
  return e;
}

struct ChunkResult {
  SweepStats stats;
  std::vector<Finding> violations;
  std::vector<Finding> inconclusive;
};

template <Natural T>
void record(ChunkResult& out, StepTable& table, std::uint64_t n, const Evaluation<T>& e) {
  switch (e.verdict) {
    case Verdict::Converged:
      out.stats.observe(n, e.steps, e.peak);
      table.store(n, e.steps);
      break;
    case Verdict::Violation:
      out.violations.push_back({n, e.detail});
      break;
    case Verdict::Inconclusive:
      out.inconclusive.push_back({n, e.detail});
      break;
  }
}

inline ChunkResult run_chunk(std::uint64_t first, std::uint64_t last, std::uint64_t lo, std::size_t budget,
                             StepTable& table) {
  ChunkResult out;
  for (std::uint64_t n = first;; ++n) {
    try {
      record(out, table, n, evaluate<std::uint64_t>(n, lo, budget, table));
    } catch (const std::overflow_error&) {
      record(out, table, n, evaluate<Nat>(n, lo, budget, table));
    }
    if (n == last) break;
  }
  return out;
}

}  // namespace sweep_detail

/// Verifies convergence to 1 for every start in [lo, hi].
inline SweepResult run_sweep(const SweepConfig& cfg) {
  if (cfg.lo == 0 || cfg.lo > cfg.hi) throw std::invalid_argument("collatz_lab::run_sweep: need 1 <= lo <= hi");
  if (cfg.chunk_size == 0) throw std::invalid_argument("collatz_lab::run_sweep: chunk size must be positive");
  if (cfg.resume && !cfg.checkpoint) throw std::invalid_argument("collatz_lab::run_sweep: --resume needs a checkpoint path");
  auto started = std::chrono::steady_clock::now();

  Checkpoint state;
  state.lo = cfg.lo;
  state.hi = cfg.hi;
  state.chunk_size = cfg.chunk_size;
  state.budget = cfg.budget;
  bool any_verified = false;

  if (cfg.resume && std::filesystem::exists(*cfg.checkpoint)) {
    Checkpoint saved = checkpoint_from_json(read_file(*cfg.checkpoint));
    if (saved.task != state.task || saved.lo != cfg.lo || saved.hi != cfg.hi || saved.chunk_size != cfg.chunk_size ||
        saved.budget != cfg.budget)
      throw CheckpointError("checkpoint was written for a different task, range, chunk size or budget");
    if (saved.verified_up_to != cfg.hi && (saved.verified_up_to - cfg.lo + 1) % cfg.chunk_size != 0)
      throw CheckpointError("checkpoint does not end on a chunk boundary");
    state = std::move(saved);
    any_verified = true;
  }

  const std::uint64_t span = cfg.hi - cfg.lo + 1;
  const std::uint64_t total_chunks = span / cfg.chunk_size + (span % cfg.chunk_size != 0);
  const std::uint64_t first_chunk = !any_verified              ? 0
                                   : state.verified_up_to == cfg.hi ? total_chunks
                                                                    : (state.verified_up_to - cfg.lo + 1) / cfg.chunk_size;
  std::uint64_t end_chunk = total_chunks;
  if (cfg.max_chunks) end_chunk = std::min(total_chunks, first_chunk + *cfg.max_chunks);

  auto chunk_bounds = [&](std::uint64_t c) {
    std::uint64_t first = cfg.lo + c * cfg.chunk_size;
    std::uint64_t last = c + 1 == total_chunks ? cfg.hi : first + cfg.chunk_size - 1;
    return std::pair{first, last};
  };

  sweep_detail::StepTable table(cfg.lo, cfg.hi, cfg.memo_entries);
  std::mutex mu;
  std::condition_variable done_cv;
  std::map<std::uint64_t, sweep_detail::ChunkResult> finished;
  std::exception_ptr failure;
  std::atomic<std::uint64_t> next_chunk{first_chunk};

  auto worker = [&] {
    for (std::uint64_t c; (c = next_chunk.fetch_add(1)) < end_chunk;) {
      try {
        auto [first, last] = chunk_bounds(c);
        auto result = sweep_detail::run_chunk(first, last, cfg.lo, cfg.budget, table);
        std::lock_guard lock(mu);
        finished.emplace(c, std::move(result));
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
        next_chunk.store(end_chunk);
      }
      done_cv.notify_one();
    }
  };

  std::vector<std::jthread> pool;
  const unsigned workers = std::max(1u, cfg.workers);
  if (first_chunk < end_chunk) {
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  }

  // This thread is the only checkpoint writer. It folds chunks in strictly
  // ascending order and snapshots after each one.
  try {
    for (std::uint64_t c = first_chunk; c < end_chunk; ++c) {
      sweep_detail::ChunkResult result;
      {
        std::unique_lock lock(mu);
        done_cv.wait(lock, [&] { return failure || finished.contains(c); });
        if (failure) break;
        result = std::move(finished.at(c));
        finished.erase(c);
      }
      state.stats.merge(result.stats);
      state.violations.insert(state.violations.end(), result.violations.begin(), result.violations.end());
      state.inconclusive.insert(state.inconclusive.end(), result.inconclusive.begin(), result.inconclusive.end());
      state.verified_up_to = chunk_bounds(c).second;
      any_verified = true;
      if (cfg.checkpoint) {
        state.timestamp = utc_timestamp();
        write_file_atomically(*cfg.checkpoint, to_json(state).dump(2) + "\n");
      }
    }
  } catch (...) {
    next_chunk.store(end_chunk);
    throw;
  }
  pool.clear();
  if (failure) std::rethrow_exception(failure);

  SweepResult out;
  out.stats = state.stats;
  out.verified_up_to = any_verified ? state.verified_up_to : cfg.lo - 1;
  out.report.fact_id = "convergence";
  out.report.lo = cfg.lo;
  out.report.hi = cfg.hi;
  out.report.checked = any_verified ? out.verified_up_to - cfg.lo + 1 : 0;
  out.report.violations = std::move(state.violations);
  out.report.inconclusive = std::move(state.inconclusive);
  out.report.elapsed = std::chrono::steady_clock::now() - started;
  return out;
}

inline ordered_json to_json(const SweepResult& r, bool include_timing = false) {
  ordered_json j = to_json(r.report, include_timing);
  j["verified_up_to"] = r.verified_up_to;
  j["stats"] = stats_to_json(r.stats);
  return j;
}

}  // namespace collatz_lab
