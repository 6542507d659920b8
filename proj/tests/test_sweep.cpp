#include <collatz_lab/sweep.hpp>

#include <gtest/gtest.h>

#include <filesystem>

using namespace collatz_lab;

namespace {

// Full-orbit oracle for the sweep statistics.
SweepStats brute_stats(std::uint64_t lo, std::uint64_t hi) {
  SweepStats s;
  for (std::uint64_t n = lo; n <= hi; ++n) {
    std::uint64_t v = n, peak = n;
    std::size_t steps = 0;
    while (v != 1) {
      v = v % 2 == 0 ? v / 2 : (3 * v + 1) / 2;
      peak = std::max(peak, v);
      ++steps;
    }
    s.observe(n, steps, peak);
  }
  return s;
}

class TempDir {
 public:
  TempDir() : path_(std::filesystem::temp_directory_path() / ("collatz_lab_test_" + std::to_string(::getpid()))) {
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

SweepConfig config(std::uint64_t lo, std::uint64_t hi, unsigned workers, std::uint64_t chunk = 4096) {
  SweepConfig c;
  c.lo = lo;
  c.hi = hi;
  c.workers = workers;
  c.chunk_size = chunk;
  return c;
}

}  // namespace

TEST(Sweep, SingleStartTwentySeven) {
  auto r = run_sweep(config(27, 27, 1));
  EXPECT_TRUE(r.complete());
  EXPECT_TRUE(r.report.holds());
  EXPECT_EQ(r.stats.max_steps, 70u);
  EXPECT_EQ(r.stats.max_peak, 4616);
  EXPECT_EQ(r.stats.max_steps_at, 27u);
}

TEST(Sweep, StatsMatchFullOrbitOracle) {
  for (auto [lo, hi] : {std::pair<std::uint64_t, std::uint64_t>{1, 50000}, {1000, 60000}, {30001, 30500}}) {
    auto r = run_sweep(config(lo, hi, 1, 1000));
    auto expected = brute_stats(lo, hi);
    EXPECT_EQ(r.stats, expected) << lo << ".." << hi;
    EXPECT_EQ(r.report.checked, hi - lo + 1);
  }
}

TEST(Sweep, SmallMemoTableGivesSameAnswer) {
  auto cfg = config(1, 40000, 2, 512);
  cfg.memo_entries = 100;
  EXPECT_EQ(run_sweep(cfg).stats, brute_stats(1, 40000));
}

TEST(Sweep, WorkerCountDoesNotChangeReport) {
  auto one = run_sweep(config(1, 200000, 1));
  auto four = run_sweep(config(1, 200000, 4));
  EXPECT_EQ(to_json(one).dump(), to_json(four).dump());
}

TEST(Sweep, BudgetExhaustionIsInconclusiveNotViolation) {
  auto cfg = config(20, 40, 1, 8);
  cfg.budget = 10;
  auto r = run_sweep(cfg);
  EXPECT_TRUE(r.report.holds());
  bool saw_27 = false;
  for (const auto& f : r.report.inconclusive) saw_27 |= f.x == 27;
  EXPECT_TRUE(saw_27);
  EXPECT_EQ(r.report.checked, 21u);
}

TEST(Sweep, ResumeReproducesUninterruptedRun) {
  TempDir dir;
  auto path = dir / "ck.json";
  auto full = run_sweep(config(1, 100000, 2, 4096));

  auto first = config(1, 100000, 2, 4096);
  first.checkpoint = path;
  first.max_chunks = 12;
  auto partial = run_sweep(first);
  EXPECT_FALSE(partial.complete());
  EXPECT_EQ(partial.verified_up_to, 12u * 4096u);

  Checkpoint saved = checkpoint_from_json(read_file(path));
  EXPECT_EQ(saved.verified_up_to, 12u * 4096u);
  EXPECT_EQ(saved.stats, partial.stats);

  auto second = first;
  second.max_chunks.reset();
  second.resume = true;
  second.workers = 3;
  auto resumed = run_sweep(second);
  EXPECT_TRUE(resumed.complete());
  EXPECT_EQ(to_json(resumed).dump(), to_json(full).dump());
  EXPECT_EQ(checkpoint_from_json(read_file(path)).verified_up_to, 100000u);
  EXPECT_FALSE(std::filesystem::exists(path.string() + ".tmp"));
}

TEST(Sweep, ResumeOfFinishedRunIsNoOp) {
  TempDir dir;
  auto cfg = config(1, 5000, 1, 1000);
  cfg.checkpoint = dir / "done.json";
  auto a = run_sweep(cfg);
  cfg.resume = true;
  auto b = run_sweep(cfg);
  EXPECT_EQ(to_json(a).dump(), to_json(b).dump());
}

TEST(Sweep, MismatchedOrBrokenCheckpointIsRejected) {
  TempDir dir;
  auto cfg = config(1, 10000, 1, 1000);
  cfg.checkpoint = dir / "ck.json";
  cfg.max_chunks = 2;
  run_sweep(cfg);

  auto other = cfg;
  other.hi = 20000;
  other.resume = true;
  EXPECT_THROW(run_sweep(other), CheckpointError);

  write_file_atomically(dir / "junk.json", "{not json");
  auto junk = cfg;
  junk.checkpoint = dir / "junk.json";
  junk.resume = true;
  EXPECT_THROW(run_sweep(junk), CheckpointError);
}

TEST(Sweep, StatsMergeIsOrderIndependent) {
  SweepStats a, b, c;
  a.observe(10, 5, std::uint64_t{16});
  b.observe(3, 5, std::uint64_t{16});
  c.observe(7, 11, std::uint64_t{52});
  SweepStats left = a, right = c;
  left.merge(b);
  left.merge(c);
  right.merge(b);
  right.merge(a);
  EXPECT_EQ(left, right);
  EXPECT_EQ(left.max_steps_at, 7u);
  EXPECT_EQ(left.max_peak, 52);
}

TEST(Sweep, NatEscalationNearTopOfRange) {
  // Starts just below 2^64 overflow the fixed-width path on their first odd step.
  const std::uint64_t top = std::numeric_limits<std::uint64_t>::max();
  auto r = run_sweep(config(top - 20, top - 10, 1, 4));
  EXPECT_TRUE(r.complete());
  EXPECT_TRUE(r.report.holds());
  EXPECT_GT(r.stats.max_peak, Nat(top));
}

TEST(Sweep, CheckpointJsonRoundTrip) {
  Checkpoint c;
  c.lo = 5;
  c.hi = 900;
  c.verified_up_to = 300;
  c.stats.observe(27, 70, Nat(1) << 80);
  c.inconclusive.push_back({77, "budget"});
  c.timestamp = "2026-01-01T00:00:00Z";
  Checkpoint back = checkpoint_from_json(to_json(c).dump());
  EXPECT_EQ(back.stats, c.stats);
  EXPECT_EQ(back.inconclusive, c.inconclusive);
  EXPECT_EQ(back.verified_up_to, 300u);
  EXPECT_THROW(checkpoint_from_json(R"({"schema_version":2})"), CheckpointError);
}
