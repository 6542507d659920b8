#pragma once

#include "collatz_lab/trajectory.hpp"

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace collatz_lab {

/// A witness: the offending value and which clause failed on it.
struct Finding {
  std::uint64_t x;
  std::string detail;

  friend bool operator==(const Finding&, const Finding&) = default;
};

struct RangeReport {
  std::string fact_id;
  std::uint64_t lo = 0;
  std::uint64_t hi = 0;
  std::uint64_t checked = 0;
  std::vector<Finding> violations;
  std::vector<Finding> inconclusive;
  std::chrono::duration<double> elapsed{};

  bool complete() const { return checked == hi - lo + 1; }
  bool holds() const { return violations.empty(); }
};

/// Per-value check: nullopt on success, otherwise the failed clause.
/// Throwing InconclusiveError files the value as inconclusive.
using ValueCheck = std::function<std::optional<std::string>(std::uint64_t)>;

inline unsigned default_workers() {
  unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : n;
}

namespace detail {
inline void check_block(const ValueCheck& check, std::uint64_t first, std::uint64_t last, std::vector<Finding>& violations,
                 std::vector<Finding>& inconclusive) {
  for (std::uint64_t x = first;; ++x) {
    try {
      if (auto failure = check(x)) violations.push_back({x, std::move(*failure)});
    } catch (const InconclusiveError& e) {
      inconclusive.push_back({x, e.what()});
    }
    if (x == last) break;
  }
}
}  // namespace detail

/// Applies `check` to every x in [lo, hi], split into contiguous blocks run
/// on `workers` threads. Findings come back in ascending x regardless of
/// the worker count.
inline RangeReport verify_range(std::string fact_id, std::uint64_t lo, std::uint64_t hi, const ValueCheck& check,
                         unsigned workers = default_workers()) {
  if (lo == 0 || lo > hi) throw std::invalid_argument("collatz_lab::verify_range: need 1 <= lo <= hi");
  auto started = std::chrono::steady_clock::now();
  RangeReport report{std::move(fact_id), lo, hi};

  const std::uint64_t span = hi - lo + 1;
  workers = static_cast<unsigned>(std::clamp<std::uint64_t>(workers == 0 ? 1 : workers, 1, span));
  const std::uint64_t block = span / workers + (span % workers != 0);

  std::vector<std::vector<Finding>> violations(workers), inconclusive(workers);
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (unsigned w = 0; w < workers; ++w) {
    std::uint64_t first = lo + w * block;
    if (first > hi || first < lo) break;
    std::uint64_t last = hi - first < block - 1 ? hi : first + (block - 1);
    auto job = [&, w, first, last] {
      try {
        detail::check_block(check, first, last, violations[w], inconclusive[w]);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    };
    if (workers == 1) {
      job();
    } else {
      pool.emplace_back(job);
    }
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  for (unsigned w = 0; w < workers; ++w) {
    report.violations.insert(report.violations.end(), std::make_move_iterator(violations[w].begin()),
                             std::make_move_iterator(violations[w].end()));
    report.inconclusive.insert(report.inconclusive.end(), std::make_move_iterator(inconclusive[w].begin()),
                               std::make_move_iterator(inconclusive[w].end()));
  }
  report.checked = span;
  report.elapsed = std::chrono::steady_clock::now() - started;
  return report;
}

}  // namespace collatz_lab
