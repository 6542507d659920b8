#pragma once

// Algebra of rule sequences. A word over {R1, R2} of length k with r2
// occurrences of R2 composes to the affine map x -> (3^r2 x + A) / 2^k, so a
// cycle driven by the word must sit at the rational fixed point
// x = A / (2^k - 3^r2). Parity consistency decides whether that point really
// follows the word.

#include "collatz_lab/core_map.hpp"
#include "collatz_lab/report.hpp"
#include "collatz_lab/trajectory.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace collatz_lab {

class RuleSequence {
 public:
  RuleSequence() = default;
  explicit RuleSequence(std::vector<Rule> rules) : rules_(std::move(rules)) {}
  RuleSequence(std::initializer_list<Rule> rules) : rules_(rules) {}

  /// Bit i of `mask` counted from the most significant of `length` bits
  /// selects R2 at position i; ascending masks enumerate words in
  /// lexicographic order with R1 < R2.
  static RuleSequence from_mask(std::uint64_t mask, unsigned length) {
    std::vector<Rule> rules(length);
    for (unsigned i = 0; i < length; ++i) rules[i] = ((mask >> (length - 1 - i)) & 1u) ? Rule::R2 : Rule::R1;
    return RuleSequence(std::move(rules));
  }

  /// Parses "R1-R2-R1", "R1R2R1" or "121".
  static RuleSequence parse(std::string_view text) {
    std::vector<Rule> rules;
    for (std::size_t i = 0; i < text.size(); ++i) {
      char c = text[i];
      if (c == '-' || c == ' ' || c == ',' || c == 'R') continue;
      if (c == '1') rules.push_back(Rule::R1);
      else if (c == '2') rules.push_back(Rule::R2);
      else throw std::invalid_argument("collatz_lab::RuleSequence::parse: bad rule word: " + std::string(text));
    }
    return RuleSequence(std::move(rules));
  }

  const std::vector<Rule>& rules() const { return rules_; }
  std::size_t k() const { return rules_.size(); }
  std::size_t r2() const { return static_cast<std::size_t>(std::count(rules_.begin(), rules_.end(), Rule::R2)); }
  std::size_t r1() const { return k() - r2(); }

  RuleSequence rotated(std::size_t by) const {
    std::vector<Rule> out(rules_);
    if (!out.empty()) std::rotate(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(by % out.size()), out.end());
    return RuleSequence(std::move(out));
  }

  /// Smallest p dividing k such that the word is a power of its length-p prefix.
  std::size_t period() const {
    const std::size_t n = k();
    for (std::size_t p = 1; p < n; ++p) {
      if (n % p != 0) continue;
      bool repeats = true;
      for (std::size_t i = p; i < n && repeats; ++i) repeats = rules_[i] == rules_[i - p];
      if (repeats) return p;
    }
    return n;
  }

  std::string str() const {
    std::string s;
    for (std::size_t i = 0; i < rules_.size(); ++i) {
      if (i) s += '-';
      s += to_string(rules_[i]);
    }
    return s;
  }

  friend bool operator==(const RuleSequence&, const RuleSequence&) = default;
  friend auto operator<=>(const RuleSequence& a, const RuleSequence& b) {
    if (auto c = a.k() <=> b.k(); c != 0) return c;
    return a.rules_ <=> b.rules_;
  }

 private:
  std::vector<Rule> rules_;
};

/// x -> (3^r2 * x + A) / 2^k.
struct AffineForm {
  std::size_t r2 = 0;
  Nat A = 0;
  std::size_t k = 0;

  Nat numerator(const Nat& x) const { return pow3(r2) * x + A; }
  Nat denominator() const { return Nat(1) << k; }

  /// Image of x when the division is exact.
  std::optional<Nat> apply(const Nat& x) const {
    Nat num = numerator(x);
    Nat den = denominator();
    if (num % den != 0) return std::nullopt;
    return num / den;
  }

  static Nat pow3(std::size_t e) { return boost::multiprecision::pow(Nat(3), static_cast<unsigned>(e)); }

  friend bool operator==(const AffineForm&, const AffineForm&) = default;
};

/// A = sum_j 3^(r2-j) * 2^(s_j - 1) over the 1-based R2 positions s_1 < ... < s_r2.
inline AffineForm affine_form(const RuleSequence& seq) {
  if (seq.k() == 0) throw std::invalid_argument("collatz_lab::affine_form: empty rule sequence");
  AffineForm f;
  f.k = seq.k();
  // Horner form of the sum: each R2 at position s maps A to 3A + 2^(s-1).
  for (std::size_t pos = 0; pos < seq.k(); ++pos) {
    if (seq.rules()[pos] == Rule::R2) {
      f.A = f.A * 3 + (Nat(1) << pos);
      ++f.r2;
    }
  }
  return f;
}

/// 2^k > 3^r2, the exact form of r1 > r2 (log2 3 - 1).
inline bool satisfies_cycle_bound(std::size_t k, std::size_t r2) {
  return (Nat(1) << k) > AffineForm::pow3(r2);
}

struct CycleCandidate {
  RuleSequence seq;
  Nat x;
  bool consistent = false;
  // False when seq is a proper power of a shorter consistent word.
  bool simple = true;

  friend bool operator==(const CycleCandidate&, const CycleCandidate&) = default;
};

/// Whether running T from x fires exactly the rules of seq and returns to x.
inline bool drives_sequence(const Nat& x, const RuleSequence& seq) {
  if (x == 0) return false;
  Nat v = x;
  for (Rule r : seq.rules()) {
    auto next = step(v);
    if (next.rule != r) return false;
    v = std::move(next.value);
  }
  return v == x;
}

/// The fixed point of seq's affine form when it is a positive integer.
/// Inconsistent candidates (wrong parities en route) are returned with
/// consistent = false.
inline std::optional<CycleCandidate> fixed_point(const RuleSequence& seq) {
  AffineForm f = affine_form(seq);
  Nat d = f.denominator() - AffineForm::pow3(f.r2);
  if (d <= 0) return std::nullopt;
  if (!satisfies_cycle_bound(f.k, f.r2)) throw std::logic_error("collatz_lab::fixed_point: positive divisor violates 2^k > 3^r2");
  if (f.A % d != 0) return std::nullopt;
  Nat x = f.A / d;
  if (x < 1) return std::nullopt;

  CycleCandidate c{seq, x, drives_sequence(x, seq), true};
  std::size_t p = seq.period();
  if (p < seq.k()) {
    RuleSequence base(std::vector<Rule>(seq.rules().begin(), seq.rules().begin() + static_cast<std::ptrdiff_t>(p)));
    auto inner = fixed_point(base);
    c.simple = !(inner && inner->consistent);
  }
  return c;
}

inline constexpr unsigned kMaxSearchLength = 30;

namespace cycles_detail {

// For k <= 30 and 2^k > 3^r2, A < 2^(2k) <= 2^60, so the whole search fits
// in 64-bit arithmetic; results are rebuilt in Nat through fixed_point.
inline void search_block(unsigned k, std::uint64_t first, std::uint64_t last, std::vector<CycleCandidate>& out) {
  const std::uint64_t two_k = std::uint64_t{1} << k;
  std::uint64_t pow3[kMaxSearchLength + 1];
  pow3[0] = 1;
  for (unsigned i = 1; i <= k; ++i) pow3[i] = pow3[i - 1] * 3;

  for (std::uint64_t mask = first; mask < last; ++mask) {
    unsigned r2 = static_cast<unsigned>(std::popcount(mask));
    if (pow3[r2] >= two_k) continue;
    std::uint64_t a = 0;
    for (unsigned pos = 0; pos < k; ++pos) {
      if ((mask >> (k - 1 - pos)) & 1u) a = a * 3 + (std::uint64_t{1} << pos);
    }
    std::uint64_t d = two_k - pow3[r2];
    if (a == 0 || a % d != 0) continue;
    auto c = fixed_point(RuleSequence::from_mask(mask, k));
    if (c && c->consistent) out.push_back(std::move(*c));
  }
}

}  // namespace cycles_detail

/// Every consistent candidate over all words of length 1..max_len, ordered
/// by length then lexicographically (R1 < R2).
inline std::vector<CycleCandidate> search_cycles(unsigned max_len, unsigned workers = default_workers()) {
  if (max_len < 1) throw std::invalid_argument("collatz_lab::search_cycles: max_len must be >= 1");
  if (max_len > kMaxSearchLength) throw std::length_error("collatz_lab::search_cycles: max_len above 30 is refused");
  workers = std::max(1u, workers);

  std::vector<CycleCandidate> all;
  for (unsigned k = 1; k <= max_len; ++k) {
    const std::uint64_t total = std::uint64_t{1} << k;
    const std::uint64_t blocks = std::min<std::uint64_t>(total, std::uint64_t{workers} * 8);
    const std::uint64_t block = total / blocks;
    std::vector<std::vector<CycleCandidate>> found(blocks);
    std::atomic<std::uint64_t> next{0};
    auto run = [&] {
      for (std::uint64_t b; (b = next.fetch_add(1)) < blocks;) {
        std::uint64_t first = b * block;
        std::uint64_t last = b + 1 == blocks ? total : first + block;
        cycles_detail::search_block(k, first, last, found[b]);
      }
    };
    if (workers == 1 || blocks == 1) {
      run();
    } else {
      std::vector<std::jthread> pool;
      for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run);
    }
    for (auto& f : found) all.insert(all.end(), std::make_move_iterator(f.begin()), std::make_move_iterator(f.end()));
  }
  return all;
}

/// T(x) != x everywhere, and T(T(x)) == x only on the 2-cycle {1, 2}.
inline std::optional<std::string> check_small_cycles(std::uint64_t x) {
  return with_escalation([&]<Natural T>() -> std::optional<std::string> {
    T v(x);
    T once = step(v).value;
    if (once == v) return std::string("T(x) == x");
    T twice = step(once).value;
    if (twice == v && x != 1 && x != 2) return std::string("T(T(x)) == x outside {1, 2}");
    return std::nullopt;
  });
}

inline RangeReport verify_fact5(std::uint64_t range_max, unsigned workers = default_workers()) {
  if (range_max < 2) throw std::invalid_argument("collatz_lab::verify_fact5: range_max must be >= 2");
  return verify_range("fact5", 1, range_max, check_small_cycles, workers);
}

/// x = 2^i * q with q odd and divisible by 3: the doubling chain through x.
struct C0Chain {
  Nat x;
  std::size_t i = 0;
  Nat q;

  friend bool operator==(const C0Chain&, const C0Chain&) = default;
};

inline C0Chain c0_chain(const Nat& x) {
  if (x < 3 || mod_small(x, 3) != 0) throw std::domain_error("collatz_lab::c0_chain: argument must be a positive multiple of 3");
  C0Chain c{x, 0, x};
  c.i = boost::multiprecision::lsb(x);
  c.q = x >> c.i;
  if (mod_small(c.q, 3) != 0 || is_even(c.q)) throw std::logic_error("collatz_lab::c0_chain: decomposition failed");
  return c;
}

/// For x in [0]: the chain decomposition holds and T^i(x) = q. For every x:
/// once the orbit to 1 leaves [0] it never returns.
inline std::optional<std::string> check_c0_chain(std::uint64_t x, std::size_t budget = 1'000'000) {
  return with_escalation([&]<Natural T>() -> std::optional<std::string> {
    T v(x);
    if (mod_small(v, 3) == 0) {
      C0Chain c = c0_chain(to_nat(x));
      T walk = v;
      for (std::size_t s = 0; s < c.i; ++s) {
        if (mod_small(walk, 3) != 0) return std::string("chain leaves [0] before reaching q");
        walk = step(walk).value;
      }
      if (to_nat(walk) != c.q) return std::string("T^i(x) != q");
    }
    bool left = mod_small(v, 3) != 0;
    std::size_t steps = 0;
    while (v != 1) {
      if (steps++ == budget) throw InconclusiveError("orbit exceeded budget");
      v = step(v).value;
      bool in_c0 = mod_small(v, 3) == 0;
      if (in_c0 && left) return "orbit re-enters [0] at " + to_nat(v).str();
      if (!in_c0) left = true;
    }
    return std::nullopt;
  });
}

inline RangeReport verify_c0_chains(std::uint64_t lo, std::uint64_t hi, unsigned workers = default_workers()) {
  return verify_range("fact7", lo, hi, [](std::uint64_t x) { return check_c0_chain(x); }, workers);
}

}  // namespace collatz_lab
