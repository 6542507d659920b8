#pragma once

// Range verifiers for the predecessor structure, the residue-class
// transitions of T, and the reduction to T' on class [2]. Every clause is
// evaluated through core_map, so forward and inverse definitions check
// each other.

#include "collatz_lab/core_map.hpp"
#include "collatz_lab/report.hpp"
#include "collatz_lab/trajectory.hpp"

#include <sstream>

namespace collatz_lab {

inline constexpr std::size_t kDefaultBudget = 1'000'000;

namespace facts_detail {

template <class... Parts>
std::string describe(const Parts&... parts) {
  std::ostringstream os;
  (os << ... << parts);
  return os.str();
}

template <Natural T>
unsigned cls(const T& x) { return mod_small(x, 3); }

template <Natural T>
std::optional<std::string> predecessor_structure(const T& x) {
  auto preds = predecessors(x);
  for (const auto& p : preds) {
    if (step(p.value) != Step<T>{x, p.rule})
      return describe("predecessor ", p.value, " does not step back to x under ", p.rule);
  }
  const T& even = preds.front().value;
  if (preds.front().rule != Rule::R1 || even != x * 2u) return describe("first predecessor is not P_e(x) = 2x");

  switch (residue_class(x)) {
    case ResidueClass::C0:
      if (preds.size() != 1) return describe("x in [0] has ", preds.size(), " predecessors");
      if (cls(even) != 0) return describe("x in [0] but P_e(x) in [", cls(even), "]");
      return std::nullopt;
    case ResidueClass::C1:
      if (preds.size() != 1) return describe("x in [1] has ", preds.size(), " predecessors");
      if (cls(even) != 2) return describe("x in [1] but P_e(x) in [", cls(even), "]");
      return std::nullopt;
    case ResidueClass::C2: {
      if (preds.size() != 2) return describe("x in [2] has ", preds.size(), " predecessors");
      if (cls(even) != 1) return describe("x in [2] but P_e(x) in [", cls(even), "]");
      const T& odd = preds[1].value;
      if (is_even(odd)) return describe("P_o(x) = ", odd, " is even");
      // P_o lands in [0], [1], [2] when (x-2)/3 lies in [1], [0], [2].
      static constexpr unsigned expected[3] = {1, 0, 2};
      unsigned k_class = mod_small(T((x - 2u) / 3u), 3);
      if (cls(odd) != expected[k_class])
        return describe("(x-2)/3 in [", k_class, "] but P_o(x) = ", odd, " in [", cls(odd), "]");
      return std::nullopt;
    }
  }
  return std::nullopt;
}

template <Natural T>
std::optional<std::string> transitions(const T& x) {
  auto [image, rule] = step(x);
  unsigned to = cls(image);
  switch (residue_class(x)) {
    case ResidueClass::C0: {
      bool third_even = is_even(T(x / 3u));
      unsigned want = third_even ? 0 : 2;
      if (to != want) return describe("x in [0], x/3 ", third_even ? "even" : "odd", ", T(x) in [", to, "]");
      return std::nullopt;
    }
    case ResidueClass::C1:
      if (to != 2) return describe("x in [1], T(x) in [", to, "]");
      return std::nullopt;
    case ResidueClass::C2: {
      unsigned want = is_even(x) ? 1 : 2;
      if (to != want) return describe("x in [2] ", is_even(x) ? "even" : "odd", ", T(x) in [", to, "]");
      return std::nullopt;
    }
  }
  return std::nullopt;
}

template <Natural T>
std::optional<std::string> reduction(const T& x, std::size_t budget) {
  switch (residue_class(x)) {
    case ResidueClass::C0:
      return std::nullopt;
    case ResidueClass::C1: {
      T before = pred_even(x);
      T after = step(x).value;
      if (cls(before) != 2) return describe("x in [1] but P_e(x) = ", before, " in [", cls(before), "]");
      if (cls(after) != 2) return describe("x in [1] but T(x) = ", after, " in [", cls(after), "]");
      return std::nullopt;
    }
    case ResidueClass::C2: {
      T image = reduced_step(x).value;
      if (cls(image) != 2) return describe("T'(x) = ", image, " leaves [2]");
      if (!correspondence(x, budget)) return describe("T orbit restricted to [2] differs from T' orbit");
      return std::nullopt;
    }
  }
  return std::nullopt;
}

}  // namespace facts_detail

/// Predecessor structure for a single value.
inline std::optional<std::string> check_predecessor_structure(std::uint64_t x) {
  return with_escalation([&]<Natural T>() { return facts_detail::predecessor_structure(T(x)); });
}

/// Residue-class transition of T for a single value.
inline std::optional<std::string> check_transitions(std::uint64_t x) {
  return with_escalation([&]<Natural T>() { return facts_detail::transitions(T(x)); });
}

/// Closure of T', orbit correspondence (class [2]) and the elimination
/// hooks P_e(x), T(x) in [2] (class [1]) for a single value.
inline std::optional<std::string> check_reduction(std::uint64_t x, std::size_t budget = kDefaultBudget) {
  return with_escalation([&]<Natural T>() { return facts_detail::reduction(T(x), budget); });
}

inline RangeReport verify_predecessor_structure(std::uint64_t lo, std::uint64_t hi,
                                                unsigned workers = default_workers()) {
  return verify_range("predecessors", lo, hi, check_predecessor_structure, workers);
}

inline RangeReport verify_transitions(std::uint64_t lo, std::uint64_t hi, unsigned workers = default_workers()) {
  return verify_range("transitions", lo, hi, check_transitions, workers);
}

inline RangeReport verify_reduction(std::uint64_t lo, std::uint64_t hi, std::size_t budget = kDefaultBudget,
                                    unsigned workers = default_workers()) {
  return verify_range(
      "reduction", lo, hi, [budget](std::uint64_t x) { return check_reduction(x, budget); }, workers);
}

}  // namespace collatz_lab
