#pragma once

// Forward orbits under T and T', convergence checking and the T <-> T'
// orbit correspondence on class [2].

#include "collatz_lab/core_map.hpp"

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace collatz_lab {

inline constexpr std::size_t kDefaultStoreCap = 100'000;

/// An orbit prefix. When the orbit is longer than the storage cap, values
/// and rules are dropped (truncated = true) and only steps/peak/final remain.
template <Natural T, class RuleT>
struct Trajectory {
  T start{};
  std::vector<T> values;
  std::vector<RuleT> rules;
  std::size_t steps = 0;
  T peak{};
  T final_value{};
  bool reached_target = false;
  bool truncated = false;
};

template <Natural T> using Orbit = Trajectory<T, Rule>;
template <Natural T> using ReducedOrbit = Trajectory<T, ReducedRule>;

enum class Outcome : std::uint8_t { ReachedTarget, DroppedBelowFloor, BudgetExhausted };

constexpr std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::ReachedTarget: return "ReachedTarget";
    case Outcome::DroppedBelowFloor: return "DroppedBelowFloor";
    case Outcome::BudgetExhausted: return "BudgetExhausted";
  }
  return "?";
}

struct OrbitStatus {
  Outcome outcome;
  std::size_t steps_used;

  friend bool operator==(const OrbitStatus&, const OrbitStatus&) = default;
};

/// Thrown when a comparison cannot be decided within the step budget.
class InconclusiveError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {
template <Natural T, class RuleT, class StepFn>
Trajectory<T, RuleT> iterate(const T& x, std::size_t budget, const T& target, std::size_t store_cap, StepFn&& next) {
  Trajectory<T, RuleT> t;
  t.start = x;
  t.peak = x;
  t.values.push_back(x);
  T current = x;
  while (current != target && t.steps < budget) {
    auto [value, rule] = next(current);
    ++t.steps;
    if (value > t.peak) t.peak = value;
    if (!t.truncated) {
      if (t.values.size() >= store_cap) {
        t.truncated = true;
        t.values = {};
        t.rules = {};
      } else {
        t.values.push_back(value);
        t.rules.push_back(rule);
      }
    }
    current = std::move(value);
  }
  t.reached_target = current == target;
  t.final_value = std::move(current);
  return t;
}
}  // namespace detail

template <Natural T>
Orbit<T> orbit(const T& x, std::size_t budget, const T& target = T(1), std::size_t store_cap = kDefaultStoreCap) {
  detail::require_positive(x, "orbit");
  return detail::iterate<T, Rule>(x, budget, target, store_cap, [](const T& v) { return step(v); });
}

/// Iterates T' from x until it reaches 2 or the budget runs out.
template <Natural T>
ReducedOrbit<T> reduced_orbit(const T& x, std::size_t budget, std::size_t store_cap = kDefaultStoreCap) {
  if (!in_reduced_domain(x)) throw std::domain_error("collatz_lab::reduced_orbit: start must be in class [2]");
  return detail::iterate<T, ReducedRule>(x, budget, T(2), store_cap, [](const T& v) { return reduced_step(v); });
}

/// ReachedTarget once the orbit hits 1, DroppedBelowFloor the first time a
/// value falls below floor (values below floor are assumed already verified),
/// BudgetExhausted after `budget` steps otherwise.
template <Natural T>
OrbitStatus converges(const T& x, std::size_t budget, const T& floor) {
  detail::require_positive(x, "converges");
  T current = x;
  std::size_t steps = 0;
  while (true) {
    if (current == 1) return {Outcome::ReachedTarget, steps};
    if (current < floor) return {Outcome::DroppedBelowFloor, steps};
    if (steps == budget) return {Outcome::BudgetExhausted, steps};
    current = step(current).value;
    ++steps;
  }
}

/// True iff the [2]-members of the T orbit from x down to 2 coincide, in
/// order, with the T' orbit from x. Throws InconclusiveError when either
/// orbit does not reach 2 within budget.
template <Natural T>
bool correspondence(const T& x, std::size_t budget) {
  if (!in_reduced_domain(x)) throw std::domain_error("collatz_lab::correspondence: start must be in class [2]");

  // Walk both orbits in lockstep instead of materializing them.
  T full = x;
  T reduced = x;
  std::size_t full_steps = 0;
  std::size_t reduced_steps = 0;
  while (true) {
    if (full != reduced) return false;
    if (full == 2) return true;
    do {
      if (full_steps == budget) throw InconclusiveError("collatz_lab::correspondence: T orbit exceeded budget");
      full = step(full).value;
      ++full_steps;
    } while (mod_small(full, 3) != 2);
    if (reduced_steps == budget) throw InconclusiveError("collatz_lab::correspondence: T' orbit exceeded budget");
    reduced = reduced_step(reduced).value;
    ++reduced_steps;
  }
}

}  // namespace collatz_lab
