#pragma once

// The shortcut map T, the reduced map T' on class [2], residue classes and
// the inverse (predecessor) steps of both maps.

#include "collatz_lab/nat.hpp"

#include <optional>
#include <ostream>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace collatz_lab {

enum class ResidueClass : std::uint8_t { C0 = 0, C1 = 1, C2 = 2 };

/// R1: x -> x/2 on even x.  R2: x -> (3x+1)/2 on odd x.
enum class Rule : std::uint8_t { R1, R2 };

/// Q1: x -> x/4 on x = 0 mod 4.  Q2: x -> (3x+2)/4 on x = 2 mod 4.
/// Q3: x -> (3x+1)/2 on odd x.
enum class ReducedRule : std::uint8_t { Q1, Q2, Q3 };

constexpr std::string_view to_string(ResidueClass c) {
  switch (c) {
    case ResidueClass::C0: return "C0";
    case ResidueClass::C1: return "C1";
    case ResidueClass::C2: return "C2";
  }
  return "?";
}

constexpr std::string_view to_string(Rule r) { return r == Rule::R1 ? "R1" : "R2"; }

constexpr std::string_view to_string(ReducedRule r) {
  switch (r) {
    case ReducedRule::Q1: return "Q1";
    case ReducedRule::Q2: return "Q2";
    case ReducedRule::Q3: return "Q3";
  }
  return "?";
}

inline std::ostream& operator<<(std::ostream& os, ResidueClass c) { return os << to_string(c); }
inline std::ostream& operator<<(std::ostream& os, Rule r) { return os << to_string(r); }
inline std::ostream& operator<<(std::ostream& os, ReducedRule r) { return os << to_string(r); }

inline std::optional<Rule> parse_rule(std::string_view s) {
  if (s == "R1") return Rule::R1;
  if (s == "R2") return Rule::R2;
  return std::nullopt;
}

inline std::optional<ReducedRule> parse_reduced_rule(std::string_view s) {
  if (s == "Q1") return ReducedRule::Q1;
  if (s == "Q2") return ReducedRule::Q2;
  if (s == "Q3") return ReducedRule::Q3;
  return std::nullopt;
}

/// A forward step result: the image value and the rule that produced it.
template <Natural T, class RuleT>
struct Transition {
  T value;
  RuleT rule;

  friend bool operator==(const Transition&, const Transition&) = default;
};

template <Natural T> using Step = Transition<T, Rule>;
template <Natural T> using ReducedStep = Transition<T, ReducedRule>;

namespace detail {
template <Natural T>
inline void require_positive(const T& x, const char* op) {
  if (is_zero(x)) throw std::domain_error(std::string("collatz_lab::") + op + ": argument must be >= 1");
}
}  // namespace detail

template <Natural T>
inline ResidueClass residue_class(const T& x) {
  detail::require_positive(x, "residue_class");
  return static_cast<ResidueClass>(mod_small(x, 3));
}

template <Natural T>
inline Step<T> step(const T& x) {
  detail::require_positive(x, "step");
  if (is_even(x)) return {T(x >> 1), Rule::R1};
  return {checked_three_x_plus_one_half(x), Rule::R2};
}

template <Natural T>
inline T pred_even(const T& x) {
  detail::require_positive(x, "pred_even");
  return checked_double(x);
}

/// (2x-1)/3, present exactly when x is in class [2]; then x = 3k+2 and the
/// predecessor is the odd number 2k+1.
template <Natural T>
inline std::optional<T> pred_odd(const T& x) {
  detail::require_positive(x, "pred_odd");
  if (mod_small(x, 3) != 2) return std::nullopt;
  T k = x / 3;
  return T(k + k + 1);
}

/// Every y with step(y).value == x; the even predecessor comes first.
template <Natural T>
inline std::vector<Step<T>> predecessors(const T& x) {
  std::vector<Step<T>> out;
  out.push_back({pred_even(x), Rule::R1});
  if (auto odd = pred_odd(x)) out.push_back({std::move(*odd), Rule::R2});
  return out;
}

template <Natural T>
inline bool in_reduced_domain(const T& x) {
  return !is_zero(x) && mod_small(x, 3) == 2;
}

template <Natural T>
inline ReducedStep<T> reduced_step(const T& x) {
  if (!in_reduced_domain(x)) throw std::domain_error("collatz_lab::reduced_step: argument must be in class [2]");
  if (!is_even(x)) return {checked_three_x_plus_one_half(x), ReducedRule::Q3};
  T quarter = x >> 2;
  if (mod_small(x, 4) == 0) return {quarter, ReducedRule::Q1};
  // x = 4q + 2, so (3x + 2)/4 = 3q + 2.
  return {T(quarter * 3u + 2u), ReducedRule::Q2};
}

/// All y in [2] with reduced_step(y).value == x, ordered Q1, Q2, Q3.
/// A self-loop (y == x, only at x = 2) is reported like any other edge.
template <Natural T>
inline std::vector<ReducedStep<T>> reduced_predecessors(const T& x) {
  if (!in_reduced_domain(x))
    throw std::domain_error("collatz_lab::reduced_predecessors: argument must be in class [2]");
  std::vector<ReducedStep<T>> out;
  out.push_back({checked_mul_small(x, 4), ReducedRule::Q1});

  // x = 3k + 2: the Q2 inverse (4x-2)/3 is 4k+2, the Q3 inverse (2x-1)/3 is 2k+1.
  T k = x / 3;
  T via_q2 = checked_mul_small(k, 4) + 2u;
  if (mod_small(via_q2, 3) == 2 && mod_small(via_q2, 4) == 2) out.push_back({std::move(via_q2), ReducedRule::Q2});
  T via_q3 = T(k + k + 1);
  if (mod_small(via_q3, 3) == 2) out.push_back({std::move(via_q3), ReducedRule::Q3});
  return out;
}

}  // namespace collatz_lab
