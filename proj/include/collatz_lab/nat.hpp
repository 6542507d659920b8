#pragma once

// Integer plumbing shared by every module: the unbounded Nat type, the
// Natural concept the map templates accept, and overflow-checked helpers
// for the fixed-width fast path.

#include <boost/multiprecision/cpp_int.hpp>

#include <concepts>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>

namespace collatz_lab {

using Nat = boost::multiprecision::cpp_int;

template <class T>
concept Natural = (std::unsigned_integral<T> && !std::same_as<T, bool>) || std::same_as<T, Nat>;

template <class T>
inline constexpr bool is_fixed_width_v = std::unsigned_integral<T>;

template <Natural T>
inline bool is_zero(const T& x) { return x == 0; }

template <Natural T>
inline bool is_even(const T& x) {
  if constexpr (is_fixed_width_v<T>) {
    return (x & 1u) == 0;
  } else {
    return !boost::multiprecision::bit_test(x, 0);
  }
}

template <Natural T>
inline unsigned mod_small(const T& x, unsigned m) {
  if constexpr (is_fixed_width_v<T>) {
    return static_cast<unsigned>(x % m);
  } else {
    return static_cast<unsigned>(boost::multiprecision::integer_modulus(x, m));
  }
}

/// Returns 2x; throws std::overflow_error for fixed-width T.
template <Natural T>
inline T checked_double(const T& x) {
  if constexpr (is_fixed_width_v<T>) {
    if (x > std::numeric_limits<T>::max() / 2) throw std::overflow_error("collatz_lab: doubling overflows fixed width");
  }
  return T(x + x);
}

template <Natural T>
inline T checked_mul_small(const T& x, unsigned m) {
  if constexpr (is_fixed_width_v<T>) {
    if (m != 0 && x > std::numeric_limits<T>::max() / m)
      throw std::overflow_error("collatz_lab: multiplication overflows fixed width");
  }
  return T(x * m);
}

/// (3x+1)/2 for odd x, evaluated as x + floor(x/2) + 1 so that the
/// fixed-width path only fails when the result itself does not fit.
template <Natural T>
inline T checked_three_x_plus_one_half(const T& x) {
  T half = x >> 1;
  if constexpr (is_fixed_width_v<T>) {
    if (x > std::numeric_limits<T>::max() - half - 1)
      throw std::overflow_error("collatz_lab: (3x+1)/2 overflows fixed width");
  }
  return T(x + half + 1);
}

inline Nat to_nat(std::uint64_t v) { return Nat(v); }
inline Nat to_nat(const Nat& v) { return v; }

inline bool fits_u64(const Nat& v) { return v >= 0 && v <= std::numeric_limits<std::uint64_t>::max(); }

inline std::string to_string(const Nat& v) { return v.str(); }

/// Parses a non-negative decimal integer. Rejects signs, blanks and junk.
inline Nat parse_nat(std::string_view text) {
  if (text.empty()) throw std::invalid_argument("collatz_lab: empty integer literal");
  for (char c : text) {
    if (c < '0' || c > '9') throw std::invalid_argument("collatz_lab: not a non-negative integer: " + std::string(text));
  }
  return Nat(std::string(text));
}

inline std::uint64_t parse_u64(std::string_view text) {
  Nat v = parse_nat(text);
  if (!fits_u64(v)) throw std::out_of_range("collatz_lab: value exceeds 64 bits: " + std::string(text));
  return v.convert_to<std::uint64_t>();
}

// Runs f.template operator()<std::uint64_t>() and repeats the computation
// in Nat if the fixed-width pass overflowed.
template <class F>
decltype(auto) with_escalation(F&& f) {
  try {
    return f.template operator()<std::uint64_t>();
  } catch (const std::overflow_error&) {
    return f.template operator()<Nat>();
  }
}

}  // namespace collatz_lab
