// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

#include "parityformer/error.hpp"
#include "parityformer/scalar.hpp"

namespace parityformer {

/// Functions of the input length that can be broadcast to every position
/// with a telescoping positional coordinate.
enum class LengthFunction {
  ln_n,
  temperature,
  alpha_over_n,
  alpha2_over_n2,
};

std::string_view to_string(LengthFunction f);
std::optional<LengthFunction> length_function_from_string(std::string_view name);

/*
  Layer-3 temperature for inputs of length n:

      T(n) = ceil((2 n^2 / alpha) * ln(6 n))

  The coefficient gap a_sigma - a_i is at least alpha / (2 n^2), so the weight
  that escapes position sigma is at most (n - 1) * exp(-T alpha / (2 n^2)) and
  the readout deviates from +-1 by at most 2 (n - 1) / (6 n) < 1/3.
*/
template <Scalar S>
S temperature(std::uint64_t n, const S& alpha) {
  using std::ceil;
  using std::log;
  if (n == 0) throw Error(ErrorKind::invalid_argument, "temperature: n must be >= 1");
  const S len = S(n);
  return ceil(S(2) * len * len / alpha * log(S(6) * len));
}

template <Scalar S>
S evaluate_length_function(LengthFunction f, const S& alpha, std::uint64_t n) {
  using std::log;
  const S len = S(n);
  switch (f) {
    case LengthFunction::ln_n:
      return log(len);
    case LengthFunction::temperature:
      return temperature<S>(n, alpha);
    case LengthFunction::alpha_over_n:
      return alpha / len;
    case LengthFunction::alpha2_over_n2:
      return alpha * alpha / (len * len);
  }
  throw Error(ErrorKind::invalid_argument, "unknown length function");
}

/// p(1) = f(1), p(i) = i f(i) - (i - 1) f(i - 1); the first n values then
/// average to f(n).
template <Scalar S>
S telescope_value(const std::function<S(std::uint64_t)>& f, std::uint64_t i) {
  if (i == 0)
    throw Error(ErrorKind::invalid_argument, "telescope_value: positions start at 1");
  if (i == 1) return f(1);
  return S(i) * f(i) - S(i - 1) * f(i - 1);
}

template <Scalar S>
S telescope_value(LengthFunction f, const S& alpha, std::uint64_t i) {
  return telescope_value<S>(
      [&](std::uint64_t n) { return evaluate_length_function<S>(f, alpha, n); }, i);
}

}  // namespace parityformer
