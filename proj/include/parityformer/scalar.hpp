// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <boost/multiprecision/mpfr.hpp>

#include <charconv>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <system_error>

#include "parityformer/error.hpp"

namespace parityformer {

// Software floating point with a runtime-selected mantissa width. Expression
// templates are disabled so that `auto` locals hold values, not expressions.
using HighPrecision =
    boost::multiprecision::number<boost::multiprecision::mpfr_float_backend<0>,
                                  boost::multiprecision::et_off>;

template <typename S>
concept Scalar = std::same_as<S, double> || std::same_as<S, HighPrecision>;

inline constexpr unsigned kDoubleMantissaBits = 53;

/*
  Sets the mantissa width used for HighPrecision values constructed while the
  scope is alive, restoring the previous width on exit.

  The underlying default is process-wide, so high-precision evaluation is
  confined to one thread at a time.
*/
class PrecisionScope {
 public:
  explicit PrecisionScope(unsigned mantissa_bits)
      : saved_digits10_(HighPrecision::default_precision()) {
    if (mantissa_bits < 16)
      throw Error(ErrorKind::invalid_argument,
                  "precision must be at least 16 mantissa bits");
    // digits10 needed so that mpfr allocates at least the requested bits.
    const auto digits10 = static_cast<unsigned>(
        std::ceil(static_cast<double>(mantissa_bits) * 0.30102999566398120));
    HighPrecision::default_precision(digits10);
  }
  ~PrecisionScope() { HighPrecision::default_precision(saved_digits10_); }

  PrecisionScope(const PrecisionScope&) = delete;
  PrecisionScope& operator=(const PrecisionScope&) = delete;

 private:
  unsigned saved_digits10_;
};

template <Scalar S>
bool is_finite(const S& x) {
  if constexpr (std::same_as<S, double>)
    return std::isfinite(x);
  else
    return boost::multiprecision::isfinite(x);
}

template <Scalar S>
double to_double(const S& x) {
  if constexpr (std::same_as<S, double>)
    return x;
  else
    return x.template convert_to<double>();
}

template <Scalar S>
S epsilon() {
  return std::numeric_limits<S>::epsilon();
}

/// Parses a decimal literal into the backend without an intermediate double,
/// so "0.01" is the correctly rounded 1/100 at every precision.
template <Scalar S>
S parse_scalar(std::string_view text) {
  if constexpr (std::same_as<S, double>) {
    double value = 0;
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc{} || ptr != end || text.empty())
      throw Error(ErrorKind::parse,
                  "not a decimal number: '" + std::string(text) + "'");
    return value;
  } else {
    // Validate through the double parser first so malformed text gets the
    // same diagnostics on both backends.
    (void)parse_scalar<double>(text);
    return HighPrecision(std::string(text));
  }
}

/// Shortest decimal string that reads back to the same double.
inline std::string format_shortest(double value) {
  char buffer[64];
  auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
  return std::string(buffer, ptr);
}

/*
  Neumaier's variant of Kahan summation: the running compensation also
  captures the low-order bits of the sum when an addend is larger in magnitude
  than the accumulated total.
*/
template <Scalar S>
class CompensatedSum {
 public:
  CompensatedSum() = default;

  void add(const S& value) {
    using std::abs;
    const S t = sum_ + value;
    if (abs(sum_) >= abs(value))
      compensation_ += (sum_ - t) + value;
    else
      compensation_ += (value - t) + sum_;
    sum_ = t;
  }

  CompensatedSum& operator+=(const S& value) {
    add(value);
    return *this;
  }

  S value() const { return sum_ + compensation_; }

 private:
  S sum_ = S(0);
  S compensation_ = S(0);
};

}  // namespace parityformer
