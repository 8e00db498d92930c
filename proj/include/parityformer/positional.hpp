// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "parityformer/error.hpp"
#include "parityformer/linalg.hpp"
#include "parityformer/scalar.hpp"
#include "parityformer/telescope.hpp"

namespace parityformer {

template <Scalar S>
struct ConstantRule {
  S value;
  friend bool operator==(const ConstantRule&, const ConstantRule&) = default;
};

/// i -> (-1)^i
struct AlternatingSignRule {
  friend bool operator==(const AlternatingSignRule&, const AlternatingSignRule&) = default;
};

/// i -> alpha/i - alpha^2/i^2
template <Scalar S>
struct InverseQuadraticRule {
  S alpha;
  friend bool operator==(const InverseQuadraticRule&, const InverseQuadraticRule&) = default;
};

template <Scalar S>
struct TelescopeRule {
  LengthFunction function;
  S alpha;
  friend bool operator==(const TelescopeRule&, const TelescopeRule&) = default;
};

template <Scalar S>
using CoordinateRule = std::variant<ConstantRule<S>, AlternatingSignRule,
                                    InverseQuadraticRule<S>, TelescopeRule<S>>;

template <Scalar S>
struct PositionalCoordinate {
  std::size_t index;
  CoordinateRule<S> rule;
  friend bool operator==(const PositionalCoordinate&, const PositionalCoordinate&) = default;
};

template <Scalar S>
S evaluate_rule(const CoordinateRule<S>& rule, std::uint64_t i) {
  return std::visit(
      [i](const auto& r) -> S {
        using R = std::decay_t<decltype(r)>;
        if constexpr (std::same_as<R, ConstantRule<S>>) {
          return r.value;
        } else if constexpr (std::same_as<R, AlternatingSignRule>) {
          return (i % 2 == 0) ? S(1) : S(-1);
        } else if constexpr (std::same_as<R, InverseQuadraticRule<S>>) {
          const S pos = S(i);
          return r.alpha / pos - r.alpha * r.alpha / (pos * pos);
        } else {
          return telescope_value<S>(r.function, r.alpha, i);
        }
      },
      rule);
}

/*
  Symbolic positional encoding p: N -> R^d. Coordinates without a rule are
  zero. The rules depend on the position alone, so one encoding serves every
  input length.
*/
template <Scalar S>
class PositionalEncoding {
 public:
  PositionalEncoding() = default;
  PositionalEncoding(std::size_t dim, std::vector<PositionalCoordinate<S>> coordinates)
      : dim_(dim), coordinates_(std::move(coordinates)) {
    std::vector<bool> seen(dim_, false);
    for (const auto& c : coordinates_) {
      if (c.index >= dim_)
        throw Error(ErrorKind::configuration,
                    "positional rule for coordinate " + std::to_string(c.index) +
                        " outside dimension " + std::to_string(dim_));
      if (seen[c.index])
        throw Error(ErrorKind::configuration,
                    "duplicate positional rule for coordinate " + std::to_string(c.index));
      seen[c.index] = true;
    }
  }

  std::size_t dim() const noexcept { return dim_; }
  const std::vector<PositionalCoordinate<S>>& coordinates() const noexcept {
    return coordinates_;
  }

  const CoordinateRule<S>* rule_at(std::size_t index) const {
    auto it = std::find_if(coordinates_.begin(), coordinates_.end(),
                           [&](const auto& c) { return c.index == index; });
    return it == coordinates_.end() ? nullptr : &it->rule;
  }

  Vector<S> at(std::uint64_t position) const {
    if (position == 0)
      throw Error(ErrorKind::invalid_argument, "positions are numbered from 1");
    Vector<S> p(dim_, S(0));
    for (const auto& c : coordinates_) p[c.index] = evaluate_rule<S>(c.rule, position);
    return p;
  }

  template <Scalar T>
  PositionalEncoding<T> cast() const {
    std::vector<PositionalCoordinate<T>> out;
    for (const auto& c : coordinates_) {
      CoordinateRule<T> rule = std::visit(
          [](const auto& r) -> CoordinateRule<T> {
            using R = std::decay_t<decltype(r)>;
            if constexpr (std::same_as<R, ConstantRule<S>>)
              return ConstantRule<T>{T(r.value)};
            else if constexpr (std::same_as<R, AlternatingSignRule>)
              return AlternatingSignRule{};
            else if constexpr (std::same_as<R, InverseQuadraticRule<S>>)
              return InverseQuadraticRule<T>{T(r.alpha)};
            else
              return TelescopeRule<T>{r.function, T(r.alpha)};
          },
          c.rule);
      out.push_back({c.index, std::move(rule)});
    }
    return PositionalEncoding<T>(dim_, std::move(out));
  }

  friend bool operator==(const PositionalEncoding&, const PositionalEncoding&) = default;

 private:
  std::size_t dim_ = 0;
  std::vector<PositionalCoordinate<S>> coordinates_;
};

}  // namespace parityformer
