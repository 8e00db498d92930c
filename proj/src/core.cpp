// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <string>
#include <vector>

#include "parityformer/construction.hpp"
#include "parityformer/interpreter.hpp"
#include "parityformer/telescope.hpp"

namespace parityformer {

std::string_view to_string(LengthFunction f) {
  switch (f) {
    case LengthFunction::ln_n:
      return "ln_n";
    case LengthFunction::temperature:
      return "temperature";
    case LengthFunction::alpha_over_n:
      return "alpha_over_n";
    case LengthFunction::alpha2_over_n2:
      return "alpha2_over_n2";
  }
  return "?";
}

std::optional<LengthFunction> length_function_from_string(std::string_view name) {
  for (auto f : {LengthFunction::ln_n, LengthFunction::temperature, LengthFunction::alpha_over_n,
                 LengthFunction::alpha2_over_n2})
    if (to_string(f) == name) return f;
  return std::nullopt;
}

std::vector<std::uint8_t> parse_bits(std::string_view text) {
  std::vector<std::uint8_t> bits;
  bits.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char ch = text[i];
    if (ch != '0' && ch != '1')
      throw Error(ErrorKind::invalid_argument,
                  std::string("non-binary character '") + ch + "' at position " +
                      std::to_string(i + 1));
    bits.push_back(ch == '1');
  }
  return bits;
}

std::string format_bits(std::span<const std::uint8_t> bits) {
  std::string s;
  s.reserve(bits.size());
  for (auto b : bits) s.push_back(b ? '1' : '0');
  return s;
}

std::uint64_t count_ones(std::span<const std::uint8_t> bits) {
  return static_cast<std::uint64_t>(std::count_if(bits.begin(), bits.end(),
                                                  [](std::uint8_t b) { return b != 0; }));
}

void StreamLayout::validate() const {
  const auto entries = named();
  if (out != 0)
    throw Error(ErrorKind::configuration,
                "layout: OUT must be coordinate 0, got " + std::to_string(out));
  std::vector<std::string_view> owner(dim);
  for (const auto& [name, index] : entries) {
    if (index >= dim)
      throw Error(ErrorKind::configuration, "layout: " + std::string(name) + " = " +
                                                std::to_string(index) + " outside dimension " +
                                                std::to_string(dim));
    if (!owner[index].empty())
      throw Error(ErrorKind::configuration, "layout: " + std::string(name) + " and " +
                                                std::string(owner[index]) +
                                                " share coordinate " + std::to_string(index));
    owner[index] = name;
  }
}

}  // namespace parityformer
