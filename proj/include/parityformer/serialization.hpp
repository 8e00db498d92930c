// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "parityformer/construction.hpp"
#include "parityformer/interpreter.hpp"
#include "parityformer/scalar.hpp"
#include "parityformer/verification.hpp"

namespace parityformer {

inline constexpr std::string_view kSpecSchema = "parityformer.spec/1";
inline constexpr std::string_view kTraceSchema = "parityformer.trace/1";

/*
  Spec document layout:

    schema_version, dim, alpha (decimal string)
    letter_embedding: {"0": [...], "1": [...]}
    positional_encoding: [{coordinate, rule, ...parameters}]
      rule is constant | alternating_sign | inverse_quadratic | telescope;
      scalar parameters are decimal strings, telescopes name their function.
    layers: [{K, Q, O: row-major arrays, mlp: [{matrix, bias}]}]

  Weights are written as shortest round-trip decimals.
*/
nlohmann::json spec_to_json(const TransformerSpec<double>& spec, std::string_view alpha_text);

template <Scalar S>
struct LoadedSpec {
  TransformerSpec<S> spec;
  std::string alpha_text;
};

/// Parse errors name the offending field, e.g. "layers[1].K".
template <Scalar S>
LoadedSpec<S> spec_from_json(const nlohmann::json& doc);

extern template LoadedSpec<double> spec_from_json<double>(const nlohmann::json&);
extern template LoadedSpec<HighPrecision> spec_from_json<HighPrecision>(const nlohmann::json&);

nlohmann::json parse_json_text(std::string_view text);
nlohmann::json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

/// Trace document: the realized run plus the closed-form block.
template <Scalar S>
nlohmann::json trace_to_json(std::span<const std::uint8_t> bits, const RunResult<S>& run,
                             const SemanticTrace<S>* semantic);

extern template nlohmann::json trace_to_json<double>(std::span<const std::uint8_t>,
                                                     const RunResult<double>&,
                                                     const SemanticTrace<double>*);
extern template nlohmann::json trace_to_json<HighPrecision>(
    std::span<const std::uint8_t>, const RunResult<HighPrecision>&,
    const SemanticTrace<HighPrecision>*);

nlohmann::json report_to_json(const VerificationReport& report);

}  // namespace parityformer
