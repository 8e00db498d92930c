// SPDX-License-Identifier: Apache-2.0
#include "parityformer/serialization.hpp"

#include <fstream>
#include <sstream>

namespace parityformer {

using nlohmann::json;

namespace {

[[noreturn]] void parse_error(const std::string& where, const std::string& what) {
  throw Error(ErrorKind::parse, where + ": " + what);
}

json numbers(std::span<const double> values) {
  json a = json::array();
  for (double v : values) a.push_back(v);
  return a;
}

template <Scalar S>
double as_double(const S& v) {
  return to_double(v);
}

template <Scalar S>
json numbers_of(const std::vector<S>& values) {
  json a = json::array();
  for (const auto& v : values) a.push_back(as_double(v));
  return a;
}

template <Scalar S>
json rows_of(const std::vector<Vector<S>>& rows) {
  json a = json::array();
  for (const auto& r : rows) a.push_back(numbers_of(r));
  return a;
}

json rule_to_json(std::size_t index, const CoordinateRule<double>& rule) {
  json j{{"coordinate", index}};
  std::visit(
      [&](const auto& r) {
        using R = std::decay_t<decltype(r)>;
        if constexpr (std::same_as<R, ConstantRule<double>>) {
          j["rule"] = "constant";
          j["value"] = format_shortest(r.value);
        } else if constexpr (std::same_as<R, AlternatingSignRule>) {
          j["rule"] = "alternating_sign";
        } else if constexpr (std::same_as<R, InverseQuadraticRule<double>>) {
          j["rule"] = "inverse_quadratic";
          j["alpha"] = format_shortest(r.alpha);
        } else {
          j["rule"] = "telescope";
          j["function"] = std::string(to_string(r.function));
          j["alpha"] = format_shortest(r.alpha);
        }
      },
      rule);
  return j;
}

const json& field(const json& obj, const std::string& where, const char* key) {
  if (!obj.is_object()) parse_error(where, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) parse_error(where, std::string("missing field '") + key + "'");
  return *it;
}

std::string path(const std::string& where, const char* key) {
  return where.empty() ? std::string(key) : where + "." + key;
}

std::string path(const std::string& where, std::size_t index) {
  return where + "[" + std::to_string(index) + "]";
}

template <Scalar S>
std::vector<S> read_numbers(const json& a, const std::string& where) {
  if (!a.is_array()) parse_error(where, "expected an array of numbers");
  std::vector<S> out;
  out.reserve(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (!a[k].is_number()) parse_error(path(where, k), "expected a number");
    out.push_back(S(a[k].get<double>()));
  }
  return out;
}

template <Scalar S>
S read_decimal(const json& v, const std::string& where) {
  if (v.is_string()) {
    try {
      return parse_scalar<S>(v.get<std::string>());
    } catch (const Error& e) {
      parse_error(where, e.what());
    }
  }
  if (v.is_number()) return S(v.get<double>());
  parse_error(where, "expected a decimal string");
}

template <Scalar S>
Matrix<S> read_square(const json& obj, const std::string& where, const char* key,
                      std::size_t dim) {
  const auto at = path(where, key);
  auto values = read_numbers<S>(field(obj, where, key), at);
  if (values.size() != dim * dim)
    parse_error(at, "expected " + std::to_string(dim * dim) + " numbers for a " +
                        std::to_string(dim) + "x" + std::to_string(dim) + " matrix, found " +
                        std::to_string(values.size()));
  return Matrix<S>(dim, dim, std::move(values));
}

template <Scalar S>
CoordinateRule<S> read_rule(const json& j, const std::string& where) {
  const auto& tag = field(j, where, "rule");
  if (!tag.is_string()) parse_error(path(where, "rule"), "expected a string");
  const auto name = tag.get<std::string>();
  if (name == "constant") return ConstantRule<S>{read_decimal<S>(field(j, where, "value"), path(where, "value"))};
  if (name == "alternating_sign") return AlternatingSignRule{};
  if (name == "inverse_quadratic")
    return InverseQuadraticRule<S>{read_decimal<S>(field(j, where, "alpha"), path(where, "alpha"))};
  if (name == "telescope") {
    const auto& fn = field(j, where, "function");
    const auto f = fn.is_string() ? length_function_from_string(fn.get<std::string>())
                                  : std::nullopt;
    if (!f)
      parse_error(path(where, "function"),
                  "unknown telescope function " + fn.dump() +
                      " (expected ln_n, temperature, alpha_over_n or alpha2_over_n2)");
    return TelescopeRule<S>{*f, read_decimal<S>(field(j, where, "alpha"), path(where, "alpha"))};
  }
  parse_error(path(where, "rule"), "unknown rule '" + name + "'");
}

}  // namespace

json spec_to_json(const TransformerSpec<double>& spec, std::string_view alpha_text) {
  json doc;
  doc["schema_version"] = kSpecSchema;
  doc["dim"] = spec.dim();
  doc["alpha"] = std::string(alpha_text);
  doc["letter_embedding"] = {{"0", numbers(spec.letters().zero)},
                             {"1", numbers(spec.letters().one)}};
  json pe = json::array();
  for (const auto& c : spec.positional().coordinates()) pe.push_back(rule_to_json(c.index, c.rule));
  doc["positional_encoding"] = std::move(pe);
  json layers = json::array();
  for (const auto& l : spec.layers()) {
    json mlp = json::array();
    for (const auto& s : l.mlp.stages())
      mlp.push_back({{"matrix", numbers(s.matrix.data())}, {"bias", numbers(s.bias)}});
    layers.push_back({{"K", numbers(l.key.data())},
                      {"Q", numbers(l.query.data())},
                      {"O", numbers(l.output.data())},
                      {"mlp", std::move(mlp)}});
  }
  doc["layers"] = std::move(layers);
  return doc;
}

template <Scalar S>
LoadedSpec<S> spec_from_json(const json& doc) {
  const auto& version = field(doc, "document", "schema_version");
  if (!version.is_string() || version.get<std::string>() != kSpecSchema)
    parse_error("schema_version", "unknown schema version " + version.dump() + ", expected \"" +
                                      std::string(kSpecSchema) + "\"");
  const auto& dim_field = field(doc, "document", "dim");
  if (!dim_field.is_number_integer() || dim_field.get<std::int64_t>() <= 0)
    parse_error("dim", "expected a positive integer");
  const auto dim = dim_field.get<std::size_t>();

  const auto& alpha_field = field(doc, "document", "alpha");
  if (!alpha_field.is_string()) parse_error("alpha", "expected a decimal string");
  auto alpha_text = alpha_field.get<std::string>();
  (void)read_decimal<S>(alpha_field, "alpha");

  const auto& letters_field = field(doc, "document", "letter_embedding");
  LetterEmbedding<S> letters{
      read_numbers<S>(field(letters_field, "letter_embedding", "0"), "letter_embedding.0"),
      read_numbers<S>(field(letters_field, "letter_embedding", "1"), "letter_embedding.1")};
  for (const auto& [v, name] : {std::pair{&letters.zero, "0"}, std::pair{&letters.one, "1"}})
    if (v->size() != dim)
      parse_error(std::string("letter_embedding.") + name,
                  "expected " + std::to_string(dim) + " numbers, found " +
                      std::to_string(v->size()));

  const auto& pe_field = field(doc, "document", "positional_encoding");
  if (!pe_field.is_array()) parse_error("positional_encoding", "expected an array");
  std::vector<PositionalCoordinate<S>> coords;
  std::vector<bool> seen(dim, false);
  for (std::size_t k = 0; k < pe_field.size(); ++k) {
    const auto where = path("positional_encoding", k);
    const auto& idx = field(pe_field[k], where, "coordinate");
    if (!idx.is_number_integer() || idx.get<std::int64_t>() < 0 ||
        idx.get<std::uint64_t>() >= dim)
      parse_error(path(where, "coordinate"), "expected an index below " + std::to_string(dim));
    const auto c = idx.get<std::size_t>();
    if (seen[c])
      parse_error(path(where, "coordinate"), "duplicate rule for coordinate " + std::to_string(c));
    seen[c] = true;
    coords.push_back({c, read_rule<S>(pe_field[k], where)});
  }

  const auto& layers_field = field(doc, "document", "layers");
  if (!layers_field.is_array() || layers_field.empty())
    parse_error("layers", "expected a non-empty array");
  std::vector<AttentionLayer<S>> layers;
  for (std::size_t k = 0; k < layers_field.size(); ++k) {
    const auto where = path("layers", k);
    const auto& lj = layers_field[k];
    AttentionLayer<S> layer{read_square<S>(lj, where, "K", dim), read_square<S>(lj, where, "Q", dim),
                            read_square<S>(lj, where, "O", dim), {}};
    const auto mlp_where = path(where, "mlp");
    const auto& mlp = field(lj, where, "mlp");
    if (!mlp.is_array() || mlp.empty()) parse_error(mlp_where, "expected a non-empty array");
    std::vector<AffineMap<S>> stages;
    for (std::size_t s = 0; s < mlp.size(); ++s) {
      const auto sw = path(mlp_where, s);
      auto bias = read_numbers<S>(field(mlp[s], sw, "bias"), path(sw, "bias"));
      auto m = read_numbers<S>(field(mlp[s], sw, "matrix"), path(sw, "matrix"));
      if (bias.empty() || m.size() % bias.size() != 0)
        parse_error(path(sw, "matrix"), std::to_string(m.size()) +
                                            " entries do not form rows of length " +
                                            std::to_string(bias.size()) + " bias entries");
      const auto rows = bias.size(), cols = m.size() / rows;
      const auto expected_in = s == 0 ? dim : stages.back().out_dim();
      if (cols != expected_in)
        parse_error(path(sw, "matrix"), "stage expects input width " + std::to_string(cols) +
                                            ", previous width is " + std::to_string(expected_in));
      if (s + 1 == mlp.size() && rows != dim)
        parse_error(path(sw, "bias"), "last stage must emit " + std::to_string(dim) +
                                          " values, emits " + std::to_string(rows));
      stages.push_back({Matrix<S>(rows, cols, std::move(m)), std::move(bias)});
    }
    layer.mlp = PiecewiseLinearNet<S>(std::move(stages));
    layers.push_back(std::move(layer));
  }

  try {
    return {TransformerSpec<S>(dim, std::move(layers), std::move(letters),
                               PositionalEncoding<S>(dim, std::move(coords))),
            std::move(alpha_text)};
  } catch (const Error& e) {
    parse_error("document", e.what());
  }
}

template LoadedSpec<double> spec_from_json<double>(const json&);
template LoadedSpec<HighPrecision> spec_from_json<HighPrecision>(const json&);

json parse_json_text(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::parse, std::string("malformed JSON: ") + e.what());
  }
}

json read_json_file(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorKind::io, "cannot open '" + file + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_json_text(buf.str());
  } catch (const Error& e) {
    throw Error(ErrorKind::parse, file + ": " + e.what());
  }
}

void write_text_file(const std::string& file, const std::string& text) {
  std::ofstream out(file);
  if (!out) throw Error(ErrorKind::io, "cannot open '" + file + "' for writing");
  out << text;
  if (!out) throw Error(ErrorKind::io, "write to '" + file + "' failed");
}

template <Scalar S>
json trace_to_json(std::span<const std::uint8_t> bits, const RunResult<S>& run,
                   const SemanticTrace<S>* semantic) {
  json doc;
  doc["schema_version"] = kTraceSchema;
  doc["input"] = format_bits(bits);
  doc["decision"] = std::string(to_string(run.decision));
  doc["margin"] = as_double(run.margin);
  doc["embedded"] = rows_of(run.trace.embedded);
  json layers = json::array();
  for (const auto& l : run.trace.layers)
    layers.push_back({{"scores", rows_of(l.scores)},
                      {"weights", rows_of(l.weights)},
                      {"mixed", rows_of(l.mixed)},
                      {"post", rows_of(l.post)}});
  doc["layers"] = std::move(layers);
  doc["output"] = numbers_of(run.trace.first_output);
  if (semantic) {
    json sem{{"n", semantic->n},
             {"sigma", semantic->sigma},
             {"lnn", as_double(semantic->lnn)},
             {"gamma", as_double(semantic->gamma)},
             {"coeffs", numbers_of(semantic->coeffs)},
             {"temperature", as_double(semantic->temperature)},
             {"theta", semantic->theta ? json(as_double(*semantic->theta)) : json(nullptr)},
             {"guard", as_double(semantic->guard)},
             {"final", as_double(semantic->final_value)}};
    doc["semantic"] = std::move(sem);
  }
  return doc;
}

template json trace_to_json<double>(std::span<const std::uint8_t>, const RunResult<double>&,
                                    const SemanticTrace<double>*);
template json trace_to_json<HighPrecision>(std::span<const std::uint8_t>,
                                           const RunResult<HighPrecision>&,
                                           const SemanticTrace<HighPrecision>*);

json report_to_json(const VerificationReport& r) {
  json metrics = json::object();
  for (const auto& [k, v] : r.metrics) metrics[k] = v;
  return {{"claim", r.claim},
          {"range", r.range},
          {"passed", r.passed},
          {"witness", r.witness ? json(*r.witness) : json(nullptr)},
          {"worst_label", r.worst_label},
          {"worst_value", r.worst_value},
          {"cases", r.cases},
          {"metrics", std::move(metrics)},
          {"runtime_seconds", r.runtime.count()}};
}

}  // namespace parityformer
