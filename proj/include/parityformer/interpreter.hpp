// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "parityformer/error.hpp"
#include "parityformer/linalg.hpp"
#include "parityformer/positional.hpp"
#include "parityformer/scalar.hpp"

namespace parityformer {

/// One attention layer: output_i = mlp(f_i + O a_i), where a_i is the
/// softmax(<K f_j, Q f_i>)-weighted average of the f_j.
template <Scalar S>
struct AttentionLayer {
  Matrix<S> key;
  Matrix<S> query;
  Matrix<S> output;
  PiecewiseLinearNet<S> mlp;

  template <Scalar T>
  AttentionLayer<T> cast() const {
    return {key.template cast<T>(), query.template cast<T>(),
            output.template cast<T>(), mlp.template cast<T>()};
  }

  friend bool operator==(const AttentionLayer&, const AttentionLayer&) = default;
};

template <Scalar S>
struct LetterEmbedding {
  Vector<S> zero;
  Vector<S> one;
  friend bool operator==(const LetterEmbedding&, const LetterEmbedding&) = default;
};

/// Complete model: nothing in it depends on the input length.
template <Scalar S>
class TransformerSpec {
 public:
  TransformerSpec(std::size_t dim, std::vector<AttentionLayer<S>> layers,
                  LetterEmbedding<S> letters, PositionalEncoding<S> positional)
      : dim_(dim),
        layers_(std::move(layers)),
        letters_(std::move(letters)),
        positional_(std::move(positional)) {
    validate();
  }

  std::size_t dim() const noexcept { return dim_; }
  const std::vector<AttentionLayer<S>>& layers() const noexcept { return layers_; }
  const LetterEmbedding<S>& letters() const noexcept { return letters_; }
  const PositionalEncoding<S>& positional() const noexcept { return positional_; }

  /// f_i = letter(x_i) + p(i), positions counted from 1.
  Vector<S> embed(std::uint8_t bit, std::uint64_t position) const {
    auto f = positional_.at(position);
    const auto& letter = bit ? letters_.one : letters_.zero;
    for (std::size_t c = 0; c < dim_; ++c) f[c] += letter[c];
    return f;
  }

  template <Scalar T>
  TransformerSpec<T> cast() const {
    std::vector<AttentionLayer<T>> layers;
    for (const auto& l : layers_) layers.push_back(l.template cast<T>());
    LetterEmbedding<T> letters;
    for (const auto& v : letters_.zero) letters.zero.push_back(T(v));
    for (const auto& v : letters_.one) letters.one.push_back(T(v));
    return TransformerSpec<T>(dim_, std::move(layers), std::move(letters),
                              positional_.template cast<T>());
  }

  friend bool operator==(const TransformerSpec&, const TransformerSpec&) = default;

 private:
  void validate() const {
    auto fail = [](const std::string& msg) { throw Error(ErrorKind::configuration, msg); };
    if (dim_ == 0) fail("dimension must be positive");
    if (layers_.empty()) fail("a transformer needs at least one layer");
    for (std::size_t k = 0; k < layers_.size(); ++k) {
      const auto& l = layers_[k];
      const auto where = "layer " + std::to_string(k) + ": ";
      for (const auto* m : {&l.key, &l.query, &l.output})
        if (m->rows() != dim_ || m->cols() != dim_)
          fail(where + "K, Q and O must be " + std::to_string(dim_) + "x" +
               std::to_string(dim_));
      if (l.mlp.stages().empty()) fail(where + "missing network");
      if (l.mlp.in_dim() != dim_ || l.mlp.out_dim() != dim_)
        fail(where + "network must map R^" + std::to_string(dim_) + " to itself");
    }
    if (letters_.zero.size() != dim_ || letters_.one.size() != dim_)
      fail("letter embedding vectors must have length " + std::to_string(dim_));
    if (positional_.dim() != dim_)
      fail("positional encoding dimension " + std::to_string(positional_.dim()) +
           " != " + std::to_string(dim_));
  }

  std::size_t dim_;
  std::vector<AttentionLayer<S>> layers_;
  LetterEmbedding<S> letters_;
  PositionalEncoding<S> positional_;
};

enum class Decision { accept, reject };

inline std::string_view to_string(Decision d) {
  return d == Decision::accept ? "accept" : "reject";
}

/// Which intermediates run_transformer keeps. `summary` drops the n x n
/// score and weight matrices.
enum class TraceDetail { full, summary };

template <Scalar S>
struct LayerTrace {
  std::vector<Vector<S>> scores;   // [query i][key j]
  std::vector<Vector<S>> weights;  // row-stochastic
  std::vector<Vector<S>> mixed;    // a_i
  std::vector<Vector<S>> post;     // mlp(f_i + O a_i)
};

template <Scalar S>
struct RunTrace {
  std::vector<Vector<S>> embedded;
  std::vector<LayerTrace<S>> layers;
  Vector<S> first_output;  // g_1
};

template <Scalar S>
struct RunResult {
  Decision decision;
  S margin;  // |g_1^1|
  RunTrace<S> trace;
};

/// Reads a word over {0,1}; any other character is rejected with its position.
std::vector<std::uint8_t> parse_bits(std::string_view text);
std::string format_bits(std::span<const std::uint8_t> bits);

/*
  Max-subtracted softmax: w_j = exp(s_j - m) / sum_k exp(s_k - m) with
  m = max s. The normaliser is accumulated with compensated summation.
*/
template <Scalar S>
Vector<S> softmax_weights(std::span<const S> scores) {
  using std::exp;
  if (scores.empty()) throw Error(ErrorKind::invalid_argument, "empty sequence");
  S m = scores[0];
  for (const auto& s : scores) {
    if (!is_finite(s)) throw Error(ErrorKind::invalid_argument, "invalid score");
    if (s > m) m = s;
  }
  Vector<S> w(scores.size());
  CompensatedSum<S> total;
  for (std::size_t j = 0; j < scores.size(); ++j) {
    w[j] = exp(scores[j] - m);
    total += w[j];
  }
  const S z = total.value();
  for (auto& v : w) v /= z;
  return w;
}

namespace detail {

template <Scalar S>
void check_sequence(const AttentionLayer<S>& layer, std::span<const Vector<S>> seq) {
  const auto d = layer.key.cols();
  if (layer.query.cols() != d || layer.output.cols() != d || layer.output.rows() != d ||
      layer.key.rows() != layer.query.rows())
    throw Error(ErrorKind::dimension_mismatch, "inconsistent layer matrices");
  for (std::size_t j = 0; j < seq.size(); ++j)
    if (seq[j].size() != d)
      throw Error(ErrorKind::dimension_mismatch,
                  "vector " + std::to_string(j + 1) + " has length " +
                      std::to_string(seq[j].size()) + ", expected " + std::to_string(d));
}

template <Scalar S>
std::vector<Vector<S>> attend(const AttentionLayer<S>& layer,
                              std::span<const Vector<S>> seq,
                              std::vector<Vector<S>>* scores_out,
                              std::vector<Vector<S>>* weights_out) {
  check_sequence(layer, seq);
  const auto n = seq.size();
  const auto d = layer.key.cols();
  std::vector<Vector<S>> keys, queries;
  keys.reserve(n);
  queries.reserve(n);
  for (const auto& f : seq) {
    keys.push_back(layer.key.apply(f));
    queries.push_back(layer.query.apply(f));
  }

  std::vector<Vector<S>> mixed(n);
  Vector<S> scores(n), weights;
  for (std::size_t i = 0; i < n; ++i) {
    // Identical queries see identical score rows; reuse the previous row.
    if (i > 0 && queries[i] == queries[i - 1]) {
      mixed[i] = mixed[i - 1];
    } else {
      for (std::size_t j = 0; j < n; ++j) {
        S acc = S(0);
        for (std::size_t c = 0; c < keys[j].size(); ++c) acc += keys[j][c] * queries[i][c];
        scores[j] = acc;
      }
      weights = softmax_weights<S>(scores);
      std::vector<CompensatedSum<S>> sums(d);
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t c = 0; c < d; ++c) sums[c] += weights[j] * seq[j][c];
      mixed[i].resize(d);
      for (std::size_t c = 0; c < d; ++c) mixed[i][c] = sums[c].value();
    }
    if (scores_out) scores_out->push_back(scores);
    if (weights_out) weights_out->push_back(weights);
  }
  return mixed;
}

template <Scalar S>
std::vector<Vector<S>> combine(const AttentionLayer<S>& layer,
                               std::span<const Vector<S>> seq,
                               const std::vector<Vector<S>>& mixed) {
  std::vector<Vector<S>> out;
  out.reserve(seq.size());
  for (std::size_t i = 0; i < seq.size(); ++i) {
    auto routed = layer.output.apply(mixed[i]);
    for (std::size_t c = 0; c < routed.size(); ++c) routed[c] += seq[i][c];
    out.push_back(layer.mlp.apply(routed));
  }
  return out;
}

}  // namespace detail

/// a_i for every query position i.
template <Scalar S>
std::vector<Vector<S>> attend(const AttentionLayer<S>& layer, std::span<const Vector<S>> seq) {
  return detail::attend<S>(layer, seq, nullptr, nullptr);
}

template <Scalar S>
std::vector<Vector<S>> apply_layer(const AttentionLayer<S>& layer,
                                   std::span<const Vector<S>> seq) {
  const auto mixed = attend<S>(layer, seq);
  return detail::combine<S>(layer, seq, mixed);
}

/// Embeds the word, applies every layer and reads the sign of g_1^1.
template <Scalar S>
RunResult<S> run_transformer(const TransformerSpec<S>& spec,
                             std::span<const std::uint8_t> bits,
                             TraceDetail detail = TraceDetail::full) {
  using std::abs;
  if (bits.empty()) throw Error(ErrorKind::empty_input, "empty input not in model scope");

  RunTrace<S> trace;
  trace.embedded.reserve(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] > 1)
      throw Error(ErrorKind::invalid_argument,
                  "non-binary symbol at position " + std::to_string(i + 1));
    trace.embedded.push_back(spec.embed(bits[i], i + 1));
  }

  const std::vector<Vector<S>>* current = &trace.embedded;
  for (const auto& layer : spec.layers()) {
    LayerTrace<S> rec;
    const bool full = detail == TraceDetail::full;
    rec.mixed = detail::attend<S>(layer, *current, full ? &rec.scores : nullptr,
                                  full ? &rec.weights : nullptr);
    rec.post = detail::combine<S>(layer, *current, rec.mixed);
    trace.layers.push_back(std::move(rec));
    current = &trace.layers.back().post;
  }
  trace.first_output = current->front();

  const S g = trace.first_output[0];
  if (!is_finite(g)) throw Error(ErrorKind::invalid_argument, "non-finite output");
  if (g == S(0)) throw Error(ErrorKind::indeterminate, "indeterminate decision");
  return {g > S(0) ? Decision::accept : Decision::reject, abs(g), std::move(trace)};
}

}  // namespace parityformer
