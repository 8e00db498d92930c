// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "parityformer/error.hpp"
#include "parityformer/interpreter.hpp"
#include "parityformer/linalg.hpp"
#include "parityformer/positional.hpp"
#include "parityformer/scalar.hpp"
#include "parityformer/telescope.hpp"

namespace parityformer {

inline constexpr std::string_view kDefaultAlpha = "0.01";

template <Scalar S>
class ConstructionParams {
 public:
  /// alpha is given as a decimal literal so every backend rounds it once.
  explicit ConstructionParams(std::string_view alpha_text = kDefaultAlpha)
      : alpha_text_(alpha_text), alpha_(parse_scalar<S>(alpha_text)) {
    using std::log;
    if (!(alpha_ > S(0) && alpha_ < S(1)))
      throw Error(ErrorKind::invalid_argument,
                  "alpha must lie strictly between 0 and 1, got " + alpha_text_);
    delta_ = log(alpha_);
  }

  const std::string& alpha_text() const noexcept { return alpha_text_; }
  const S& alpha() const noexcept { return alpha_; }
  /// ln(alpha); the layer-2 score offset.
  const S& delta() const noexcept { return delta_; }
  S temperature(std::uint64_t n) const { return parityformer::temperature<S>(n, alpha_); }

 private:
  std::string alpha_text_;
  S alpha_;
  S delta_;
};

/*
  Register map of the residual stream. OUT must be coordinate 0 because the
  decision reads g_1^1.

  The telescope slots PE_INV_N and PE_INV_N2 are reused: after layer 1 they
  hold alpha/n and alpha^2/n^2. GAMMA and ACOEFF stage those averages inside
  layer 1 before the network moves them.
*/
struct StreamLayout {
  std::size_t dim = 16;
  std::size_t out = 0;
  std::size_t bias = 1;
  std::size_t token = 2;
  std::size_t sign = 3;
  std::size_t pe_invquad = 4;
  std::size_t pe_lnn = 5;
  std::size_t pe_temp = 6;
  std::size_t pe_inv_n = 7;
  std::size_t pe_inv_n2 = 8;
  std::size_t lnn = 9;
  std::size_t mean_x = 10;
  std::size_t guard = 11;
  std::size_t gamma = 12;
  std::size_t acoeff = 13;
  std::size_t theta = 14;
  std::size_t temp = 15;

  std::vector<std::pair<std::string_view, std::size_t>> named() const {
    return {{"OUT", out},         {"BIAS", bias},         {"TOKEN", token},
            {"SIGN", sign},       {"PE_INVQUAD", pe_invquad}, {"PE_LNN", pe_lnn},
            {"PE_TEMP", pe_temp}, {"PE_INV_N", pe_inv_n}, {"PE_INV_N2", pe_inv_n2},
            {"LNN", lnn},         {"MEAN_X", mean_x},     {"GUARD", guard},
            {"GAMMA", gamma},     {"ACOEFF", acoeff},     {"THETA", theta},
            {"TEMP", temp}};
  }

  void validate() const;
};

/// Closed-form intermediates for one input.
template <Scalar S>
struct SemanticTrace {
  std::uint64_t n = 0;
  std::uint64_t sigma = 0;
  S lnn;
  S gamma;
  std::vector<S> coeffs;  // empty when sigma == 0
  S temperature;
  std::optional<S> theta;  // unset when sigma == 0
  S guard;
  S final_value;

  friend bool operator==(const SemanticTrace&, const SemanticTrace&) = default;
};

std::uint64_t count_ones(std::span<const std::uint8_t> bits);

/// sigma / (sigma + (n - sigma) alpha / n), the layer-2 mix of the token bits.
template <Scalar S>
S semantic_gamma(std::uint64_t n, std::uint64_t sigma, const ConstructionParams<S>& params) {
  if (n == 0) throw Error(ErrorKind::empty_input, "empty input not in model scope");
  if (sigma > n) throw Error(ErrorKind::invalid_argument, "sigma exceeds n");
  const S s = S(sigma);
  return s / (s + S(n - sigma) * params.alpha() / S(n));
}

template <Scalar S>
S semantic_gamma(std::span<const std::uint8_t> bits, const ConstructionParams<S>& params) {
  return semantic_gamma<S>(bits.size(), count_ones(bits), params);
}

/// a_i = -|gamma - 1 + (alpha/i - alpha/n) - (alpha^2/i^2 + alpha^2/n^2)|,
/// maximised uniquely at i = sigma.
template <Scalar S>
std::vector<S> semantic_coeffs(std::uint64_t n, std::uint64_t sigma,
                               const ConstructionParams<S>& params) {
  using std::abs;
  if (sigma == 0)
    throw Error(ErrorKind::invalid_argument,
                "precondition violated: coefficients need sigma >= 1");
  const S gamma = semantic_gamma<S>(n, sigma, params);
  const S& alpha = params.alpha();
  const S len = S(n);
  const S tail = alpha / len + alpha * alpha / (len * len);
  std::vector<S> a(n);
  for (std::uint64_t i = 1; i <= n; ++i) {
    const S pos = S(i);
    const S z = gamma - S(1) + alpha / pos - alpha * alpha / (pos * pos) - tail;
    a[i - 1] = -abs(z);
  }
  return a;
}

/// Softmax(T a_i)-weighted average of (-1)^i.
template <Scalar S>
S semantic_theta(std::uint64_t n, std::uint64_t sigma, const S& temperature,
                 const ConstructionParams<S>& params) {
  auto scores = semantic_coeffs<S>(n, sigma, params);
  for (auto& s : scores) s *= temperature;
  const auto w = softmax_weights<S>(scores);
  CompensatedSum<S> theta;
  for (std::size_t i = 0; i < w.size(); ++i) theta += (i % 2 == 0) ? -w[i] : w[i];
  return theta.value();
}

template <Scalar S>
S semantic_theta(std::uint64_t n, std::uint64_t sigma, const ConstructionParams<S>& params) {
  return semantic_theta<S>(n, sigma, params.temperature(n), params);
}

/// 1/(2n) - sigma/n: positive exactly when the word has no 1s.
template <Scalar S>
S semantic_guard(std::uint64_t n, std::uint64_t sigma) {
  const S len = S(n);
  return S(1) / (S(2) * len) - S(sigma) / len;
}

template <Scalar S>
std::pair<Decision, SemanticTrace<S>> semantic_decide(std::uint64_t n, std::uint64_t sigma,
                                                      const ConstructionParams<S>& params) {
  using std::log;
  if (n == 0) throw Error(ErrorKind::empty_input, "empty input not in model scope");
  SemanticTrace<S> t;
  t.n = n;
  t.sigma = sigma;
  t.lnn = log(S(n));
  t.gamma = semantic_gamma<S>(n, sigma, params);
  t.temperature = params.temperature(n);
  t.guard = semantic_guard<S>(n, sigma);
  if (sigma == 0) {
    t.final_value = t.guard;
  } else {
    t.coeffs = semantic_coeffs<S>(n, sigma, params);
    t.theta = semantic_theta<S>(n, sigma, t.temperature, params);
    t.final_value = *t.theta > t.guard ? *t.theta : t.guard;
  }
  if (t.final_value == S(0)) throw Error(ErrorKind::indeterminate, "indeterminate");
  const auto decision = t.final_value > S(0) ? Decision::accept : Decision::reject;
  return {decision, std::move(t)};
}

template <Scalar S>
std::pair<Decision, SemanticTrace<S>> semantic_decide(std::span<const std::uint8_t> bits,
                                                      const ConstructionParams<S>& params) {
  return semantic_decide<S>(bits.size(), count_ones(bits), params);
}

namespace detail {

/// Accumulates a one-hidden-layer ReLU network whose outputs are signed sums
/// of hidden units. Linear forms are passed through with the exact identity
/// x = ReLU(x) - ReLU(-x).
template <Scalar S>
class NetBuilder {
 public:
  using Form = std::vector<std::pair<std::size_t, S>>;

  explicit NetBuilder(std::size_t dim) : dim_(dim), outputs_(dim) {}

  std::size_t unit(const Form& form) {
    Vector<S> row(dim_, S(0));
    for (const auto& [c, w] : form) row[c] += w;
    rows_.push_back(std::move(row));
    return rows_.size() - 1;
  }

  void add(std::size_t out, std::size_t hidden, const S& weight) {
    outputs_[out].push_back({hidden, weight});
  }

  /// out += form
  void linear(std::size_t out, const Form& form) {
    Form neg;
    for (const auto& [c, w] : form) neg.push_back({c, -w});
    add(out, unit(form), S(1));
    add(out, unit(neg), S(-1));
  }

  void pass(std::size_t coord) { linear(coord, {{coord, S(1)}}); }

  /// out += -|form|
  void negative_abs(std::size_t out, const Form& form) {
    Form neg;
    for (const auto& [c, w] : form) neg.push_back({c, -w});
    add(out, unit(form), S(-1));
    add(out, unit(neg), S(-1));
  }

  /// out += ReLU(form)
  void relu(std::size_t out, const Form& form) { add(out, unit(form), S(1)); }

  PiecewiseLinearNet<S> build() const {
    const auto width = rows_.size();
    Matrix<S> up(width, dim_);
    for (std::size_t h = 0; h < width; ++h)
      for (std::size_t c = 0; c < dim_; ++c) up(h, c) = rows_[h][c];
    Matrix<S> down(dim_, width);
    for (std::size_t o = 0; o < dim_; ++o)
      for (const auto& [h, w] : outputs_[o]) down(o, h) += w;
    return PiecewiseLinearNet<S>(
        {{std::move(up), Vector<S>(width, S(0))}, {std::move(down), Vector<S>(dim_, S(0))}});
  }

 private:
  std::size_t dim_;
  std::vector<Vector<S>> rows_;
  std::vector<std::vector<std::pair<std::size_t, S>>> outputs_;
};

}  // namespace detail

/*
  The three-layer parity transformer.

  Layer 1 averages uniformly (K = Q = 0), turning every telescope coordinate
  into its length function and TOKEN into sigma/n; the network derives
  GUARD = (1/(2 alpha)) (alpha/n) - sigma/n.

  Layer 2 scores key j against any query with (1 - x_j)(delta - ln n), so the
  mixed TOKEN is gamma; the network forms ACOEFF = a_i.

  Layer 3 scores a_j T(n); the mixed SIGN is theta and the network writes
  OUT = GUARD + ReLU(THETA - GUARD) = max(THETA, GUARD).
*/
template <Scalar S>
TransformerSpec<S> build_parity_spec(const ConstructionParams<S>& params,
                                     const StreamLayout& L = StreamLayout{}) {
  L.validate();
  const auto d = L.dim;
  const S one = S(1);
  const S& alpha = params.alpha();

  std::vector<PositionalCoordinate<S>> pe = {
      {L.bias, ConstantRule<S>{one}},
      {L.sign, AlternatingSignRule{}},
      {L.pe_invquad, InverseQuadraticRule<S>{alpha}},
      {L.pe_lnn, TelescopeRule<S>{LengthFunction::ln_n, alpha}},
      {L.pe_temp, TelescopeRule<S>{LengthFunction::temperature, alpha}},
      {L.pe_inv_n, TelescopeRule<S>{LengthFunction::alpha_over_n, alpha}},
      {L.pe_inv_n2, TelescopeRule<S>{LengthFunction::alpha2_over_n2, alpha}},
  };
  LetterEmbedding<S> letters{Vector<S>(d, S(0)), Vector<S>(d, S(0))};
  letters.one[L.token] = one;

  std::vector<AttentionLayer<S>> layers;

  {
    AttentionLayer<S> l1{Matrix<S>(d, d), Matrix<S>(d, d), Matrix<S>(d, d), {}};
    l1.output(L.lnn, L.pe_lnn) = one;
    l1.output(L.mean_x, L.token) = one;
    l1.output(L.temp, L.pe_temp) = one;
    l1.output(L.gamma, L.pe_inv_n) = one;
    l1.output(L.acoeff, L.pe_inv_n2) = one;

    detail::NetBuilder<S> net(d);
    for (auto c : {L.bias, L.token, L.sign, L.pe_invquad, L.lnn, L.mean_x, L.temp})
      net.pass(c);
    net.linear(L.pe_inv_n, {{L.gamma, one}});
    net.linear(L.pe_inv_n2, {{L.acoeff, one}});
    net.linear(L.guard, {{L.gamma, one / (S(2) * alpha)}, {L.mean_x, -one}});
    l1.mlp = net.build();
    layers.push_back(std::move(l1));
  }

  {
    AttentionLayer<S> l2{Matrix<S>(d, d), Matrix<S>(d, d), Matrix<S>(d, d), {}};
    l2.key(0, L.bias) = one;
    l2.key(0, L.token) = -one;
    l2.query(0, L.bias) = params.delta();
    l2.query(0, L.lnn) = -one;
    l2.output(L.gamma, L.token) = one;

    detail::NetBuilder<S> net(d);
    for (auto c : {L.bias, L.token, L.sign, L.pe_invquad, L.pe_inv_n, L.pe_inv_n2, L.lnn,
                   L.mean_x, L.guard, L.gamma, L.temp})
      net.pass(c);
    net.negative_abs(L.acoeff, {{L.gamma, one},
                                {L.bias, -one},
                                {L.pe_invquad, one},
                                {L.pe_inv_n, -one},
                                {L.pe_inv_n2, -one}});
    l2.mlp = net.build();
    layers.push_back(std::move(l2));
  }

  {
    AttentionLayer<S> l3{Matrix<S>(d, d), Matrix<S>(d, d), Matrix<S>(d, d), {}};
    l3.key(0, L.acoeff) = one;
    l3.query(0, L.temp) = one;
    l3.output(L.theta, L.sign) = one;

    detail::NetBuilder<S> net(d);
    for (auto c : {L.bias, L.token, L.sign, L.lnn, L.mean_x, L.guard, L.gamma, L.acoeff,
                   L.theta, L.temp})
      net.pass(c);
    net.linear(L.out, {{L.guard, one}});
    net.relu(L.out, {{L.theta, one}, {L.guard, -one}});
    l3.mlp = net.build();
    layers.push_back(std::move(l3));
  }

  return TransformerSpec<S>(d, std::move(layers), std::move(letters),
                            PositionalEncoding<S>(d, std::move(pe)));
}

}  // namespace parityformer
