// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "parityformer/construction.hpp"
#include "parityformer/error.hpp"
#include "parityformer/interpreter.hpp"
#include "parityformer/scalar.hpp"

namespace parityformer {

struct VerificationReport {
  std::string claim;
  std::string range;
  bool passed = true;
  std::optional<std::string> witness;
  std::string worst_label;
  double worst_value = 0;
  std::uint64_t cases = 0;
  std::vector<std::pair<std::string, double>> metrics;
  std::chrono::duration<double> runtime{};

  /// Marks the report failed; the first witness recorded is kept.
  void fail(std::string what) {
    passed = false;
    if (!witness) witness = std::move(what);
  }

  std::optional<double> metric(std::string_view name) const {
    for (const auto& [k, v] : metrics)
      if (k == name) return v;
    return std::nullopt;
  }
};

/// Human-readable, deterministic rendering (runtime excluded).
std::string render_text(const VerificationReport& report);

/// True iff the word has an even number of 1s.
bool parity_oracle(std::span<const std::uint8_t> bits);

struct Outcome {
  Decision decision;
  double margin;
};

/// Maps a word to a decision; must be safe to call concurrently when used
/// with more than one thread.
using Runner = std::function<Outcome(std::span<const std::uint8_t>)>;

template <Scalar S>
Runner make_runner(const TransformerSpec<S>& spec) {
  return [&spec](std::span<const std::uint8_t> bits) {
    const auto r = run_transformer<S>(spec, bits, TraceDetail::summary);
    return Outcome{r.decision, to_double(r.margin)};
  };
}

/// Runs every word of length 1..n_max. threads == 0 uses the hardware
/// concurrency; the aggregate does not depend on the thread count.
VerificationReport exhaustive_verify(const Runner& runner, unsigned n_max,
                                     unsigned threads = 0);

/// Words drawn from the bits of a seeded 64-bit Mersenne Twister.
std::vector<std::vector<std::uint8_t>> random_words(std::uint64_t count, std::uint64_t length,
                                                    std::uint64_t seed);

VerificationReport random_verify(const Runner& runner, std::uint64_t count,
                                  std::uint64_t length, std::uint64_t seed);

template <Scalar S>
struct SeparationRecord {
  std::uint64_t i;
  S a;
  S b;  // alpha/i - alpha/sigma
  S c;  // alpha^2/sigma^2 - alpha^2/i^2
  S ratio_c;
  S ratio_lambda;
  S ratio_rho;
};

template <Scalar S>
struct SeparationAudit {
  std::uint64_t n;
  std::uint64_t sigma;
  S lambda;     // -2 alpha^2 / (sigma n)
  S rho_bound;  // alpha^3 / sigma^3
  std::vector<SeparationRecord<S>> records;
  S min_ratio_c;
  S min_ratio_lambda;
  S min_ratio_rho;
  /// min over i != sigma of (a_sigma - a_i) / (|b_i| / 2)
  S min_gap_ratio;
  std::uint64_t argmax;
  bool unique;
};

/// Separation inequalities and argmax for one (n, sigma).
template <Scalar S>
SeparationAudit<S> audit_pair(std::uint64_t n, std::uint64_t sigma,
                          const ConstructionParams<S>& params) {
  using std::abs;
  const S& alpha = params.alpha();
  const S s = S(sigma);
  const S inf = std::numeric_limits<double>::infinity();
  SeparationAudit<S> audit{n, sigma, -S(2) * alpha * alpha / (s * S(n)),
                       alpha * alpha * alpha / (s * s * s), {}, inf, inf, inf, inf, 0, true};
  const auto a = semantic_coeffs<S>(n, sigma, params);
  audit.records.reserve(n);
  for (std::uint64_t i = 1; i <= n; ++i) {
    const S pos = S(i);
    // Factored forms of alpha/i - alpha/sigma and alpha^2/sigma^2 - alpha^2/i^2;
    // the integer differences are exact, so no cancellation.
    const S diff = s - pos;
    SeparationRecord<S> r{i, a[i - 1], alpha * diff / (pos * s),
                      alpha * alpha * (-diff) * (pos + s) / (s * s * pos * pos), inf, inf, inf};
    if (i != sigma) {
      const S b = abs(r.b);
      r.ratio_c = b / abs(r.c);
      r.ratio_lambda = b / abs(audit.lambda);
      r.ratio_rho = b / audit.rho_bound;
      if (r.ratio_c < audit.min_ratio_c) audit.min_ratio_c = r.ratio_c;
      if (r.ratio_lambda < audit.min_ratio_lambda) audit.min_ratio_lambda = r.ratio_lambda;
      if (r.ratio_rho < audit.min_ratio_rho) audit.min_ratio_rho = r.ratio_rho;
      const S gap = (a[sigma - 1] - a[i - 1]) / (b / S(2));
      if (gap < audit.min_gap_ratio) audit.min_gap_ratio = gap;
    }
    audit.records.push_back(std::move(r));
  }
  std::uint64_t best = 1;
  for (std::uint64_t i = 2; i <= n; ++i)
    if (a[i - 1] > a[best - 1]) best = i;
  audit.argmax = best;
  for (std::uint64_t i = 1; i <= n; ++i)
    if (i != best && a[i - 1] == a[best - 1]) audit.unique = false;
  return audit;
}

/*
  For 2 <= n <= n_max, 1 <= sigma <= n and i != sigma: each of
  |b_i|/|c_i|, |b_i|/|lambda| and |b_i|/(alpha^3/sigma^3) exceeds 10, the
  coefficient gap a_sigma - a_i is at least |b_i|/2, and a attains its maximum
  only at sigma.
*/
template <Scalar S>
VerificationReport separation_audit(std::uint64_t n_max, const ConstructionParams<S>& params) {
  const auto start = std::chrono::steady_clock::now();
  if (n_max < 2) throw Error(ErrorKind::invalid_argument, "audit needs n_max >= 2");
  VerificationReport rep;
  rep.claim = "coefficient separation";
  rep.range = "2 <= n <= " + std::to_string(n_max) + ", alpha = " + params.alpha_text();
  rep.worst_label = "min ratio";
  const S ten = S(10);
  const S inf = std::numeric_limits<double>::infinity();
  S min_c = inf, min_lambda = inf, min_rho = inf, min_gap = inf;
  for (std::uint64_t n = 2; n <= n_max; ++n) {
    for (std::uint64_t sigma = 1; sigma <= n; ++sigma) {
      const auto audit = audit_pair<S>(n, sigma, params);
      rep.cases += n - 1;
      if (audit.min_ratio_c < min_c) min_c = audit.min_ratio_c;
      if (audit.min_ratio_lambda < min_lambda) min_lambda = audit.min_ratio_lambda;
      if (audit.min_ratio_rho < min_rho) min_rho = audit.min_ratio_rho;
      if (audit.min_gap_ratio < min_gap) min_gap = audit.min_gap_ratio;
      if (!rep.passed) continue;
      auto where = "n=" + std::to_string(n) + " sigma=" + std::to_string(sigma);
      for (const auto& r : audit.records) {
        if (r.i == sigma) continue;
        const auto at = where + " i=" + std::to_string(r.i);
        if (!(r.ratio_c > ten))
          rep.fail(at + " |b|/|c|=" + format_shortest(to_double(r.ratio_c)));
        else if (!(r.ratio_lambda > ten))
          rep.fail(at + " |b|/|lambda|=" + format_shortest(to_double(r.ratio_lambda)));
        else if (!(r.ratio_rho > ten))
          rep.fail(at + " |b|/rho_bound=" + format_shortest(to_double(r.ratio_rho)));
        if (!rep.passed) break;
      }
      if (rep.passed && !(audit.min_gap_ratio >= S(1)))
        rep.fail(where + " gap below |b|/2: ratio " +
                 format_shortest(to_double(audit.min_gap_ratio)));
      if (rep.passed && (audit.argmax != sigma || !audit.unique))
        rep.fail(where + " argmax=" + std::to_string(audit.argmax) +
                 (audit.unique ? "" : " (tied)"));
    }
  }
  rep.metrics = {{"min_ratio_c", to_double(min_c)},
                 {"min_ratio_lambda", to_double(min_lambda)},
                 {"min_ratio_rho", to_double(min_rho)},
                 {"min_gap_over_half_b", to_double(min_gap)}};
  rep.worst_value = to_double(std::min({min_c, min_lambda, min_rho}));
  rep.runtime = std::chrono::steady_clock::now() - start;
  return rep;
}

/// max over sigma in 1..n of |theta(n, sigma, T) - (-1)^sigma|
template <Scalar S>
std::pair<S, std::uint64_t> max_theta_deviation(std::uint64_t n, const S& temperature,
                                                const ConstructionParams<S>& params) {
  using std::abs;
  S worst = S(0);
  std::uint64_t witness = 1;
  for (std::uint64_t sigma = 1; sigma <= n; ++sigma) {
    const S target = sigma % 2 == 0 ? S(1) : S(-1);
    const S dev = abs(semantic_theta<S>(n, sigma, temperature, params) - target);
    if (dev > worst) {
      worst = dev;
      witness = sigma;
    }
  }
  return {worst, witness};
}

template <Scalar S>
VerificationReport margin_profile(std::uint64_t n, const S& temperature,
                                  const ConstructionParams<S>& params,
                                  const S& target = S(1) / S(3)) {
  const auto start = std::chrono::steady_clock::now();
  if (n == 0) throw Error(ErrorKind::invalid_argument, "margin_profile needs n >= 1");
  if (!(temperature > S(0)))
    throw Error(ErrorKind::invalid_argument, "temperature must be positive");
  VerificationReport rep;
  rep.claim = "readout margin";
  rep.range = "n = " + std::to_string(n) + ", T = " + format_shortest(to_double(temperature));
  rep.worst_label = "max |theta - (-1)^sigma|";
  const auto [worst, sigma] = max_theta_deviation<S>(n, temperature, params);
  rep.cases = n;
  rep.worst_value = to_double(worst);
  rep.metrics = {{"target", to_double(target)}, {"worst_sigma", double(sigma)}};
  if (worst > target)
    rep.fail("n=" + std::to_string(n) + " sigma=" + std::to_string(sigma) +
             " deviation=" + format_shortest(to_double(worst)));
  rep.runtime = std::chrono::steady_clock::now() - start;
  return rep;
}

/// Smallest temperature (to relative precision 1e-3) whose margin profile
/// stays within target. The search starts from [1e-6, T(n)] and doubles the
/// upper end at most 64 times.
template <Scalar S>
S calibrate_temperature(std::uint64_t n, const S& target, const ConstructionParams<S>& params) {
  using std::sqrt;
  if (n == 0) throw Error(ErrorKind::invalid_argument, "calibrate needs n >= 1");
  if (!(target > S(0) && target < S(1)))
    throw Error(ErrorKind::invalid_argument, "target must lie in (0, 1)");
  auto ok = [&](const S& t) { return max_theta_deviation<S>(n, t, params).first <= target; };

  S lo = S(1) / S(1000000);
  if (ok(lo)) return lo;
  S hi = params.temperature(n);
  int doublings = 0;
  while (!ok(hi)) {
    if (++doublings > 64)
      throw Error(ErrorKind::search_exhausted,
                  "no temperature up to " + format_shortest(to_double(hi)) +
                      " reaches deviation " + format_shortest(to_double(target)) +
                      " at n=" + std::to_string(n));
    lo = hi;
    hi *= S(2);
  }
  while (hi / lo > S(1) + S(1) / S(1000)) {
    const S mid = sqrt(lo * hi);
    (ok(mid) ? hi : lo) = mid;
  }
  return hi;
}

/// Largest |sum_j w_ij - 1| over every weight row of the trace.
template <Scalar S>
S max_row_sum_deviation(const RunTrace<S>& trace) {
  using std::abs;
  S worst = S(0);
  for (const auto& layer : trace.layers)
    for (const auto& row : layer.weights) {
      CompensatedSum<S> sum;
      for (const auto& w : row) sum += w;
      const S dev = abs(sum.value() - S(1));
      if (dev > worst) worst = dev;
    }
  return worst;
}

/// |x - ref| / |ref|, or |x| when ref is zero.
template <Scalar S>
S relative_deviation(const S& x, const S& ref) {
  using std::abs;
  return ref == S(0) ? abs(x) : abs(x - ref) / abs(ref);
}

/// Throws if the spec's dimension or positional rules do not match the
/// layout the parity construction uses.
template <Scalar S>
void check_layout(const TransformerSpec<S>& spec, const StreamLayout& L) {
  auto fail = [](const std::string& m) { throw Error(ErrorKind::configuration, "layout mismatch: " + m); };
  if (spec.dim() != L.dim)
    fail("spec dimension " + std::to_string(spec.dim()) + " != layout dimension " +
         std::to_string(L.dim));
  if (spec.layers().size() != 3) fail("expected 3 layers");
  const auto& pe = spec.positional();
  auto expect_telescope = [&](std::size_t idx, LengthFunction f) {
    const auto* r = pe.rule_at(idx);
    const auto* t = r ? std::get_if<TelescopeRule<S>>(r) : nullptr;
    if (!t || t->function != f)
      fail("coordinate " + std::to_string(idx) + " is not a " + std::string(to_string(f)) +
           " telescope");
  };
  const auto* sign = pe.rule_at(L.sign);
  if (!sign || !std::holds_alternative<AlternatingSignRule>(*sign))
    fail("coordinate " + std::to_string(L.sign) + " is not the alternating sign");
  const auto* iq = pe.rule_at(L.pe_invquad);
  if (!iq || !std::holds_alternative<InverseQuadraticRule<S>>(*iq))
    fail("coordinate " + std::to_string(L.pe_invquad) + " is not the inverse quadratic");
  expect_telescope(L.pe_lnn, LengthFunction::ln_n);
  expect_telescope(L.pe_temp, LengthFunction::temperature);
  expect_telescope(L.pe_inv_n, LengthFunction::alpha_over_n);
  expect_telescope(L.pe_inv_n2, LengthFunction::alpha2_over_n2);
}

/// Realized intermediates read off the residual stream.
template <Scalar S>
struct RealizedIntermediates {
  std::vector<S> lnn, guard, temperature, gamma, coeffs, theta;
  S final_value;
};

template <Scalar S>
RealizedIntermediates<S> read_intermediates(const RunTrace<S>& trace, const StreamLayout& L) {
  RealizedIntermediates<S> r;
  for (const auto& v : trace.layers.at(0).post) {
    r.lnn.push_back(v[L.lnn]);
    r.guard.push_back(v[L.guard]);
    r.temperature.push_back(v[L.temp]);
  }
  for (const auto& v : trace.layers.at(1).post) {
    r.gamma.push_back(v[L.gamma]);
    r.coeffs.push_back(v[L.acoeff]);
  }
  for (const auto& v : trace.layers.at(2).post) r.theta.push_back(v[L.theta]);
  r.final_value = trace.first_output[L.out];
  return r;
}

/*
  Cross-checks the matrix-realized run against the closed-form pipeline:
  ln n, guard and gamma at every position, every a_i, theta and the final
  value. Coefficients and theta are compared only when the word has a 1.
*/
template <Scalar S>
VerificationReport equivalence_check(const TransformerSpec<S>& spec,
                                     std::span<const std::uint8_t> bits, double tolerance,
                                     const ConstructionParams<S>& params,
                                     const StreamLayout& layout = StreamLayout{}) {
  const auto start = std::chrono::steady_clock::now();
  check_layout(spec, layout);
  VerificationReport rep;
  rep.claim = "semantic-realized equivalence";
  rep.range = "input " + format_bits(bits) + ", tolerance " + format_shortest(tolerance);
  rep.worst_label = "max relative deviation";

  const auto run = run_transformer<S>(spec, bits, TraceDetail::summary);
  const auto [decision, sem] = semantic_decide<S>(bits, params);
  const auto real = read_intermediates<S>(run.trace, layout);
  const S tol = S(tolerance);

  S worst = S(0);
  auto compare = [&](const char* name, std::size_t pos, const S& x, const S& ref) {
    ++rep.cases;
    const S dev = relative_deviation<S>(x, ref);
    if (dev > worst) worst = dev;
    if (!(dev <= tol))
      rep.fail(format_bits(bits) + ": " + name + "[" + std::to_string(pos) + "] realized " +
               format_shortest(to_double(x)) + " vs " + format_shortest(to_double(ref)));
  };
  for (std::size_t i = 0; i < bits.size(); ++i) {
    compare("ln n", i + 1, real.lnn[i], sem.lnn);
    compare("guard", i + 1, real.guard[i], sem.guard);
    compare("gamma", i + 1, real.gamma[i], sem.gamma);
    if (sem.sigma > 0) {
      compare("a", i + 1, real.coeffs[i], sem.coeffs[i]);
      compare("theta", i + 1, real.theta[i], *sem.theta);
    }
  }
  compare("final", 1, real.final_value, sem.final_value);
  if (rep.passed && run.decision != decision)
    rep.fail(format_bits(bits) + ": realized decision differs from closed form");
  rep.worst_value = to_double(worst);
  rep.runtime = std::chrono::steady_clock::now() - start;
  return rep;
}

}  // namespace parityformer
