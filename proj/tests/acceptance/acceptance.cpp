// SPDX-License-Identifier: Apache-2.0
// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "oracle.hpp"
#include "parityformer/construction.hpp"
#include "parityformer/verification.hpp"

using namespace parityformer;

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
// The lambda and rho floors are attained exactly (at i = n, sigma = n - 1 and
// at sigma = 1, i = 2); allow for the last-bit rounding of a double ratio.
constexpr double kFloorSlack = 1e-12;

struct Verdict {
  bool passed;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v) { return format_shortest(v); }

std::vector<std::uint8_t> word_of(std::uint64_t code, std::size_t n) {
  std::vector<std::uint8_t> bits(n);
  for (std::size_t k = 0; k < n; ++k) bits[k] = static_cast<std::uint8_t>((code >> k) & 1u);
  return bits;
}

std::vector<std::vector<std::uint8_t>> all_words(std::size_t n_max) {
  std::vector<std::vector<std::uint8_t>> out;
  for (std::size_t n = 1; n <= n_max; ++n)
    for (std::uint64_t code = 0; code < (std::uint64_t{1} << n); ++code)
      out.push_back(word_of(code, n));
  return out;
}

bool all_finite(const RunTrace<double>& t) {
  auto rows_ok = [](const std::vector<Vector<double>>& rows) {
    for (const auto& r : rows)
      for (double v : r)
        if (!std::isfinite(v)) return false;
    return true;
  };
  if (!rows_ok(t.embedded)) return false;
  for (const auto& l : t.layers)
    if (!rows_ok(l.scores) || !rows_ok(l.weights) || !rows_ok(l.mixed) || !rows_ok(l.post))
      return false;
  return true;
}

// The spec object shared by every criterion; built once.
const TransformerSpec<double>& shared_spec() {
  static const auto spec = build_parity_spec<double>(ConstructionParams<double>());
  return spec;
}

const ConstructionParams<double>& params() {
  static const ConstructionParams<double> p;
  return p;
}

Verdict c1_exhaustive() {
  const auto start = Clock::now();
  const auto rep = exhaustive_verify(make_runner(shared_spec()), 12);
  const double secs = seconds_since(start);
  const bool ok = rep.passed && rep.cases == 8190 && secs < 60.0;
  std::string d = std::to_string(rep.cases) + " words of length 1..12, " +
                  (rep.passed ? "0 failures" : "failure: " + *rep.witness) + ", " + fmt(secs) +
                  " s";
  return {ok, d};
}

Verdict c2_margin() {
  double worst = 0;
  std::string where;
  bool ok = true;
  for (std::uint64_t n = 1; n <= 200; ++n) {
    const auto rep = margin_profile<double>(n, params().temperature(n), params());
    if (rep.worst_value > worst) {
      worst = rep.worst_value;
      where = "n=" + std::to_string(n);
    }
    if (!rep.passed) ok = false;
  }
  // Independent spot checks of theta against an unshifted 256-bit evaluation.
  double oracle_gap = 0;
  {
    oracle::Scope scope;
    const HighPrecision alpha("0.01");
    for (std::uint64_t n : {2u, 17u, 64u, 200u})
      for (std::uint64_t sigma : {std::uint64_t{1}, n / 2 + 1, n}) {
        const double t = params().temperature(n);
        const double ref =
            oracle::theta(n, sigma, HighPrecision(t), alpha).convert_to<double>();
        const double got = semantic_theta<double>(n, sigma, t, params());
        oracle_gap = std::max(oracle_gap, std::abs(got - ref));
      }
  }
  ok = ok && worst <= 1.0 / 3.0 && oracle_gap <= 1e-9;
  return {ok, "n <= 200, every sigma: max |theta - (-1)^sigma| = " + fmt(worst) + " at " + where +
                  " (bound 1/3); oracle agreement " + fmt(oracle_gap)};
}

Verdict c3_audit() {
  const auto rep = separation_audit<double>(300, params());
  const double rc = *rep.metric("min_ratio_c");
  const double rl = *rep.metric("min_ratio_lambda");
  const double rr = *rep.metric("min_ratio_rho");
  const bool floors = rc >= 50 * (1 - kFloorSlack) && rl >= 50 * (1 - kFloorSlack) &&
                      rr >= 5000 * (1 - kFloorSlack);
  const auto negative = separation_audit<double>(300, ConstructionParams<double>("0.2"));
  const bool ok = rep.passed && floors && !negative.passed;
  std::string d = "n <= 300: min ratios c " + fmt(rc) + ", lambda " + fmt(rl) + ", rho " +
                  fmt(rr) + ", unique argmax " + (rep.passed ? "yes" : "no") +
                  "; alpha = 0.2 control " + (negative.passed ? "passed (unexpected)" : "fails");
  if (!rep.passed) d += "; witness " + *rep.witness;
  return {ok, d};
}

Verdict c4_uniformity() {
  const auto& spec = shared_spec();
  const auto* before = &spec;
  const StreamLayout L;
  bool ok = true;

  // Criterion-1 words with the shared object.
  const auto rep = exhaustive_verify(make_runner(spec), 12);
  ok = ok && rep.passed;

  // Realized theta at every (n, sigma) for n <= 200, same object.
  double worst = 0;
  for (std::size_t n = 1; n <= 200; ++n)
    for (std::size_t sigma = 1; sigma <= n; ++sigma) {
      std::vector<std::uint8_t> bits(n, 0);
      for (std::size_t k = 0; k < sigma; ++k) bits[(k * 7919) % n] = 1;
      if (count_ones(bits) != sigma) std::fill(bits.begin(), bits.begin() + sigma, 1);
      const auto r = run_transformer<double>(spec, bits, TraceDetail::summary);
      const double theta = r.trace.layers[2].post[0][L.theta];
      const double dev = std::abs(theta - (sigma % 2 == 0 ? 1.0 : -1.0));
      worst = std::max(worst, dev);
      if (!(dev <= 1.0 / 3.0) || (r.decision == Decision::accept) != (sigma % 2 == 0)) ok = false;
    }

  // The evaluator accepts any position i >= 1.
  bool pe_ok = true;
  for (std::uint64_t i : {std::uint64_t{1}, std::uint64_t{2}, std::uint64_t{1000},
                          std::uint64_t{1000000}, std::uint64_t{1} << 32, std::uint64_t{1} << 40})
    for (double v : spec.positional().at(i)) pe_ok = pe_ok && std::isfinite(v);
  try {
    (void)spec.positional().at(0);
    pe_ok = false;
  } catch (const Error&) {
  }
  ok = ok && pe_ok && before == &shared_spec();
  return {ok, "one spec object: exhaustive n <= 12 " + std::string(rep.passed ? "ok" : "FAILED") +
                  ", realized theta n <= 200 max deviation " + fmt(worst) +
                  ", positional encoding finite up to i = 2^40"};
}

std::vector<std::vector<std::uint8_t>> c5_words() {
  auto words = all_words(8);
  for (auto& w : random_words(100, 64, 20240611)) words.push_back(std::move(w));
  return words;
}

Verdict c5_equivalence() {
  double worst = 0;
  std::uint64_t compared = 0;
  std::string failure;
  for (const auto& w : c5_words()) {
    const auto rep = equivalence_check<double>(shared_spec(), w, 1e-6, params());
    worst = std::max(worst, rep.worst_value);
    compared += rep.cases;
    if (!rep.passed && failure.empty()) failure = *rep.witness;
  }
  return {failure.empty(), "510 words of length <= 8 and 100 of length 64: " +
                               std::to_string(compared) + " values, max relative deviation " +
                               fmt(worst) + (failure.empty() ? "" : "; " + failure)};
}

Verdict c6_telescoping() {
  const double alpha = 0.01;
  double worst = 0;
  std::string where;
  for (auto f : {LengthFunction::ln_n, LengthFunction::alpha_over_n,
                 LengthFunction::alpha2_over_n2, LengthFunction::temperature}) {
    CompensatedSum<double> sum;
    std::uint64_t next_power = 1;
    for (std::uint64_t n = 1; n <= 10000; ++n) {
      sum += telescope_value<double>(f, alpha, n);
      const bool every = f == LengthFunction::ln_n;
      if (!every && n != next_power) continue;
      if (n == next_power) next_power *= 2;
      const double dev = relative_deviation(sum.value() / double(n),
                                            evaluate_length_function<double>(f, alpha, n));
      if (dev > worst) {
        worst = dev;
        where = std::string(to_string(f)) + " at n=" + std::to_string(n);
      }
    }
  }
  return {worst <= 1e-9, "max relative deviation " + fmt(worst) +
                             (where.empty() ? "" : " (" + where + ")") + ", bound 1e-9"};
}

Verdict c7_guard() {
  double worst = 0;
  bool ok = true;
  for (std::size_t n = 1; n <= 1000; ++n) {
    const std::vector<std::uint8_t> zeros(n, 0);
    const auto r = run_transformer<double>(shared_spec(), zeros, TraceDetail::summary);
    const double expect = 1.0 / (2.0 * double(n));
    const double dev = relative_deviation(r.trace.first_output[0], expect);
    worst = std::max(worst, dev);
    if (r.decision != Decision::accept || !(dev <= 1e-12)) ok = false;
  }
  return {ok, "all-zero words n = 1..1000 accepted, max relative deviation from 1/(2n) " +
                  fmt(worst)};
}

Verdict c8_calibration() {
  bool ok = true;
  std::ostringstream d;
  for (std::uint64_t n : {5u, 10u, 20u, 50u}) {
    const double t = calibrate_temperature<double>(n, 1.0 / 3.0, params());
    const double analytic = params().temperature(n);
    ok = ok && t <= analytic;
    d << (n == 5 ? "" : ", ") << "n=" << n << ": " << fmt(t) << " <= " << fmt(analytic);
  }
  return {ok, d.str()};
}

Verdict c9_stability() {
  bool finite = true;
  double worst_row = 0;
  std::uint64_t traces = 0;
  auto check = [&](const std::vector<std::uint8_t>& w) {
    const auto r = run_transformer<double>(shared_spec(), w, TraceDetail::full);
    finite = finite && all_finite(r.trace);
    worst_row = std::max(worst_row, max_row_sum_deviation(r.trace));
    ++traces;
  };
  for (const auto& w : all_words(12)) check(w);
  for (const auto& w : c5_words()) check(w);

  // Direct softmax at score gaps around 1e9.
  std::vector<double> scores{0.0, -1e9, -5e8, -1e9 + 1, 3.0};
  const auto w = softmax_weights<double>(std::span<const double>(scores));
  bool direct = true;
  for (double x : w) direct = direct && std::isfinite(x);
  CompensatedSum<double> s;
  for (double x : w) s += x;
  direct = direct && std::abs(s.value() - 1) <= 8 * kEps;

  // Largest layer-3 score gap seen at n = 200.
  std::vector<std::uint8_t> big(200, 0);
  big[0] = 1;
  const auto r = run_transformer<double>(shared_spec(), big, TraceDetail::full);
  double gap = 0;
  for (const auto& row : r.trace.layers[2].scores) {
    const auto [lo, hi] = std::minmax_element(row.begin(), row.end());
    gap = std::max(gap, *hi - *lo);
  }
  finite = finite && all_finite(r.trace);
  worst_row = std::max(worst_row, max_row_sum_deviation(r.trace));

  const bool ok = finite && direct && worst_row <= 8 * kEps;
  return {ok, std::to_string(traces) + " traces finite " + (finite ? "yes" : "no") +
                  ", max |row sum - 1| = " + fmt(worst_row) + " (bound 8 eps = " +
                  fmt(8 * kEps) + "), layer-3 score gap at n=200 " + fmt(gap) +
                  ", direct 1e9-gap softmax " + (direct ? "ok" : "bad")};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Verdict()> run;
  };
  const std::vector<Criterion> criteria = {
      {"C1 exhaustive correctness", c1_exhaustive},
      {"C2 readout margin", c2_margin},
      {"C3 coefficient separation audit", c3_audit},
      {"C4 uniformity", c4_uniformity},
      {"C5 semantic-realized equivalence", c5_equivalence},
      {"C6 telescoping identity", c6_telescoping},
      {"C7 all-zero guard", c7_guard},
      {"C8 calibration sanity", c8_calibration},
      {"C9 numerical stability", c9_stability},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    Verdict out;
    const auto start = Clock::now();
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("error: ") + e.what()};
    }
    if (!out.passed) ++failures;
    std::printf("[%s] %s: %s [%.2f s]\n", out.passed ? "PASS" : "FAIL", c.name,
                out.detail.c_str(), seconds_since(start));
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  return failures == 0 ? 0 : 1;
}
