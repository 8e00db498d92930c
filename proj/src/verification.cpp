// SPDX-License-Identifier: Apache-2.0
#include "parityformer/verification.hpp"

#include <algorithm>
#include <limits>
#include <random>
#include <sstream>
#include <thread>

namespace parityformer {

std::string render_text(const VerificationReport& report) {
  std::ostringstream out;
  out << (report.passed ? "PASS" : "FAIL") << "  " << report.claim << "  [" << report.range
      << "]\n";
  out << "  cases: " << report.cases << "\n";
  if (!report.worst_label.empty())
    out << "  " << report.worst_label << ": " << format_shortest(report.worst_value) << "\n";
  for (const auto& [name, value] : report.metrics)
    out << "  " << name << ": " << format_shortest(value) << "\n";
  if (report.witness) out << "  witness: " << *report.witness << "\n";
  return out.str();
}

bool parity_oracle(std::span<const std::uint8_t> bits) {
  if (bits.empty()) throw Error(ErrorKind::empty_input, "empty input not in model scope");
  return count_ones(bits) % 2 == 0;
}

namespace {

struct Tally {
  std::uint64_t cases = 0;
  std::uint64_t first_failure = std::numeric_limits<std::uint64_t>::max();
  std::string failure;
  double min_margin = std::numeric_limits<double>::infinity();
  std::uint64_t min_margin_index = 0;
  std::string min_margin_word;
};

void check_word(const Runner& runner, std::uint64_t index, std::span<const std::uint8_t> word,
                Tally& t) {
  ++t.cases;
  const bool even = parity_oracle(word);
  std::string problem;
  try {
    const auto out = runner(word);
    if ((out.decision == Decision::accept) != even)
      problem = format_bits(word) + ": " + std::string(to_string(out.decision)) +
                " but parity is " + (even ? "even" : "odd");
    if (out.margin < t.min_margin) {
      t.min_margin = out.margin;
      t.min_margin_index = index;
      t.min_margin_word = format_bits(word);
    }
  } catch (const Error& e) {
    problem = format_bits(word) + ": " + e.what();
  }
  if (!problem.empty() && index < t.first_failure) {
    t.first_failure = index;
    t.failure = std::move(problem);
  }
}

// Index g enumerates words by length, then in binary order.
std::vector<std::uint8_t> word_at(std::uint64_t g) {
  unsigned n = 1;
  while (g >= (std::uint64_t{1} << (n + 1)) - 2) ++n;
  const std::uint64_t m = g - ((std::uint64_t{1} << n) - 2);
  std::vector<std::uint8_t> w(n);
  for (unsigned i = 0; i < n; ++i) w[i] = (m >> (n - 1 - i)) & 1u;
  return w;
}

Tally merge(const std::vector<Tally>& parts) {
  Tally total;
  for (const auto& p : parts) {
    total.cases += p.cases;
    if (p.first_failure < total.first_failure) {
      total.first_failure = p.first_failure;
      total.failure = p.failure;
    }
    if (p.min_margin < total.min_margin ||
        (p.min_margin == total.min_margin && p.min_margin_index < total.min_margin_index)) {
      total.min_margin = p.min_margin;
      total.min_margin_index = p.min_margin_index;
      total.min_margin_word = p.min_margin_word;
    }
  }
  return total;
}

VerificationReport to_report(const Tally& t, std::string claim, std::string range) {
  VerificationReport rep;
  rep.claim = std::move(claim);
  rep.range = std::move(range);
  rep.cases = t.cases;
  rep.worst_label = "min |g_1^1|";
  rep.worst_value = t.min_margin;
  if (t.first_failure != std::numeric_limits<std::uint64_t>::max()) rep.fail(t.failure);
  if (!t.min_margin_word.empty())
    rep.metrics.push_back({"min_margin_word_length", double(t.min_margin_word.size())});
  return rep;
}

}  // namespace

VerificationReport exhaustive_verify(const Runner& runner, unsigned n_max, unsigned threads) {
  const auto start = std::chrono::steady_clock::now();
  if (n_max < 1) throw Error(ErrorKind::invalid_argument, "n_max must be >= 1");
  if (n_max > 40) throw Error(ErrorKind::invalid_argument, "n_max above 40 is not enumerable");
  const std::uint64_t total = (std::uint64_t{1} << (n_max + 1)) - 2;
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, total));

  std::vector<Tally> parts(threads);
  auto work = [&](unsigned k) {
    const std::uint64_t lo = total * k / threads, hi = total * (k + 1) / threads;
    for (std::uint64_t g = lo; g < hi; ++g) check_word(runner, g, word_at(g), parts[k]);
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned k = 0; k < threads; ++k) pool.emplace_back(work, k);
  }

  auto rep = to_report(merge(parts), "exhaustive parity agreement",
                       "all words of length 1.." + std::to_string(n_max));
  rep.runtime = std::chrono::steady_clock::now() - start;
  return rep;
}

std::vector<std::vector<std::uint8_t>> random_words(std::uint64_t count, std::uint64_t length,
                                                    std::uint64_t seed) {
  if (length == 0) throw Error(ErrorKind::empty_input, "random words need length >= 1");
  std::mt19937_64 gen(seed);
  std::vector<std::vector<std::uint8_t>> words(count, std::vector<std::uint8_t>(length));
  for (auto& w : words) {
    std::uint64_t pool = 0;
    unsigned left = 0;
    for (auto& b : w) {
      if (left == 0) {
        pool = gen();
        left = 64;
      }
      b = pool & 1u;
      pool >>= 1;
      --left;
    }
  }
  return words;
}

VerificationReport random_verify(const Runner& runner, std::uint64_t count, std::uint64_t length,
                                  std::uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();
  Tally t;
  std::uint64_t index = 0;
  for (const auto& w : random_words(count, length, seed)) check_word(runner, index++, w, t);
  auto rep = to_report(t, "random parity agreement",
                       std::to_string(count) + " words of length " + std::to_string(length) +
                           ", seed " + std::to_string(seed));
  rep.runtime = std::chrono::steady_clock::now() - start;
  return rep;
}

}  // namespace parityformer
