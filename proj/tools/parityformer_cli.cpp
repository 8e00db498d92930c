// SPDX-License-Identifier: Apache-2.0
// Command-line front end; talks to the library only through its C interface.

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "parityformer/parityformer.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailed = 1;
constexpr int kExitUsage = 2;

int exit_code_for(pf_status status) {
  switch (status) {
    case PF_OK:
      return kExitOk;
    case PF_ERROR_INDETERMINATE:
    case PF_ERROR_SEARCH_EXHAUSTED:
    case PF_ERROR_INTERNAL:
      return kExitFailed;
    default:
      return kExitUsage;
  }
}

// Carries a failed status out of a command body.
struct Failure {
  pf_status status;
};

void check(pf_status status) {
  if (status != PF_OK) {
    std::cerr << "error (" << pf_status_name(status) << "): " << pf_last_error() << "\n";
    throw Failure{status};
  }
}

struct SpecHandle {
  pf_spec* ptr = nullptr;
  ~SpecHandle() { pf_spec_destroy(ptr); }
};

struct ReportHandle {
  pf_report* ptr = nullptr;
  ~ReportHandle() { pf_report_destroy(ptr); }
};

struct OwnedString {
  char* ptr = nullptr;
  ~OwnedString() { pf_string_free(ptr); }
};

void load_spec(const std::string& path, SpecHandle& spec) {
  if (path.empty())
    check(pf_spec_build_parity(nullptr, &spec.ptr));
  else
    check(pf_spec_load(path.c_str(), &spec.ptr));
}

std::string shortest(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

// Prints the report and returns whether it passed.
bool emit(const ReportHandle& report) {
  std::cout << pf_report_text(report.ptr);
  std::cerr << "  runtime: " << pf_report_runtime(report.ptr) << " s\n";
  return pf_report_passed(report.ptr) != 0;
}

uint32_t default_precision() {
  if (const char* env = std::getenv("PARITYFORMER_PRECISION")) {
    char* end = nullptr;
    const auto v = std::strtoul(env, &end, 10);
    if (end && *end == '\0') return static_cast<uint32_t>(v);
    std::cerr << "ignoring malformed PARITYFORMER_PRECISION='" << env << "'\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Completely uniform three-layer transformer for the parity language"};
  app.require_subcommand(1);

  uint32_t precision = default_precision();
  std::string spec_path, input, out_path, trace_path, alpha = "0.01";
  uint32_t max_n = 0;
  uint64_t random_count = 0, random_len = 0, seed = 0, n = 0;
  double target = 1.0 / 3.0;

  auto* build = app.add_subcommand("build", "Write the parity transformer as a spec document");
  build->add_option("--alpha", alpha, "Construction constant in (0,1)");
  build->add_option("--out", out_path, "Output file (default: stdout)");

  auto* run = app.add_subcommand("run", "Classify one word");
  run->add_option("--spec", spec_path, "Spec document (default: built-in construction)");
  run->add_option("--input", input, "Word over {0,1}")->required();
  run->add_option("--trace", trace_path, "Also write the trace document here");
  run->add_option("--precision", precision, "Mantissa bits (53 = binary64)");

  auto* verify = app.add_subcommand("verify", "Check decisions against the parity oracle");
  verify->add_option("--spec", spec_path, "Spec document (default: built-in construction)");
  verify->add_option("--max-n", max_n, "Enumerate every word up to this length")->required();
  auto* rnd = verify->add_option("--random", random_count, "Number of random words");
  verify->add_option("--len", random_len, "Length of random words")->needs(rnd);
  verify->add_option("--seed", seed, "Seed for random words")->needs(rnd);
  verify->add_option("--precision", precision, "Mantissa bits (53 = binary64)");

  auto* audit = app.add_subcommand("audit", "Audit the coefficient separation inequalities");
  audit->add_option("--max-n", max_n, "Largest input length")->required();
  audit->add_option("--alpha", alpha, "Construction constant in (0,1)");
  audit->add_option("--precision", precision, "Mantissa bits (53 = binary64)");

  auto* calibrate =
      app.add_subcommand("calibrate", "Search the smallest temperature meeting a margin target");
  calibrate->add_option("--n", n, "Input length")->required();
  calibrate->add_option("--target", target, "Allowed deviation of theta from +-1");
  calibrate->add_option("--alpha", alpha, "Construction constant in (0,1)");

  auto* trace = app.add_subcommand("trace", "Emit the trace document for one word");
  trace->add_option("--spec", spec_path, "Spec document (default: built-in construction)");
  trace->add_option("--input", input, "Word over {0,1}")->required();
  trace->add_option("--precision", precision, "Mantissa bits (53 = binary64)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*build) {
      SpecHandle spec;
      check(pf_spec_build_parity(alpha.c_str(), &spec.ptr));
      if (out_path.empty()) {
        OwnedString doc;
        check(pf_spec_to_json(spec.ptr, &doc.ptr));
        std::cout << doc.ptr;
      } else {
        check(pf_spec_save(spec.ptr, out_path.c_str()));
      }
      return kExitOk;
    }

    if (*run) {
      SpecHandle spec;
      load_spec(spec_path, spec);
      pf_decision decision;
      double margin = 0;
      check(pf_run(spec.ptr, input.c_str(), precision, &decision, &margin));
      if (!trace_path.empty()) {
        OwnedString doc;
        check(pf_trace(spec.ptr, input.c_str(), precision, &doc.ptr));
        std::FILE* f = std::fopen(trace_path.c_str(), "w");
        if (!f) {
          std::cerr << "error (I/O error): cannot open '" << trace_path << "' for writing\n";
          return kExitUsage;
        }
        std::fputs(doc.ptr, f);
        std::fclose(f);
      }
      std::cout << (decision == PF_ACCEPT ? "accept" : "reject") << " " << shortest(margin)
                << "\n";
      return kExitOk;
    }

    if (*trace) {
      SpecHandle spec;
      load_spec(spec_path, spec);
      OwnedString doc;
      check(pf_trace(spec.ptr, input.c_str(), precision, &doc.ptr));
      std::cout << doc.ptr;
      return kExitOk;
    }

    if (*verify) {
      SpecHandle spec;
      load_spec(spec_path, spec);
      bool ok = true;
      ReportHandle exhaustive;
      check(pf_verify_exhaustive(spec.ptr, max_n, precision, &exhaustive.ptr));
      ok = emit(exhaustive) && ok;
      if (random_count > 0) {
        ReportHandle sampled;
        check(pf_verify_random(spec.ptr, random_count, random_len, seed, precision, &sampled.ptr));
        ok = emit(sampled) && ok;
      }
      return ok ? kExitOk : kExitFailed;
    }

    if (*audit) {
      ReportHandle report;
      check(pf_audit(max_n, alpha.c_str(), precision, &report.ptr));
      return emit(report) ? kExitOk : kExitFailed;
    }

    if (*calibrate) {
      double found = 0, analytic = 0;
      check(pf_calibrate(n, target, alpha.c_str(), &found, &analytic));
      const bool sufficient = found <= analytic;
      std::cout << "n " << n << "\n"
                << "target " << shortest(target) << "\n"
                << "calibrated " << shortest(found) << "\n"
                << "analytic " << shortest(analytic) << "\n"
                << (sufficient ? "PASS" : "FAIL") << " analytic schedule "
                << (sufficient ? "suffices" : "is too small") << "\n";
      return sufficient ? kExitOk : kExitFailed;
    }
  } catch (const Failure& f) {
    return exit_code_for(f.status);
  }
  return kExitUsage;
}
