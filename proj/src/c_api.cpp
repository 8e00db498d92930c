// SPDX-License-Identifier: Apache-2.0
#include "parityformer/parityformer.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <new>
#include <string>

#include "parityformer/construction.hpp"
#include "parityformer/serialization.hpp"
#include "parityformer/verification.hpp"

using namespace parityformer;

struct pf_spec {
  TransformerSpec<double> spec;
  std::string alpha_text;
  nlohmann::json document;
};

struct pf_report {
  VerificationReport report;
  std::string text;
};

namespace {

thread_local std::string last_error;

pf_status status_of(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_argument:
      return PF_ERROR_INVALID_ARGUMENT;
    case ErrorKind::dimension_mismatch:
      return PF_ERROR_DIMENSION;
    case ErrorKind::empty_input:
      return PF_ERROR_EMPTY_INPUT;
    case ErrorKind::indeterminate:
      return PF_ERROR_INDETERMINATE;
    case ErrorKind::configuration:
      return PF_ERROR_CONFIGURATION;
    case ErrorKind::parse:
      return PF_ERROR_PARSE;
    case ErrorKind::io:
      return PF_ERROR_IO;
    case ErrorKind::search_exhausted:
      return PF_ERROR_SEARCH_EXHAUSTED;
  }
  return PF_ERROR_INTERNAL;
}

template <typename F>
pf_status guarded(F&& body) {
  try {
    body();
    last_error.clear();
    return PF_OK;
  } catch (const Error& e) {
    last_error = e.what();
    return status_of(e.kind());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
  } catch (const std::exception& e) {
    last_error = e.what();
  } catch (...) {
    last_error = "unknown failure";
  }
  return PF_ERROR_INTERNAL;
}

void require(const void* p, const char* what) {
  if (!p) throw Error(ErrorKind::invalid_argument, std::string(what) + " must not be null");
}

char* duplicate(const std::string& s) {
  auto* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

std::string alpha_or_default(const char* alpha) {
  return alpha ? std::string(alpha) : std::string(kDefaultAlpha);
}

bool high_precision(std::uint32_t bits) { return bits != 0 && bits != kDoubleMantissaBits; }

pf_spec* make_handle(LoadedSpec<double> loaded, nlohmann::json doc) {
  return new pf_spec{std::move(loaded.spec), std::move(loaded.alpha_text), std::move(doc)};
}

pf_report* make_report(VerificationReport r) {
  auto text = render_text(r);
  return new pf_report{std::move(r), std::move(text)};
}

template <Scalar S>
std::string trace_document(const TransformerSpec<S>& spec, const std::string& alpha,
                           std::span<const std::uint8_t> bits) {
  const auto run = run_transformer<S>(spec, bits, TraceDetail::full);
  const ConstructionParams<S> params(alpha);
  const auto sem = semantic_decide<S>(bits, params).second;
  return trace_to_json<S>(bits, run, &sem).dump(2) + "\n";
}

}  // namespace

extern "C" {

const char* pf_version(void) { return "1.0.0"; }

const char* pf_last_error(void) { return last_error.c_str(); }

const char* pf_status_name(pf_status status) {
  switch (status) {
    case PF_OK:
      return "ok";
    case PF_ERROR_INVALID_ARGUMENT:
      return "invalid argument";
    case PF_ERROR_DIMENSION:
      return "dimension mismatch";
    case PF_ERROR_EMPTY_INPUT:
      return "empty input";
    case PF_ERROR_INDETERMINATE:
      return "indeterminate";
    case PF_ERROR_CONFIGURATION:
      return "configuration error";
    case PF_ERROR_PARSE:
      return "parse error";
    case PF_ERROR_IO:
      return "I/O error";
    case PF_ERROR_SEARCH_EXHAUSTED:
      return "search exhausted";
    case PF_ERROR_INTERNAL:
      return "internal error";
  }
  return "unknown status";
}

void pf_string_free(char* text) { std::free(text); }

pf_status pf_spec_build_parity(const char* alpha, pf_spec** out) {
  return guarded([&] {
    require(out, "out");
    const ConstructionParams<double> params(alpha_or_default(alpha));
    auto spec = build_parity_spec<double>(params);
    auto doc = spec_to_json(spec, params.alpha_text());
    *out = new pf_spec{std::move(spec), params.alpha_text(), std::move(doc)};
  });
}

pf_status pf_spec_parse(const char* json_text, pf_spec** out) {
  return guarded([&] {
    require(json_text, "json_text");
    require(out, "out");
    auto doc = parse_json_text(json_text);
    *out = make_handle(spec_from_json<double>(doc), doc);
  });
}

pf_status pf_spec_load(const char* path, pf_spec** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    auto doc = read_json_file(path);
    try {
      *out = make_handle(spec_from_json<double>(doc), doc);
    } catch (const Error& e) {
      throw Error(e.kind(), std::string(path) + ": " + e.what());
    }
  });
}

pf_status pf_spec_to_json(const pf_spec* spec, char** out_json) {
  return guarded([&] {
    require(spec, "spec");
    require(out_json, "out_json");
    *out_json = duplicate(spec_to_json(spec->spec, spec->alpha_text).dump(2) + "\n");
  });
}

pf_status pf_spec_save(const pf_spec* spec, const char* path) {
  return guarded([&] {
    require(spec, "spec");
    require(path, "path");
    write_text_file(path, spec_to_json(spec->spec, spec->alpha_text).dump(2) + "\n");
  });
}

pf_status pf_spec_dim(const pf_spec* spec, uint32_t* out_dim) {
  return guarded([&] {
    require(spec, "spec");
    require(out_dim, "out_dim");
    *out_dim = static_cast<uint32_t>(spec->spec.dim());
  });
}

void pf_spec_destroy(pf_spec* spec) { delete spec; }

pf_status pf_run(const pf_spec* spec, const char* bits, uint32_t precision_bits,
                 pf_decision* decision, double* margin) {
  return guarded([&] {
    require(spec, "spec");
    require(bits, "bits");
    const auto word = parse_bits(bits);
    Decision d;
    double m;
    if (high_precision(precision_bits)) {
      PrecisionScope scope(precision_bits);
      const auto hp = spec_from_json<HighPrecision>(spec->document).spec;
      const auto r = run_transformer<HighPrecision>(hp, word, TraceDetail::summary);
      d = r.decision;
      m = to_double(r.margin);
    } else {
      const auto r = run_transformer<double>(spec->spec, word, TraceDetail::summary);
      d = r.decision;
      m = r.margin;
    }
    if (decision) *decision = d == Decision::accept ? PF_ACCEPT : PF_REJECT;
    if (margin) *margin = m;
  });
}

pf_status pf_trace(const pf_spec* spec, const char* bits, uint32_t precision_bits,
                   char** out_json) {
  return guarded([&] {
    require(spec, "spec");
    require(bits, "bits");
    require(out_json, "out_json");
    const auto word = parse_bits(bits);
    std::string text;
    if (high_precision(precision_bits)) {
      PrecisionScope scope(precision_bits);
      const auto hp = spec_from_json<HighPrecision>(spec->document).spec;
      text = trace_document<HighPrecision>(hp, spec->alpha_text, word);
    } else {
      text = trace_document<double>(spec->spec, spec->alpha_text, word);
    }
    *out_json = duplicate(text);
  });
}

pf_status pf_verify_exhaustive(const pf_spec* spec, uint32_t max_n, uint32_t precision_bits,
                               pf_report** out) {
  return guarded([&] {
    require(spec, "spec");
    require(out, "out");
    if (high_precision(precision_bits)) {
      PrecisionScope scope(precision_bits);
      const auto hp = spec_from_json<HighPrecision>(spec->document).spec;
      *out = make_report(exhaustive_verify(make_runner(hp), max_n, 1));
    } else {
      *out = make_report(exhaustive_verify(make_runner(spec->spec), max_n));
    }
  });
}

pf_status pf_verify_random(const pf_spec* spec, uint64_t count, uint64_t length, uint64_t seed,
                           uint32_t precision_bits, pf_report** out) {
  return guarded([&] {
    require(spec, "spec");
    require(out, "out");
    if (high_precision(precision_bits)) {
      PrecisionScope scope(precision_bits);
      const auto hp = spec_from_json<HighPrecision>(spec->document).spec;
      *out = make_report(random_verify(make_runner(hp), count, length, seed));
    } else {
      *out = make_report(random_verify(make_runner(spec->spec), count, length, seed));
    }
  });
}

pf_status pf_verify_equivalence(const pf_spec* spec, const char* bits, double tolerance,
                                pf_report** out) {
  return guarded([&] {
    require(spec, "spec");
    require(bits, "bits");
    require(out, "out");
    const ConstructionParams<double> params(spec->alpha_text);
    *out = make_report(equivalence_check<double>(spec->spec, parse_bits(bits), tolerance, params));
  });
}

pf_status pf_audit(uint32_t max_n, const char* alpha, uint32_t precision_bits, pf_report** out) {
  return guarded([&] {
    require(out, "out");
    const auto a = alpha_or_default(alpha);
    // binary64 resolves the coefficient gaps up to n = 300; beyond that the
    // audit switches to software floating point.
    const bool hp = high_precision(precision_bits) || max_n > 300;
    if (hp) {
      PrecisionScope scope(high_precision(precision_bits) ? precision_bits : 128);
      *out = make_report(separation_audit<HighPrecision>(max_n, ConstructionParams<HighPrecision>(a)));
    } else {
      *out = make_report(separation_audit<double>(max_n, ConstructionParams<double>(a)));
    }
  });
}

pf_status pf_margin_profile(uint64_t n, double temperature, double target, const char* alpha,
                            pf_report** out) {
  return guarded([&] {
    require(out, "out");
    const ConstructionParams<double> params(alpha_or_default(alpha));
    *out = make_report(margin_profile<double>(n, temperature, params, target));
  });
}

pf_status pf_temperature(uint64_t n, const char* alpha, double* out) {
  return guarded([&] {
    require(out, "out");
    *out = ConstructionParams<double>(alpha_or_default(alpha)).temperature(n);
  });
}

pf_status pf_calibrate(uint64_t n, double target, const char* alpha, double* calibrated,
                       double* analytic) {
  return guarded([&] {
    const ConstructionParams<double> params(alpha_or_default(alpha));
    const double t = calibrate_temperature<double>(n, target, params);
    if (calibrated) *calibrated = t;
    if (analytic) *analytic = params.temperature(n);
  });
}

int pf_report_passed(const pf_report* report) { return report && report->report.passed ? 1 : 0; }

const char* pf_report_text(const pf_report* report) { return report ? report->text.c_str() : ""; }

pf_status pf_report_json(const pf_report* report, char** out_json) {
  return guarded([&] {
    require(report, "report");
    require(out_json, "out_json");
    *out_json = duplicate(report_to_json(report->report).dump(2) + "\n");
  });
}

double pf_report_runtime(const pf_report* report) {
  return report ? report->report.runtime.count() : 0.0;
}

void pf_report_destroy(pf_report* report) { delete report; }

}  // extern "C"
