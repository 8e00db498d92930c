// SPDX-License-Identifier: Apache-2.0
// Exercises the shared library through its C header only.
#include "catch_amalgamated.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>

#include "parityformer/parityformer.h"

using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::StartsWith;

namespace {

struct Spec {
  pf_spec* ptr = nullptr;
  ~Spec() { pf_spec_destroy(ptr); }
};

struct Report {
  pf_report* ptr = nullptr;
  ~Report() { pf_report_destroy(ptr); }
};

struct Text {
  char* ptr = nullptr;
  ~Text() { pf_string_free(ptr); }
};

}  // namespace

TEST_CASE("version and status names") {
  CHECK(std::string(pf_version()) == "1.0.0");
  CHECK(std::string(pf_status_name(PF_OK)) == "ok");
  CHECK(std::string(pf_status_name(PF_ERROR_PARSE)) == "parse error");
  CHECK(std::string(pf_status_name(static_cast<pf_status>(1234))) == "unknown status");
}

TEST_CASE("building and running") {
  Spec spec;
  REQUIRE(pf_spec_build_parity(nullptr, &spec.ptr) == PF_OK);
  uint32_t dim = 0;
  CHECK(pf_spec_dim(spec.ptr, &dim) == PF_OK);
  CHECK(dim == 16);

  pf_decision d;
  double margin = 0;
  CHECK(pf_run(spec.ptr, "0", 0, &d, &margin) == PF_OK);
  CHECK(d == PF_ACCEPT);
  CHECK(margin == 0.5);
  CHECK(pf_run(spec.ptr, "01", 53, &d, &margin) == PF_OK);
  CHECK(d == PF_REJECT);
  CHECK(margin == 0.25);

  double hp_margin = 0;
  CHECK(pf_run(spec.ptr, "0110", 128, &d, &hp_margin) == PF_OK);
  CHECK(d == PF_ACCEPT);
  CHECK(pf_run(spec.ptr, "0110", 0, &d, &margin) == PF_OK);
  CHECK(std::abs(hp_margin - margin) <= 1e-9 * margin);

  CHECK(pf_run(spec.ptr, "", 0, &d, &margin) == PF_ERROR_EMPTY_INPUT);
  CHECK_THAT(pf_last_error(), ContainsSubstring("empty input"));
  CHECK(pf_run(spec.ptr, "10a2", 0, &d, &margin) == PF_ERROR_INVALID_ARGUMENT);
  CHECK_THAT(pf_last_error(), ContainsSubstring("position 3"));
  CHECK(pf_run(nullptr, "1", 0, &d, &margin) == PF_ERROR_INVALID_ARGUMENT);
  CHECK(pf_run(spec.ptr, "1", 8, &d, &margin) == PF_ERROR_INVALID_ARGUMENT);

  Spec bad;
  CHECK(pf_spec_build_parity("1.5", &bad.ptr) == PF_ERROR_INVALID_ARGUMENT);
  CHECK(bad.ptr == nullptr);
}

TEST_CASE("serialization through the C interface") {
  Spec spec;
  REQUIRE(pf_spec_build_parity("0.01", &spec.ptr) == PF_OK);
  Text doc;
  REQUIRE(pf_spec_to_json(spec.ptr, &doc.ptr) == PF_OK);
  CHECK_THAT(doc.ptr, ContainsSubstring("\"schema_version\": \"parityformer.spec/1\""));

  Spec parsed;
  REQUIRE(pf_spec_parse(doc.ptr, &parsed.ptr) == PF_OK);
  Text again;
  REQUIRE(pf_spec_to_json(parsed.ptr, &again.ptr) == PF_OK);
  CHECK(std::string(doc.ptr) == std::string(again.ptr));

  Spec broken;
  CHECK(pf_spec_parse("{\"schema_version\": 3}", &broken.ptr) == PF_ERROR_PARSE);
  CHECK(pf_spec_parse("not json", &broken.ptr) == PF_ERROR_PARSE);

  const auto path = (std::filesystem::temp_directory_path() / "pf_c_api_test.json").string();
  REQUIRE(pf_spec_save(spec.ptr, path.c_str()) == PF_OK);
  Spec loaded;
  CHECK(pf_spec_load(path.c_str(), &loaded.ptr) == PF_OK);
  std::filesystem::remove(path);
  Spec missing;
  CHECK(pf_spec_load(path.c_str(), &missing.ptr) == PF_ERROR_IO);
  CHECK_THAT(pf_last_error(), ContainsSubstring(path));
}

TEST_CASE("traces through the C interface") {
  Spec spec;
  REQUIRE(pf_spec_build_parity(nullptr, &spec.ptr) == PF_OK);
  Text trace;
  REQUIRE(pf_trace(spec.ptr, "101", 0, &trace.ptr) == PF_OK);
  const std::string t = trace.ptr;
  CHECK_THAT(t, ContainsSubstring("\"schema_version\": \"parityformer.trace/1\""));
  CHECK_THAT(t, ContainsSubstring("\"decision\": \"accept\""));
  CHECK_THAT(t, ContainsSubstring("\"semantic\""));
  Text hp;
  REQUIRE(pf_trace(spec.ptr, "101", 96, &hp.ptr) == PF_OK);
  CHECK_THAT(hp.ptr, ContainsSubstring("\"decision\": \"accept\""));
}

TEST_CASE("verification through the C interface") {
  Spec spec;
  REQUIRE(pf_spec_build_parity(nullptr, &spec.ptr) == PF_OK);
  {
    Report r;
    REQUIRE(pf_verify_exhaustive(spec.ptr, 8, 0, &r.ptr) == PF_OK);
    CHECK(pf_report_passed(r.ptr) == 1);
    CHECK_THAT(pf_report_text(r.ptr), StartsWith("PASS"));
    CHECK_THAT(pf_report_text(r.ptr), ContainsSubstring("cases: 510"));
    CHECK(pf_report_runtime(r.ptr) >= 0);
    Text json;
    REQUIRE(pf_report_json(r.ptr, &json.ptr) == PF_OK);
    CHECK_THAT(json.ptr, ContainsSubstring("\"passed\": true"));
  }
  {
    Report r;
    REQUIRE(pf_verify_exhaustive(spec.ptr, 5, 128, &r.ptr) == PF_OK);
    CHECK(pf_report_passed(r.ptr) == 1);
  }
  {
    Report r;
    REQUIRE(pf_verify_random(spec.ptr, 10, 50, 3, 0, &r.ptr) == PF_OK);
    CHECK(pf_report_passed(r.ptr) == 1);
  }
  {
    Report r;
    REQUIRE(pf_verify_equivalence(spec.ptr, "0110", 1e-6, &r.ptr) == PF_OK);
    CHECK(pf_report_passed(r.ptr) == 1);
  }
  {
    Spec bad;
    REQUIRE(pf_spec_build_parity("0.9", &bad.ptr) == PF_OK);
    Report r;
    REQUIRE(pf_verify_exhaustive(bad.ptr, 4, 0, &r.ptr) == PF_OK);
    CHECK(pf_report_passed(r.ptr) == 0);
    CHECK_THAT(pf_report_text(r.ptr), ContainsSubstring("witness"));
  }
  Report none;
  CHECK(pf_verify_exhaustive(spec.ptr, 0, 0, &none.ptr) == PF_ERROR_INVALID_ARGUMENT);
}

TEST_CASE("audit, margin and calibration through the C interface") {
  {
    Report r;
    REQUIRE(pf_audit(50, nullptr, 0, &r.ptr) == PF_OK);
    CHECK(pf_report_passed(r.ptr) == 1);
  }
  {
    Report r;
    REQUIRE(pf_audit(20, "0.2", 0, &r.ptr) == PF_OK);
    CHECK(pf_report_passed(r.ptr) == 0);
  }
  {
    Report r;
    REQUIRE(pf_audit(30, nullptr, 128, &r.ptr) == PF_OK);
    CHECK(pf_report_passed(r.ptr) == 1);
  }
  {
    double t = 0;
    REQUIRE(pf_temperature(2, nullptr, &t) == PF_OK);
    CHECK(t == 1988.0);
    Report r;
    REQUIRE(pf_margin_profile(10, 1.0, 1.0 / 3.0, nullptr, &r.ptr) == PF_OK);
    CHECK(pf_report_passed(r.ptr) == 0);
  }
  double found = 0, analytic = 0;
  REQUIRE(pf_calibrate(10, 1.0 / 3.0, nullptr, &found, &analytic) == PF_OK);
  CHECK(found > 0);
  CHECK(found <= analytic);
  CHECK(pf_calibrate(2, 1.0 / 3.0, "0.9", &found, &analytic) == PF_ERROR_SEARCH_EXHAUSTED);
}
