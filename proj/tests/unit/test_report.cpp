#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>

#include "kdg/error.hpp"
#include "kdg/report.hpp"

using namespace kdg;

namespace {

Json sample() {
  Json body;
  body["zeta"] = 0.1;
  body["alpha"] = json_number(std::numeric_limits<double>::infinity());
  body["beta"] = json_number(-std::numeric_limits<double>::infinity());
  body["gamma"] = json_number(std::nan(""));
  body["list"] = Json::array({1.0, 2, "x", true});
  body["nested"]["b"] = 1.0 / 3.0;
  body["nested"]["a"] = 1e-300;
  return make_envelope("solve", "00000000deadbeef", 7, body);
}

}  // namespace

TEST_CASE("canonical layout") {
  const std::string text = canonical_dump(sample());
  CHECK(text.find("\"alpha\": \"Infinity\"") != std::string::npos);
  CHECK(text.find("\"beta\": \"-Infinity\"") != std::string::npos);
  CHECK(text.find("\"gamma\": \"NaN\"") != std::string::npos);
  CHECK(text.find("0.33333333333333331") != std::string::npos);
  CHECK(text.find("\"zeta\": 0.10000000000000001") != std::string::npos);
  CHECK(text.find("1.0,") != std::string::npos);
  CHECK(text.find("\"command\"") < text.find("\"report\""));
  CHECK(text.find("\"a\"") < text.find("\"b\""));
  CHECK(text.back() == '\n');
}

TEST_CASE("round trip is byte exact") {
  const std::string text = canonical_dump(sample());
  CHECK(canonical_dump(parse_report(text)) == text);
  const auto dir = std::filesystem::temp_directory_path() / "kdg_report_test";
  const auto path = dir / "r.json";
  write_report(path, sample());
  CHECK(report_roundtrip(path) == text);
  CHECK(read_report(path)["report"]["nested"]["a"].get<double>() == 1e-300);
  std::filesystem::remove_all(dir);
}

TEST_CASE("schema checks") {
  auto j = sample();
  j["schema_version"] = kSchemaVersion + 1;
  try {
    parse_report(canonical_dump(j));
    FAIL("newer schema accepted");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("newer") != std::string::npos);
  }
  j.erase("schema_version");
  CHECK_THROWS_AS(parse_report(canonical_dump(j)), ValidationError);
  CHECK_THROWS_AS(parse_report("{not json"), ValidationError);
  CHECK_THROWS_AS(parse_report("[1, 2]"), ValidationError);
  auto other = sample();
  other["tool"] = "other";
  CHECK_THROWS_AS(parse_report(canonical_dump(other)), ValidationError);
}

TEST_CASE("hashing") {
  CHECK(fnv1a64("") == 14695981039346656037ULL);
  CHECK(hex64(fnv1a64("a")) == "af63dc4c8601ec8c");
  CHECK(hex64(255) == "00000000000000ff");
}
