#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "weibcv/errors.hpp"
#include "weibcv/sample_io.hpp"

using namespace weibcv;
using namespace weibcv::testing;

namespace {

std::filesystem::path temp_file(const std::string& name, const std::string& content) {
  const auto path = std::filesystem::temp_directory_path() / ("weibcv_test_" + name);
  std::ofstream(path, std::ios::binary) << content;
  return path;
}

std::string error_of(auto&& body) {
  try {
    body();
  } catch (const DataError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_SUITE("sample_io") {
  TEST_CASE("JSON round trip") {
    const CensoredSample s = real_sample();
    CHECK(parse_sample_json(sample_to_json(s)) == s);
    const auto path = std::filesystem::temp_directory_path() / "weibcv_test_roundtrip.json";
    write_sample_json(s, path);
    CHECK(load_sample(path) == s);
  }

  TEST_CASE("JSON round trip over random samples") {
    Rng rng(21);
    for (int i = 0; i < 200; ++i) {
      const RandomCase c = random_case(rng, 1, 100, 1, 8);
      CHECK(parse_sample_json(sample_to_json(c.sample)) == c.sample);
    }
  }

  TEST_CASE("JSON without n infers it") {
    const CensoredSample s = parse_sample_json(R"({"t": [1, 2], "X": [1, 2], "W": [0, 3]})");
    CHECK(s.n() == 6);
  }

  TEST_CASE("JSON errors name the field") {
    CHECK(error_of([] { parse_sample_json(R"({"t": [1, 2], "W": [0, 3]})"); }).find("X") != std::string::npos);
    CHECK(error_of([] { parse_sample_json(R"({"t": [1, 2], "X": [1, "a"], "W": [0, 3]})"); }).find("X") !=
          std::string::npos);
    CHECK(error_of([] { parse_sample_json(R"({"t": [1, 2], "X": [1, 2], "W": [0, 3], "n": 9})"); }).find("n") !=
          std::string::npos);
    CHECK_THROWS_AS(parse_sample_json("{"), DataError);
    CHECK_THROWS_AS(parse_sample_json(R"({"t": [1, 2], "X": [0, 0], "W": [0, 3]})"), DataError);
  }

  TEST_CASE("CSV parsing and errors") {
    const CensoredSample s = parse_sample_csv("t,X,W\n1,2,0\n2,3,1\n");
    CHECK(s.n() == 6);
    CHECK(s.failures()[1] == 3);
    CHECK(error_of([] { parse_sample_csv("t,X,W\n1,2,0\n2,x,1\n"); }).find("line 3") != std::string::npos);
    CHECK_THROWS_AS(parse_sample_csv("a,b,c\n1,2,0\n"), DataError);
    CHECK_THROWS_AS(parse_sample_csv(""), DataError);
  }

  TEST_CASE("load_sample dispatch and empty files") {
    CHECK(load_sample(temp_file("a.csv", "t,X,W\n1,2,0\n2,3,1\n")).n() == 6);
    CHECK(load_sample(temp_file("b.txt", R"({"t":[1],"X":[2],"W":[1]})")).n() == 3);
    CHECK_THROWS_AS(load_sample(temp_file("empty.json", "")), DataError);
    CHECK_THROWS_AS(load_sample("/nonexistent/weibcv.json"), DataError);
  }
}
