#include <doctest.h>

#include <string>

#include "rft/config.hpp"

using namespace rft;

namespace {

std::string error_of(const std::string& text) {
  try {
    Config::parse(text, "demo.cfg");
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("sections, lists and scalars") {
  const auto c = Config::parse(
      "# comment\n"
      "experiments = fwer, lkc\n"
      "\n"
      "[run]\n"
      "subjects = 20  # trailing\n"
      "fwhm = [3, 4.5, 5]\n"
      "gaussianize = true\n"
      "source = \"noise\"\n",
      "demo.cfg");
  CHECK(c.get_list("", "experiments", {}) == std::vector<std::string>{"fwer", "lkc"});
  CHECK(c.get_int("run", "subjects", 0) == 20);
  CHECK(c.get_doubles("run", "fwhm", {}) == std::vector<double>{3.0, 4.5, 5.0});
  CHECK(c.get_bool("run", "gaussianize", false));
  CHECK(c.get("run", "source", "") == "noise");
  CHECK(c.get_double("run", "alpha", 0.05) == 0.05);
  CHECK(c.line("run", "fwhm") == 6);
  CHECK(c.has("run", "subjects"));
  CHECK_FALSE(c.has("run", "workers"));
}

TEST_CASE("syntax errors carry the line") {
  CHECK(error_of("a = 1\n[run\n") == "demo.cfg:2: malformed section header");
  CHECK(error_of("[run]\nx = 1\nx = 2\n") == "demo.cfg:3: duplicate key 'x'");
  CHECK(error_of("[run]\n[run]\n") == "demo.cfg:2: duplicate section [run]");
  CHECK(error_of("[run]\njust words\n") == "demo.cfg:2: expected key = value");
}

TEST_CASE("typed getters report bad values at their line") {
  const auto c = Config::parse("[run]\nsubjects = many\nfwhm = 2.5\nflag = maybe\nlist = [1, 2\n", "demo.cfg");
  CHECK_THROWS_WITH(c.get_int("run", "subjects", 0), doctest::Contains("demo.cfg:2:"));
  CHECK_THROWS_WITH(c.get_int("run", "fwhm", 0), doctest::Contains("demo.cfg:3:"));
  CHECK_THROWS_WITH(c.get_bool("run", "flag", false), doctest::Contains("demo.cfg:4:"));
  CHECK_THROWS_WITH(c.get_doubles("run", "list", {}), doctest::Contains("unterminated list"));
}

TEST_CASE("unknown keys and sections") {
  const auto c = Config::parse("experiments = fwer\n[run]\nsubjects = 3\nsubject = 4\n[extra]\n", "demo.cfg");
  const std::map<std::string, std::set<std::string>> allowed{{"", {"experiments"}}, {"run", {"subjects"}}};
  CHECK_THROWS_WITH(c.check_known(allowed), doctest::Contains("unknown"));
  const auto d = Config::parse("experiments = fwer\n[run]\nsubjects = 3\nsubject = 4\n", "demo.cfg");
  CHECK_THROWS_WITH(d.check_known(allowed), "demo.cfg:4: unknown key 'run.subject'");
  CHECK_THROWS_AS(Config::load("/nonexistent/dir/x.cfg"), Error);
}
