#include <doctest.h>

#include "hscg/config.hpp"

using namespace hscg;

namespace {

const char* kSample = R"([problem]
kind = "synthetic_minimax"
n = 200
p = 50
lambda = 0.0001

[solver.hscg]
schedule = "manual"
eta = 0.1
theta = 1
epochs = 20

[run]
seeds = [0, 1, 2]
out = "results"
wall_clock = false
)";

}  // namespace

TEST_CASE("config parsing and typed access") {
  const ConfigFile cfg = ConfigFile::parse_string(kSample);
  CHECK(cfg.get_string("problem", "kind") == "synthetic_minimax");
  CHECK(cfg.get_int_or("problem", "n", 0) == 200);
  CHECK(cfg.get_number("problem", "lambda") == doctest::Approx(1e-4));
  CHECK(cfg.get_number_or("solver.hscg", "eta", 0.0) == doctest::Approx(0.1));
  CHECK(cfg.get_bool_or("run", "wall_clock", true) == false);
  CHECK(cfg.get_int_list_or("run", "seeds", {}) == std::vector<long>{0, 1, 2});
  CHECK(cfg.get_string_or("run", "missing", "dflt") == "dflt");
  CHECK(cfg.sections() ==
        std::vector<std::string>{"problem", "solver.hscg", "run"});
}

TEST_CASE("config round trip is bit-exact") {
  const ConfigFile cfg = ConfigFile::parse_string(kSample);
  const std::string once = cfg.serialize();
  const ConfigFile again = ConfigFile::parse_string(once);
  CHECK(again.serialize() == once);
  // The serializer's normal form is already a fixed point of parse.
  CHECK(once == std::string(kSample));
}

TEST_CASE("config comments and blank lines are ignored") {
  const ConfigFile cfg = ConfigFile::parse_string(
      "# header\n[a]\nx = 1  # trailing\n\ny = \"has # inside\"\n");
  CHECK(cfg.get_int_or("a", "x", 0) == 1);
  CHECK(cfg.get_string("a", "y") == "has # inside");
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(ConfigFile::parse_string("[a\nx = 1\n"), ConfigError);
  CHECK_THROWS_AS(ConfigFile::parse_string("[a]\nx\n"), ConfigError);
  CHECK_THROWS_AS(ConfigFile::parse_string("[a]\nx = 1\nx = 2\n"), ConfigError);

  const ConfigFile cfg = ConfigFile::parse_string("[a]\nx = nope\n");
  CHECK_THROWS_AS(cfg.get_number("a", "x"), ConfigError);
  CHECK_THROWS_AS(cfg.get_number("a", "absent"), ConfigError);
  CHECK_THROWS_AS(cfg.get_bool_or("a", "x", true), ConfigError);
}

TEST_CASE("config set adds and overrides") {
  ConfigFile cfg = ConfigFile::parse_string("[a]\nx = 1\n");
  cfg.set("a", "x", "2");
  CHECK(cfg.get_int_or("a", "x", 0) == 2);
  cfg.set("b", "y", "\"z\"");
  CHECK(cfg.get_string("b", "y") == "z");
}
