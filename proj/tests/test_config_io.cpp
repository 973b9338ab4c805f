#include <doctest.h>

#include "fluctruin/config.hpp"
#include "fluctruin/io.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace fluctruin;
namespace fs = std::filesystem;

namespace {
std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}
}  // namespace

TEST_SUITE("config_io") {
  TEST_CASE("config round trip") {
    const ModelParams p(5.0, 1.0, 2.0, 3.0, Distribution::gamma(2.0, 4.0), Distribution::uniform(0.0, 1.0),
                        Distribution::excess_of(Distribution::uniform(0.0, 1.0)));
    Config c{p, {}, {}};
    c.sim.n = 40;
    c.solver.jobs = 3;
    const auto j = config_to_json(c);
    const auto back = config_from_json(j);
    CHECK(back.sim.n == 40);
    CHECK(back.solver.jobs == 3);
    CHECK(back.model.lambda == 5.0);
    CHECK(back.model.claim.mean() == doctest::Approx(0.5));
    CHECK(back.model.residual.mean() == doctest::Approx(p.residual.mean()));
    CHECK(config_to_json(back) == j);
  }

  TEST_CASE("unknown keys and bad laws are rejected") {
    auto j = nlohmann::json::parse(R"({"model": {"lambda": 1, "f0": 1, "nu": 1, "r": 2,
      "claim": {"family": "exponential", "params": [1]},
      "sojourn": {"family": "exponential", "params": [1]}}})");
    CHECK_NOTHROW(config_from_json(j));
    auto bad = j;
    bad["model"]["lamda"] = 1;
    CHECK_THROWS(config_from_json(bad));
    bad = j;
    bad["extra"] = 1;
    CHECK_THROWS(config_from_json(bad));
    bad = j;
    bad["model"]["claim"] = {{"family", "pareto"}, {"params", {1}}};
    CHECK_THROWS(config_from_json(bad));
    bad = j;
    bad["model"]["claim"]["params"] = {-1};
    CHECK_THROWS(config_from_json(bad));
  }

  TEST_CASE("shipped configs load") {
    for (const auto& e : fs::directory_iterator(FLUCTRUIN_CONFIG_DIR)) {
      CAPTURE(e.path().string());
      CHECK_NOTHROW(load_config(e.path().string()));
    }
  }

  TEST_CASE("number formatting and csv") {
    CHECK(io::format_double(0.5) == "0.5");
    CHECK(io::format_double(std::numeric_limits<double>::infinity()) == "inf");
    CHECK(std::stod(io::format_double(0.1 + 0.2)) == 0.1 + 0.2);
    CHECK(io::csv({"t", "f"}, {{0.0, 1.0}, {0.25, 2.0}}) == "t,f\n0,1\n0.25,2\n");
  }

  TEST_CASE("atomic write leaves no temp file") {
    const auto dir = fs::temp_directory_path() / "fluctruin_io_test";
    fs::create_directories(dir);
    const auto f = dir / "out.json";
    io::write_json(f.string(), nlohmann::json{{"a", 1}});
    io::write_json(f.string(), nlohmann::json{{"a", 2}});
    CHECK(nlohmann::json::parse(slurp(f))["a"] == 2);
    int n = 0;
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) ++n;
    CHECK(n == 1);
    fs::remove_all(dir);
  }
}
