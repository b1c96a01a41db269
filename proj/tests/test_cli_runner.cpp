#include <doctest.h>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "htp/config.hpp"
#include "htp/reports.hpp"
#include "htp/runner.hpp"
#include "htp/suites.hpp"

using namespace htp;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path scratch(const std::string& name) {
  const auto d = fs::temp_directory_path() / ("htp_cli_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

const char* k_potential_cfg = R"(# simple walk potential
[law]
family = simple_pm1

[task]
name = potential
x_grid = 0..10

[output]
path = OUT
seed = 7

[tolerance]
abs = 1e-9
)";

std::string with_out(std::string cfg, const std::string& out) { return cfg.replace(cfg.find("OUT"), 3, out); }

}  // namespace

TEST_CASE("config text round trip") {
  const auto c = ExperimentConfig::parse(with_out(k_potential_cfg, "/tmp/x.csv"));
  CHECK(c.law.at("family") == "simple_pm1");
  CHECK(c.task == "potential");
  CHECK(c.param("x_grid") == "0..10");
  CHECK(c.param("method", "fourier") == "fourier");
  CHECK(c.seed == 7);
  CHECK(c.output == "/tmp/x.csv");
  CHECK(c.tolerance.at("abs") == "1e-9");
  const auto back = ExperimentConfig::parse(c.to_text());
  CHECK(back == c);
  CHECK(back.to_text() == c.to_text());
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(ExperimentConfig::parse("[law]\nfamily = simple_pm1\ncolour = red\n[task]\nname = potential\n"),
                  ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::parse("[law]\nfamily = simple_pm1\n[task]\nname = potential\nwidth = 3\n"),
                  ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::parse("[weird]\nx = 1\n"), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::parse("[law]\nfamily = a\nfamily = b\n"), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::parse("family = simple_pm1\n"), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::parse("[law]\nfamily = simple_pm1\n[task]\nname = dance\n"), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::parse("[law]\nfile = l.json\nalpha = 1.5\n[task]\nname = potential\n"), ConfigError);
}

TEST_CASE("grid parsing") {
  CHECK(parse_int_grid("0..4") == std::vector<std::int64_t>{0, 1, 2, 3, 4});
  CHECK(parse_int_grid("-4..4:4") == std::vector<std::int64_t>{-4, 0, 4});
  CHECK(parse_int_grid("3, -1,7") == std::vector<std::int64_t>{3, -1, 7});
  CHECK(parse_int_grid("").empty());
  CHECK(parse_real_grid("0.5,1e-3") == std::vector<double>{0.5, 1e-3});
  CHECK_THROWS(parse_int_grid("1..x"));
}

TEST_CASE("potential task writes a(x) = x for the simple walk") {
  const auto dir = scratch("potential");
  const auto out = (dir / "pot.csv").string();
  const auto cfg = ExperimentConfig::parse(with_out(k_potential_cfg, out));
  std::ostringstream so, se;
  CHECK(run_and_report(cfg, so, se) == exit_ok);
  CHECK(so.str().rfind("potential: 11 points", 0) == 0);
  const auto text = slurp(out);
  std::istringstream lines(text);
  std::string line;
  std::getline(lines, line);
  CHECK(line.rfind(std::string("# ") + k_tool_version + " law=", 0) == 0);
  CHECK(line.find("seed=7") != std::string::npos);
  std::getline(lines, line);
  CHECK(line == "x,a,abar,b_plus,b_minus,err");
  int rows = 0;
  while (std::getline(lines, line)) {
    const auto comma = line.find(',');
    const double x = std::stod(line.substr(0, comma));
    const double a = std::stod(line.substr(comma + 1));
    CHECK(a == doctest::Approx(x).epsilon(1e-9));
    ++rows;
  }
  CHECK(rows == 11);
  // idempotent rerun
  std::ostringstream so2, se2;
  CHECK(run_and_report(cfg, so2, se2) == exit_ok);
  CHECK(slurp(out) == text);
}

TEST_CASE("error exits") {
  std::ostringstream so, se;
  auto cfg = ExperimentConfig::parse("[law]\nfamily = simple_pm1\n[task]\nname = potential\nx_grid =\n");
  CHECK(run_and_report(cfg, so, se) == exit_error);
  CHECK(se.str().find("empty x-grid") != std::string::npos);

  auto rep = ExperimentConfig::parse("[task]\nname = reproduce\nsuite = nonexistent\n");
  rep.output = (scratch("bad_suite") / "r.json").string();
  CHECK(run(rep, se).status == exit_error);

  auto missing = ExperimentConfig::parse("[law]\nfile = /nonexistent/law.json\n[task]\nname = ladder\n");
  CHECK(run(missing, se).status == exit_error);

  auto bad_event = ExperimentConfig::parse("[law]\nfamily = simple_pm1\n[task]\nname = simulate\nevent = race(hit:3)\n");
  CHECK(run(bad_event, se).status == exit_error);
  CHECK_THROWS(suite_criteria("nonexistent"));
}

TEST_CASE("conditions task on the sparse law") {
  const auto dir = scratch("conditions");
  auto cfg = ExperimentConfig::parse("[law]\nfamily = sparse_spectrum\nn_max = 4\n[task]\nname = conditions\n");
  cfg.output = (dir / "c.json").string();
  std::ostringstream so, se;
  REQUIRE(run_and_report(cfg, so, se) == exit_ok);
  const auto j = nlohmann::json::parse(slurp(cfg.output));
  CHECK(j["header"].get<std::string>().rfind(k_tool_version, 0) == 0);
  // c/m swings between near 0 and 1
  CHECK(j["c_over_m_min"].get<double>() < 0.4);
  CHECK(j["c_over_m_max"].get<double>() > 0.99);
}

TEST_CASE("simulate and exit-prob tasks") {
  const auto dir = scratch("sim");
  auto cfg = ExperimentConfig::parse(
      "[law]\nfamily = simple_pm1\n[task]\nname = simulate\nevent = race(hit:10, hit:0) from 3\nreplicas = 20000\n");
  cfg.output = (dir / "s.json").string();
  std::ostringstream so, se;
  CHECK(run_and_report(cfg, so, se) == exit_ok);
  const auto j = nlohmann::json::parse(slurp(cfg.output));
  CHECK(std::abs(j["mc_estimate"].get<double>() - 0.3) < 4 * j["mc_se"].get<double>());

  // a step budget of 5 cannot finish most races: flagged
  cfg.params["budget"] = "5";
  CHECK(run(cfg, se).status == exit_flagged);

  auto ex = ExperimentConfig::parse("[law]\nfamily = simple_pm1\n[task]\nname = exit-prob\nx = 3\ny = 10\n");
  ex.output = (dir / "e.json").string();
  CHECK(run(ex, se).status == exit_ok);
  const auto e = nlohmann::json::parse(slurp(ex.output));
  CHECK(e["exact"].get<double>() == doctest::Approx(0.3).epsilon(1e-9));
  CHECK(e["mc_estimate"].is_null());
}

TEST_CASE("ladder and functionals tasks") {
  const auto dir = scratch("ladder");
  auto cfg = ExperimentConfig::parse("[law]\nfamily = simple_pm1\n[task]\nname = ladder\nhorizon = 16\n");
  cfg.output = (dir / "l.csv").string();
  std::ostringstream so, se;
  CHECK(run(cfg, se).status == exit_ok);
  const auto text = slurp(cfg.output);
  CHECK(text.find("\nx,P_Z_gt,u_as,V_ds,ell_plus,ell_minus\n") != std::string::npos);

  auto f = ExperimentConfig::parse(
      "[law]\nfamily = stable_attraction\nalpha = 1.5\np = 0.3\n[task]\nname = functionals\nx_grid = 1,10\nt_grid = 0.1\n");
  f.output = (dir / "f.csv").string();
  CHECK(run(f, se).status == exit_ok);
  CHECK(slurp(f.output).find("t,re_psi") != std::string::npos);
}

TEST_CASE("law from a json file") {
  const auto dir = scratch("lawfile");
  const auto law = make_builtin({Family::sparse_spectrum});
  {
    std::ofstream(dir / "law.json") << law.to_json();
  }
  const auto l = law_from_config({{"file", (dir / "law.json").string()}});
  CHECK(l->hash() == law.hash());
}
