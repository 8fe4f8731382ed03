#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "commands.hpp"
#include "config.hpp"
#include "doctest.h"
#include "slm/csv.hpp"

namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("slm_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

const slmtk::Command& find(const std::string& name) {
  for (const auto& c : slmtk::commands())
    if (c.name == name) return c;
  throw std::runtime_error("no command " + name);
}

slmtk::Config config_for(const slmtk::Command& cmd) {
  auto schema = slmtk::common_keys();
  schema.insert(schema.end(), cmd.keys.begin(), cmd.keys.end());
  return slmtk::Config(schema);
}

}  // namespace

TEST_SUITE("csv_config") {

TEST_CASE("number formatting round-trips") {
  for (double v : {0.0, -0.0, 1.0, 0.1, 1.0 / 3.0, 6.02214076e23, 5e-324, -2.5e-7}) {
    const auto s = slm::format_double(v);
    double back = 1.0;
    std::from_chars(s.data(), s.data() + s.size(), back);
    CHECK(back == v);
  }
  CHECK(slm::format_double(0.1) == "0.1");
  CHECK(slm::format_double(std::numeric_limits<double>::quiet_NaN()) == "nan");
  CHECK(slm::format_double(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(slm::format_double(-std::numeric_limits<double>::infinity()) == "-inf");
}

TEST_CASE("CSV writer") {
  slm::CsvWriter w({"a", "b,c"});
  w.row({1, 0.5});
  w.row({std::string("x\"y"), "line\nbreak"});
  CHECK(w.str() == "a,\"b,c\"\r\n1,0.5\r\n\"x\"\"y\",\"line\nbreak\"\r\n");
  CHECK_THROWS_AS(w.row({1}), std::invalid_argument);
}

TEST_CASE("atomic file write") {
  const auto dir = scratch("atomic");
  slm::write_file_atomic(dir / "f.txt", "one");
  slm::write_file_atomic(dir / "f.txt", "two");
  CHECK(slurp(dir / "f.txt") == "two");
  CHECK_FALSE(fs::exists(dir / "f.txt.tmp"));
}

TEST_CASE("config typing, files and precedence") {
  slmtk::Config c({{"n", slmtk::KeyType::Int, "3", ""},
                   {"x", slmtk::KeyType::Real, "0.5", ""},
                   {"flag", slmtk::KeyType::Bool, "false", ""},
                   {"prior", slmtk::KeyType::Prior, "gaussian:0,1", ""},
                   {"name", slmtk::KeyType::Text, "out", ""}});
  CHECK(c.get_int("n") == 3);
  CHECK_FALSE(c.is_set("n"));
  CHECK_THROWS_AS(c.set("n", "3.5", "--set"), slmtk::ConfigError);
  CHECK_THROWS_AS(c.set("x", "abc", "--set"), slmtk::ConfigError);
  CHECK_THROWS_AS(c.set("flag", "yes", "--set"), slmtk::ConfigError);
  CHECK_THROWS_AS(c.set("prior", "bg:0,1,2", "--set"), slmtk::ConfigError);
  CHECK_THROWS_AS(c.set("missing", "1", "--set"), slmtk::ConfigError);
  CHECK_THROWS_AS(c.get_int("missing"), slmtk::ConfigError);

  const auto dir = scratch("config");
  {
    std::ofstream f(dir / "run.cfg");
    f << "# comment\n n = 7  \n\nx=1e-3 # trailing\nprior = bg:0,1e6,0.2\n";
  }
  c.load_file(dir / "run.cfg");
  CHECK(c.get_int("n") == 7);
  CHECK(c.is_set("n"));
  CHECK(c.get_real("x") == 1e-3);
  CHECK(c.get_prior("prior").kind() == slm::PriorKind::BernoulliGaussian);
  c.set("n", "9", "--set");
  CHECK(c.get_int("n") == 9);
  CHECK(c.entries().front() == std::pair<std::string, std::string>{"n", "9"});

  {
    std::ofstream f(dir / "bad.cfg");
    f << "n = 1\nx 2\n";
  }
  try {
    c.load_file(dir / "bad.cfg");
    FAIL("expected a ConfigError");
  } catch (const slmtk::ConfigError& e) {
    CHECK(std::string(e.what()).find("bad.cfg:2") != std::string::npos);
  }
  CHECK_THROWS_AS(c.load_file(dir / "absent.cfg"), slmtk::ConfigError);
}

TEST_CASE("every command has a unique name and well-typed defaults") {
  std::set<std::string> names;
  for (const auto& cmd : slmtk::commands()) {
    CHECK(names.insert(cmd.name).second);
    auto cfg = config_for(cmd);
    for (const auto& [k, v] : cfg.entries()) CHECK_NOTHROW(cfg.set(k, v, "default"));
  }
  CHECK(names.size() == 10);
}

TEST_CASE("commands are deterministic and reject bad values") {
  const auto& cmd = find("oracle-compare");
  auto cfg = config_for(cmd);
  cfg.set("trials", "3", "test");
  std::string first;
  for (int rep = 0; rep < 2; ++rep) {
    slmtk::RunContext ctx;
    ctx.out_dir = scratch("cmd" + std::to_string(rep));
    cmd.run(cfg, ctx);
    CHECK(ctx.artifacts.size() == 2);
    const auto s = slurp(ctx.out_dir / "oracle_trials.csv");
    if (rep == 0) first = s;
    else CHECK(s == first);
    CHECK(ctx.results["max_weight_sum_deviation"].get<double>() < 1e-10);
  }

  slmtk::RunContext ctx;
  ctx.out_dir = scratch("bad");
  cfg.set("N", "25", "test");
  CHECK_THROWS_AS(cmd.run(cfg, ctx), slmtk::ConfigError);
  cfg.set("N", "12", "test");
  cfg.set("damping", "1.5", "test");
  CHECK_THROWS_AS(cmd.run(cfg, ctx), slmtk::ConfigError);

  auto sc = config_for(find("scalar-curve"));
  sc.set("s_lo", "-1", "test");
  CHECK_THROWS_AS(find("scalar-curve").run(sc, ctx), slmtk::ConfigError);
}

TEST_CASE("roc: the operating point after the jump detects better") {
  const auto& cmd = find("roc");
  auto cfg = config_for(cmd);
  slmtk::RunContext ctx;
  ctx.out_dir = scratch("roc");
  cmd.run(cfg, ctx);
  CHECK(ctx.artifacts.size() == 4);
  for (const std::string family : {"gaussian", "slm"}) {
    CAPTURE(family);
    CHECK(ctx.results["auc_" + family + "_B"].get<double>() > ctx.results["auc_" + family + "_A"].get<double>());
  }
  CHECK(ctx.results["replica_mmse_A"].get<double>() > ctx.results["replica_mmse_B"].get<double>());
}

}  // TEST_SUITE
