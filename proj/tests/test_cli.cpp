#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "json.hpp"
#include "sface/config.hpp"

// End-to-end checks against the built binary (SFACE_BIN) and the bundled
// fixtures (SFACE_DATA_DIR).

namespace {

std::string bin() {
  const char* b = std::getenv("SFACE_BIN");
  REQUIRE(b != nullptr);
  return b;
}

std::string data_dir() {
  const char* d = std::getenv("SFACE_DATA_DIR");
  REQUIRE(d != nullptr);
  return d;
}

int run(const std::string& args, const std::string& stdout_path) {
  const std::string cmd = bin() + " " + args + " > " + stdout_path + " 2> " +
                          stdout_path + ".err";
  const int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

const std::string kEstimateArgs =
    " --schema exposure=smoke,outcome=y,covariates=x1+x2 --combo s,s --boot 40 --seed 7";

}  // namespace

TEST_CASE("estimate produces a full report on the bundled fixture") {
  const std::string out = "/tmp/sface_cli_est.json";
  const int rc = run("estimate --data " + data_dir() + "/fixture_n200.csv" + kEstimateArgs, out);
  CHECK(rc == 0);
  const nlohmann::json doc = nlohmann::json::parse(slurp(out));
  CHECK(doc["command"] == "estimate");
  CHECK(doc["data"]["n"] == 200);
  std::set<std::string> estimands;
  for (const auto& row : doc["estimates"])
    estimands.insert(row["estimand"].get<std::string>() + "/" +
                     row["scale"].get<std::string>() + "/" +
                     row["method"].get<std::string>());
  // every requested estimand/scale/method combination is populated
  for (const std::string& m : {"stand", "iptw", "dr"})
    for (const std::string& s : {"diff", "rr"})
      for (const std::string& e : {"sface1", "sface2", "theta", "te1", "te2"})
        CHECK(estimands.contains(e + "/" + s + "/" + m));
  CHECK(estimands.contains("cond1/diff/stand"));
  CHECK(estimands.contains("cond2/diff/stand"));
}

TEST_CASE("estimate is byte-identical across reruns and thread counts") {
  const std::string base = "estimate --data " + data_dir() + "/fixture_n200.csv" + kEstimateArgs;
  run(base, "/tmp/sface_cli_a.json");
  run(base, "/tmp/sface_cli_b.json");
  CHECK(slurp("/tmp/sface_cli_a.json") == slurp("/tmp/sface_cli_b.json"));
  run(base + " --threads 1", "/tmp/sface_cli_t1.json");
  run(base + " --threads 2", "/tmp/sface_cli_t2.json");
  CHECK(slurp("/tmp/sface_cli_t1.json") == slurp("/tmp/sface_cli_t2.json"));
  CHECK(slurp("/tmp/sface_cli_a.json") == slurp("/tmp/sface_cli_t2.json"));
}

TEST_CASE("estimate with missingness weighting consumes the case-only columns") {
  const std::string args = "estimate --data " + data_dir() +
                           "/fixture_missing_n400.csv --schema "
                           "exposure=smoke,outcome=y,covariates=x1+x2,missing=severity "
                           "--combo s,s --boot 30 --seed 3";
  const int rc = run(args, "/tmp/sface_cli_miss.json");
  CHECK(rc == 0);
  const nlohmann::json doc = nlohmann::json::parse(slurp("/tmp/sface_cli_miss.json"));
  CHECK(doc["missingness"]["n_unknown_removed"].get<int>() > 0);
}

TEST_CASE("exit code 2 for configuration errors") {
  CHECK(run("estimate --data " + data_dir() + "/fixture_n200.csv --schema exposure=smoke,outcome=y "
            "--method dr --boot 20 --seed 1",
            "/tmp/sface_cli_cfg.err") == 2);  // DR without covariates
  CHECK(run("profiles --combo q,s", "/tmp/sface_cli_combo.err") == 2);
  CHECK(run("estimate --data " + data_dir() + "/fixture_n200.csv --schema "
            "exposure=smoke,outcome=y,covariates=x1+x2 --method bogus",
            "/tmp/sface_cli_meth.err") == 2);
}

TEST_CASE("exit code 3 for data errors") {
  CHECK(run("estimate --data /nonexistent.csv" + kEstimateArgs, "/tmp/sface_cli_nofile.err") == 3);
  std::ofstream bad("/tmp/sface_cli_bad.csv");
  bad << "smoke,y,x1,x2\n0,3,1,1\n";
  bad.close();
  CHECK(run("estimate --data /tmp/sface_cli_bad.csv" + kEstimateArgs,
            "/tmp/sface_cli_badcode.err") == 3);
}

TEST_CASE("exit code 4 for fit failures") {
  // exposure perfectly separated by x1
  std::ofstream sep("/tmp/sface_cli_sep.csv");
  sep << "smoke,y,x1,x2\n";
  for (int i = 0; i < 30; ++i)
    sep << (i % 2) << ',' << (i % 3) << ',' << (i % 2) << ',' << 0.1 * i << '\n';
  sep.close();
  CHECK(run("estimate --data /tmp/sface_cli_sep.csv" + kEstimateArgs,
            "/tmp/sface_cli_sep.err") == 4);
}

TEST_CASE("sensitivity emits the grid CSV and the boundary file") {
  const std::string args =
      "sensitivity --data " + data_dir() + "/fixture_n200.csv --schema "
      "exposure=smoke,outcome=y,covariates=x1+x2 --combo d,s --method stand "
      "--scale diff --lambda1 0:0.1:0.05 --lambda2 0 --boot 25 --seed 5 "
      "--boundary --out /tmp/sface_cli_grid.csv";
  CHECK(run(args, "/tmp/sface_cli_grid.out") == 0);
  const std::string csv = slurp("/tmp/sface_cli_grid.csv");
  int lines = 0;
  for (char c : csv)
    if (c == '\n') ++lines;
  CHECK(lines == 1 + 3 * 3);  // header + 3 cells x 3 estimands
  const nlohmann::json boundary =
      nlohmann::json::parse(slurp("/tmp/sface_cli_grid.csv.boundary.json"));
  CHECK(boundary.is_array());
  CHECK(boundary.size() == 3);

  // reruns are byte-identical
  CHECK(run(args, "/tmp/sface_cli_grid.out") == 0);
  CHECK(slurp("/tmp/sface_cli_grid.csv") == csv);
}

TEST_CASE("simulate produces a deterministic metrics table") {
  const std::string args =
      "simulate --study I --n 1500 --sims 4 --boot 10 --seed 1 --n-mc 100000";
  run(args, "/tmp/sface_cli_sim_a.csv");
  run(args, "/tmp/sface_cli_sim_b.csv");
  const std::string a = slurp("/tmp/sface_cli_sim_a.csv");
  CHECK(a == slurp("/tmp/sface_cli_sim_b.csv"));
  int lines = 0;
  for (char c : a)
    if (c == '\n') ++lines;
  CHECK(lines == 1 + 24);  // header + the study's estimand rows
}

TEST_CASE("profiles text table lists the feasible set") {
  run("profiles --combo s,s --format csv", "/tmp/sface_cli_prof.txt");
  const std::string text = slurp("/tmp/sface_cli_prof.txt");
  int yes = 0;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line))
    if (line.find("yes") != std::string::npos) ++yes;
  CHECK(yes == 5);
  CHECK(run("profiles --combo d,d --observed 0,1,0 --format json",
            "/tmp/sface_cli_prof2.json") == 0);
  const nlohmann::json doc = nlohmann::json::parse(slurp("/tmp/sface_cli_prof2.json"));
  CHECK(doc["compatible"] == nlohmann::json::array({5, 7}));
}

TEST_CASE("config file keys mirror flags, with flags taking precedence") {
  std::ofstream cfg("/tmp/sface_cli.conf");
  cfg << "# fixture analysis\n"
      << "data = " << data_dir() << "/fixture_n200.csv\n"
      << "schema = exposure=smoke,outcome=y,covariates=x1+x2\n"
      << "combo = s,s\n"
      << "boot = 40\n"
      << "seed = 99\n";
  cfg.close();
  run("estimate --config /tmp/sface_cli.conf --seed 7", "/tmp/sface_cli_cfg.json");
  run("estimate --data " + data_dir() + "/fixture_n200.csv" + kEstimateArgs,
      "/tmp/sface_cli_flags.json");
  CHECK(slurp("/tmp/sface_cli_cfg.json") == slurp("/tmp/sface_cli_flags.json"));

  std::ofstream bad("/tmp/sface_cli_bad.conf");
  bad << "bogus-key = 1\n";
  bad.close();
  CHECK(run("estimate --config /tmp/sface_cli_bad.conf", "/tmp/sface_cli_badcfg.err") == 2);
}

TEST_CASE("every config key appears as a documented flag and vice versa") {
  for (const char* cmd : {"estimate", "sensitivity", "simulate", "profiles"}) {
    run(std::string(cmd) + " --help", "/tmp/sface_cli_help.txt");
    const std::string help = slurp("/tmp/sface_cli_help.txt");

    std::set<std::string> help_flags;
    size_t pos = 0;
    while ((pos = help.find("--", pos)) != std::string::npos) {
      size_t end = pos + 2;
      while (end < help.size() && (std::isalnum(help[end]) || help[end] == '-')) ++end;
      help_flags.insert(help.substr(pos + 2, end - pos - 2));
      pos = end;
    }
    help_flags.erase("help");
    help_flags.erase("config");

    std::set<std::string> registry;
    for (const sface::ConfigKey& key : sface::config_registry()) registry.insert(key.key);
    CHECK(help_flags == registry);
  }
}

TEST_CASE("replicate values can be dumped for external diagnostics") {
  const std::string args = "estimate --data " + data_dir() + "/fixture_n200.csv" +
                           kEstimateArgs +
                           " --dump-replicates /tmp/sface_cli_reps.csv --out /dev/null";
  CHECK(run(args, "/tmp/sface_cli_reps.out") == 0);
  const std::string dump = slurp("/tmp/sface_cli_reps.csv");
  CHECK(dump.find("replicate,estimand,scale,method,value") == 0);
  int lines = 0;
  for (char c : dump)
    if (c == '\n') ++lines;
  // 40 replicates for each populated estimand row
  const nlohmann::json doc = nlohmann::json::parse(slurp("/tmp/sface_cli_est.json"));
  CHECK(lines == 1 + 40 * static_cast<int>(doc["estimates"].size()));
}

TEST_CASE("SFACE_THREADS is honoured as the default worker count") {
  const std::string base = "estimate --data " + data_dir() + "/fixture_n200.csv" + kEstimateArgs;
  const std::string cmd = "SFACE_THREADS=1 " + bin() + " " + base +
                          " > /tmp/sface_cli_env.json 2> /dev/null";
  REQUIRE(WEXITSTATUS(std::system(cmd.c_str())) == 0);
  run(base + " --threads 2", "/tmp/sface_cli_thr.json");
  CHECK(slurp("/tmp/sface_cli_env.json") == slurp("/tmp/sface_cli_thr.json"));
}
