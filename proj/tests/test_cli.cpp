#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::string tool_path() {
  const char* p = std::getenv("FBMTOOL");
  REQUIRE_MESSAGE(p != nullptr, "FBMTOOL must point at the driver binary");
  return p;
}

struct Scratch {
  fs::path dir;

  Scratch() {
    static int counter = 0;
    dir = fs::temp_directory_path() /
          ("fbm_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(dir);
  }
  ~Scratch() {
    std::error_code ec;
    fs::remove_all(dir, ec);
  }

  std::string path(const std::string& name) const { return (dir / name).string(); }

  std::string config(const std::string& name, const json& j) {
    std::ofstream out(path(name));
    out << j.dump(2) << '\n';
    return path(name);
  }
};

struct RunResult {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const std::string& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

RunResult run_tool(const Scratch& s, const std::string& args) {
  static int n = 0;
  std::string out_file = s.path("stdout_" + std::to_string(n) + ".txt");
  std::string err_file = s.path("stderr_" + std::to_string(n) + ".txt");
  ++n;
  std::string cmd =
      "\"" + tool_path() + "\" " + args + " >" + out_file + " 2>" + err_file;
  int rc = std::system(cmd.c_str());
  RunResult res;
  res.code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  res.out = slurp(out_file);
  res.err = slurp(err_file);
  return res;
}

json read_json(const std::string& p) {
  std::ifstream in(p);
  REQUIRE_MESSAGE(in.good(), "missing artifact " << p);
  return json::parse(in);
}

json base_fbm(double h, double horizon, int steps, int paths = 1) {
  return json{{"h", h}, {"horizon", horizon}, {"steps", steps}, {"paths", paths}};
}

std::vector<std::string> digests(const json& manifest) {
  std::vector<std::string> out;
  for (const auto& o : manifest.at("outputs")) out.push_back(o.at("fnv1a64"));
  return out;
}

}  // namespace

TEST_CASE("classify labels the singular pair and records constants") {
  Scratch s;
  auto cfg = s.config("c.json", {{"schema_version", 1},
                                 {"seed", 2024},
                                 {"classify", {{"h", 0.25}, {"alpha", -0.5}}}});
  auto r = run_tool(s, "classify --config " + cfg + " --out " + s.path("out"));
  CHECK(r.code == 0);

  auto cls = read_json(s.path("out/classification.json"));
  CHECK(cls.at("scaling") == "subcritical");
  CHECK(cls.at("wellposedness") == "strong");

  auto man = read_json(s.path("out/manifest.json"));
  CHECK(man.at("subcommand") == "classify");
  CHECK(man.at("config").at("seed") == 2024);
  const auto& constants = man.at("config").at("constants");
  CHECK(constants.at("c_h").get<double>() == doctest::Approx(0.645998).epsilon(1e-5));
  CHECK(constants.at("gronwall_mu").get<double>() == 1.8);
  CHECK(digests(man).size() == 1);
  CHECK(digests(man)[0].size() == 16);
}

TEST_CASE("reruns and thread counts reproduce identical artifacts") {
  Scratch s;
  auto cfg = s.config("c.json", {{"schema_version", 1},
                                 {"seed", 7},
                                 {"fbm", base_fbm(0.25, 1.0, 32, 3)}});
  auto r1 = run_tool(s, "sample-fbm --config " + cfg + " --out " + s.path("a"));
  auto r2 = run_tool(s, "sample-fbm --config " + cfg + " --out " + s.path("b"));
  auto r3 = run_tool(s, "sample-fbm --config " + cfg + " --out " + s.path("c") + " --threads 2");
  CHECK(r1.code == 0);
  CHECK(r2.code == 0);
  CHECK(r3.code == 0);
  for (const char* name : {"fbm_0000.csv", "fbm_0002.csv", "summary.json", "manifest.json"}) {
    CAPTURE(name);
    CHECK(slurp(s.path(std::string("a/") + name)) == slurp(s.path(std::string("b/") + name)));
    CHECK(slurp(s.path(std::string("a/") + name)) == slurp(s.path(std::string("c/") + name)));
  }
  CHECK(digests(read_json(s.path("a/manifest.json"))) ==
        digests(read_json(s.path("c/manifest.json"))));
}

TEST_CASE("unknown config keys are rejected by name") {
  Scratch s;
  auto fbm = base_fbm(0.25, 1.0, 32);
  fbm["stepz"] = 64;
  auto cfg = s.config("c.json", {{"schema_version", 1}, {"fbm", fbm}});
  auto r = run_tool(s, "sample-fbm --config " + cfg + " --out " + s.path("out"));
  CHECK(r.code == 1);
  auto diag = json::parse(r.err);
  CHECK(diag.at("error").at("category") == "validation");
  CHECK(diag.at("error").at("exit_code") == 1);
  CHECK(diag.at("error").at("message").get<std::string>().find("stepz") != std::string::npos);

  auto cfg2 = s.config("c2.json",
                       {{"schema_version", 1}, {"fbm", base_fbm(0.25, 1.0, 32)}, {"extra", 1}});
  auto r2 = run_tool(s, "sample-fbm --config " + cfg2 + " --out " + s.path("out2"));
  CHECK(r2.code == 1);
  CHECK(r2.err.find("extra") != std::string::npos);
}

TEST_CASE("config misuse yields validation diagnostics") {
  Scratch s;
  auto missing = run_tool(s, "solve --config " + s.path("absent.json") + " --out " + s.path("o1"));
  CHECK(missing.code == 1);
  CHECK(json::parse(missing.err).at("error").at("category") == "validation");

  std::ofstream(s.path("broken.json")) << "{ not json";
  auto broken = run_tool(s, "solve --config " + s.path("broken.json") + " --out " + s.path("o2"));
  CHECK(broken.code == 1);

  auto no_config = run_tool(s, "solve --out " + s.path("o3"));
  CHECK(no_config.code == 1);
  CHECK(no_config.err.find("--config") != std::string::npos);

  auto no_sub = run_tool(s, "--out " + s.path("o4"));
  CHECK(no_sub.code == 1);

  auto vers = s.config("v.json", {{"schema_version", 2}, {"fbm", base_fbm(0.25, 1.0, 32)}});
  auto bad_version = run_tool(s, "sample-fbm --config " + vers + " --out " + s.path("o5"));
  CHECK(bad_version.code == 1);
  CHECK(bad_version.err.find("schema_version") != std::string::npos);

  auto help = run_tool(s, "--help");
  CHECK(help.code == 0);
  CHECK(help.out.find("sample-fbm") != std::string::npos);
}

TEST_CASE("overflowing dynamics exit with the numerical code") {
  Scratch s;
  auto cfg = s.config("c.json", {{"schema_version", 1},
                                 {"seed", 5},
                                 {"fbm", base_fbm(0.25, 1.0, 64)},
                                 {"u", {{"lambda", 32.0}}},
                                 {"solve", {{"x0", {1.7976931348623157e308}}}}});
  auto r = run_tool(s, "solve --config " + cfg + " --out " + s.path("out"));
  CHECK(r.code == 2);
  auto diag = json::parse(r.err);
  CHECK(diag.at("error").at("category") == "numerical");
  CHECK(diag.at("error").at("message").get<std::string>().find("non-finite") !=
        std::string::npos);
}

TEST_CASE("an emitted manifest replays byte-identically") {
  Scratch s;
  auto cfg = s.config("c.json", {{"schema_version", 1},
                                 {"seed", 11},
                                 {"fbm", base_fbm(0.25, 1.0, 64)},
                                 {"drift", {{"alpha", -0.5}, {"j", 4}, {"amplitude", 0.5}, {"seed", 3}}},
                                 {"u", {{"lambda", 1.0}}},
                                 {"solve", {{"x0", {0.4}}}}});
  auto r1 = run_tool(s, "solve --config " + cfg + " --out " + s.path("a"));
  CHECK(r1.code == 0);
  auto r2 = run_tool(s, "solve --config " + s.path("a/manifest.json") + " --out " + s.path("b"));
  CHECK(r2.code == 0);
  CHECK(slurp(s.path("a/solution.csv")) == slurp(s.path("b/solution.csv")));
  CHECK(digests(read_json(s.path("a/manifest.json"))) ==
        digests(read_json(s.path("b/manifest.json"))));

  auto wrong = run_tool(s, "classify --config " + s.path("a/manifest.json") + " --out " + s.path("c"));
  CHECK(wrong.code == 1);
  CHECK(wrong.err.find("solve") != std::string::npos);
}

TEST_CASE("drift specs reload from emitted files") {
  Scratch s;
  json solve_cfg{{"schema_version", 1},
                 {"seed", 11},
                 {"fbm", base_fbm(0.25, 1.0, 64)},
                 {"drift", {{"alpha", -0.5}, {"j", 4}, {"amplitude", 0.5}, {"seed", 3}}},
                 {"u", {{"lambda", 1.0}}},
                 {"solve", {{"x0", {0.4}}}}};
  auto r1 = run_tool(s, "solve --config " + s.config("a.json", solve_cfg) + " --out " + s.path("a"));
  CHECK(r1.code == 0);

  solve_cfg["drift"] = json{{"file", s.path("a/drift.json")}};
  auto r2 = run_tool(s, "solve --config " + s.config("b.json", solve_cfg) + " --out " + s.path("b"));
  CHECK(r2.code == 0);
  CHECK(slurp(s.path("a/solution.csv")) == slurp(s.path("b/solution.csv")));
  CHECK(slurp(s.path("a/drift.json")) == slurp(s.path("b/drift.json")));

  solve_cfg["drift"]["alpha"] = -0.5;  // inline keys next to "file"
  auto r3 = run_tool(s, "solve --config " + s.config("c.json", solve_cfg) + " --out " + s.path("c"));
  CHECK(r3.code == 1);
  CHECK(r3.err.find("file") != std::string::npos);
}

TEST_CASE("the seed flag overrides the config seed") {
  Scratch s;
  auto cfg = s.config("c.json", {{"schema_version", 1},
                                 {"seed", 2024},
                                 {"fbm", base_fbm(0.25, 1.0, 32)}});
  auto base = run_tool(s, "sample-fbm --config " + cfg + " --out " + s.path("a"));
  auto over = run_tool(s, "sample-fbm --config " + cfg + " --out " + s.path("b") + " --seed 999");
  auto again = run_tool(s, "sample-fbm --config " + cfg + " --out " + s.path("c") + " --seed 999");
  CHECK(base.code == 0);
  CHECK(over.code == 0);
  CHECK(again.code == 0);
  CHECK(slurp(s.path("a/fbm_0000.csv")) != slurp(s.path("b/fbm_0000.csv")));
  CHECK(slurp(s.path("b/fbm_0000.csv")) == slurp(s.path("c/fbm_0000.csv")));
  CHECK(read_json(s.path("b/manifest.json")).at("config").at("seed") == 999);
}

TEST_CASE("ergodic-run histogram mass matches the sample count") {
  Scratch s;
  auto cfg = s.config("c.json",
                      {{"schema_version", 1},
                       {"seed", 21},
                       {"fbm", base_fbm(0.25, 1.0, 64)},
                       {"u", {{"lambda", 1.0}}},
                       {"ergodic",
                        {{"t_total", 30.0}, {"burn_in", 2.0}, {"thinning", 8}, {"bins", 16},
                         {"box", 3.0}, {"export_samples", true}}}});
  auto r = run_tool(s, "ergodic-run --config " + cfg + " --out " + s.path("out"));
  CHECK(r.code == 0);
  auto rep = read_json(s.path("out/report.json"));
  auto count = rep.at("count").get<long>();
  CHECK(count > 100);
  CHECK(rep.at("stationarity_l1").get<double>() < 0.6);
  CHECK(rep.at("holder_exponent").get<double>() == doctest::Approx(0.2));

  std::istringstream hist(slurp(s.path("out/histogram.csv")));
  std::string line;
  REQUIRE(std::getline(hist, line));
  CHECK(line == "bin_lo_1,bin_hi_1,count");
  long mass = 0, rows = 0;
  while (std::getline(hist, line)) {
    ++rows;
    mass += std::lround(std::strtod(line.substr(line.rfind(',') + 1).c_str(), nullptr));
  }
  CHECK(rows == 16);
  CHECK(mass == count);

  std::istringstream samples(slurp(s.path("out/samples.csv")));
  REQUIRE(std::getline(samples, line));
  CHECK(line == "t,x_1");
  long sample_rows = 0;
  while (std::getline(samples, line)) ++sample_rows;
  CHECK(sample_rows == count);
}

TEST_CASE("couple and tightness emit contraction diagnostics") {
  Scratch s;
  auto couple_cfg = s.config("cpl.json", {{"schema_version", 1},
                                          {"seed", 31},
                                          {"fbm", base_fbm(0.25, 6.0, 384, 4)},
                                          {"u", {{"lambda", 1.0}}},
                                          {"couple", {{"x0_list", {{-1.0}, {1.0}}}}}});
  auto rc = run_tool(s, "couple --config " + couple_cfg + " --out " + s.path("cp"));
  CHECK(rc.code == 0);
  auto crep = read_json(s.path("cp/report.json"));
  CHECK(crep.at("pairs") == 1);
  CHECK(crep.at("initial")[0].get<double>() == 2.0);
  CHECK(crep.at("median_ratio").get<double>() < 0.1);

  auto tight_cfg = s.config("tgt.json", {{"schema_version", 1},
                                         {"seed", 41},
                                         {"fbm", base_fbm(0.25, 1.0, 64)},
                                         {"u", {{"lambda", 1.0}}},
                                         {"tightness",
                                          {{"t_total", 6.0}, {"paths", 4},
                                           {"kappas", {0.01, 0.05}}}}});
  auto rt = run_tool(s, "tightness --config " + tight_cfg + " --out " + s.path("tg"));
  CHECK(rt.code == 0);
  auto trep = read_json(s.path("tg/report.json"));
  CHECK(trep.at("gamma").get<double>() == doctest::Approx(0.2));
  CHECK(trep.at("kappa0").get<double>() > 0.0);
  CHECK(trep.at("stable").size() == 2);

  std::istringstream table(slurp(s.path("tg/table.csv")));
  std::string line;
  REQUIRE(std::getline(table, line));
  CHECK(line == "window_start,kappa,value");
  long rows = 0;
  while (std::getline(table, line)) ++rows;
  CHECK(rows == trep.at("windows").get<long>() * 2);
}

TEST_CASE("girsanov weights stay near unit mean for small drift") {
  Scratch s;
  auto cfg = s.config("g.json",
                      {{"schema_version", 1},
                       {"seed", 51},
                       {"fbm", base_fbm(0.25, 0.25, 64)},
                       {"drift", {{"alpha", -0.5}, {"j", 2}, {"amplitude", 0.3}, {"seed", 9}}},
                       {"u", {{"lambda", 0.5}}},
                       {"girsanov", {{"paths", 128}}}});
  auto r = run_tool(s, "girsanov --config " + cfg + " --out " + s.path("out"));
  CHECK(r.code == 0);
  auto rep = read_json(s.path("out/report.json"));
  CHECK(std::abs(rep.at("mean_weight").get<double>() - 1.0) <
        5.0 * rep.at("mean_weight_se").get<double>() + 1e-3);
  CHECK(rep.at("novikov_unstable") == false);
  CHECK(rep.at("paths") == 128);

  std::istringstream weights(slurp(s.path("out/weights.csv")));
  std::string line;
  REQUIRE(std::getline(weights, line));
  CHECK(line == "path,w12_norm2,weight");
  long rows = 0;
  while (std::getline(weights, line)) ++rows;
  CHECK(rows == 128);

  auto high = s.config("h.json", {{"schema_version", 1},
                                  {"fbm", base_fbm(0.75, 0.25, 64)},
                                  {"u", {{"lambda", 0.5}}}});
  auto bad = run_tool(s, "girsanov --config " + high + " --out " + s.path("o2"));
  CHECK(bad.code == 1);
}

TEST_CASE("verify runs the module property suites") {
  Scratch s;
  auto all = run_tool(s, "verify all --out " + s.path("v") + " --seed 1");
  CHECK(all.code == 0);
  auto rep = read_json(s.path("v/verify_all.json"));
  CHECK(rep.at("passed") == true);
  CHECK(rep.at("checks").size() >= 30);
  CHECK(all.out.find("[pass]") != std::string::npos);
  CHECK(all.out.find("[FAIL]") == std::string::npos);

  auto single = run_tool(s, "verify rng --out " + s.path("v2"));
  CHECK(single.code == 0);
  CHECK(read_json(s.path("v2/verify_rng.json")).at("suite") == "rng");

  auto unknown = run_tool(s, "verify bogus --out " + s.path("v3"));
  CHECK(unknown.code == 1);
  CHECK(unknown.err.find("bogus") != std::string::npos);
}

TEST_CASE("json format emits structured tables") {
  Scratch s;
  auto cfg = s.config("c.json", {{"schema_version", 1},
                                 {"seed", 7},
                                 {"fbm", base_fbm(0.25, 1.0, 32, 1)}});
  auto r = run_tool(s, "sample-fbm --config " + cfg + " --out " + s.path("out") + " --format json");
  CHECK(r.code == 0);
  auto table = read_json(s.path("out/fbm_0000.json"));
  CHECK(table.at("header")[0] == "t");
  CHECK(table.at("rows").size() == 33);
  auto man = read_json(s.path("out/manifest.json"));
  CHECK(man.at("outputs")[0].at("file") == "fbm_0000.json");

  auto bad = run_tool(s, "sample-fbm --config " + cfg + " --out " + s.path("o2") + " --format xml");
  CHECK(bad.code == 1);
}
